#include "blockprop/error.hpp"
#include "blockprop/live_stream.hpp"
#include "fixtures.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <mutex>
#include <thread>

using namespace blockprop;

namespace {

/// Serves `events` as NDJSON with cursor = position + 1. Requests with
/// ?cursor=k resume after k. The first `drops` connections are cut after
/// `cut` records.
class MockStream {
 public:
  MockStream(std::vector<Event> events, int drops, std::size_t cut) : events_(std::move(events)), drops_(drops), cut_(cut) {
    server_.Get("/stream", [this](const httplib::Request& req, httplib::Response& res) {
      std::size_t from = 0;
      if (req.has_param("cursor")) from = std::stoul(req.get_param_value("cursor"));
      const bool drop = connections_++ < drops_;
      res.set_chunked_content_provider("application/x-ndjson", [this, from, drop](std::size_t, httplib::DataSink& sink) {
        std::size_t sent = 0;
        for (std::size_t i = from; i < events_.size(); ++i) {
          if (drop && sent == cut_) return false;  // abort mid-stream
          auto j = nlohmann::ordered_json::parse(to_ndjson_line(events_[i]));
          j["cursor"] = std::to_string(i + 1);
          const auto line = j.dump() + "\n";
          sink.write(line.data(), line.size());
          std::lock_guard lock(mu_);
          emitted_.push_back(events_[i].id);
          ++sent;
        }
        sink.done();
        return true;
      });
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockStream() {
    server_.stop();
    thread_.join();
  }
  [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/stream"; }
  [[nodiscard]] int connections() const { return connections_; }

 private:
  std::vector<Event> events_;
  int drops_;
  std::size_t cut_;
  std::atomic<int> connections_{0};
  std::mutex mu_;
  std::vector<std::string> emitted_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

LiveStreamOptions fast() {
  LiveStreamOptions o;
  o.retry_backoff = std::chrono::milliseconds(1);
  o.connect_timeout = std::chrono::seconds(1);
  return o;
}

}  // namespace

TEST_CASE("live stream passes events through") {
  const auto events = fixture::random_events(5, 3, 1);
  MockStream server(events, 0, 0);
  std::vector<std::string> ids, cursors;
  const auto last = connect_live(server.url(), std::nullopt, [&](const Event& e, const std::string& c) {
    ids.push_back(e.id);
    cursors.push_back(c);
    return true;
  }, fast());
  REQUIRE(ids.size() == 5);
  CHECK(last == "5");
  CHECK(cursors.back() == "5");
  for (std::size_t i = 0; i < 5; ++i) CHECK(ids[i] == events[i].id);
}

TEST_CASE("live stream resumes without gaps or duplicates") {
  const auto events = fixture::random_events(40, 5, 2);
  MockStream server(events, 2, 7);
  std::vector<std::string> ids;
  const auto last = connect_live(server.url(), std::nullopt, [&](const Event& e, const std::string&) {
    ids.push_back(e.id);
    return true;
  }, fast());
  CHECK(server.connections() == 3);
  REQUIRE(ids.size() == events.size());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == events[i].id);
  CHECK(last == "40");
}

TEST_CASE("live stream honours a start cursor and an early stop") {
  const auto events = fixture::random_events(10, 5, 3);
  MockStream server(events, 0, 0);
  std::vector<std::string> ids;
  const auto last = connect_live(server.url(), std::string("4"), [&](const Event& e, const std::string&) {
    ids.push_back(e.id);
    return ids.size() < 3;
  }, fast());
  REQUIRE(ids.size() == 3);
  CHECK(ids.front() == events[4].id);
  CHECK(last == "7");
}

TEST_CASE("live stream errors") {
  std::size_t seen = 0;
  auto sink = [&](const Event&, const std::string&) { return ++seen, true; };
  CHECK_THROWS_AS(connect_live("not a url", std::nullopt, sink, fast()), StreamError);
  try {
    connect_live("http://127.0.0.1:1/stream", std::string("c9"), sink, fast());
    FAIL("expected a stream error");
  } catch (const StreamError& e) {
    CHECK(e.last_cursor == "c9");
  }
  CHECK(seen == 0);
}
