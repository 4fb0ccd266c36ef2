#include "blockprop/live_stream.hpp"

#include "blockprop/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>
#include <unordered_set>

namespace blockprop {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path without query
};

std::optional<Endpoint> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (ep.origin.size() <= scheme_end + 3) return std::nullopt;
  return ep;
}

}  // namespace

std::optional<std::string> connect_live(const std::string& endpoint, std::optional<std::string> cursor,
                                        const EventSink& sink, const LiveStreamOptions& options) {
  const auto ep = split_endpoint(endpoint);
  if (!ep) throw StreamError("invalid stream endpoint '" + endpoint + "'", cursor.value_or(""));

  std::unordered_set<std::string> delivered;
  bool stopped = false;
  int failures = 0;
  std::string last_error;

  while (true) {
    httplib::Client client(ep->origin);
    client.set_connection_timeout(options.connect_timeout);
    std::string target = ep->path;
    if (cursor) target += (target.find('?') == std::string::npos ? "?cursor=" : "&cursor=") + httplib::detail::encode_query_param(*cursor);

    const auto delivered_before = delivered.size();
    std::string pending;
    bool malformed_record = false;
    auto handle_line = [&](std::string_view line) {
      if (line.empty()) return true;
      auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
      auto it = j.is_object() ? j.find("cursor") : j.end();
      auto event = parse_event_line(line);
      if (!event || it == j.end() || !it->is_string()) {
        malformed_record = true;
        return false;
      }
      cursor = it->get<std::string>();
      if (!delivered.insert(event->id).second) return true;
      if (!sink(*event, *cursor)) {
        stopped = true;
        return false;
      }
      return true;
    };

    auto res = client.Get(target, [&](const char* data, std::size_t len) {
      pending.append(data, len);
      std::size_t start = 0;
      for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
        if (!handle_line(std::string_view(pending).substr(start, nl - start))) return false;
        start = nl + 1;
      }
      pending.erase(0, start);
      return true;
    });

    if (stopped) return cursor;
    if (malformed_record) throw StreamError("stream delivered a malformed record", cursor.value_or(""));
    if (res && res->status == 200) {
      if (!pending.empty()) handle_line(pending);
      return cursor;
    }
    if (delivered.size() > delivered_before) failures = 0;
    last_error = res ? "HTTP status " + std::to_string(res->status) : httplib::to_string(res.error());
    if (++failures > options.max_retries)
      throw StreamError("stream failed after " + std::to_string(options.max_retries) + " retries: " + last_error,
                        cursor.value_or(""));
    std::this_thread::sleep_for(options.retry_backoff * failures);
  }
}

}  // namespace blockprop
