#include "blockprop/events.hpp"

#include "blockprop/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace blockprop {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kEventKindCount> kKindNames = {"post", "reply", "repost", "like", "follow", "block"};

bool read_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

bool needs_subject(EventKind k) { return k != EventKind::Post; }

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::string_view to_string(EventAction action) { return action == EventAction::Create ? "create" : "delete"; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::optional<EventAction> parse_event_action(std::string_view s) {
  if (s == "create") return EventAction::Create;
  if (s == "delete") return EventAction::Delete;
  return std::nullopt;
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!read_digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !read_digits(s, 5, 2, mo) || s[7] != '-' ||
      !read_digits(s, 8, 2, d))
    return std::nullopt;
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  if (!read_digits(s, 11, 2, h) || s[13] != ':' || !read_digits(s, 14, 2, mi) || s[16] != ':' ||
      !read_digits(s, 17, 2, sec))
    return std::nullopt;
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    std::int64_t scale = 100000;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      micros += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  minutes offset{0};
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' || !read_digits(s, pos + 4, 2, om))
      return std::nullopt;
    offset = hours{oh} + minutes{om};
    if (s[pos] == '-') offset = -offset;
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - offset;
  return time_point_cast<microseconds>(tp) + microseconds{micros};
}

std::string format_rfc3339(Timestamp ts) {
  using namespace std::chrono;
  const auto dp = floor<days>(ts);
  const year_month_day ymd{dp};
  const hh_mm_ss hms{ts - dp};
  char buf[40];
  const auto frac = hms.subseconds().count();
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()), static_cast<long long>(frac));
  }
  return buf;
}

EventLog::EventLog(std::vector<Event> events, TimeWindow window) : window_(window) {
  std::erase_if(events, [&](const Event& e) { return !window.contains(e.ts); });
  // Payload comparison is the last resort tie-break so that two records
  // sharing (ts, id) resolve independently of input order.
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    if (a.id != b.id) return a.id < b.id;
    return to_ndjson_line(a) < to_ndjson_line(b);
  });
  std::unordered_set<std::string_view> seen;
  seen.reserve(events.size());
  events_.reserve(events.size());
  for (auto& e : events) {
    if (seen.contains(e.id)) {
      ++duplicates_;
      continue;
    }
    events_.push_back(std::move(e));
    seen.insert(events_.back().id);
  }
}

std::optional<Event> parse_event_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;

  auto get_string = [&](const char* key) -> const std::string* {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return nullptr;
    return it->get_ptr<const std::string*>();
  };
  auto get_optional_string = [&](const char* key, std::optional<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return true;
    if (!it->is_string()) return false;
    out = it->get<std::string>();
    return true;
  };
  auto get_string_list = [&](const char* key, std::vector<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return true;
    if (!it->is_array()) return false;
    for (const auto& v : *it) {
      if (!v.is_string()) return false;
      out.push_back(v.get<std::string>());
    }
    return true;
  };

  const auto* id = get_string("id");
  const auto* kind = get_string("kind");
  const auto* action = get_string("action");
  const auto* actor = get_string("actor");
  const auto* ts = get_string("ts");
  if (!id || !kind || !action || !actor || !ts || id->empty() || actor->empty()) return std::nullopt;

  Event e;
  e.id = *id;
  const auto k = parse_event_kind(*kind);
  const auto a = parse_event_action(*action);
  const auto t = parse_rfc3339(*ts);
  if (!k || !a || !t) return std::nullopt;
  e.kind = *k;
  e.action = *a;
  e.actor = *actor;
  e.ts = *t;
  if (!get_optional_string("subject", e.subject) || !get_optional_string("ref", e.ref) ||
      !get_optional_string("text", e.text) || !get_string_list("langs", e.langs) || !get_string_list("urls", e.urls))
    return std::nullopt;

  if (auto it = j.find("tox"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) return std::nullopt;
    ToxicityVector tox{};
    for (std::size_t d = 0; d < kToxicityDimensions.size(); ++d) {
      auto v = it->find(std::string(kToxicityDimensions[d]));
      if (v == it->end() || !v->is_number()) return std::nullopt;
      tox[d] = v->get<double>();
      if (!(tox[d] >= 0.0 && tox[d] <= 1.0)) return std::nullopt;
    }
    e.tox = tox;
  }

  // A post carrying a parent reference is a reply.
  if (e.kind == EventKind::Post && e.ref && e.action == EventAction::Create) e.kind = EventKind::Reply;

  if (e.action == EventAction::Create && needs_subject(e.kind) && !e.subject) return std::nullopt;
  if (e.action == EventAction::Delete && e.text) return std::nullopt;
  if (e.text && !e.is_original_post()) return std::nullopt;
  if (e.is_original_post() && !e.text) e.text = std::string{};
  return e;
}

ReplayResult parse_replay(std::istream& in, TimeWindow window) {
  if (!in) throw IngestError("replay stream is not readable");
  ReplayResult result;
  std::vector<Event> events;
  std::string line;
  std::size_t in_window_total = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.stats.lines;
    auto e = parse_event_line(line);
    if (!e) {
      ++result.stats.malformed;
      continue;
    }
    if (!window.contains(e->ts)) {
      ++result.stats.out_of_window;
      continue;
    }
    ++in_window_total;
    events.push_back(std::move(*e));
  }
  if (in.bad()) throw IngestError("read failure while reading replay stream");
  if (result.stats.lines > 0 && 2 * result.stats.malformed > result.stats.lines)
    throw CorruptInputError(std::to_string(result.stats.malformed) + " of " + std::to_string(result.stats.lines) +
                            " lines are malformed; input is probably not the NDJSON event format");
  result.log = EventLog(std::move(events), window);
  result.stats.duplicates = in_window_total - result.log.size();
  return result;
}

ReplayResult parse_replay_file(const std::string& path, TimeWindow window) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open replay file '" + path + "'");
  return parse_replay(in, window);
}

std::string to_ndjson_line(const Event& e) {
  // ordered_json keeps insertion order, which is the canonical key order.
  nlohmann::ordered_json j;
  j["id"] = e.id;
  j["kind"] = to_string(e.kind);
  j["action"] = to_string(e.action);
  j["actor"] = e.actor;
  j["ts"] = format_rfc3339(e.ts);
  if (e.subject) j["subject"] = *e.subject;
  if (e.ref) j["ref"] = *e.ref;
  if (e.text) j["text"] = *e.text;
  if (!e.langs.empty()) j["langs"] = e.langs;
  if (!e.urls.empty()) j["urls"] = e.urls;
  if (e.tox) {
    nlohmann::ordered_json t;
    for (std::size_t d = 0; d < kToxicityDimensions.size(); ++d) t[std::string(kToxicityDimensions[d])] = (*e.tox)[d];
    j["tox"] = std::move(t);
  }
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_ndjson(const EventLog& log, std::ostream& out) {
  for (const auto& e : log.events()) out << to_ndjson_line(e) << '\n';
}

ActivitySummary summarize(const EventLog& log) {
  using namespace std::chrono;
  ActivitySummary s;
  std::unordered_set<std::string_view> users;
  for (const auto& e : log.events()) {
    const auto k = static_cast<std::size_t>(e.kind);
    (e.action == EventAction::Create ? s.creates : s.deletes)[k] += 1;
    users.insert(e.actor);
    if (e.subject) users.insert(*e.subject);
  }
  s.unique_users = users.size();

  sys_days first{}, last{};
  const auto& w = log.window();
  if (w.bounded()) {
    first = floor<days>(w.start);
    last = floor<days>(w.end - microseconds{1});
  } else if (!log.empty()) {
    first = floor<days>(log.events().front().ts);
    last = floor<days>(log.events().back().ts);
  } else {
    return s;
  }
  if (last < first) return s;
  const auto n_days = static_cast<std::size_t>((last - first).count() + 1);
  s.daily.resize(n_days);
  for (std::size_t i = 0; i < n_days; ++i) s.daily[i].day = first + days{static_cast<int>(i)};
  for (const auto& e : log.events()) {
    if (e.action != EventAction::Create) continue;
    const auto idx = (floor<days>(e.ts) - first).count();
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_days) continue;
    s.daily[static_cast<std::size_t>(idx)].creates[static_cast<std::size_t>(e.kind)] += 1;
  }
  return s;
}

}  // namespace blockprop
