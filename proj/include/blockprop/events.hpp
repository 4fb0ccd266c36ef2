#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blockprop {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

enum class EventKind : std::uint8_t { Post, Reply, Repost, Like, Follow, Block };
enum class EventAction : std::uint8_t { Create, Delete };

inline constexpr std::size_t kEventKindCount = 6;

/// Toxicity dimensions in wire order.
inline constexpr std::array<std::string_view, 7> kToxicityDimensions = {
    "identity_attack", "insult", "obscene", "toxicity", "severe_toxicity", "threat", "sexually_explicit"};

using ToxicityVector = std::array<double, 7>;

std::string_view to_string(EventKind kind);
std::string_view to_string(EventAction action);
std::optional<EventKind> parse_event_kind(std::string_view s);
std::optional<EventAction> parse_event_action(std::string_view s);

/// Parses an RFC 3339 date-time ("2024-06-01T12:00:00Z", optional fraction and
/// numeric offset). Returns nullopt on any syntax or range error.
std::optional<Timestamp> parse_rfc3339(std::string_view s);
/// Formats as UTC with a 'Z' suffix; the fraction is emitted only when non-zero.
std::string format_rfc3339(Timestamp ts);

struct Event {
  std::string id;
  EventKind kind = EventKind::Post;
  EventAction action = EventAction::Create;
  std::string actor;
  std::optional<std::string> subject;
  std::optional<std::string> ref;
  Timestamp ts{};
  std::optional<std::string> text;
  std::vector<std::string> langs;
  std::vector<std::string> urls;
  std::optional<ToxicityVector> tox;

  [[nodiscard]] bool is_original_post() const {
    return action == EventAction::Create && (kind == EventKind::Post || kind == EventKind::Reply);
  }
  friend bool operator==(const Event&, const Event&) = default;
};

/// Half-open UTC interval [start, end). A default-constructed window is unbounded.
struct TimeWindow {
  Timestamp start = Timestamp::min();
  Timestamp end = Timestamp::max();

  [[nodiscard]] bool contains(Timestamp t) const { return t >= start && t < end; }
  [[nodiscard]] bool bounded() const { return start != Timestamp::min() && end != Timestamp::max(); }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Immutable, time-ordered, id-unique sequence of events.
class EventLog {
 public:
  EventLog() = default;
  /// Sorts by (timestamp, id) and drops repeated ids, keeping the first in that order.
  /// Events outside the window are dropped.
  EventLog(std::vector<Event> events, TimeWindow window);

  [[nodiscard]] std::span<const Event> events() const { return events_; }
  [[nodiscard]] const TimeWindow& window() const { return window_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] bool empty() const { return events_.empty(); }
  [[nodiscard]] std::size_t duplicates_dropped() const { return duplicates_; }

 private:
  std::vector<Event> events_;
  TimeWindow window_;
  std::size_t duplicates_ = 0;
};

struct ReplayStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t out_of_window = 0;
  std::size_t duplicates = 0;
};

struct ReplayResult {
  EventLog log;
  ReplayStats stats;
};

/// Parses one NDJSON record. Returns nullopt for malformed records.
std::optional<Event> parse_event_line(std::string_view line);

/// Reads newline-delimited records. Malformed lines are skipped and counted;
/// more than half malformed raises CorruptInputError.
ReplayResult parse_replay(std::istream& in, TimeWindow window = {});
ReplayResult parse_replay_file(const std::string& path, TimeWindow window = {});

/// Canonical single-line JSON form of an event (fixed key order).
std::string to_ndjson_line(const Event& e);
void write_ndjson(const EventLog& log, std::ostream& out);

struct DailyActivity {
  std::chrono::sys_days day;
  std::array<std::uint64_t, kEventKindCount> creates{};
};

struct ActivitySummary {
  std::array<std::uint64_t, kEventKindCount> creates{};
  std::array<std::uint64_t, kEventKindCount> deletes{};
  std::uint64_t unique_users = 0;
  std::vector<DailyActivity> daily;
};

/// Per-kind create/delete totals, distinct users (actors and subjects) and a
/// zero-filled per-day series of creates over the window (or the span of the
/// events when the window is unbounded).
ActivitySummary summarize(const EventLog& log);

}  // namespace blockprop
