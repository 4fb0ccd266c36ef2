#pragma once

#include "blockprop/events.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>

namespace blockprop {

struct LiveStreamOptions {
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{100};
  std::chrono::seconds connect_timeout{5};
};

/// Receives each event with the resume token delivered alongside it. Return
/// false to stop consuming.
using EventSink = std::function<bool(const Event&, const std::string& cursor)>;

/// Consumes an HTTP NDJSON event stream. Each record is the replay wire format
/// plus a string `cursor` key; reconnects send `?cursor=<last token>` and the
/// server resumes strictly after that token. Events already delivered (by id)
/// are not re-delivered after a reconnect.
///
/// Returns the last cursor seen once the server ends the stream normally.
/// Throws StreamError (carrying the last good cursor) when the retry budget
/// is exhausted.
std::optional<std::string> connect_live(const std::string& endpoint, std::optional<std::string> cursor,
                                        const EventSink& sink, const LiveStreamOptions& options = {});

}  // namespace blockprop
