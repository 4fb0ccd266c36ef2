#pragma once

#include <stdexcept>
#include <string>

namespace blockprop {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unusable configuration (bad flag, unreadable config, invalid parameter).
struct ConfigError : Error {
  using Error::Error;
};

/// A pipeline stage was invoked before the stage that produces its inputs.
struct DependencyError : Error {
  using Error::Error;
};

/// Input data violates a contract (bad rows, manifest mismatch, missing scores).
struct DataError : Error {
  using Error::Error;
};

struct IngestError : DataError {
  using DataError::DataError;
};

/// Raised when most lines of a replay fail to parse, which usually means the
/// file is not NDJSON at all.
struct CorruptInputError : IngestError {
  using IngestError::IngestError;
};

struct DegenerateThresholdError : DataError {
  using DataError::DataError;
};

struct StreamError : Error {
  StreamError(const std::string& what, std::string cursor)
      : Error(what), last_cursor(std::move(cursor)) {}
  std::string last_cursor;
};

}  // namespace blockprop
