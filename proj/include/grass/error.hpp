#pragma once

#include <stdexcept>
#include <string>

namespace grass {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedHeader,
  InvalidToken,
  LiteralOutOfRange,
  ClauseCountMismatch,
  EmptyClause,
  DimensionMismatch,
  EmptyGraph,
  StaleTape,
  SchemaMismatch,
  BadCheckpoint,
  EmptyFold,
  MissingRuntimes,
  MissingSelection,
  MissingBinary,
  SolverCrash,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Writes "warning: <msg>" to stderr unless warnings are silenced.
void warn(const std::string& msg);
void set_warnings_enabled(bool enabled) noexcept;

}  // namespace grass
