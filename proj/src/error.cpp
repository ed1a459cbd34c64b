#include "grass/error.hpp"

#include <atomic>
#include <iostream>

namespace grass {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::InvalidToken: return "InvalidToken";
    case ErrorCode::LiteralOutOfRange: return "LiteralOutOfRange";
    case ErrorCode::ClauseCountMismatch: return "ClauseCountMismatch";
    case ErrorCode::EmptyClause: return "EmptyClause";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::StaleTape: return "StaleTape";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::EmptyFold: return "EmptyFold";
    case ErrorCode::MissingRuntimes: return "MissingRuntimes";
    case ErrorCode::MissingSelection: return "MissingSelection";
    case ErrorCode::MissingBinary: return "MissingBinary";
    case ErrorCode::SolverCrash: return "SolverCrash";
  }
  return "Unknown";
}

void warn(const std::string& msg) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << msg << '\n';
  }
}

void set_warnings_enabled(bool enabled) noexcept {
  g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

}  // namespace grass
