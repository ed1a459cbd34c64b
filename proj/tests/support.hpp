#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>
#include <unistd.h>

#include "grass/cnf.hpp"
#include "grass/error.hpp"

namespace grass::testing {

// Three variables, clauses (x1 v -x2), (-x1 v x2 v x3), (-x1).
inline constexpr const char* kT1 = "p cnf 3 3\n1 -2 0\n-1 2 3 0\n-1 0\n";

inline CnfInstance t1() { return parse_dimacs(kT1, "T1"); }

/// Error code thrown by fn, or nullopt when it returns normally.
template <typename Fn>
std::optional<ErrorCode> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("grass_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Random instance with distinct variables per clause.
inline CnfInstance random_instance(std::mt19937_64& rng, std::uint32_t max_vars = 30,
                                   std::size_t max_clauses = 80) {
  CnfInstance inst;
  inst.num_vars = std::uniform_int_distribution<std::uint32_t>(3, max_vars)(rng);
  const auto m = std::uniform_int_distribution<std::size_t>(2, max_clauses)(rng);
  for (std::size_t c = 0; c < m; ++c) {
    const auto len = std::uniform_int_distribution<std::uint32_t>(1, std::min(5u, inst.num_vars))(rng);
    Clause clause;
    while (clause.size() < len) {
      const auto v = static_cast<Literal>(
          std::uniform_int_distribution<std::uint32_t>(1, inst.num_vars)(rng));
      bool dup = false;
      for (const auto l : clause) dup = dup || l == v || l == -v;
      if (!dup) clause.push_back(std::bernoulli_distribution(0.5)(rng) ? v : -v);
    }
    inst.clauses.push_back(std::move(clause));
  }
  return inst;
}

struct MalformedCase {
  const char* text;
  ErrorCode code;
};

/// Curated malformed DIMACS inputs with the error class each must raise.
inline const std::vector<MalformedCase>& malformed_suite() {
  static const std::vector<MalformedCase> cases = {
      {"", ErrorCode::MalformedHeader},
      {"c only a comment\n", ErrorCode::MalformedHeader},
      {"1 2 0\np cnf 2 1\n", ErrorCode::MalformedHeader},
      {"p dnf 2 1\n1 2 0\n", ErrorCode::MalformedHeader},
      {"p cnf 2\n1 2 0\n", ErrorCode::MalformedHeader},
      {"p cnf two 1\n1 2 0\n", ErrorCode::MalformedHeader},
      {"p cnf 0 1\n1 0\n", ErrorCode::MalformedHeader},
      {"p cnf 2 0\n", ErrorCode::MalformedHeader},
      {"p cnf -2 1\n1 0\n", ErrorCode::MalformedHeader},
      {"p cnf 2 1 7\n1 0\n", ErrorCode::MalformedHeader},
      {"p cnf 2 1\np cnf 2 1\n1 0\n", ErrorCode::MalformedHeader},
      {"p cnf 2 1\n1 x 0\n", ErrorCode::InvalidToken},
      {"p cnf 2 1\n1 2.5 0\n", ErrorCode::InvalidToken},
      {"p cnf 2 1\n1 3 0\n", ErrorCode::LiteralOutOfRange},
      {"p cnf 2 1\n-3 0\n", ErrorCode::LiteralOutOfRange},
      {"p cnf 2 1\n99999999999999999999 0\n", ErrorCode::LiteralOutOfRange},
      {"p cnf 2 2\n1 2 0\n", ErrorCode::ClauseCountMismatch},
      {"p cnf 2 1\n1 0\n2 0\n", ErrorCode::ClauseCountMismatch},
      {"p cnf 2 2\n0\n1 2 0\n", ErrorCode::EmptyClause},
      {"p cnf 2 3\n1 0 0\n2 0\n", ErrorCode::EmptyClause},
  };
  return cases;
}

}  // namespace grass::testing
