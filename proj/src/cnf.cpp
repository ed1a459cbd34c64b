#include "grass/cnf.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "grass/error.hpp"

namespace grass {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

enum class IntParse { Ok, NotInteger, Overflow };

IntParse parse_int(std::string_view tok, std::int64_t& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc::result_out_of_range) return IntParse::Overflow;
  if (ec != std::errc{} || ptr != last || first == last) {
    return IntParse::NotInteger;
  }
  return IntParse::Ok;
}

std::int64_t header_count(std::string_view tok, const char* what) {
  std::int64_t v = 0;
  if (parse_int(tok, v) != IntParse::Ok || v <= 0 ||
      v > std::numeric_limits<Literal>::max()) {
    throw Error(ErrorCode::MalformedHeader,
                std::string("invalid ") + what + " in problem line: '" +
                    std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::size_t CnfInstance::num_literal_occurrences() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.size();
  return n;
}

CnfInstance parse_dimacs(std::string_view text, std::string source_id) {
  CnfInstance inst;
  inst.source_id = std::move(source_id);

  bool header_seen = false;
  std::int64_t declared_clauses = 0;
  Clause current;
  std::size_t line_no = 0;
  bool stop = false;

  std::size_t pos = 0;
  while (!stop && pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::size_t first = 0;
    while (first < line.size() && is_space(line[first])) ++first;
    if (first == line.size()) continue;
    if (line[first] == 'c') continue;

    if (line[first] == 'p') {
      if (header_seen) {
        throw Error(ErrorCode::MalformedHeader,
                    "duplicate problem line at line " + std::to_string(line_no));
      }
      const auto toks = split_ws(line.substr(first));
      if (toks.size() != 4 || toks[0] != "p" || toks[1] != "cnf") {
        throw Error(ErrorCode::MalformedHeader,
                    "expected 'p cnf <nvars> <nclauses>' at line " +
                        std::to_string(line_no));
      }
      inst.num_vars = static_cast<std::uint32_t>(header_count(toks[2], "variable count"));
      declared_clauses = header_count(toks[3], "clause count");
      inst.clauses.reserve(static_cast<std::size_t>(
          std::min<std::int64_t>(declared_clauses, 1 << 20)));
      header_seen = true;
      continue;
    }

    if (!header_seen) {
      throw Error(ErrorCode::MalformedHeader,
                  "clause data before problem line at line " +
                      std::to_string(line_no));
    }

    for (const auto tok : split_ws(line.substr(first))) {
      const bool past_declared =
          static_cast<std::int64_t>(inst.clauses.size()) >= declared_clauses &&
          current.empty();
      if (tok == "%") {
        warn("'%' terminator at line " + std::to_string(line_no) +
             "; ignoring the rest of the input");
        stop = true;
        break;
      }
      std::int64_t v = 0;
      const IntParse r = parse_int(tok, v);
      if (r == IntParse::NotInteger) {
        if (past_declared) {
          warn("ignoring trailing token '" + std::string(tok) + "' at line " +
               std::to_string(line_no));
          stop = true;
          break;
        }
        throw Error(ErrorCode::InvalidToken, "invalid token '" +
                                                 std::string(tok) + "' at line " +
                                                 std::to_string(line_no));
      }
      if (r == IntParse::Overflow || v > inst.num_vars ||
          -v > static_cast<std::int64_t>(inst.num_vars)) {
        throw Error(ErrorCode::LiteralOutOfRange,
                    "literal " + std::string(tok) + " out of range [1, " +
                        std::to_string(inst.num_vars) + "] at line " +
                        std::to_string(line_no));
      }
      if (v == 0) {
        if (current.empty()) {
          if (past_declared) {
            warn("ignoring stray '0' after the last clause at line " +
                 std::to_string(line_no));
            continue;
          }
          throw Error(ErrorCode::EmptyClause,
                      "empty clause at line " + std::to_string(line_no));
        }
        inst.clauses.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(static_cast<Literal>(v));
      }
    }
  }

  if (!header_seen) {
    throw Error(ErrorCode::MalformedHeader, "missing 'p cnf' problem line");
  }
  if (!current.empty()) inst.clauses.push_back(std::move(current));
  if (static_cast<std::int64_t>(inst.clauses.size()) != declared_clauses) {
    throw Error(ErrorCode::ClauseCountMismatch,
                "header declares " + std::to_string(declared_clauses) +
                    " clauses but " + std::to_string(inst.clauses.size()) +
                    " were read");
  }
  return inst;
}

CnfInstance load_dimacs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dimacs(buf.str(), path);
}

std::string serialize_dimacs(const CnfInstance& inst) {
  std::string out;
  out.reserve(16 + inst.num_literal_occurrences() * 6 + inst.clauses.size() * 2);
  out += "p cnf ";
  out += std::to_string(inst.num_vars);
  out += ' ';
  out += std::to_string(inst.clauses.size());
  out += '\n';
  char buf[16];
  for (const auto& clause : inst.clauses) {
    for (const Literal lit : clause) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, lit);
      out.append(buf, end);
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

void save_dimacs(const CnfInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << serialize_dimacs(inst);
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

void validate(const CnfInstance& inst) {
  if (inst.num_vars == 0) {
    throw Error(ErrorCode::MalformedHeader, "num_vars must be positive");
  }
  if (inst.clauses.empty()) {
    throw Error(ErrorCode::MalformedHeader, "instance has no clauses");
  }
  for (const auto& clause : inst.clauses) {
    if (clause.empty()) throw Error(ErrorCode::EmptyClause, "empty clause");
    for (const Literal lit : clause) {
      if (lit == 0 || static_cast<std::uint32_t>(std::abs(lit)) > inst.num_vars) {
        throw Error(ErrorCode::LiteralOutOfRange,
                    "literal " + std::to_string(lit) + " out of range");
      }
    }
  }
}

CnfInstance reorder_clauses(const CnfInstance& inst,
                            std::span<const std::uint32_t> order) {
  if (order.size() != inst.clauses.size()) {
    throw Error(ErrorCode::InvalidArgument, "clause order has wrong length");
  }
  std::vector<bool> seen(order.size(), false);
  CnfInstance out{inst.num_vars, {}, inst.source_id};
  out.clauses.reserve(order.size());
  for (const auto idx : order) {
    if (idx >= order.size() || seen[idx]) {
      throw Error(ErrorCode::InvalidArgument, "clause order is not a bijection");
    }
    seen[idx] = true;
    out.clauses.push_back(inst.clauses[idx]);
  }
  return out;
}

CnfInstance relabel_variables(const CnfInstance& inst,
                              std::span<const std::uint32_t> mapping) {
  if (mapping.size() != inst.num_vars) {
    throw Error(ErrorCode::InvalidArgument, "variable mapping has wrong length");
  }
  std::vector<bool> seen(mapping.size() + 1, false);
  for (const auto target : mapping) {
    if (target == 0 || target > inst.num_vars || seen[target]) {
      throw Error(ErrorCode::InvalidArgument,
                  "variable mapping is not a bijection on 1..num_vars");
    }
    seen[target] = true;
  }
  CnfInstance out{inst.num_vars, inst.clauses, inst.source_id};
  for (auto& clause : out.clauses) {
    for (auto& lit : clause) {
      const auto mapped = static_cast<Literal>(mapping[std::abs(lit) - 1]);
      lit = lit > 0 ? mapped : -mapped;
    }
  }
  return out;
}

CnfInstance permute(const CnfInstance& inst, const PermutationSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  if (spec.kind == PermutationKind::ClauseShuffle) {
    std::vector<std::uint32_t> order(inst.clauses.size());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    return reorder_clauses(inst, order);
  }
  std::vector<std::uint32_t> mapping(inst.num_vars);
  std::iota(mapping.begin(), mapping.end(), 1u);
  std::shuffle(mapping.begin(), mapping.end(), rng);
  return relabel_variables(inst, mapping);
}

}  // namespace grass
