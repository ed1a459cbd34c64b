#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grass {

using Literal = std::int32_t;
using Clause = std::vector<Literal>;

/// A CNF formula as read from DIMACS. Clause order and literal order inside
/// each clause are kept exactly as parsed; duplicate literals are kept too.
struct CnfInstance {
  std::uint32_t num_vars = 0;
  std::vector<Clause> clauses;
  std::string source_id;

  std::size_t num_clauses() const { return clauses.size(); }
  std::size_t num_literal_occurrences() const;

  // source_id is a label and does not take part in equality.
  friend bool operator==(const CnfInstance& a, const CnfInstance& b) {
    return a.num_vars == b.num_vars && a.clauses == b.clauses;
  }
};

/// Dense literal-node index: 2*(var-1) for x, 2*(var-1)+1 for its negation.
inline std::uint32_t literal_node(Literal lit) {
  const auto var = static_cast<std::uint32_t>(lit > 0 ? lit : -lit);
  return 2 * (var - 1) + (lit < 0 ? 1u : 0u);
}

/// Throws Error{MalformedHeader | InvalidToken | LiteralOutOfRange |
/// ClauseCountMismatch | EmptyClause}.
CnfInstance parse_dimacs(std::string_view text, std::string source_id = {});
CnfInstance load_dimacs(const std::string& path);

std::string serialize_dimacs(const CnfInstance& inst);
void save_dimacs(const CnfInstance& inst, const std::string& path);

/// Checks the structural invariants; throws Error on violation.
void validate(const CnfInstance& inst);

enum class PermutationKind { ClauseShuffle, VariableShuffle };

struct PermutationSpec {
  PermutationKind kind = PermutationKind::ClauseShuffle;
  std::uint64_t seed = 0;
};

CnfInstance permute(const CnfInstance& inst, const PermutationSpec& spec);

/// Applies an explicit clause order: output clause i is input clause order[i].
CnfInstance reorder_clauses(const CnfInstance& inst,
                            std::span<const std::uint32_t> order);

/// Relabels variables: variable v becomes mapping[v-1] (1-based targets).
CnfInstance relabel_variables(const CnfInstance& inst,
                              std::span<const std::uint32_t> mapping);

}  // namespace grass
