#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grass/cnf.hpp"

namespace grass {

inline constexpr std::size_t kClauseFeatureDim = 17;
inline constexpr std::size_t kClauseCustomDim = 7;
inline constexpr std::size_t kLiteralFeatureDim = 3;
inline constexpr std::size_t kPositionalDim = 10;
inline constexpr std::size_t kNodeTypeDim = 3;

enum class FeatureMode : std::uint8_t {
  CustomPlusPE = 0,
  CustomNoPE = 1,
  Random = 2,
  NodeTypeOneHot = 3,
};

const char* feature_mode_name(FeatureMode mode);
/// Accepts "custom_pe", "custom", "random", "node_type". Throws InvalidArgument.
FeatureMode parse_feature_mode(const std::string& name);

enum class NodeType : std::uint8_t { Clause = 0, PosLit = 1, NegLit = 2 };

/// Message-passing relations, named source -> destination.
enum class Relation : std::uint8_t {
  PosToClause = 0,
  NegToClause = 1,
  ClauseToPos = 2,
  ClauseToNeg = 3,
  PosToNeg = 4,
  NegToPos = 5,
};
inline constexpr std::size_t kNumRelations = 6;
inline constexpr std::size_t kNumNodeTypes = 3;

NodeType relation_source(Relation r);
NodeType relation_target(Relation r);
const char* relation_name(Relation r);

/// Row-major float matrix used for node features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0f) {}

  std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Incoming edges of one relation, grouped by destination node (CSR).
/// Duplicate edges (a literal repeated in a clause) appear once per occurrence.
struct RelationAdjacency {
  std::vector<std::uint32_t> offsets;  // size n_dst + 1
  std::vector<std::uint32_t> sources;  // type-local source indices
  std::vector<double> norm;            // 1/sqrt(deg(dst) * deg(src)), degrees clamped >= 1
  std::vector<std::uint32_t> in_degree;   // per destination, unclamped
  std::vector<std::uint32_t> out_degree;  // per source, unclamped

  std::size_t num_edges() const { return sources.size(); }
};

/// Tripartite literal-clause graph with per-node features. Clause nodes are
/// indexed by clause position, literal nodes by variable (0-based) within
/// their polarity type.
struct LiteralClauseGraph {
  std::uint32_t n_clauses = 0;
  std::uint32_t n_vars = 0;
  FeatureMode mode = FeatureMode::CustomPlusPE;

  /// (literal-node index per literal_node(), clause index), one per occurrence.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_lit_clause;

  FeatureMatrix clause_features;
  FeatureMatrix pos_lit_features;
  FeatureMatrix neg_lit_features;

  std::array<RelationAdjacency, kNumRelations> relations;

  std::size_t num_nodes() const { return n_clauses + 2 * std::size_t{n_vars}; }
  std::size_t num_pos_neg_edges() const { return n_vars; }
  std::size_t type_size(NodeType t) const {
    return t == NodeType::Clause ? n_clauses : n_vars;
  }
  const FeatureMatrix& features(NodeType t) const;
  const RelationAdjacency& adjacency(Relation r) const {
    return relations[static_cast<std::size_t>(r)];
  }
};

/// Input feature widths for a mode, indexed by NodeType.
std::array<std::size_t, kNumNodeTypes> feature_dims(FeatureMode mode);

/// Sinusoidal clause position code, sin/cos interleaved, base 10000.
std::array<double, kPositionalDim> positional_encoding(std::uint64_t k);

/// [degree, num_horn, pos_neg_ratio] for the literal of `var` (1-based) with
/// the given polarity. Counts are literal occurrences divided by the clause count.
std::array<double, kLiteralFeatureDim> literal_features(const CnfInstance& inst,
                                                        std::uint32_t var,
                                                        bool positive);

/// [is_horn, degree, is_binary, is_ternary, pos_frac, neg_frac, pos_neg_ratio]
/// followed by positional_encoding(clause_idx).
std::array<double, kClauseFeatureDim> clause_features(const CnfInstance& inst,
                                                      std::size_t clause_idx);

/// `seed` only affects FeatureMode::Random.
LiteralClauseGraph build_graph(const CnfInstance& inst,
                               FeatureMode mode = FeatureMode::CustomPlusPE,
                               std::uint64_t seed = 0);

/// Identifies the featurizer layout; stored in checkpoints and graph exports.
std::uint64_t feature_schema_hash();

inline constexpr int kGraphExportVersion = 1;

/// Plain-text export: header lines, a node table and an edge table.
void write_graph(const LiteralClauseGraph& g, std::ostream& out);

}  // namespace grass
