#include "grass/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <random>
#include <string_view>

#include "grass/error.hpp"

namespace grass {

namespace {

struct LiteralCounts {
  std::vector<std::uint32_t> occurrences;  // by literal_node index
  std::vector<std::uint32_t> horn;         // occurrences inside Horn clauses
};

std::size_t count_positive(const Clause& clause) {
  return static_cast<std::size_t>(
      std::count_if(clause.begin(), clause.end(), [](Literal l) { return l > 0; }));
}

bool is_horn(const Clause& clause) { return count_positive(clause) <= 1; }

LiteralCounts count_literals(const CnfInstance& inst) {
  LiteralCounts c;
  c.occurrences.assign(2 * std::size_t{inst.num_vars}, 0);
  c.horn.assign(2 * std::size_t{inst.num_vars}, 0);
  for (const auto& clause : inst.clauses) {
    const bool horn = is_horn(clause);
    for (const Literal lit : clause) {
      const auto node = literal_node(lit);
      ++c.occurrences[node];
      if (horn) ++c.horn[node];
    }
  }
  return c;
}

std::array<double, kLiteralFeatureDim> literal_features_from_counts(
    const LiteralCounts& c, std::uint32_t var, bool positive, double m) {
  const std::size_t self = 2 * std::size_t{var - 1} + (positive ? 0 : 1);
  const std::size_t other = 2 * std::size_t{var - 1} + (positive ? 1 : 0);
  const double occ = c.occurrences[self];
  return {occ / m, c.horn[self] / m, occ / (c.occurrences[other] + 1.0)};
}

void fill_row(FeatureMatrix& m, std::size_t row, std::span<const double> values) {
  auto dst = m.row(row);
  for (std::size_t j = 0; j < values.size(); ++j) {
    dst[j] = static_cast<float>(values[j]);
  }
}

RelationAdjacency make_adjacency(
    std::size_t n_src, std::size_t n_dst,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& src_dst) {
  RelationAdjacency a;
  a.in_degree.assign(n_dst, 0);
  a.out_degree.assign(n_src, 0);
  for (const auto& [s, d] : src_dst) {
    ++a.in_degree[d];
    ++a.out_degree[s];
  }
  a.offsets.assign(n_dst + 1, 0);
  for (std::size_t d = 0; d < n_dst; ++d) {
    a.offsets[d + 1] = a.offsets[d] + a.in_degree[d];
  }
  a.sources.resize(src_dst.size());
  a.norm.resize(src_dst.size());
  std::vector<std::uint32_t> fill(a.offsets.begin(), a.offsets.end() - 1);
  // Stable in input order per destination.
  for (const auto& [s, d] : src_dst) {
    const auto slot = fill[d]++;
    a.sources[slot] = s;
    const double dd = std::max<std::uint32_t>(1, a.in_degree[d]);
    const double ds = std::max<std::uint32_t>(1, a.out_degree[s]);
    a.norm[slot] = 1.0 / std::sqrt(dd * ds);
  }
  return a;
}

}  // namespace

const char* feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::CustomPlusPE: return "custom_pe";
    case FeatureMode::CustomNoPE: return "custom";
    case FeatureMode::Random: return "random";
    case FeatureMode::NodeTypeOneHot: return "node_type";
  }
  return "unknown";
}

FeatureMode parse_feature_mode(const std::string& name) {
  for (auto m : {FeatureMode::CustomPlusPE, FeatureMode::CustomNoPE,
                 FeatureMode::Random, FeatureMode::NodeTypeOneHot}) {
    if (name == feature_mode_name(m)) return m;
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown feature mode '" + name +
                  "' (expected custom_pe, custom, random or node_type)");
}

NodeType relation_source(Relation r) {
  switch (r) {
    case Relation::PosToClause:
    case Relation::PosToNeg: return NodeType::PosLit;
    case Relation::NegToClause:
    case Relation::NegToPos: return NodeType::NegLit;
    case Relation::ClauseToPos:
    case Relation::ClauseToNeg: return NodeType::Clause;
  }
  return NodeType::Clause;
}

NodeType relation_target(Relation r) {
  switch (r) {
    case Relation::PosToClause:
    case Relation::NegToClause: return NodeType::Clause;
    case Relation::ClauseToPos:
    case Relation::NegToPos: return NodeType::PosLit;
    case Relation::ClauseToNeg:
    case Relation::PosToNeg: return NodeType::NegLit;
  }
  return NodeType::Clause;
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::PosToClause: return "poslit_clause";
    case Relation::NegToClause: return "neglit_clause";
    case Relation::ClauseToPos: return "clause_poslit";
    case Relation::ClauseToNeg: return "clause_neglit";
    case Relation::PosToNeg: return "poslit_neglit";
    case Relation::NegToPos: return "neglit_poslit";
  }
  return "unknown";
}

const FeatureMatrix& LiteralClauseGraph::features(NodeType t) const {
  switch (t) {
    case NodeType::Clause: return clause_features;
    case NodeType::PosLit: return pos_lit_features;
    case NodeType::NegLit: return neg_lit_features;
  }
  return clause_features;
}

std::array<std::size_t, kNumNodeTypes> feature_dims(FeatureMode mode) {
  if (mode == FeatureMode::NodeTypeOneHot) {
    return {kNodeTypeDim, kNodeTypeDim, kNodeTypeDim};
  }
  return {kClauseFeatureDim, kLiteralFeatureDim, kLiteralFeatureDim};
}

std::array<double, kPositionalDim> positional_encoding(std::uint64_t k) {
  std::array<double, kPositionalDim> pe{};
  const double pos = static_cast<double>(k);
  for (std::size_t i = 0; i < kPositionalDim / 2; ++i) {
    const double denom =
        std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(kPositionalDim));
    pe[2 * i] = std::sin(pos / denom);
    pe[2 * i + 1] = std::cos(pos / denom);
  }
  return pe;
}

std::array<double, kLiteralFeatureDim> literal_features(const CnfInstance& inst,
                                                        std::uint32_t var,
                                                        bool positive) {
  if (var == 0 || var > inst.num_vars) {
    throw Error(ErrorCode::InvalidArgument, "variable index out of range");
  }
  std::uint32_t self = 0, other = 0, horn = 0;
  for (const auto& clause : inst.clauses) {
    const bool h = is_horn(clause);
    for (const Literal lit : clause) {
      if (static_cast<std::uint32_t>(std::abs(lit)) != var) continue;
      if ((lit > 0) == positive) {
        ++self;
        if (h) ++horn;
      } else {
        ++other;
      }
    }
  }
  const double m = static_cast<double>(inst.num_clauses());
  return {self / m, horn / m, self / (other + 1.0)};
}

std::array<double, kClauseFeatureDim> clause_features(const CnfInstance& inst,
                                                      std::size_t clause_idx) {
  if (clause_idx >= inst.num_clauses()) {
    throw Error(ErrorCode::InvalidArgument, "clause index out of range");
  }
  const Clause& clause = inst.clauses[clause_idx];
  const double len = static_cast<double>(clause.size());
  const auto pos = static_cast<double>(count_positive(clause));
  const double neg = len - pos;
  std::array<double, kClauseFeatureDim> f{};
  f[0] = pos <= 1.0 ? 1.0 : 0.0;
  f[1] = len / inst.num_vars;
  f[2] = clause.size() == 2 ? 1.0 : 0.0;
  f[3] = clause.size() == 3 ? 1.0 : 0.0;
  f[4] = pos / len;
  f[5] = neg / len;
  f[6] = pos / (neg + 1.0);
  const auto pe = positional_encoding(clause_idx);
  std::copy(pe.begin(), pe.end(), f.begin() + kClauseCustomDim);
  return f;
}

LiteralClauseGraph build_graph(const CnfInstance& inst, FeatureMode mode,
                               std::uint64_t seed) {
  LiteralClauseGraph g;
  g.n_clauses = static_cast<std::uint32_t>(inst.num_clauses());
  g.n_vars = inst.num_vars;
  g.mode = mode;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pos_clause, neg_clause,
      clause_pos, clause_neg, pos_neg, neg_pos;
  g.edges_lit_clause.reserve(inst.num_literal_occurrences());
  for (std::uint32_t c = 0; c < g.n_clauses; ++c) {
    for (const Literal lit : inst.clauses[c]) {
      const auto v = static_cast<std::uint32_t>(std::abs(lit)) - 1;
      g.edges_lit_clause.emplace_back(literal_node(lit), c);
      (lit > 0 ? pos_clause : neg_clause).emplace_back(v, c);
    }
  }
  // Each literal's incoming clause edges end up ordered by clause index.
  for (std::uint32_t c = 0; c < g.n_clauses; ++c) {
    for (const Literal lit : inst.clauses[c]) {
      const auto v = static_cast<std::uint32_t>(std::abs(lit)) - 1;
      (lit > 0 ? clause_pos : clause_neg).emplace_back(c, v);
    }
  }
  pos_neg.reserve(g.n_vars);
  neg_pos.reserve(g.n_vars);
  for (std::uint32_t v = 0; v < g.n_vars; ++v) {
    pos_neg.emplace_back(v, v);
    neg_pos.emplace_back(v, v);
  }

  const std::size_t nc = g.n_clauses, nv = g.n_vars;
  g.relations[static_cast<std::size_t>(Relation::PosToClause)] = make_adjacency(nv, nc, pos_clause);
  g.relations[static_cast<std::size_t>(Relation::NegToClause)] = make_adjacency(nv, nc, neg_clause);
  g.relations[static_cast<std::size_t>(Relation::ClauseToPos)] = make_adjacency(nc, nv, clause_pos);
  g.relations[static_cast<std::size_t>(Relation::ClauseToNeg)] = make_adjacency(nc, nv, clause_neg);
  g.relations[static_cast<std::size_t>(Relation::PosToNeg)] = make_adjacency(nv, nv, pos_neg);
  g.relations[static_cast<std::size_t>(Relation::NegToPos)] = make_adjacency(nv, nv, neg_pos);

  const auto dims = feature_dims(mode);
  g.clause_features = FeatureMatrix(nc, dims[0]);
  g.pos_lit_features = FeatureMatrix(nv, dims[1]);
  g.neg_lit_features = FeatureMatrix(nv, dims[2]);

  switch (mode) {
    case FeatureMode::CustomPlusPE:
    case FeatureMode::CustomNoPE: {
      const double m = static_cast<double>(nc);
      const auto counts = count_literals(inst);
      for (std::uint32_t v = 1; v <= g.n_vars; ++v) {
        fill_row(g.pos_lit_features, v - 1, literal_features_from_counts(counts, v, true, m));
        fill_row(g.neg_lit_features, v - 1, literal_features_from_counts(counts, v, false, m));
      }
      for (std::size_t c = 0; c < nc; ++c) {
        auto f = clause_features(inst, c);
        if (mode == FeatureMode::CustomNoPE) {
          std::fill(f.begin() + kClauseCustomDim, f.end(), 0.0);
        }
        fill_row(g.clause_features, c, f);
      }
      break;
    }
    case FeatureMode::Random: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto* fm : {&g.clause_features, &g.pos_lit_features, &g.neg_lit_features}) {
        for (auto& x : fm->data) x = static_cast<float>(normal(rng));
      }
      break;
    }
    case FeatureMode::NodeTypeOneHot: {
      for (std::size_t c = 0; c < nc; ++c) g.clause_features.at(c, 0) = 1.0f;
      for (std::size_t v = 0; v < nv; ++v) {
        g.pos_lit_features.at(v, 1) = 1.0f;
        g.neg_lit_features.at(v, 2) = 1.0f;
      }
      break;
    }
  }
  return g;
}

std::uint64_t feature_schema_hash() {
  constexpr std::string_view schema =
      "grass-lcg/1;clause=is_horn,degree,is_binary,is_ternary,pos_frac,neg_frac,"
      "pos_neg_ratio,pe10(sin-cos,base10000,0-based);"
      "lit=degree,num_horn,pos_neg_ratio(self/(opposite+1));"
      "edges=lit-clause per occurrence,pos-neg per var";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : schema) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_graph(const LiteralClauseGraph& g, std::ostream& out) {
  out << "# grass-lcg-export " << kGraphExportVersion << '\n';
  out << "# schema_hash " << std::hex << feature_schema_hash() << std::dec << '\n';
  out << "# feature_mode " << feature_mode_name(g.mode) << '\n';
  out << "# n_clauses " << g.n_clauses << " n_vars " << g.n_vars << '\n';
  out << "nodes " << g.num_nodes() << '\n';
  out << "node_id,type,local_index,degree,features\n";
  out.precision(9);
  std::size_t id = 0;
  auto emit = [&](const FeatureMatrix& fm, const char* type, std::size_t local,
                  std::size_t degree) {
    out << id++ << ',' << type << ',' << local << ',' << degree << ',';
    const auto row = fm.row(local);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << row[j];
    }
    out << '\n';
  };
  const auto& pc = g.adjacency(Relation::PosToClause);
  const auto& nc = g.adjacency(Relation::NegToClause);
  for (std::size_t c = 0; c < g.n_clauses; ++c) {
    emit(g.clause_features, "clause", c, pc.in_degree[c] + nc.in_degree[c]);
  }
  const auto& cp = g.adjacency(Relation::ClauseToPos);
  const auto& cn = g.adjacency(Relation::ClauseToNeg);
  for (std::size_t v = 0; v < g.n_vars; ++v) emit(g.pos_lit_features, "poslit", v, cp.in_degree[v] + 1);
  for (std::size_t v = 0; v < g.n_vars; ++v) emit(g.neg_lit_features, "neglit", v, cn.in_degree[v] + 1);

  // Node ids: clauses first, then positive literals, then negative literals.
  const std::size_t pos_base = g.n_clauses;
  const std::size_t neg_base = pos_base + g.n_vars;
  out << "edges " << g.edges_lit_clause.size() + g.num_pos_neg_edges() << '\n';
  out << "src,dst,kind\n";
  for (const auto& [lit, c] : g.edges_lit_clause) {
    const std::size_t node = (lit % 2 == 0 ? pos_base : neg_base) + lit / 2;
    out << node << ',' << c << ",literal_clause\n";
  }
  for (std::size_t v = 0; v < g.n_vars; ++v) {
    out << pos_base + v << ',' << neg_base + v << ",pos_neg\n";
  }
}

}  // namespace grass
