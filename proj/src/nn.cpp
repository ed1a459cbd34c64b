#include "grass/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "grass/error.hpp"

namespace grass {

namespace {

constexpr NodeType kNodeTypes[] = {NodeType::Clause, NodeType::PosLit, NodeType::NegLit};
constexpr Relation kRelations[] = {Relation::PosToClause, Relation::NegToClause,
                                   Relation::ClauseToPos, Relation::ClauseToNeg,
                                   Relation::PosToNeg,    Relation::NegToPos};

const char* type_name(NodeType t) {
  switch (t) {
    case NodeType::Clause: return "clause";
    case NodeType::PosLit: return "poslit";
    case NodeType::NegLit: return "neglit";
  }
  return "?";
}

std::vector<double> to_double(const Tensor& t) {
  return {t.data.begin(), t.data.end()};
}

// out[n x b] += x[n x a] * w[a x b]
void matmul_acc(const double* x, std::size_t n, std::size_t a, const double* w,
                std::size_t b, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out + i * b;
    const double* xi = x + i * a;
    for (std::size_t k = 0; k < a; ++k) {
      const double xik = xi[k];
      if (xik == 0.0) continue;
      const double* wk = w + k * b;
      for (std::size_t j = 0; j < b; ++j) o[j] += xik * wk[j];
    }
  }
}

// dw[a x b] += x[n x a]^T * dy[n x b]
void matmul_tn_acc(const double* x, std::size_t n, std::size_t a, const double* dy,
                   std::size_t b, double* dw) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * a;
    const double* di = dy + i * b;
    for (std::size_t k = 0; k < a; ++k) {
      const double xik = xi[k];
      if (xik == 0.0) continue;
      double* wk = dw + k * b;
      for (std::size_t j = 0; j < b; ++j) wk[j] += xik * di[j];
    }
  }
}

std::vector<double> transpose(const std::vector<double>& w, std::size_t a, std::size_t b) {
  std::vector<double> t(a * b);
  for (std::size_t k = 0; k < a; ++k)
    for (std::size_t j = 0; j < b; ++j) t[j * a + k] = w[k * b + j];
  return t;
}

Matrix features_as_matrix(const FeatureMatrix& f) {
  Matrix m(f.rows, f.cols);
  std::copy(f.data.begin(), f.data.end(), m.data.begin());
  return m;
}

void check_graph(const LiteralClauseGraph& g, const ModelParameters& p) {
  for (const auto t : kNodeTypes) {
    const auto& w = p.tensor(p.embed_weight(t));
    if (g.features(t).cols != w.dims[0]) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string(type_name(t)) + " features have width " +
                      std::to_string(g.features(t).cols) + ", model expects " +
                      std::to_string(w.dims[0]));
    }
  }
  if (g.n_clauses == 0 || g.n_vars == 0) {
    throw Error(ErrorCode::EmptyGraph, "graph has a node type with no nodes");
  }
}

// Number of relations with at least one incoming edge at each destination.
std::vector<std::uint32_t> present_relations(const LiteralClauseGraph& g, NodeType dst) {
  std::vector<std::uint32_t> count(g.type_size(dst), 0);
  for (const auto r : kRelations) {
    if (relation_target(r) != dst) continue;
    const auto& adj = g.adjacency(r);
    for (std::size_t i = 0; i < count.size(); ++i) {
      if (adj.in_degree[i] > 0) ++count[i];
    }
  }
  return count;
}

}  // namespace

// ---------------------------------------------------------------- parameters

ModelParameters::ModelParameters(const ModelConfig& cfg)
    : cfg_(cfg), schema_hash_(feature_schema_hash()) {
  if (cfg.hidden == 0 || cfg.num_solvers == 0) {
    throw Error(ErrorCode::InvalidArgument, "hidden width and solver count must be positive");
  }
  const auto dims = feature_dims(cfg.feature_mode);
  const auto h = static_cast<std::uint32_t>(cfg.hidden);
  const auto k = static_cast<std::uint32_t>(cfg.num_solvers);
  auto add = [&](std::string name, std::vector<std::uint32_t> d) {
    std::size_t n = 1;
    for (auto x : d) n *= x;
    tensors_.push_back(Tensor{std::move(name), std::move(d), std::vector<float>(n, 0.0f)});
  };
  for (const auto t : kNodeTypes) {
    const auto in = static_cast<std::uint32_t>(dims[static_cast<std::size_t>(t)]);
    add(std::string("embed.") + type_name(t) + ".W", {in, h});
    add(std::string("embed.") + type_name(t) + ".b", {h});
  }
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string prefix = "conv." + std::to_string(l) + ".";
    if (cfg.homogeneous) {
      add(prefix + "shared.W", {h, h});
    } else {
      for (const auto r : kRelations) add(prefix + relation_name(r) + ".W", {h, h});
    }
    for (const auto t : kNodeTypes) add(prefix + type_name(t) + ".b", {h});
  }
  add("head.W", {3 * h, k});
  add("head.b", {k});
}

ModelParameters ModelParameters::zeros(const ModelConfig& cfg) {
  return ModelParameters(cfg);
}

ModelParameters ModelParameters::initialize(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParameters p(cfg);
  std::mt19937_64 rng(seed);
  // Biases share the fan-in of the weight matrix they belong to.
  std::size_t fan_in = 1;
  for (auto& t : p.tensors_) {
    if (t.dims.size() == 2) fan_in = t.dims[0];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : t.data) x = static_cast<float>(dist(rng));
  }
  return p;
}

std::size_t ModelParameters::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.data.size();
  return n;
}

std::size_t ModelParameters::conv_weight(std::size_t layer, Relation r) const {
  const std::size_t base = 2 * kNumNodeTypes + layer * (convs_per_layer() + kNumNodeTypes);
  return base + (cfg_.homogeneous ? 0 : static_cast<std::size_t>(r));
}

std::size_t ModelParameters::conv_bias(std::size_t layer, NodeType t) const {
  const std::size_t base = 2 * kNumNodeTypes + layer * (convs_per_layer() + kNumNodeTypes);
  return base + convs_per_layer() + static_cast<std::size_t>(t);
}

Gradients Gradients::zeros_like(const ModelParameters& p) {
  Gradients g;
  g.tensors.reserve(p.tensors().size());
  for (const auto& t : p.tensors()) g.tensors.emplace_back(t.data.size(), 0.0);
  return g;
}

void Gradients::set_zero() {
  for (auto& t : tensors) std::fill(t.begin(), t.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& dst = tensors[i];
    const auto& src = other.tensors[i];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

void Gradients::scale(double s) {
  for (auto& t : tensors)
    for (auto& x : t) x *= s;
}

std::size_t SolverDistribution::argmax() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return best;
}

void Tape::clear() {
  graph = nullptr;
  params = nullptr;
  activations.clear();
  pooled.clear();
  output = {};
  valid = false;
}

// ------------------------------------------------------------------- forward

NodeEmbeddings embed(const LiteralClauseGraph& g, const ModelParameters& p) {
  check_graph(g, p);
  const std::size_t h = p.config().hidden;
  NodeEmbeddings out;
  for (const auto t : kNodeTypes) {
    const auto& f = g.features(t);
    const auto w = to_double(p.tensor(p.embed_weight(t)));
    const auto& b = p.tensor(p.embed_bias(t)).data;
    Matrix x = features_as_matrix(f);
    Matrix& y = out.of(t);
    y = Matrix(f.rows, h);
    for (std::size_t i = 0; i < f.rows; ++i) {
      auto r = y.row(i);
      for (std::size_t j = 0; j < h; ++j) r[j] = b[j];
    }
    matmul_acc(x.data.data(), f.rows, f.cols, w.data(), h, y.data.data());
  }
  return out;
}

NodeEmbeddings hetero_conv_layer(const LiteralClauseGraph& g, const NodeEmbeddings& in,
                                 std::size_t layer, const ModelParameters& p) {
  const std::size_t h = p.config().hidden;
  if (layer >= p.config().layers) {
    throw Error(ErrorCode::InvalidArgument, "layer index out of range");
  }
  for (const auto t : kNodeTypes) {
    if (in.of(t).cols != h || in.of(t).rows != g.type_size(t)) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::string("embedding shape mismatch for ") + type_name(t));
    }
  }

  // Per-destination relation sums, combined by mean over present relations.
  NodeEmbeddings acc;
  for (const auto t : kNodeTypes) acc.of(t) = Matrix(g.type_size(t), h);

  for (const auto r : kRelations) {
    const NodeType src = relation_source(r);
    const NodeType dst = relation_target(r);
    const auto& adj = g.adjacency(r);
    const auto w = to_double(p.tensor(p.conv_weight(layer, r)));
    const Matrix& xs = in.of(src);
    Matrix y(xs.rows, h);
    matmul_acc(xs.data.data(), xs.rows, h, w.data(), h, y.data.data());
    Matrix& a = acc.of(dst);
    for (std::size_t i = 0; i < a.rows; ++i) {
      auto ai = a.row(i);
      for (std::uint32_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
        const double nrm = adj.norm[e];
        const auto yj = y.row(adj.sources[e]);
        for (std::size_t c = 0; c < h; ++c) ai[c] += nrm * yj[c];
      }
    }
  }

  NodeEmbeddings out;
  for (const auto t : kNodeTypes) {
    const auto count = present_relations(g, t);
    const auto& b = p.tensor(p.conv_bias(layer, t)).data;
    Matrix& o = out.of(t);
    o = std::move(acc.of(t));
    for (std::size_t i = 0; i < o.rows; ++i) {
      auto oi = o.row(i);
      const double inv = count[i] > 0 ? 1.0 / count[i] : 0.0;
      for (std::size_t c = 0; c < h; ++c) {
        const double pre = b[c] + oi[c] * inv;
        oi[c] = pre > 0.0 ? pre : 0.0;
      }
    }
  }
  return out;
}

SolverDistribution readout(const NodeEmbeddings& x, const ModelParameters& p,
                           std::vector<double>* pooled_out) {
  const std::size_t h = p.config().hidden;
  const std::size_t k = p.config().num_solvers;
  std::vector<double> pooled(3 * h, 0.0);
  for (const auto t : kNodeTypes) {
    const Matrix& m = x.of(t);
    if (m.rows == 0) {
      throw Error(ErrorCode::EmptyGraph,
                  std::string("no ") + type_name(t) + " nodes to pool");
    }
    if (m.cols != h) throw Error(ErrorCode::DimensionMismatch, "embedding width mismatch");
    double* dst = pooled.data() + static_cast<std::size_t>(t) * h;
    for (std::size_t i = 0; i < m.rows; ++i) {
      const auto r = m.row(i);
      for (std::size_t c = 0; c < h; ++c) dst[c] += r[c];
    }
    const double inv = 1.0 / static_cast<double>(m.rows);
    for (std::size_t c = 0; c < h; ++c) dst[c] *= inv;
  }

  const auto w = to_double(p.tensor(p.head_weight()));
  const auto& b = p.tensor(p.head_bias()).data;
  SolverDistribution out;
  out.logits.assign(b.begin(), b.end());
  matmul_acc(pooled.data(), 1, 3 * h, w.data(), k, out.logits.data());

  const double mx = *std::max_element(out.logits.begin(), out.logits.end());
  out.probs.resize(k);
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    out.probs[i] = std::exp(out.logits[i] - mx);
    z += out.probs[i];
  }
  for (auto& q : out.probs) q /= z;
  if (pooled_out) *pooled_out = std::move(pooled);
  return out;
}

SolverDistribution forward(const LiteralClauseGraph& g, const ModelParameters& p, Tape* tape) {
  if (tape) tape->clear();
  NodeEmbeddings x = embed(g, p);
  std::vector<NodeEmbeddings> acts;
  if (tape) acts.reserve(p.config().layers + 1);
  for (std::size_t l = 0; l < p.config().layers; ++l) {
    NodeEmbeddings next = hetero_conv_layer(g, x, l, p);
    if (tape) acts.push_back(std::move(x));
    x = std::move(next);
  }
  std::vector<double> pooled;
  SolverDistribution out = readout(x, p, &pooled);
  if (tape) {
    acts.push_back(std::move(x));
    tape->graph = &g;
    tape->params = &p;
    tape->activations = std::move(acts);
    tape->pooled = std::move(pooled);
    tape->output = out;
    tape->valid = true;
  }
  return out;
}

// ------------------------------------------------------------------ backward

Gradients backward(const LiteralClauseGraph& g, const ModelParameters& p, const Tape& tape,
                   std::span<const double> dloss_dprobs) {
  if (!tape.valid || tape.graph != &g || tape.params != &p ||
      tape.activations.size() != p.config().layers + 1) {
    throw Error(ErrorCode::StaleTape, "backward() requires a forward pass of the same graph and parameters");
  }
  const std::size_t h = p.config().hidden;
  const std::size_t k = p.config().num_solvers;
  if (dloss_dprobs.size() != k) {
    throw Error(ErrorCode::DimensionMismatch, "upstream gradient has wrong length");
  }
  Gradients grads = Gradients::zeros_like(p);

  // Softmax and head.
  const auto& probs = tape.output.probs;
  double dot = 0.0;
  for (std::size_t i = 0; i < k; ++i) dot += probs[i] * dloss_dprobs[i];
  std::vector<double> dlogits(k);
  for (std::size_t i = 0; i < k; ++i) dlogits[i] = probs[i] * (dloss_dprobs[i] - dot);

  auto& dhw = grads.tensors[p.head_weight()];
  auto& dhb = grads.tensors[p.head_bias()];
  for (std::size_t i = 0; i < k; ++i) dhb[i] += dlogits[i];
  matmul_tn_acc(tape.pooled.data(), 1, 3 * h, dlogits.data(), k, dhw.data());
  const auto head_t = transpose(to_double(p.tensor(p.head_weight())), 3 * h, k);
  std::vector<double> dpooled(3 * h, 0.0);
  matmul_acc(dlogits.data(), 1, k, head_t.data(), 3 * h, dpooled.data());

  // Mean pooling.
  NodeEmbeddings dx;
  for (const auto t : kNodeTypes) {
    Matrix& m = dx.of(t);
    m = Matrix(g.type_size(t), h);
    const double inv = 1.0 / static_cast<double>(m.rows);
    const double* src = dpooled.data() + static_cast<std::size_t>(t) * h;
    for (std::size_t i = 0; i < m.rows; ++i) {
      auto r = m.row(i);
      for (std::size_t c = 0; c < h; ++c) r[c] = src[c] * inv;
    }
  }

  // Convolution layers, last to first.
  for (std::size_t l = p.config().layers; l-- > 0;) {
    const NodeEmbeddings& in = tape.activations[l];
    const NodeEmbeddings& out = tape.activations[l + 1];
    NodeEmbeddings dpre;  // already divided by the present-relation count
    for (const auto t : kNodeTypes) {
      const auto count = present_relations(g, t);
      auto& db = grads.tensors[p.conv_bias(l, t)];
      Matrix& d = dpre.of(t);
      d = std::move(dx.of(t));
      const Matrix& o = out.of(t);
      for (std::size_t i = 0; i < d.rows; ++i) {
        auto di = d.row(i);
        const auto oi = o.row(i);
        for (std::size_t c = 0; c < h; ++c) {
          if (oi[c] <= 0.0) di[c] = 0.0;
          db[c] += di[c];
        }
        const double inv = count[i] > 0 ? 1.0 / count[i] : 0.0;
        for (std::size_t c = 0; c < h; ++c) di[c] *= inv;
      }
    }
    NodeEmbeddings dnext;
    for (const auto t : kNodeTypes) dnext.of(t) = Matrix(g.type_size(t), h);
    for (const auto r : kRelations) {
      const NodeType src = relation_source(r);
      const NodeType dst = relation_target(r);
      const auto& adj = g.adjacency(r);
      const Matrix& xs = in.of(src);
      const Matrix& dd = dpre.of(dst);
      Matrix dy(xs.rows, h);
      for (std::size_t i = 0; i < dd.rows; ++i) {
        const auto di = dd.row(i);
        for (std::uint32_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
          const double nrm = adj.norm[e];
          auto yj = dy.row(adj.sources[e]);
          for (std::size_t c = 0; c < h; ++c) yj[c] += nrm * di[c];
        }
      }
      const std::size_t wi = p.conv_weight(l, r);
      matmul_tn_acc(xs.data.data(), xs.rows, h, dy.data.data(), h, grads.tensors[wi].data());
      const auto wt = transpose(to_double(p.tensor(wi)), h, h);
      matmul_acc(dy.data.data(), dy.rows, h, wt.data(), h, dnext.of(src).data.data());
    }
    dx = std::move(dnext);
  }

  // Input projections.
  for (const auto t : kNodeTypes) {
    const auto& f = g.features(t);
    const Matrix x = features_as_matrix(f);
    const Matrix& d = dx.of(t);
    auto& dw = grads.tensors[p.embed_weight(t)];
    auto& db = grads.tensors[p.embed_bias(t)];
    matmul_tn_acc(x.data.data(), x.rows, x.cols, d.data.data(), h, dw.data());
    for (std::size_t i = 0; i < d.rows; ++i) {
      const auto di = d.row(i);
      for (std::size_t c = 0; c < h; ++c) db[c] += di[c];
    }
  }
  return grads;
}

}  // namespace grass
