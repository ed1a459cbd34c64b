#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grass/graph.hpp"

namespace grass {

/// Dense row-major double matrix for activations and gradients.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Named parameter tensor. Matrices are [in, out] row-major; layers compute
/// y = x * W + b on row vectors.
struct Tensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct ModelConfig {
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t num_solvers = 0;
  FeatureMode feature_mode = FeatureMode::CustomPlusPE;
  // One convolution matrix per layer shared by all six relations.
  bool homogeneous = false;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// GNN weights: per-type input projections, per-layer per-relation
/// convolutions with per-type biases, and a linear head over the three
/// pooled node-type means.
class ModelParameters {
 public:
  ModelParameters() = default;

  /// Uniform(+-1/sqrt(fan_in)) for every weight and bias.
  static ModelParameters initialize(const ModelConfig& cfg, std::uint64_t seed);
  static ModelParameters zeros(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::uint64_t schema_hash() const { return schema_hash_; }
  void set_schema_hash(std::uint64_t h) { schema_hash_ = h; }

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  std::size_t num_scalars() const;

  // Tensor indices. In homogeneous mode conv_weight() returns the same index
  // for every relation of a layer.
  std::size_t embed_weight(NodeType t) const { return 2 * static_cast<std::size_t>(t); }
  std::size_t embed_bias(NodeType t) const { return 2 * static_cast<std::size_t>(t) + 1; }
  std::size_t conv_weight(std::size_t layer, Relation r) const;
  std::size_t conv_bias(std::size_t layer, NodeType t) const;
  std::size_t head_weight() const { return tensors_.size() - 2; }
  std::size_t head_bias() const { return tensors_.size() - 1; }

  /// Optional display names for the K solvers (stored in checkpoints).
  std::vector<std::string> solver_names;

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;

 private:
  explicit ModelParameters(const ModelConfig& cfg);
  std::size_t convs_per_layer() const { return cfg_.homogeneous ? 1 : kNumRelations; }

  ModelConfig cfg_;
  std::uint64_t schema_hash_ = 0;
  std::vector<Tensor> tensors_;
};

/// Gradient buffers laid out like ModelParameters::tensors().
struct Gradients {
  std::vector<std::vector<double>> tensors;

  static Gradients zeros_like(const ModelParameters& p);
  void set_zero();
  void add(const Gradients& other);
  void scale(double s);
};

struct NodeEmbeddings {
  Matrix clause;
  Matrix pos;
  Matrix neg;

  Matrix& of(NodeType t) {
    return t == NodeType::Clause ? clause : (t == NodeType::PosLit ? pos : neg);
  }
  const Matrix& of(NodeType t) const {
    return t == NodeType::Clause ? clause : (t == NodeType::PosLit ? pos : neg);
  }
};

struct SolverDistribution {
  std::vector<double> probs;
  std::vector<double> logits;

  /// Highest probability; lowest index on ties.
  std::size_t argmax() const;
};

/// Activations retained by forward() for backward().
struct Tape {
  const LiteralClauseGraph* graph = nullptr;
  const ModelParameters* params = nullptr;
  std::vector<NodeEmbeddings> activations;  // embed output, then each layer's output
  std::vector<double> pooled;
  SolverDistribution output;
  bool valid = false;

  void clear();
};

NodeEmbeddings embed(const LiteralClauseGraph& g, const ModelParameters& p);

NodeEmbeddings hetero_conv_layer(const LiteralClauseGraph& g,
                                 const NodeEmbeddings& in, std::size_t layer,
                                 const ModelParameters& p);

/// Mean-pools each node type, concatenates [clause; pos; neg], applies the
/// head and a softmax. `pooled_out` receives the 3h pooled vector if given.
SolverDistribution readout(const NodeEmbeddings& x, const ModelParameters& p,
                           std::vector<double>* pooled_out = nullptr);

SolverDistribution forward(const LiteralClauseGraph& g, const ModelParameters& p,
                           Tape* tape = nullptr);

/// Exact parameter gradients of a scalar loss given dLoss/dprobs. Throws
/// StaleTape unless `tape` holds a forward pass of (g, p).
Gradients backward(const LiteralClauseGraph& g, const ModelParameters& p,
                   const Tape& tape, std::span<const double> dloss_dprobs);

inline constexpr char kCheckpointMagic[4] = {'G', 'R', 'S', 'S'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(const ModelParameters& p, std::ostream& out);
ModelParameters read_checkpoint(std::istream& in);
void save_checkpoint(const ModelParameters& p, const std::string& path);
ModelParameters load_checkpoint(const std::string& path);

}  // namespace grass
