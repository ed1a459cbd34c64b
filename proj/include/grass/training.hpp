#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grass/cnf.hpp"
#include "grass/dataset.hpp"
#include "grass/graph.hpp"
#include "grass/nn.hpp"

namespace grass {

/// (sum_k p_k t_k - t*)^2 for one instance. Throws DimensionMismatch.
double regret_loss(std::span<const double> probs, const RuntimeRecord& record);

/// d regret_loss / d probs.
std::vector<double> regret_loss_grad(std::span<const double> probs,
                                     const RuntimeRecord& record);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState for_params(const ModelParameters& p);
};

/// One bias-corrected Adam update, in place. Throws DimensionMismatch.
void adam_step(ModelParameters& params, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  FeatureMode feature_mode = FeatureMode::CustomPlusPE;
  bool homogeneous = false;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  // Train on log(runtime) instead of seconds.
  bool log_runtime = false;
  // 0 = hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_val_loss = 0.0;
};

/// One labeled graph. Graphs must be built with the config's feature mode.
struct TrainingExample {
  const LiteralClauseGraph* graph = nullptr;
  const RuntimeRecord* record = nullptr;
};

/// Splits `examples` into train/validation by val_fraction (seeded), runs
/// Adam on the mean regret loss with early stopping and returns the
/// parameters with the best validation loss.
TrainResult fit(std::span<const TrainingExample> examples, std::size_t num_solvers,
                const TrainConfig& cfg);

/// Trains on every record outside `fold` (kAllFolds: all records). `graphs`
/// is aligned with ds.records. Throws EmptyFold or MissingRuntimes.
TrainResult train(const LabeledDataset& ds, std::span<const LiteralClauseGraph> graphs,
                  std::size_t fold, const TrainConfig& cfg);

/// Mean regret loss of `params` over examples.
double mean_regret(const ModelParameters& params, std::span<const TrainingExample> examples,
                   bool log_runtime = false);

void write_train_log(const std::vector<EpochLog>& log, const std::string& path);

/// Argmax of forward(build_graph(inst)) with ties to the lowest index.
/// Throws SchemaMismatch if the checkpoint's feature schema differs.
std::size_t select_solver(const CnfInstance& inst, const ModelParameters& params);
std::size_t select_solver(const LiteralClauseGraph& graph, const ModelParameters& params);

}  // namespace grass
