#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grass/baselines.hpp"
#include "grass/dataset.hpp"
#include "grass/evaluation.hpp"
#include "grass/graph.hpp"
#include "grass/harness.hpp"
#include "grass/training.hpp"

namespace grass {

/// Sorted *.cnf files directly inside `dir`.
std::vector<std::string> list_instances(const std::string& dir);

struct LabelRequest {
  std::string instances_dir;
  std::string manifest_path;
  std::string oracle_path;   // oracle mode when set
  std::string solvers_path;  // external mode when set
  double cutoff = 500.0;
  std::size_t jobs = 1;
  std::size_t num_folds = 5;
  std::uint64_t fold_seed = 0;
  // Instances with more variables are skipped; 0 = unlimited.
  std::uint32_t max_vars = 0;
};

/// Labels every instance and writes the manifest, its sidecar and
/// `<manifest>.status.csv`. Paths in the manifest are relative to it.
LabeledDataset run_label(const LabelRequest& req);

std::string status_path(const std::string& manifest_path);

/// Parses every manifest instance and builds its graph (in parallel).
std::vector<LiteralClauseGraph> build_dataset_graphs(const LabeledDataset& ds, FeatureMode mode,
                                                     std::uint64_t seed, std::size_t threads);

/// Trains on the records outside `fold` and writes the checkpoint and, when
/// `log_path` is set, the per-epoch loss CSV.
TrainResult run_train(const std::string& manifest_path, std::size_t fold, const TrainConfig& cfg,
                      const std::string& checkpoint_path, const std::string& log_path);

/// Out-of-fold GNN selections for every record: fold f's records are
/// selected by a model trained on the other folds.
struct CrossValidation {
  std::vector<std::size_t> selections;
  std::vector<TrainResult> folds;
};
CrossValidation cross_validate_gnn(const LabeledDataset& ds,
                                   const std::vector<LiteralClauseGraph>& graphs,
                                   const TrainConfig& cfg);

/// Runs cross_validate_gnn and writes fold<k>.ckpt, fold<k>.log.csv and
/// selections.csv into `out_dir`.
CrossValidation run_cross_validate(const std::string& manifest_path, const TrainConfig& cfg,
                                   const std::string& out_dir);

/// Selections for the records of `fold` (kAllFolds: every record).
std::vector<SelectionRow> run_select_fold(const std::string& checkpoint_path,
                                          const std::string& manifest_path, std::size_t fold,
                                          std::size_t threads);

enum class BaselineMethod { Ridge, Knn, BestSingle, Oracle };
BaselineMethod parse_baseline_method(const std::string& name);
const char* baseline_method_name(BaselineMethod m);

/// Selections from a baseline fitted outside each test fold. With
/// kAllFolds every fold is predicted out-of-fold.
std::vector<std::size_t> baseline_selections(const LabeledDataset& ds,
                                             const std::vector<GlobalFeatureVector>& features,
                                             BaselineMethod method, std::size_t fold);

std::vector<GlobalFeatureVector> dataset_global_features(const LabeledDataset& ds,
                                                         std::size_t threads);

/// Builds one instance's graph and writes it; returns featurization seconds.
double run_featurize(const std::string& instance_path, FeatureMode mode, std::uint64_t seed,
                     const std::string& out_path);

struct PermuteStudyRequest {
  std::string instances_dir;
  std::string oracle_path;
  std::string solvers_path;
  std::size_t solver = 0;
  double cutoff = 500.0;
  PermuteStudyConfig study;
  std::string out_path;
};

struct PermuteStudySummary {
  std::size_t rows = 0;
  double clause_dominance = 0.0;
  double mean_clause_std = 0.0;
  double mean_var_std = 0.0;
};

PermuteStudySummary run_permute_study(const PermuteStudyRequest& req);
PermuteStudySummary summarize_permute_study(const std::vector<PermuteStudyRow>& rows);

}  // namespace grass
