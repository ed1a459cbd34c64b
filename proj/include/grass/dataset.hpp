#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grass {

/// Per-instance solver runtimes in seconds. Timed-out runs are stored as the
/// cutoff.
struct RuntimeRecord {
  std::string instance_id;
  std::vector<double> runtimes;
  double best_time = 0.0;
  std::size_t best_solver = 0;

  /// Fills best_time / best_solver (lowest index on ties). Throws
  /// MissingRuntimes on empty, non-finite or non-positive runtimes.
  static RuntimeRecord make(std::string id, std::vector<double> runtimes);

  /// True when `solver` attains the minimum runtime.
  bool is_optimal(std::size_t solver) const { return runtimes.at(solver) == best_time; }
};

struct LabeledDataset {
  std::vector<RuntimeRecord> records;
  std::vector<std::string> paths;  // instance file per record, as written in the manifest
  std::vector<std::string> solver_names;
  double cutoff = 500.0;
  std::size_t num_folds = 5;
  std::uint64_t fold_seed = 0;
  std::vector<std::size_t> folds;  // fold of each record

  std::size_t num_solvers() const { return solver_names.size(); }

  /// Seeded shuffle stratified by best_solver; fills `folds`.
  void assign_folds();

  /// Record indices in `fold` (test) or outside it (train). fold == npos
  /// selects everything for train and nothing for test.
  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;

  /// Resolves paths[i] relative to the manifest directory.
  std::string resolve_path(std::size_t i) const;
  std::string base_dir;
};

inline constexpr std::size_t kAllFolds = static_cast<std::size_t>(-1);

/// Manifest CSV `instance_id,path,t_1,...,t_K` plus sidecar `<manifest>.meta`
/// holding cutoff, solver names, fold count and fold seed as key = value lines.
LabeledDataset load_manifest(const std::string& manifest_path);
void save_manifest(const LabeledDataset& ds, const std::string& manifest_path);

std::string sidecar_path(const std::string& manifest_path);

}  // namespace grass
