#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grass/cnf.hpp"
#include "grass/dataset.hpp"

namespace grass {

inline constexpr std::size_t kGlobalFeatureDim = 16;
inline constexpr int kGlobalFeatureVersion = 1;

/// Instance-level statistics:
///   0 n  1 m  2 m/n  3 Horn-clause fraction  4 binary fraction
///   5 ternary fraction  6-9 clause length mean/min/max/std
///   10-11 variable occurrence count mean/std
///   12-13 per-clause positive-literal fraction mean/std
///   14-15 per-variable pos/(pos+neg) occurrence ratio mean/std (unused variables skipped)
/// Standard deviations are population deviations. Every statistic is
/// independent of clause and variable order.
using GlobalFeatureVector = std::array<double, kGlobalFeatureDim>;

GlobalFeatureVector global_features(const CnfInstance& inst);
const std::array<const char*, kGlobalFeatureDim>& global_feature_names();

/// Z-score with training statistics. Zero-variance columns are centred but
/// not scaled.
class Standardizer {
 public:
  static Standardizer fit(std::span<const GlobalFeatureVector> rows);
  GlobalFeatureVector apply(const GlobalFeatureVector& x) const;

  const GlobalFeatureVector& mean() const { return mean_; }
  const GlobalFeatureVector& scale() const { return scale_; }

 private:
  GlobalFeatureVector mean_{};
  GlobalFeatureVector scale_{};
};

/// One ridge regressor per solver on standardized features, minimizing
/// mean squared error + lambda * |w|^2 with an unpenalized intercept.
class RidgeSelector {
 public:
  static RidgeSelector fit(std::span<const GlobalFeatureVector> features,
                           std::span<const RuntimeRecord> records, double lambda = 1.0);

  std::vector<double> predict(const GlobalFeatureVector& x) const;
  /// Argmin predicted runtime, lowest index on ties.
  std::size_t select(const GlobalFeatureVector& x) const;

  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& intercepts() const { return intercepts_; }

 private:
  Standardizer standardizer_;
  std::vector<std::vector<double>> weights_;  // per solver
  std::vector<double> intercepts_;
};

/// k-nearest-neighbour vote on best_solver with Euclidean distance in
/// standardized feature space.
class KnnSelector {
 public:
  static KnnSelector fit(std::span<const GlobalFeatureVector> features,
                         std::span<const RuntimeRecord> records, std::size_t k = 9);

  /// Majority vote, vote ties to the lowest solver index; distance ties
  /// resolved by training order.
  std::size_t select(const GlobalFeatureVector& x) const;

 private:
  Standardizer standardizer_;
  std::vector<GlobalFeatureVector> points_;
  std::vector<std::size_t> labels_;
  std::size_t k_ = 9;
  std::size_t num_solvers_ = 0;
};

/// Solver with the lowest mean runtime over `records` (lowest index on ties).
std::size_t best_single_solver(std::span<const RuntimeRecord> records);

}  // namespace grass
