#include "grass/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "grass/error.hpp"

namespace grass {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sorting first makes the result independent of input order.
MeanStd mean_std(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

void check_aligned(std::size_t features, std::size_t records) {
  if (features != records) {
    throw Error(ErrorCode::InvalidArgument, "feature rows and runtime records are not aligned");
  }
  if (features == 0) throw Error(ErrorCode::EmptyFold, "no training instances");
}

}  // namespace

const std::array<const char*, kGlobalFeatureDim>& global_feature_names() {
  static const std::array<const char*, kGlobalFeatureDim> names = {
      "n_vars",         "n_clauses",       "clause_var_ratio", "horn_frac",
      "binary_frac",    "ternary_frac",    "len_mean",         "len_min",
      "len_max",        "len_std",         "var_occ_mean",     "var_occ_std",
      "pos_frac_mean",  "pos_frac_std",    "var_balance_mean", "var_balance_std"};
  return names;
}

GlobalFeatureVector global_features(const CnfInstance& inst) {
  GlobalFeatureVector f{};
  const double n = inst.num_vars;
  const double m = static_cast<double>(inst.num_clauses());
  f[0] = n;
  f[1] = m;
  f[2] = n > 0 ? m / n : 0.0;
  if (inst.clauses.empty()) return f;

  std::size_t horn = 0, binary = 0, ternary = 0;
  std::size_t min_len = inst.clauses.front().size(), max_len = 0;
  std::vector<double> lengths, pos_frac;
  lengths.reserve(inst.clauses.size());
  pos_frac.reserve(inst.clauses.size());
  std::vector<std::uint32_t> pos_occ(inst.num_vars, 0), neg_occ(inst.num_vars, 0);
  for (const auto& c : inst.clauses) {
    std::size_t pos = 0;
    for (const Literal lit : c) {
      if (lit > 0) {
        ++pos;
        ++pos_occ[lit - 1];
      } else {
        ++neg_occ[-lit - 1];
      }
    }
    if (pos <= 1) ++horn;
    if (c.size() == 2) ++binary;
    if (c.size() == 3) ++ternary;
    min_len = std::min(min_len, c.size());
    max_len = std::max(max_len, c.size());
    lengths.push_back(static_cast<double>(c.size()));
    pos_frac.push_back(static_cast<double>(pos) / static_cast<double>(c.size()));
  }
  f[3] = static_cast<double>(horn) / m;
  f[4] = static_cast<double>(binary) / m;
  f[5] = static_cast<double>(ternary) / m;
  const auto len = mean_std(std::move(lengths));
  f[6] = len.mean;
  f[7] = static_cast<double>(min_len);
  f[8] = static_cast<double>(max_len);
  f[9] = len.std;

  std::vector<double> occ, balance;
  occ.reserve(inst.num_vars);
  for (std::size_t v = 0; v < inst.num_vars; ++v) {
    const auto total = pos_occ[v] + neg_occ[v];
    occ.push_back(static_cast<double>(total));
    if (total > 0) balance.push_back(static_cast<double>(pos_occ[v]) / total);
  }
  const auto o = mean_std(std::move(occ));
  f[10] = o.mean;
  f[11] = o.std;
  const auto pf = mean_std(std::move(pos_frac));
  f[12] = pf.mean;
  f[13] = pf.std;
  const auto b = mean_std(std::move(balance));
  f[14] = b.mean;
  f[15] = b.std;
  return f;
}

Standardizer Standardizer::fit(std::span<const GlobalFeatureVector> rows) {
  Standardizer s;
  for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& r : rows) col.push_back(r[j]);
    const auto ms = mean_std(std::move(col));
    s.mean_[j] = ms.mean;
    s.scale_[j] = ms.std > 0.0 ? ms.std : 1.0;
  }
  return s;
}

GlobalFeatureVector Standardizer::apply(const GlobalFeatureVector& x) const {
  GlobalFeatureVector out;
  for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) out[j] = (x[j] - mean_[j]) / scale_[j];
  return out;
}

RidgeSelector RidgeSelector::fit(std::span<const GlobalFeatureVector> features,
                                 std::span<const RuntimeRecord> records, double lambda) {
  check_aligned(features.size(), records.size());
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge lambda must be positive");
  const std::size_t n = features.size();
  const std::size_t k = records.front().runtimes.size();
  for (const auto& r : records) {
    if (r.runtimes.size() != k) throw Error(ErrorCode::MissingRuntimes, "inconsistent solver count");
  }

  RidgeSelector model;
  model.standardizer_ = Standardizer::fit(features);
  Eigen::MatrixXd x(n, kGlobalFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = model.standardizer_.apply(features[i]);
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) x(i, j) = z[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd gram = x.transpose() * x * inv_n;
  gram.diagonal().array() += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);

  for (std::size_t s = 0; s < k; ++s) {
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y(i) = records[i].runtimes[s];
    const double y_mean = y.mean();
    const Eigen::VectorXd rhs = x.transpose() * (y.array() - y_mean).matrix() * inv_n;
    const Eigen::VectorXd w = solver.solve(rhs);
    model.weights_.emplace_back(w.data(), w.data() + w.size());
    model.intercepts_.push_back(y_mean);
  }
  return model;
}

std::vector<double> RidgeSelector::predict(const GlobalFeatureVector& x) const {
  const auto z = standardizer_.apply(x);
  std::vector<double> out(weights_.size());
  for (std::size_t s = 0; s < weights_.size(); ++s) {
    double y = intercepts_[s];
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) y += weights_[s][j] * z[j];
    out[s] = y;
  }
  return out;
}

std::size_t RidgeSelector::select(const GlobalFeatureVector& x) const {
  const auto pred = predict(x);
  return static_cast<std::size_t>(std::min_element(pred.begin(), pred.end()) - pred.begin());
}

KnnSelector KnnSelector::fit(std::span<const GlobalFeatureVector> features,
                             std::span<const RuntimeRecord> records, std::size_t k) {
  check_aligned(features.size(), records.size());
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  KnnSelector model;
  model.k_ = k;
  model.standardizer_ = Standardizer::fit(features);
  for (std::size_t i = 0; i < features.size(); ++i) {
    model.points_.push_back(model.standardizer_.apply(features[i]));
    model.labels_.push_back(records[i].best_solver);
    model.num_solvers_ = std::max(model.num_solvers_, records[i].runtimes.size());
  }
  return model;
}

std::size_t KnnSelector::select(const GlobalFeatureVector& x) const {
  const auto z = standardizer_.apply(x);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) {
      const double diff = points_[i][j] - z[j];
      d += diff * diff;
    }
    dist.emplace_back(d, i);
  }
  const std::size_t k = std::min(k_, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> votes(num_solvers_, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[labels_[dist[i].second]];
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::size_t best_single_solver(std::span<const RuntimeRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyFold, "no records");
  const std::size_t k = records.front().runtimes.size();
  std::vector<double> total(k, 0.0);
  for (const auto& r : records)
    for (std::size_t s = 0; s < k; ++s) total[s] += r.runtimes.at(s);
  return static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
}

}  // namespace grass
