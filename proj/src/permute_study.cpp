#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "grass/error.hpp"
#include "grass/harness.hpp"

namespace grass {

ShuffleStats shuffle_stats(const std::vector<double>& v) {
  ShuffleStats s;
  if (v.empty()) return s;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  s.min = sorted.front();
  s.max = sorted.back();
  if (s.min == s.max) {
    s.mean = s.min;
    return s;
  }
  double ss = 0.0;
  for (const double x : sorted) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / n);
  return s;
}

std::vector<PermuteStudyRow> permute_study(const std::vector<CnfInstance>& pool,
                                           const PermuteStudyConfig& cfg,
                                           const RuntimeFn& runtime) {
  if (cfg.instances == 0 || cfg.shuffles == 0) {
    throw Error(ErrorCode::InvalidArgument, "permute study needs at least one instance and shuffle");
  }
  if (pool.size() < cfg.instances) {
    throw Error(ErrorCode::InvalidArgument, "permute study asks for " +
                                                std::to_string(cfg.instances) +
                                                " instances but only " +
                                                std::to_string(pool.size()) + " are available");
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(cfg.instances);

  std::vector<PermuteStudyRow> rows;
  rows.reserve(cfg.instances);
  for (const auto idx : order) {
    const auto& inst = pool[idx];
    PermuteStudyRow row;
    row.instance_id = inst.source_id.empty() ? std::to_string(idx) : inst.source_id;
    for (std::size_t t = 0; t < cfg.shuffles; ++t) {
      const auto seed = rng();
      row.clause_runtimes.push_back(runtime(permute(inst, {PermutationKind::ClauseShuffle, seed})));
    }
    for (std::size_t t = 0; t < cfg.shuffles; ++t) {
      const auto seed = rng();
      row.var_runtimes.push_back(runtime(permute(inst, {PermutationKind::VariableShuffle, seed})));
    }
    row.clause = shuffle_stats(row.clause_runtimes);
    row.var = shuffle_stats(row.var_runtimes);
    std::vector<double> all = row.clause_runtimes;
    all.insert(all.end(), row.var_runtimes.begin(), row.var_runtimes.end());
    row.mean = shuffle_stats(all).mean;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PermuteStudyRow& a, const PermuteStudyRow& b) { return a.mean < b.mean; });
  return rows;
}

void write_permute_study(const std::vector<PermuteStudyRow>& rows, const std::string& path) {
  const std::size_t t = rows.empty() ? 0 : rows.front().clause_runtimes.size();
  std::string out =
      "rank,instance_id,mean,clause_mean,clause_min,clause_max,clause_std,var_mean,var_min,var_max,"
      "var_std";
  for (std::size_t j = 0; j < t; ++j) out += ",clause_" + std::to_string(j);
  for (std::size_t j = 0; j < t; ++j) out += ",var_" + std::to_string(j);
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    out += std::to_string(r) + ',' + row.instance_id + ',' + format_double(row.mean);
    for (const auto* s : {&row.clause, &row.var}) {
      out += ',' + format_double(s->mean) + ',' + format_double(s->min) + ',' +
             format_double(s->max) + ',' + format_double(s->std);
    }
    for (const double x : row.clause_runtimes) out += ',' + format_double(x);
    for (const double x : row.var_runtimes) out += ',' + format_double(x);
    out += '\n';
  }
  write_file(path, out);
}

double clause_dominance_fraction(const std::vector<PermuteStudyRow>& rows) {
  if (rows.empty()) return 0.0;
  const auto n = std::count_if(rows.begin(), rows.end(), [](const PermuteStudyRow& r) {
    return r.clause.std > r.var.std;
  });
  return static_cast<double>(n) / static_cast<double>(rows.size());
}

}  // namespace grass
