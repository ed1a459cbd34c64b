#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include "grass/error.hpp"
#include "grass/harness.hpp"

namespace grass {

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (n_instances == 0) bad("n_instances must be positive");
  if (v_min == 0 || v_max < v_min) bad("variable range must satisfy 1 <= v_min <= v_max");
  if (!(ratio_min > 0.0) || ratio_max < ratio_min) bad("clause/variable ratio range is invalid");
  double sum = 0.0;
  for (const double w : length_weights) {
    if (w < 0.0) bad("length weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) bad("length weights must sum to 1");
  if (pos_prob_min < 0.0 || pos_prob_max > 1.0 || pos_prob_max < pos_prob_min) {
    bad("positive-literal probability range must lie in [0, 1]");
  }
}

std::string instance_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst_%05zu.cnf", i);
  return buf;
}

std::vector<CnfInstance> generate(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<CnfInstance> out;
  out.reserve(spec.n_instances);
  std::discrete_distribution<int> length_dist(spec.length_weights.begin(),
                                              spec.length_weights.end());
  for (std::size_t i = 0; i < spec.n_instances; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i), 0x6e7a5u};
    std::mt19937_64 rng(seq);
    CnfInstance inst;
    inst.source_id = std::filesystem::path(instance_file_name(i)).stem().string();
    inst.num_vars = std::uniform_int_distribution<std::uint32_t>(spec.v_min, spec.v_max)(rng);
    const double ratio = std::uniform_real_distribution<double>(spec.ratio_min, spec.ratio_max)(rng);
    const double pos_prob =
        spec.pos_prob_max > spec.pos_prob_min
            ? std::uniform_real_distribution<double>(spec.pos_prob_min, spec.pos_prob_max)(rng)
            : spec.pos_prob_min;
    const auto m = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(ratio * static_cast<double>(inst.num_vars))));

    std::vector<std::uint32_t> vars(inst.num_vars);
    std::iota(vars.begin(), vars.end(), 1u);
    std::bernoulli_distribution positive(pos_prob);
    inst.clauses.reserve(m);
    for (std::size_t c = 0; c < m; ++c) {
      const auto len = std::min<std::size_t>(static_cast<std::size_t>(length_dist(rng)) + 1,
                                              inst.num_vars);
      // Partial Fisher-Yates: the first `len` entries become the clause's variables.
      Clause clause;
      clause.reserve(len);
      for (std::size_t j = 0; j < len; ++j) {
        const auto pick = std::uniform_int_distribution<std::size_t>(j, vars.size() - 1)(rng);
        std::swap(vars[j], vars[pick]);
        const auto v = static_cast<Literal>(vars[j]);
        clause.push_back(positive(rng) ? v : -v);
      }
      inst.clauses.push_back(std::move(clause));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<std::string> generate_to_dir(const SyntheticSpec& spec, const std::string& dir) {
  const auto instances = generate(spec);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir + "': " + ec.message());
  std::vector<std::string> paths;
  paths.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto path = (std::filesystem::path(dir) / instance_file_name(i)).string();
    save_dimacs(instances[i], path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace grass
