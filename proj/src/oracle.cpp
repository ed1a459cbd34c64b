#include <algorithm>
#include <cmath>
#include <random>

#include "grass/error.hpp"
#include "grass/harness.hpp"

namespace grass {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer over a running combination.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  std::uint64_t z = h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t clause_signature(const Clause& c) {
  const auto pos = static_cast<std::uint64_t>(
      std::count_if(c.begin(), c.end(), [](Literal l) { return l > 0; }));
  return (static_cast<std::uint64_t>(c.size()) << 32) | pos;
}

std::uint64_t multiset_hash(const CnfInstance& inst, std::size_t solver, std::uint64_t seed) {
  std::vector<std::uint64_t> sigs;
  sigs.reserve(inst.clauses.size());
  for (const auto& c : inst.clauses) sigs.push_back(clause_signature(c));
  std::sort(sigs.begin(), sigs.end());
  std::uint64_t h = mix(mix(seed, 0x5eedULL), solver);
  h = mix(h, inst.num_vars);
  for (const auto s : sigs) h = mix(h, s);
  return h;
}

}  // namespace

double clause_order_hash_unit(const CnfInstance& inst, std::size_t solver, std::uint64_t seed) {
  std::uint64_t h = mix(mix(seed, 0x0d3eULL), solver);
  for (const auto& c : inst.clauses) h = mix(h, clause_signature(c));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void OracleSpec::validate() const {
  if (solvers.empty()) throw Error(ErrorCode::InvalidArgument, "oracle needs at least one solver");
  for (const auto& s : solvers) {
    if (!(s.base_cost > 0.0) || !std::isfinite(s.base_cost)) {
      throw Error(ErrorCode::InvalidArgument, "solver '" + s.name + "': base cost must be positive");
    }
    if (s.order_sensitivity < 0.0 || s.noise < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "solver '" + s.name + "': alpha and noise must be non-negative");
    }
  }
}

OracleSpec OracleSpec::from_config(const KeyValueConfig& cfg) {
  OracleSpec spec;
  spec.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 0));
  const auto count = parse_int(cfg.get("solvers"), "solvers");
  if (count <= 0) throw Error(ErrorCode::InvalidArgument, "oracle solver count must be positive");
  const auto& names = global_feature_names();
  for (long long k = 0; k < count; ++k) {
    const std::string p = "solver." + std::to_string(k) + ".";
    SolverProfile s;
    s.name = cfg.get_or(p + "name", "solver" + std::to_string(k));
    s.base_cost = cfg.get_double_or(p + "base", 1.0);
    s.order_sensitivity = cfg.get_double_or(p + "alpha", 0.0);
    s.noise = cfg.get_double_or(p + "noise", 0.0);
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) {
      s.weights[j] = cfg.get_double_or(p + "w." + names[j], 0.0);
    }
    spec.solvers.push_back(std::move(s));
  }
  // Catch misspelled weight names.
  for (const auto& [key, value] : cfg.values()) {
    const auto w = key.find(".w.");
    if (w == std::string::npos) continue;
    const auto feature = key.substr(w + 3);
    if (std::find_if(names.begin(), names.end(), [&](const char* n) { return feature == n; }) ==
        names.end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown global feature '" + feature + "' in " + key);
    }
  }
  spec.validate();
  return spec;
}

OracleSpec OracleSpec::load(const std::string& path) {
  return from_config(KeyValueConfig::load(path));
}

KeyValueConfig OracleSpec::to_config() const {
  KeyValueConfig cfg;
  cfg.set("seed", std::to_string(seed));
  cfg.set("solvers", std::to_string(solvers.size()));
  const auto& names = global_feature_names();
  for (std::size_t k = 0; k < solvers.size(); ++k) {
    const std::string p = "solver." + std::to_string(k) + ".";
    const auto& s = solvers[k];
    cfg.set(p + "name", s.name);
    cfg.set(p + "base", format_double(s.base_cost));
    cfg.set(p + "alpha", format_double(s.order_sensitivity));
    cfg.set(p + "noise", format_double(s.noise));
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) {
      if (s.weights[j] != 0.0) cfg.set(p + "w." + names[j], format_double(s.weights[j]));
    }
  }
  return cfg;
}

std::vector<double> oracle_runtimes(const CnfInstance& inst, const OracleSpec& spec) {
  const auto g = global_features(inst);
  std::vector<double> out;
  out.reserve(spec.solvers.size());
  for (std::size_t k = 0; k < spec.solvers.size(); ++k) {
    const auto& s = spec.solvers[k];
    double dot = 0.0;
    for (std::size_t j = 0; j < kGlobalFeatureDim; ++j) dot += s.weights[j] * g[j];
    double t = s.base_cost * std::exp(dot);
    if (s.order_sensitivity > 0.0) {
      t *= 1.0 + s.order_sensitivity * clause_order_hash_unit(inst, k, spec.seed);
    }
    if (s.noise > 0.0) {
      std::mt19937_64 rng(multiset_hash(inst, k, spec.seed));
      t *= std::exp(s.noise * std::normal_distribution<double>(0.0, 1.0)(rng));
    }
    out.push_back(std::max(t, 1e-6));
  }
  return out;
}

}  // namespace grass
