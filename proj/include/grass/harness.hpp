#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grass/baselines.hpp"
#include "grass/cnf.hpp"
#include "grass/dataset.hpp"
#include "grass/textio.hpp"

namespace grass {

// ----------------------------------------------------------------- generator

struct SyntheticSpec {
  std::size_t n_instances = 100;
  std::uint32_t v_min = 20;
  std::uint32_t v_max = 50;
  double ratio_min = 3.0;
  double ratio_max = 5.0;
  // Probability of clause lengths 1..5; must sum to 1.
  std::array<double, 5> length_weights = {0.0, 0.2, 0.6, 0.2, 0.0};
  // Per-instance probability that a literal is positive, drawn uniformly
  // from [pos_prob_min, pos_prob_max]. 0.5/0.5 gives uniform signs.
  double pos_prob_min = 0.5;
  double pos_prob_max = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic per seed. Variables inside a clause are distinct; clause
/// lengths above the variable count are truncated to it.
std::vector<CnfInstance> generate(const SyntheticSpec& spec);

/// Writes inst_00000.cnf, ... into `dir` (created if needed); returns paths.
std::vector<std::string> generate_to_dir(const SyntheticSpec& spec, const std::string& dir);

std::string instance_file_name(std::size_t i);

// -------------------------------------------------------------------- oracle

struct SolverProfile {
  std::string name;
  double base_cost = 1.0;            // seconds
  GlobalFeatureVector weights{};     // exponent weights over global_features()
  double order_sensitivity = 0.0;    // alpha >= 0
  double noise = 0.0;                // log-normal sigma
};

/// runtime_k = base_k * exp(w_k . g(x)) * (1 + alpha_k * u_k(clause order)) * exp(noise_k * z_k)
/// u_k hashes the ordered sequence of (length, #positive) clause signatures,
/// so it reacts to clause order but not to variable relabeling; z_k is a
/// standard normal seeded by the order-free multiset of those signatures.
struct OracleSpec {
  std::vector<SolverProfile> solvers;
  std::uint64_t seed = 0;

  /// Keys: seed, solvers (count), solver.<k>.name, solver.<k>.base,
  /// solver.<k>.alpha, solver.<k>.noise, solver.<k>.w.<feature name>.
  static OracleSpec from_config(const KeyValueConfig& cfg);
  static OracleSpec load(const std::string& path);
  KeyValueConfig to_config() const;
  void validate() const;
};

std::vector<double> oracle_runtimes(const CnfInstance& inst, const OracleSpec& spec);

/// Order-sensitive term u in [0, 1) for solver k.
double clause_order_hash_unit(const CnfInstance& inst, std::size_t solver, std::uint64_t seed);

// ------------------------------------------------------------ external runs

struct RunResult {
  double seconds = 0.0;  // wall clock, millisecond precision, censored at cutoff
  bool timed_out = false;
  bool crashed = false;
  int exit_code = 0;
};

/// Runs `/bin/sh -c command` in its own process group and kills the group
/// once `cutoff` seconds have elapsed.
RunResult run_with_cutoff(const std::string& command, double cutoff);

struct ExternalSolver {
  std::string name;
  std::string command_template;  // contains {instance}
};

/// Keys: solvers (count), solver.<k>.name, solver.<k>.cmd.
std::vector<ExternalSolver> load_external_solvers(const std::string& path);

/// Substitutes the shell-quoted instance path for every {instance}.
std::string expand_command(const std::string& command_template, const std::string& instance_path);

/// Throws MissingBinary when the template's program cannot be found.
void check_solver_binary(const ExternalSolver& solver);

// --------------------------------------------------------------------- label

struct LabelStatus {
  std::string instance_id;
  std::size_t solver = 0;
  std::string status;  // "timeout" or "crash"
};

struct LabelOutput {
  LabeledDataset dataset;
  std::vector<LabelStatus> flags;
};

/// Oracle labels, censored at `cutoff`.
LabelOutput label_with_oracle(const std::vector<CnfInstance>& instances,
                              const std::vector<std::string>& paths, const OracleSpec& spec,
                              double cutoff);

/// Runs every (instance, solver) pair with up to `jobs` concurrent
/// processes. Manifest order is instance order x solver order.
LabelOutput label_external(const std::vector<CnfInstance>& instances,
                           const std::vector<std::string>& paths,
                           const std::vector<ExternalSolver>& solvers, double cutoff,
                           std::size_t jobs);

void write_label_status(const std::vector<LabelStatus>& flags, const std::string& path);

// ------------------------------------------------------------- permute study

struct ShuffleStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
};

struct PermuteStudyRow {
  std::string instance_id;
  std::vector<double> clause_runtimes;
  std::vector<double> var_runtimes;
  ShuffleStats clause;
  ShuffleStats var;
  double mean = 0.0;  // over all 2T samples; rows are sorted by it
};

struct PermuteStudyConfig {
  std::size_t instances = 30;
  std::size_t shuffles = 20;
  std::uint64_t seed = 0;
};

using RuntimeFn = std::function<double(const CnfInstance&)>;

std::vector<PermuteStudyRow> permute_study(const std::vector<CnfInstance>& pool,
                                           const PermuteStudyConfig& cfg,
                                           const RuntimeFn& runtime);

ShuffleStats shuffle_stats(const std::vector<double>& v);

void write_permute_study(const std::vector<PermuteStudyRow>& rows, const std::string& path);

/// Fraction of rows whose clause-shuffle std exceeds the variable-shuffle std.
double clause_dominance_fraction(const std::vector<PermuteStudyRow>& rows);

}  // namespace grass
