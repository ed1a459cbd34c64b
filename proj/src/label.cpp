#include <algorithm>
#include <filesystem>

#include "grass/error.hpp"
#include "grass/harness.hpp"
#include "grass/parallel.hpp"

namespace grass {

namespace {

std::string instance_id_of(const CnfInstance& inst, const std::string& path) {
  if (!inst.source_id.empty()) return inst.source_id;
  return std::filesystem::path(path).stem().string();
}

void check_inputs(const std::vector<CnfInstance>& instances, const std::vector<std::string>& paths,
                  double cutoff) {
  if (instances.size() != paths.size()) {
    throw Error(ErrorCode::InvalidArgument, "instances and paths differ in length");
  }
  if (!(cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be positive");
}

}  // namespace

LabelOutput label_with_oracle(const std::vector<CnfInstance>& instances,
                              const std::vector<std::string>& paths, const OracleSpec& spec,
                              double cutoff) {
  check_inputs(instances, paths, cutoff);
  spec.validate();
  LabelOutput out;
  auto& ds = out.dataset;
  ds.cutoff = cutoff;
  for (const auto& s : spec.solvers) ds.solver_names.push_back(s.name);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto t = oracle_runtimes(instances[i], spec);
    const auto id = instance_id_of(instances[i], paths[i]);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] > cutoff) {
        t[k] = cutoff;
        out.flags.push_back({id, k, "timeout"});
      }
    }
    ds.records.push_back(RuntimeRecord::make(id, std::move(t)));
    ds.paths.push_back(paths[i]);
  }
  return out;
}

LabelOutput label_external(const std::vector<CnfInstance>& instances,
                           const std::vector<std::string>& paths,
                           const std::vector<ExternalSolver>& solvers, double cutoff,
                           std::size_t jobs) {
  check_inputs(instances, paths, cutoff);
  if (solvers.empty()) throw Error(ErrorCode::InvalidArgument, "no external solvers configured");
  for (const auto& s : solvers) check_solver_binary(s);

  const std::size_t k_count = solvers.size();
  std::vector<RunResult> results(instances.size() * k_count);
  parallel_for(results.size(), std::max<std::size_t>(1, jobs), [&](std::size_t job) {
    const auto i = job / k_count;
    const auto k = job % k_count;
    results[job] = run_with_cutoff(expand_command(solvers[k].command_template, paths[i]), cutoff);
  });

  LabelOutput out;
  auto& ds = out.dataset;
  ds.cutoff = cutoff;
  for (const auto& s : solvers) ds.solver_names.push_back(s.name);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto id = instance_id_of(instances[i], paths[i]);
    std::vector<double> t(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto& r = results[i * k_count + k];
      t[k] = r.seconds;
      if (r.timed_out) out.flags.push_back({id, k, "timeout"});
      if (r.crashed) {
        out.flags.push_back({id, k, "crash"});
        warn("solver '" + solvers[k].name + "' crashed on " + paths[i] + " (exit " +
             std::to_string(r.exit_code) + "); recorded at the cutoff");
      }
    }
    ds.records.push_back(RuntimeRecord::make(id, std::move(t)));
    ds.paths.push_back(paths[i]);
  }
  return out;
}

void write_label_status(const std::vector<LabelStatus>& flags, const std::string& path) {
  std::string out = "instance_id,solver,status\n";
  for (const auto& f : flags) {
    out += f.instance_id + ',' + std::to_string(f.solver) + ',' + f.status + '\n';
  }
  write_file(path, out);
}

}  // namespace grass
