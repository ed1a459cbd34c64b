#include "grass/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unistd.h>

#include "grass/error.hpp"
#include "grass/parallel.hpp"

namespace grass {

namespace fs = std::filesystem;

namespace {

std::string relative_to_manifest(const std::string& path, const std::string& manifest_path) {
  const auto base = fs::absolute(fs::path(manifest_path)).parent_path();
  const auto rel = fs::absolute(fs::path(path)).lexically_normal().lexically_relative(base);
  return rel.empty() ? fs::absolute(path).string() : rel.generic_string();
}

std::vector<CnfInstance> load_all(const std::vector<std::string>& paths, std::size_t threads) {
  std::vector<CnfInstance> out(paths.size());
  parallel_for(paths.size(), threads, [&](std::size_t i) { out[i] = load_dimacs(paths[i]); });
  return out;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + parent.string() + "'");
}

RuntimeFn make_runtime_fn(const PermuteStudyRequest& req) {
  if (!req.oracle_path.empty()) {
    auto spec = OracleSpec::load(req.oracle_path);
    if (req.solver >= spec.solvers.size()) {
      throw Error(ErrorCode::InvalidArgument, "solver index out of range for the oracle");
    }
    return [spec = std::move(spec), k = req.solver, cutoff = req.cutoff](const CnfInstance& inst) {
      return std::min(oracle_runtimes(inst, spec)[k], cutoff);
    };
  }
  if (req.solvers_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "permute study needs an oracle or a solver config");
  }
  const auto solvers = load_external_solvers(req.solvers_path);
  if (req.solver >= solvers.size()) {
    throw Error(ErrorCode::InvalidArgument, "solver index out of range for the solver config");
  }
  check_solver_binary(solvers[req.solver]);
  auto tmp = (fs::temp_directory_path() / ("grass_permute_" + std::to_string(::getpid()) + ".cnf"))
                 .string();
  return [solver = solvers[req.solver], cutoff = req.cutoff, tmp](const CnfInstance& inst) {
    save_dimacs(inst, tmp);
    const auto r = run_with_cutoff(expand_command(solver.command_template, tmp), cutoff);
    std::error_code ec;
    fs::remove(tmp, ec);
    return r.seconds;
  };
}

}  // namespace

std::vector<std::string> list_instances(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::Io, "'" + dir + "' is not a directory");
  }
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cnf") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorCode::Io, "no .cnf files in '" + dir + "'");
  return out;
}

std::string status_path(const std::string& manifest_path) { return manifest_path + ".status.csv"; }

LabeledDataset run_label(const LabelRequest& req) {
  if (req.oracle_path.empty() == req.solvers_path.empty()) {
    throw Error(ErrorCode::InvalidArgument, "label needs exactly one of an oracle or a solver config");
  }
  const auto all_paths = list_instances(req.instances_dir);
  auto all = load_all(all_paths, req.jobs);
  std::vector<CnfInstance> instances;
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (req.max_vars != 0 && all[i].num_vars > req.max_vars) {
      warn("skipping " + all_paths[i] + ": " + std::to_string(all[i].num_vars) +
           " variables exceed the cap");
      continue;
    }
    all[i].source_id = fs::path(all_paths[i]).stem().string();
    instances.push_back(std::move(all[i]));
    paths.push_back(all_paths[i]);
  }
  if (instances.empty()) throw Error(ErrorCode::InvalidArgument, "no instances left to label");

  auto out = req.oracle_path.empty()
                 ? label_external(instances, paths, load_external_solvers(req.solvers_path),
                                  req.cutoff, req.jobs)
                 : label_with_oracle(instances, paths, OracleSpec::load(req.oracle_path), req.cutoff);
  auto& ds = out.dataset;
  for (auto& p : ds.paths) p = relative_to_manifest(p, req.manifest_path);
  ds.num_folds = req.num_folds;
  ds.fold_seed = req.fold_seed;
  ds.base_dir = fs::path(req.manifest_path).parent_path().string();
  ds.assign_folds();
  ensure_parent_dir(req.manifest_path);
  save_manifest(ds, req.manifest_path);
  write_label_status(out.flags, status_path(req.manifest_path));
  return std::move(out.dataset);
}

std::vector<LiteralClauseGraph> build_dataset_graphs(const LabeledDataset& ds, FeatureMode mode,
                                                     std::uint64_t seed, std::size_t threads) {
  std::vector<LiteralClauseGraph> graphs(ds.records.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    graphs[i] = build_graph(load_dimacs(ds.resolve_path(i)), mode, seed);
  });
  return graphs;
}

TrainResult run_train(const std::string& manifest_path, std::size_t fold, const TrainConfig& cfg,
                      const std::string& checkpoint_path, const std::string& log_path) {
  cfg.validate();
  const auto ds = load_manifest(manifest_path);
  const auto graphs = build_dataset_graphs(ds, cfg.feature_mode, 0, cfg.threads);
  auto result = train(ds, graphs, fold, cfg);
  ensure_parent_dir(checkpoint_path);
  save_checkpoint(result.params, checkpoint_path);
  if (!log_path.empty()) {
    ensure_parent_dir(log_path);
    write_train_log(result.log, log_path);
  }
  return result;
}

CrossValidation cross_validate_gnn(const LabeledDataset& ds,
                                   const std::vector<LiteralClauseGraph>& graphs,
                                   const TrainConfig& cfg) {
  CrossValidation cv;
  cv.selections.assign(ds.records.size(), 0);
  for (std::size_t f = 0; f < ds.num_folds; ++f) {
    const auto test = ds.test_indices(f);
    if (test.empty()) throw Error(ErrorCode::EmptyFold, "fold " + std::to_string(f) + " is empty");
    auto result = train(ds, graphs, f, cfg);
    parallel_for(test.size(), cfg.threads, [&](std::size_t j) {
      cv.selections[test[j]] = select_solver(graphs[test[j]], result.params);
    });
    cv.folds.push_back(std::move(result));
  }
  return cv;
}

CrossValidation run_cross_validate(const std::string& manifest_path, const TrainConfig& cfg,
                                   const std::string& out_dir) {
  cfg.validate();
  const auto ds = load_manifest(manifest_path);
  const auto graphs = build_dataset_graphs(ds, cfg.feature_mode, 0, cfg.threads);
  auto cv = cross_validate_gnn(ds, graphs, cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + out_dir + "'");
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    const auto stem = (fs::path(out_dir) / ("fold" + std::to_string(f))).string();
    save_checkpoint(cv.folds[f].params, stem + ".ckpt");
    write_train_log(cv.folds[f].log, stem + ".log.csv");
  }
  write_selections(make_selection_rows(cv.selections, ds.records),
                   (fs::path(out_dir) / "selections.csv").string());
  return cv;
}

std::vector<SelectionRow> run_select_fold(const std::string& checkpoint_path,
                                          const std::string& manifest_path, std::size_t fold,
                                          std::size_t threads) {
  const auto params = load_checkpoint(checkpoint_path);
  const auto ds = load_manifest(manifest_path);
  if (params.config().num_solvers != ds.num_solvers()) {
    throw Error(ErrorCode::DimensionMismatch, "checkpoint and manifest disagree on solver count");
  }
  if (fold != kAllFolds && fold >= ds.num_folds) {
    throw Error(ErrorCode::InvalidArgument, "fold index out of range");
  }
  std::vector<std::size_t> idx = ds.test_indices(fold);
  if (fold == kAllFolds) {
    idx.resize(ds.records.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  if (idx.empty()) throw Error(ErrorCode::EmptyFold, "fold has no instances");
  std::vector<std::size_t> sel(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t j) {
    sel[j] = select_solver(load_dimacs(ds.resolve_path(idx[j])), params);
  });
  std::vector<RuntimeRecord> records;
  for (const auto i : idx) records.push_back(ds.records[i]);
  return make_selection_rows(sel, records);
}

BaselineMethod parse_baseline_method(const std::string& name) {
  if (name == "ridge") return BaselineMethod::Ridge;
  if (name == "knn") return BaselineMethod::Knn;
  if (name == "best-single") return BaselineMethod::BestSingle;
  if (name == "oracle") return BaselineMethod::Oracle;
  throw Error(ErrorCode::InvalidArgument,
              "unknown baseline '" + name + "' (expected ridge, knn, best-single or oracle)");
}

const char* baseline_method_name(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::Ridge: return "ridge";
    case BaselineMethod::Knn: return "knn";
    case BaselineMethod::BestSingle: return "best-single";
    case BaselineMethod::Oracle: return "oracle";
  }
  return "?";
}

std::vector<GlobalFeatureVector> dataset_global_features(const LabeledDataset& ds,
                                                         std::size_t threads) {
  std::vector<GlobalFeatureVector> out(ds.records.size());
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = global_features(load_dimacs(ds.resolve_path(i))); });
  return out;
}

std::vector<std::size_t> baseline_selections(const LabeledDataset& ds,
                                             const std::vector<GlobalFeatureVector>& features,
                                             BaselineMethod method, std::size_t fold) {
  if (features.size() != ds.records.size()) {
    throw Error(ErrorCode::InvalidArgument, "feature rows are not aligned with the dataset");
  }
  std::vector<std::size_t> folds_to_run;
  if (fold == kAllFolds) {
    for (std::size_t f = 0; f < ds.num_folds; ++f) folds_to_run.push_back(f);
  } else {
    if (fold >= ds.num_folds) throw Error(ErrorCode::InvalidArgument, "fold index out of range");
    folds_to_run.push_back(fold);
  }
  std::vector<std::size_t> out;
  if (fold == kAllFolds) out.assign(ds.records.size(), 0);

  for (const auto f : folds_to_run) {
    const auto test = ds.test_indices(f);
    const auto train = ds.train_indices(f);
    if (test.empty() || train.empty()) {
      throw Error(ErrorCode::EmptyFold, "fold " + std::to_string(f) + " is empty");
    }
    std::vector<GlobalFeatureVector> x;
    std::vector<RuntimeRecord> y;
    for (const auto i : train) {
      x.push_back(features[i]);
      y.push_back(ds.records[i]);
    }
    std::vector<std::size_t> chosen(test.size());
    switch (method) {
      case BaselineMethod::Ridge: {
        const auto model = RidgeSelector::fit(x, y);
        for (std::size_t j = 0; j < test.size(); ++j) chosen[j] = model.select(features[test[j]]);
        break;
      }
      case BaselineMethod::Knn: {
        const auto model = KnnSelector::fit(x, y);
        for (std::size_t j = 0; j < test.size(); ++j) chosen[j] = model.select(features[test[j]]);
        break;
      }
      case BaselineMethod::BestSingle: {
        std::fill(chosen.begin(), chosen.end(), best_single_solver(y));
        break;
      }
      case BaselineMethod::Oracle: {
        for (std::size_t j = 0; j < test.size(); ++j) chosen[j] = ds.records[test[j]].best_solver;
        break;
      }
    }
    if (fold == kAllFolds) {
      for (std::size_t j = 0; j < test.size(); ++j) out[test[j]] = chosen[j];
    } else {
      out = std::move(chosen);
    }
  }
  return out;
}

double run_featurize(const std::string& instance_path, FeatureMode mode, std::uint64_t seed,
                     const std::string& out_path) {
  const auto inst = load_dimacs(instance_path);
  const auto start = std::chrono::steady_clock::now();
  const auto g = build_graph(inst, mode, seed);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ensure_parent_dir(out_path);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + out_path + "' for writing");
  write_graph(g, out);
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + out_path + "'");
  return seconds;
}

PermuteStudySummary summarize_permute_study(const std::vector<PermuteStudyRow>& rows) {
  PermuteStudySummary s;
  s.rows = rows.size();
  if (rows.empty()) return s;
  s.clause_dominance = clause_dominance_fraction(rows);
  for (const auto& r : rows) {
    s.mean_clause_std += r.clause.std;
    s.mean_var_std += r.var.std;
  }
  s.mean_clause_std /= static_cast<double>(rows.size());
  s.mean_var_std /= static_cast<double>(rows.size());
  return s;
}

PermuteStudySummary run_permute_study(const PermuteStudyRequest& req) {
  const auto paths = list_instances(req.instances_dir);
  auto pool = load_all(paths, 0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    pool[i].source_id = fs::path(paths[i]).stem().string();
  }
  const auto rows = permute_study(pool, req.study, make_runtime_fn(req));
  if (!req.out_path.empty()) {
    ensure_parent_dir(req.out_path);
    write_permute_study(rows, req.out_path);
  }
  return summarize_permute_study(rows);
}

}  // namespace grass
