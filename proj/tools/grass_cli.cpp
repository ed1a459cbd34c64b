// grass command-line front end. Talks to the library only through grass.h.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "grass/grass.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

constexpr const char* kConfigHelp = R"(Config files hold flat `key = value` lines; `#` starts a comment.
Keys are the long option names of the subcommand (without dashes), for
example `learning-rate = 0.001`. Flags given on the command line win.)";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
  grass_status status;
  LibraryError(grass_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(grass_status s) {
  if (s != GRASS_OK) {
    throw LibraryError(s, std::string(grass_status_name(s)) + ": " + grass_last_error());
  }
}

size_t parse_fold(const std::string& text) {
  if (text == "all") return GRASS_ALL_FOLDS;
  try {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (used == text.size() && v >= 0) return static_cast<size_t>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("--fold expects a non-negative integer or 'all', got '" + text + "'");
}

// Flat config keys belong to the subcommand being run.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(std::string section) : section_(std::move(section)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty() && !section_.empty()) item.parents.push_back(section_);
    }
    return items;
  }

 private:
  std::string section_;
};

void add_config(CLI::App* app) { app->footer(kConfigHelp); }

// Moves `--config FILE` (accepted anywhere) in front of the subcommand so
// the root app reads it, and returns the subcommand name.
std::string hoist_config(std::vector<std::string>& args) {
  std::string sub;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      sub = args[i];
      break;
    }
  }
  std::vector<std::string> cfg;
  for (std::size_t i = 1; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg = {args[i], args[i + 1]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      cfg = {"--config", args[i].substr(9)};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  args.insert(args.begin() + 1, cfg.begin(), cfg.end());
  return sub;
}

// ----------------------------------------------------------------- generate

struct GenerateOpts {
  std::string out_dir;
  grass_generate_config cfg{};
  std::vector<double> weights;
};

void setup_generate(CLI::App& root, GenerateOpts& o, uint64_t& seed) {
  grass_generate_config_default(&o.cfg);
  o.weights.assign(o.cfg.length_weights, o.cfg.length_weights + 5);
  auto* app = root.add_subcommand("generate", "Write synthetic random k-SAT instances");
  add_config(app);
  app->add_option("--out-dir", o.out_dir, "Directory for inst_00000.cnf, ...")->required();
  app->add_option("--n", o.cfg.n_instances, "Number of instances")->capture_default_str();
  app->add_option("--v-min", o.cfg.v_min, "Minimum variable count")->capture_default_str();
  app->add_option("--v-max", o.cfg.v_max, "Maximum variable count")->capture_default_str();
  app->add_option("--ratio-min", o.cfg.ratio_min, "Minimum clause/variable ratio")
      ->capture_default_str();
  app->add_option("--ratio-max", o.cfg.ratio_max, "Maximum clause/variable ratio")
      ->capture_default_str();
  app->add_option("--length-weights", o.weights, "Probabilities of clause lengths 1..5")
      ->expected(5)
      ->delimiter(',');
  app->add_option("--pos-prob-min", o.cfg.pos_prob_min,
                  "Lower bound of the per-instance positive-literal probability")
      ->capture_default_str();
  app->add_option("--pos-prob-max", o.cfg.pos_prob_max,
                  "Upper bound of the per-instance positive-literal probability")
      ->capture_default_str();
  app->add_option("--seed", seed, "Random seed")->capture_default_str();
  app->callback([&o, &seed] {
    for (std::size_t i = 0; i < 5; ++i) o.cfg.length_weights[i] = o.weights[i];
    o.cfg.seed = seed;
    check(grass_generate(&o.cfg, o.out_dir.c_str()));
    std::cout << "wrote " << o.cfg.n_instances << " instances to " << o.out_dir << "\n";
  });
}

// -------------------------------------------------------------------- label

struct LabelOpts {
  std::string instances, manifest, oracle, solvers;
  grass_label_config cfg{};
};

void setup_label(CLI::App& root, LabelOpts& o, uint64_t& seed) {
  grass_label_config_default(&o.cfg);
  auto* app = root.add_subcommand("label", "Collect per-solver runtimes into a manifest");
  add_config(app);
  app->add_option("--instances", o.instances, "Directory of .cnf files")->required();
  app->add_option("--manifest", o.manifest, "Manifest CSV to write")->required();
  auto* oracle = app->add_option("--oracle", o.oracle, "Simulated-runtime oracle config");
  auto* solvers = app->add_option("--solvers", o.solvers, "External solver command config");
  oracle->excludes(solvers);
  app->add_option("--cutoff", o.cfg.cutoff, "Censoring cutoff in seconds")->capture_default_str();
  app->add_option("--jobs", o.cfg.jobs, "Concurrent solver processes")->capture_default_str();
  app->add_option("--folds", o.cfg.folds, "Cross-validation folds")->capture_default_str();
  app->add_option("--max-vars", o.cfg.max_vars, "Skip instances with more variables (0 = no cap)")
      ->capture_default_str();
  app->add_option("--seed", seed, "Fold assignment seed")->capture_default_str();
  app->callback([&o, &seed] {
    if (o.oracle.empty() == o.solvers.empty()) {
      throw UsageError("label needs exactly one of --oracle or --solvers");
    }
    o.cfg.instances_dir = o.instances.c_str();
    o.cfg.manifest_path = o.manifest.c_str();
    o.cfg.oracle_path = o.oracle.empty() ? nullptr : o.oracle.c_str();
    o.cfg.solvers_path = o.solvers.empty() ? nullptr : o.solvers.c_str();
    o.cfg.fold_seed = seed;
    size_t n = 0;
    check(grass_label(&o.cfg, &n));
    std::cout << "labeled " << n << " instances into " << o.manifest << "\n";
  });
}

// ---------------------------------------------------------------- featurize

struct FeaturizeOpts {
  std::string instance, out, mode = "custom_pe";
};

void setup_featurize(CLI::App& root, FeaturizeOpts& o, uint64_t& seed) {
  auto* app = root.add_subcommand("featurize", "Build and export the literal-clause graph");
  add_config(app);
  app->add_option("--instance", o.instance, "DIMACS file")->required();
  app->add_option("--out", o.out, "Graph export file")->required();
  app->add_option("--feature-mode", o.mode, "custom_pe | custom | random | node_type")
      ->capture_default_str();
  app->add_option("--seed", seed, "Seed for random features")->capture_default_str();
  app->callback([&o, &seed] {
    double seconds = 0.0;
    check(grass_featurize(o.instance.c_str(), o.mode.c_str(), seed, o.out.c_str(), &seconds));
    std::printf("featurized %s in %.6f s\n", o.instance.c_str(), seconds);
  });
}

// -------------------------------------------------------------------- train

struct TrainOpts {
  std::string manifest, out, log, out_dir, fold = "all", mode;
  bool cv = false, homogeneous = false, log_runtime = false;
  grass_train_config cfg{};
};

void setup_train(CLI::App& root, TrainOpts& o, uint64_t& seed) {
  grass_train_config_default(&o.cfg);
  o.mode = o.cfg.feature_mode;
  auto* app = root.add_subcommand("train", "Train the GNN selector on a manifest");
  add_config(app);
  app->add_option("--manifest", o.manifest, "Manifest CSV")->required();
  app->add_option("--fold", o.fold, "Held-out fold index, or 'all' to train on everything")
      ->capture_default_str();
  app->add_option("--out", o.out, "Checkpoint path");
  app->add_option("--log", o.log, "Per-epoch loss CSV");
  app->add_flag("--cv", o.cv, "Train one model per fold and write out-of-fold selections");
  app->add_option("--out-dir", o.out_dir, "Output directory for --cv");
  app->add_option("--learning-rate", o.cfg.learning_rate, "Adam step size")->capture_default_str();
  app->add_option("--max-epochs", o.cfg.max_epochs, "Epoch limit")->capture_default_str();
  app->add_option("--batch-size", o.cfg.batch_size, "Mini-batch size")->capture_default_str();
  app->add_option("--patience", o.cfg.patience, "Early-stopping patience in epochs")
      ->capture_default_str();
  app->add_option("--val-fraction", o.cfg.val_fraction, "Validation share of the training data")
      ->capture_default_str();
  app->add_option("--hidden", o.cfg.hidden, "Hidden width")->capture_default_str();
  app->add_option("--layers", o.cfg.layers, "Convolution layers")->capture_default_str();
  app->add_option("--feature-mode", o.mode, "custom_pe | custom | random | node_type")
      ->capture_default_str();
  app->add_flag("--homogeneous", o.homogeneous, "Share one convolution across relations");
  app->add_flag("--log-runtime", o.log_runtime, "Regret on log1p(runtime)");
  app->add_option("--threads", o.cfg.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  app->add_option("--seed", seed, "Initialization and shuffling seed")->capture_default_str();
  app->callback([&o, &seed] {
    o.cfg.feature_mode = o.mode.c_str();
    o.cfg.homogeneous = o.homogeneous;
    o.cfg.log_runtime = o.log_runtime;
    o.cfg.seed = seed;
    if (o.cv) {
      if (o.out_dir.empty()) throw UsageError("--cv needs --out-dir");
      check(grass_cross_validate(o.manifest.c_str(), &o.cfg, o.out_dir.c_str()));
      std::cout << "wrote fold checkpoints and selections.csv to " << o.out_dir << "\n";
      return;
    }
    if (o.out.empty()) throw UsageError("train needs --out (or --cv --out-dir)");
    grass_train_summary s{};
    check(grass_train(o.manifest.c_str(), parse_fold(o.fold), &o.cfg, o.out.c_str(),
                      o.log.empty() ? nullptr : o.log.c_str(), &s));
    std::printf("epochs %zu, best epoch %zu, best validation loss %.6g\n", s.epochs_run,
                s.best_epoch, s.best_val_loss);
  });
}

// ------------------------------------------------------------------- select

struct SelectOpts {
  std::string model, instance, manifest, out, fold = "all";
  size_t threads = 0;
};

void setup_select(CLI::App& root, SelectOpts& o) {
  auto* app = root.add_subcommand("select", "Pick a solver with a trained checkpoint");
  add_config(app);
  app->add_option("--model", o.model, "Checkpoint")->required();
  auto* inst = app->add_option("--instance", o.instance, "Single DIMACS file");
  auto* manifest = app->add_option("--manifest", o.manifest, "Manifest for batch selection");
  inst->excludes(manifest);
  app->add_option("--fold", o.fold, "Fold to select for, or 'all'")->capture_default_str();
  app->add_option("--out", o.out, "Selections CSV (batch mode)");
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app->callback([&o] {
    if (!o.instance.empty()) {
      grass_model* model = nullptr;
      grass_instance* inst = nullptr;
      check(grass_model_load(o.model.c_str(), &model));
      const grass_status s = grass_instance_load(o.instance.c_str(), &inst);
      if (s != GRASS_OK) grass_model_free(model);
      check(s);
      size_t k = 0;
      const grass_status p = grass_model_predict(model, inst, nullptr, 0, &k);
      std::string name = p == GRASS_OK ? grass_model_solver_name(model, k) : "";
      grass_instance_free(inst);
      grass_model_free(model);
      check(p);
      if (name.empty()) name = "solver" + std::to_string(k);
      std::cout << name << " " << k << "\n";
      return;
    }
    if (o.manifest.empty()) throw UsageError("select needs --instance or --manifest");
    if (o.out.empty()) throw UsageError("batch selection needs --out");
    check(grass_select_fold(o.model.c_str(), o.manifest.c_str(), parse_fold(o.fold), o.threads,
                            o.out.c_str()));
    std::cout << "wrote " << o.out << "\n";
  });
}

// ----------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string selections, manifest, out;
  double cutoff = 0.0;
  bool table = false;
};

void setup_evaluate(CLI::App& root, EvaluateOpts& o) {
  auto* app = root.add_subcommand("evaluate", "Score a selections CSV against a manifest");
  add_config(app);
  app->add_option("--selections", o.selections, "Selections CSV")->required();
  app->add_option("--manifest", o.manifest, "Manifest CSV")->required();
  app->add_option("--cutoff", o.cutoff, "Solved threshold in seconds (default: manifest cutoff)");
  app->add_option("--out", o.out, "Also write the report CSV here");
  app->add_flag("--table", o.table, "Print a readable table instead of CSV");
  app->callback([&o] {
    char* csv = nullptr;
    char* table = nullptr;
    check(grass_evaluate(o.selections.c_str(), o.manifest.c_str(), o.cutoff, nullptr, &csv,
                         &table));
    const std::string csv_text = csv;
    const std::string table_text = table;
    grass_string_free(csv);
    grass_string_free(table);
    std::cout << (o.table ? table_text : csv_text);
    if (!o.out.empty()) {
      std::FILE* f = std::fopen(o.out.c_str(), "wb");
      if (!f) throw LibraryError(GRASS_ERR_IO, "cannot open '" + o.out + "' for writing");
      const bool ok = std::fwrite(csv_text.data(), 1, csv_text.size(), f) == csv_text.size();
      if (std::fclose(f) != 0 || !ok) {
        throw LibraryError(GRASS_ERR_IO, "failed writing '" + o.out + "'");
      }
    }
  });
}

// ------------------------------------------------------------ permute-study

struct PermuteOpts {
  std::string instances, oracle, solvers, out;
  grass_permute_config cfg{};
};

void setup_permute(CLI::App& root, PermuteOpts& o, uint64_t& seed) {
  grass_permute_config_default(&o.cfg);
  auto* app = root.add_subcommand("permute-study",
                                  "Runtime spread under clause and variable shuffles");
  add_config(app);
  app->add_option("--instances", o.instances, "Directory of .cnf files")->required();
  auto* oracle = app->add_option("--oracle", o.oracle, "Simulated-runtime oracle config");
  auto* solvers = app->add_option("--solvers", o.solvers, "External solver command config");
  oracle->excludes(solvers);
  app->add_option("--solver", o.cfg.solver, "Solver index to study")->capture_default_str();
  app->add_option("--cutoff", o.cfg.cutoff, "Cutoff in seconds")->capture_default_str();
  app->add_option("--m", o.cfg.instances, "Instances sampled")->capture_default_str();
  app->add_option("--t", o.cfg.shuffles, "Shuffles per kind")->capture_default_str();
  app->add_option("--out", o.out, "Study CSV");
  app->add_option("--seed", seed, "Sampling and shuffle seed")->capture_default_str();
  app->callback([&o, &seed] {
    if (o.oracle.empty() == o.solvers.empty()) {
      throw UsageError("permute-study needs exactly one of --oracle or --solvers");
    }
    o.cfg.instances_dir = o.instances.c_str();
    o.cfg.oracle_path = o.oracle.empty() ? nullptr : o.oracle.c_str();
    o.cfg.solvers_path = o.solvers.empty() ? nullptr : o.solvers.c_str();
    o.cfg.out_path = o.out.empty() ? nullptr : o.out.c_str();
    o.cfg.seed = seed;
    grass_permute_summary s{};
    check(grass_permute_study(&o.cfg, &s));
    std::printf(
        "instances %zu\nclause-shuffle std > variable-shuffle std on %.1f %%\n"
        "mean clause-shuffle std %.6g\nmean variable-shuffle std %.6g\n",
        s.rows, 100.0 * s.clause_dominance, s.mean_clause_std, s.mean_var_std);
  });
}

// ----------------------------------------------------------------- baseline

struct BaselineOpts {
  std::string manifest, method, out, fold = "all";
  size_t threads = 0;
};

void setup_baseline(CLI::App& root, BaselineOpts& o) {
  auto* app = root.add_subcommand("baseline", "Selections from a non-neural baseline");
  add_config(app);
  app->add_option("--manifest", o.manifest, "Manifest CSV")->required();
  app->add_option("--method", o.method, "ridge | knn | best-single | oracle")
      ->required()
      ->check(CLI::IsMember({"ridge", "knn", "best-single", "oracle"}));
  app->add_option("--fold", o.fold, "Test fold, or 'all' for out-of-fold predictions")
      ->capture_default_str();
  app->add_option("--out", o.out, "Selections CSV")->required();
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app->callback([&o] {
    check(grass_baseline(o.manifest.c_str(), o.method.c_str(), parse_fold(o.fold), o.threads,
                         o.out.c_str()));
    std::cout << "wrote " << o.out << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grass: GNN-based SAT solver selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(grass_version()));
  app.add_flag_callback("--quiet", [] { grass_set_warnings(0); },
                        "Suppress parser and pipeline warnings");

  uint64_t seed = 0;
  GenerateOpts gen;
  LabelOpts label;
  FeaturizeOpts feat;
  TrainOpts train;
  SelectOpts select;
  EvaluateOpts eval;
  PermuteOpts perm;
  BaselineOpts base;
  setup_generate(app, gen, seed);
  setup_label(app, label, seed);
  setup_featurize(app, feat, seed);
  setup_train(app, train, seed);
  setup_select(app, select);
  setup_evaluate(app, eval);
  setup_permute(app, perm, seed);
  setup_baseline(app, base);

  std::vector<std::string> args(argv, argv + argc);
  const auto sub = hoist_config(args);
  app.set_config("--config", "", "key = value file with defaults for the subcommand");
  app.config_formatter(std::make_shared<FlatConfig>(sub));
  app.allow_config_extras(CLI::config_extras_mode::error);
  for (auto* s : app.get_subcommands({})) s->allow_config_extras(CLI::config_extras_mode::error);
  app.footer(kConfigHelp);
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);

  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LibraryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.status == GRASS_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
  }
  return kExitOk;
}
