#include <doctest.h>

#include <filesystem>
#include <set>

#include "grass/dataset.hpp"
#include "grass/error.hpp"
#include "grass/pipeline.hpp"
#include "grass/textio.hpp"
#include "support.hpp"

using namespace grass;
using grass::testing::error_of;
using grass::testing::TempDir;
namespace fs = std::filesystem;

namespace {

// Generates `n` instances under dir/inst and labels them with the planted oracle.
LabeledDataset make_labeled(const TempDir& dir, std::size_t n, std::size_t folds = 3) {
  SyntheticSpec spec;
  spec.n_instances = n;
  spec.v_min = 8;
  spec.v_max = 16;
  spec.pos_prob_min = 0.1;
  spec.pos_prob_max = 0.9;
  spec.length_weights = {0, 0.3, 0.4, 0.3, 0};
  spec.seed = 5;
  generate_to_dir(spec, dir.file("inst"));
  LabelRequest req;
  req.instances_dir = dir.file("inst");
  req.manifest_path = dir.file("data/manifest.csv");
  req.oracle_path = GRASS_TEST_DATA "/planted_horn.oracle";
  req.cutoff = 100;
  req.num_folds = folds;
  req.fold_seed = 2;
  return run_label(req);
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.max_epochs = 3;
  cfg.batch_size = 8;
  cfg.threads = 1;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("key-value config parsing") {
  const auto cfg = KeyValueConfig::parse("# c\n a = 1 \nb=x y\n\n");
  CHECK(cfg.get("a") == "1");
  CHECK(cfg.get("b") == "x y");
  CHECK(cfg.get_double_or("c", 2.5) == 2.5);
  CHECK(error_of([&] { cfg.get("c"); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { KeyValueConfig::parse("novalue\n"); }) == ErrorCode::InvalidArgument);
  CHECK(KeyValueConfig::parse(cfg.to_string()).values() == cfg.values());
  CHECK(error_of([] { parse_double("1.5x", "v"); }) == ErrorCode::InvalidArgument);
  CHECK(parse_double(format_double(0.1 + 0.2), "v") == 0.1 + 0.2);
}

TEST_CASE("manifest round trip") {
  TempDir dir("manifest");
  LabeledDataset ds;
  ds.solver_names = {"a", "b"};
  ds.cutoff = 42.5;
  ds.num_folds = 2;
  ds.fold_seed = 11;
  for (int i = 0; i < 6; ++i) {
    ds.records.push_back(RuntimeRecord::make("i" + std::to_string(i), {1.0 + i, 0.1 * (i + 1) + 1.0 / 3}));
    ds.paths.push_back("../inst/i" + std::to_string(i) + ".cnf");
  }
  ds.assign_folds();
  const auto path = dir.file("m.csv");
  save_manifest(ds, path);
  const auto back = load_manifest(path);
  CHECK(back.solver_names == ds.solver_names);
  CHECK(back.cutoff == 42.5);
  CHECK(back.fold_seed == 11);
  CHECK(back.folds == ds.folds);
  REQUIRE(back.records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(back.records[i].runtimes == ds.records[i].runtimes);
  CHECK(back.resolve_path(0) == (dir.path() / "../inst/i0.cnf").string());

  write_file(path, "instance_id,path,t_1,t_2\nx,x.cnf,1\n");
  CHECK(error_of([&] { load_manifest(path); }) == ErrorCode::MissingRuntimes);
  write_file(path, "instance_id,path,t_1,t_2\nx,x.cnf,1,\n");
  CHECK(error_of([&] { load_manifest(path); }) == ErrorCode::MissingRuntimes);
  CHECK(error_of([&] { load_manifest(dir.file("nope.csv")); }) == ErrorCode::Io);
}

TEST_CASE("folds are balanced and stratified by best solver") {
  LabeledDataset ds;
  ds.solver_names = {"a", "b"};
  ds.num_folds = 5;
  for (int i = 0; i < 100; ++i) {
    ds.records.push_back(RuntimeRecord::make("r", i < 30 ? std::vector<double>{1, 2} : std::vector<double>{2, 1}));
  }
  ds.assign_folds();
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = ds.test_indices(f);
    CHECK(test.size() == 20);
    std::size_t label0 = 0;
    for (const auto i : test) label0 += ds.records[i].best_solver == 0;
    CHECK(label0 == 6);
    CHECK(ds.train_indices(f).size() == 80);
  }
  CHECK(ds.test_indices(kAllFolds).empty());
  CHECK(ds.train_indices(kAllFolds).size() == 100);
}

TEST_CASE("label writes a manifest with relative paths") {
  TempDir dir("label_pipe");
  const auto ds = make_labeled(dir, 30);
  CHECK(ds.records.size() == 30);
  CHECK(fs::exists(dir.file("data/manifest.csv.meta")));
  CHECK(fs::exists(status_path(dir.file("data/manifest.csv"))));
  const auto back = load_manifest(dir.file("data/manifest.csv"));
  CHECK(back.paths[0] == "../inst/inst_00000.cnf");
  CHECK(back.records[0].instance_id == "inst_00000");
  CHECK(load_dimacs(back.resolve_path(3)).num_vars >= 8);
  CHECK(back.folds == ds.folds);

  LabelRequest both;
  both.instances_dir = dir.file("inst");
  both.manifest_path = dir.file("x.csv");
  both.oracle_path = "a";
  both.solvers_path = "b";
  CHECK(error_of([&] { run_label(both); }) == ErrorCode::InvalidArgument);
  both.oracle_path.clear();
  both.solvers_path.clear();
  CHECK(error_of([&] { run_label(both); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([&] { list_instances(dir.file("data")); }) == ErrorCode::Io);
}

TEST_CASE("max_vars skips large instances") {
  TempDir dir("maxvars");
  SyntheticSpec spec;
  spec.n_instances = 20;
  spec.v_min = 5;
  spec.v_max = 30;
  spec.seed = 8;
  generate_to_dir(spec, dir.file("inst"));
  LabelRequest req;
  req.instances_dir = dir.file("inst");
  req.manifest_path = dir.file("m.csv");
  req.oracle_path = GRASS_TEST_DATA "/planted_horn.oracle";
  req.num_folds = 2;
  req.max_vars = 15;
  set_warnings_enabled(false);
  const auto ds = run_label(req);
  set_warnings_enabled(true);
  std::size_t expected = 0;
  for (const auto& inst : generate(spec)) expected += inst.num_vars <= 15;
  CHECK(ds.records.size() == expected);
  CHECK(expected < 20);
}

TEST_CASE("train, select and cross-validate through files") {
  TempDir dir("train_pipe");
  make_labeled(dir, 30);
  const auto manifest = dir.file("data/manifest.csv");
  const auto r = run_train(manifest, 0, tiny_config(), dir.file("m.ckpt"), dir.file("log.csv"));
  CHECK(r.log.size() == 3);
  CHECK(load_checkpoint(dir.file("m.ckpt")) == r.params);
  const auto log = read_file(dir.file("log.csv"));
  CHECK(log.rfind("epoch,train_loss,val_loss\n", 0) == 0);

  const auto ds = load_manifest(manifest);
  const auto rows = run_select_fold(dir.file("m.ckpt"), manifest, 0, 1);
  CHECK(rows.size() == ds.test_indices(0).size());
  CHECK(run_select_fold(dir.file("m.ckpt"), manifest, kAllFolds, 1).size() == 30);
  CHECK(error_of([&] { run_select_fold(dir.file("m.ckpt"), manifest, 3, 1); }) ==
        ErrorCode::InvalidArgument);

  const auto cv = run_cross_validate(manifest, tiny_config(), dir.file("cv"));
  CHECK(cv.folds.size() == 3);
  CHECK(cv.selections.size() == 30);
  for (int f = 0; f < 3; ++f) CHECK(fs::exists(dir.file("cv/fold" + std::to_string(f) + ".ckpt")));
  CHECK(read_selections(dir.file("cv/selections.csv")).size() == 30);
  // Out-of-fold selections agree with the fold's own checkpoint.
  const auto graphs = build_dataset_graphs(ds, FeatureMode::CustomPlusPE, 0, 1);
  for (std::size_t i = 0; i < 30; ++i) {
    const auto p = load_checkpoint(dir.file("cv/fold" + std::to_string(ds.folds[i]) + ".ckpt"));
    CHECK(select_solver(graphs[i], p) == cv.selections[i]);
  }
}

TEST_CASE("baselines never train on the fold they predict") {
  TempDir dir("base_pipe");
  auto ds = make_labeled(dir, 40, 4);
  const auto features = dataset_global_features(ds, 1);
  const auto oracle = baseline_selections(ds, features, BaselineMethod::Oracle, kAllFolds);
  for (std::size_t i = 0; i < ds.records.size(); ++i) CHECK(oracle[i] == ds.records[i].best_solver);

  // Poison one fold's labels; predictions on that fold must not change.
  const auto before = baseline_selections(ds, features, BaselineMethod::Knn, 1);
  for (const auto i : ds.test_indices(1)) {
    std::vector<double> t(3, 50.0);
    t[(ds.records[i].best_solver + 1) % 3] = 0.5;
    ds.records[i] = RuntimeRecord::make(ds.records[i].instance_id, t);
  }
  CHECK(baseline_selections(ds, features, BaselineMethod::Knn, 1) == before);
  CHECK(baseline_selections(ds, features, BaselineMethod::Ridge, kAllFolds).size() == 40);
  CHECK(baseline_selections(ds, features, BaselineMethod::BestSingle, 2).size() == ds.test_indices(2).size());
  CHECK(error_of([&] { baseline_selections(ds, features, BaselineMethod::Ridge, 4); }) ==
        ErrorCode::InvalidArgument);
  CHECK(parse_baseline_method("best-single") == BaselineMethod::BestSingle);
  CHECK(std::string(baseline_method_name(BaselineMethod::Knn)) == "knn");
  CHECK(error_of([] { parse_baseline_method("svm"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("featurize writes a graph export") {
  TempDir dir("feat");
  save_dimacs(grass::testing::t1(), dir.file("t1.cnf"));
  const double s = run_featurize(dir.file("t1.cnf"), FeatureMode::CustomNoPE, 0, dir.file("out/g.txt"));
  CHECK(s >= 0.0);
  const auto text = read_file(dir.file("out/g.txt"));
  CHECK(text.find("# feature_mode custom\n") != std::string::npos);
  CHECK(text.find("nodes 9\n") != std::string::npos);
}

TEST_CASE("permute study through the pipeline") {
  TempDir dir("perm_pipe");
  SyntheticSpec spec;
  spec.n_instances = 10;
  spec.seed = 3;
  generate_to_dir(spec, dir.file("inst"));
  write_file(dir.file("o.cfg"), "seed = 1\nsolvers = 1\nsolver.0.name = s\nsolver.0.base = 2\nsolver.0.alpha = 0.5\n");
  PermuteStudyRequest req;
  req.instances_dir = dir.file("inst");
  req.oracle_path = dir.file("o.cfg");
  req.study.instances = 5;
  req.study.shuffles = 4;
  req.out_path = dir.file("p.csv");
  const auto sum = run_permute_study(req);
  CHECK(sum.rows == 5);
  CHECK(sum.clause_dominance == 1.0);
  CHECK(sum.mean_var_std == 0.0);
  CHECK(sum.mean_clause_std > 0.0);
  req.solver = 1;
  CHECK(error_of([&] { run_permute_study(req); }) == ErrorCode::InvalidArgument);
}
