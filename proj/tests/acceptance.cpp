// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grass/baselines.hpp"
#include "grass/cnf.hpp"
#include "grass/error.hpp"
#include "grass/evaluation.hpp"
#include "grass/graph.hpp"
#include "grass/harness.hpp"
#include "grass/nn.hpp"
#include "grass/pipeline.hpp"
#include "grass/textio.hpp"
#include "grass/training.hpp"
#include "support.hpp"

using namespace grass;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure and keeps a short summary for the PASS/FAIL line.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (out_.pass) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// ------------------------------------------------------------------------ 1

Outcome gradient_correctness() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto inst = grass::testing::t1();
  const auto g = build_graph(inst);
  const auto rec = RuntimeRecord::make("T1", {1.0, 10.0, 4.0});
  double worst = 0.0;
  std::size_t coords = 0;
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    ModelConfig mc;
    mc.hidden = 4;
    mc.layers = 2;
    mc.num_solvers = 3;
    auto p = ModelParameters::initialize(mc, seed);
    Tape tape;
    const auto out = forward(g, p, &tape);
    const auto grads = backward(g, p, tape, regret_loss_grad(out.probs, rec));
    for (std::size_t ti = 0; ti < p.tensors().size(); ++ti) {
      for (std::size_t j = 0; j < p.tensor(ti).data.size(); ++j) {
        float& w = p.tensor(ti).data[j];
        const float orig = w;
        const float hi = orig + 1e-4f, lo = orig - 1e-4f;
        w = hi;
        const double f_hi = regret_loss(forward(g, p).probs, rec);
        w = lo;
        const double f_lo = regret_loss(forward(g, p).probs, rec);
        w = orig;
        const double fd = (f_hi - f_lo) / (static_cast<double>(hi) - static_cast<double>(lo));
        const double an = grads.tensors[ti][j];
        const double scale = std::max(std::abs(fd), std::abs(an));
        // Coordinates whose gradient vanishes analytically are compared absolutely.
        const double rel = scale < 1e-7 ? 0.0 : std::abs(fd - an) / scale;
        worst = std::max(worst, rel);
        ++coords;
        c.expect(rel < 1e-3, "seed " + std::to_string(seed) + " " + p.tensor(ti).name + "[" +
                                 std::to_string(j) + "] rel err " + fmt(rel));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 10.0, "took " + fmt(secs) + " s");
  c.note(std::to_string(coords) + " coordinates, max rel err " + fmt(worst, 3));
  return c.result();
}

// ------------------------------------------------------------------------ 2

Outcome loss_contract() {
  Check c;
  const auto r = RuntimeRecord::make("x", {1.0, 10.0});
  c.expect(regret_loss(std::vector<double>{0.5, 0.5}, r) == 20.25, "p=[.5,.5] loss != 20.25");
  c.expect(regret_loss(std::vector<double>{1.0, 0.0}, r) == 0.0, "one-hot loss != 0");
  const auto r3 = RuntimeRecord::make("y", {7.0, 2.5, 9.0});
  c.expect(regret_loss(std::vector<double>{0.0, 1.0, 0.0}, r3) == 0.0, "one-hot loss != 0 (K=3)");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::lognormal_distribution<double> t(0.0, 2.0);
  double min_loss = 1e300;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t k = 2 + n % 7;
    std::vector<double> p(k), rt(k);
    double z = 0;
    for (std::size_t i = 0; i < k; ++i) {
      p[i] = u(rng);
      z += p[i];
      rt[i] = std::max(1e-6, t(rng));
    }
    for (auto& v : p) v /= z;
    min_loss = std::min(min_loss, regret_loss(p, RuntimeRecord::make("r", rt)));
  }
  c.expect(min_loss >= 0.0, "negative loss " + fmt(min_loss));
  c.note("20.25 and 0 exact; min over 10000 draws " + fmt(min_loss, 3));
  return c.result();
}

// ------------------------------------------------------------------------ 3

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

Outcome permutation_invariance() {
  Check c;
  std::mt19937_64 rng(3);
  ModelConfig mc;
  mc.hidden = 16;
  mc.layers = 2;
  mc.num_solvers = 3;
  const auto p_pe = ModelParameters::initialize(mc, 30);
  mc.feature_mode = FeatureMode::CustomNoPE;
  const auto p_nope = ModelParameters::initialize(mc, 30);

  double worst_var = 0, worst_clause = 0;
  std::size_t nontrivial = 0, changed = 0;
  for (int n = 0; n < 50; ++n) {
    const auto inst = grass::testing::random_instance(rng, 40, 120);
    std::vector<std::uint32_t> map(inst.num_vars);
    std::iota(map.begin(), map.end(), 1u);
    std::shuffle(map.begin(), map.end(), rng);
    const auto relabeled = relabel_variables(inst, map);
    worst_var = std::max(worst_var, max_abs_diff(forward(build_graph(inst), p_pe).probs,
                                                 forward(build_graph(relabeled), p_pe).probs));

    std::vector<std::uint32_t> order(inst.num_clauses());
    std::iota(order.begin(), order.end(), 0u);
    std::shuffle(order.begin(), order.end(), rng);
    const auto shuffled = reorder_clauses(inst, order);
    const auto g0 = build_graph(inst, FeatureMode::CustomNoPE);
    const auto g1 = build_graph(shuffled, FeatureMode::CustomNoPE);
    worst_clause = std::max(worst_clause, max_abs_diff(forward(g0, p_nope).probs, forward(g1, p_nope).probs));

    // Nontrivial: the clause sequence actually changes. Changed: some clause
    // carries a different feature vector at its new position.
    if (shuffled.clauses == inst.clauses) continue;
    ++nontrivial;
    const auto h0 = build_graph(inst);
    const auto h1 = build_graph(shuffled);
    bool any = false;
    for (std::size_t pos = 0; pos < order.size() && !any; ++pos) {
      const auto a = h0.clause_features.row(order[pos]);
      const auto b = h1.clause_features.row(pos);
      any = !std::equal(a.begin(), a.end(), b.begin());
    }
    changed += any;
  }
  c.expect(worst_var <= 5e-6, "variable relabeling moved output by " + fmt(worst_var));
  c.expect(worst_clause <= 5e-6, "clause shuffle without PE moved output by " + fmt(worst_clause));
  c.expect(nontrivial > 0 && changed * 10 >= nontrivial * 9,
           "PE changed features on " + std::to_string(changed) + "/" + std::to_string(nontrivial));
  c.note("relabel " + fmt(worst_var, 2) + ", shuffle/noPE " + fmt(worst_clause, 2) + ", PE changed " +
         std::to_string(changed) + "/" + std::to_string(nontrivial));
  return c.result();
}

// ------------------------------------------------------------------------ 4

Outcome feature_fidelity() {
  Check c;
  const auto inst = grass::testing::t1();
  const auto g = build_graph(inst);
  auto near = [&](float got, long double want, const std::string& what) {
    const double w = static_cast<double>(static_cast<float>(want));
    c.expect(std::abs(static_cast<double>(got) - w) <= 1e-9, what + " = " + fmt(got, 9));
  };
  c.expect(g.num_nodes() == 9 && g.n_clauses == 3 && g.n_vars == 3, "T1 node counts");
  c.expect(g.edges_lit_clause.size() == 6 && g.num_pos_neg_edges() == 3, "T1 edge counts");
  const long double third = 1.0L / 3, two_thirds = 2.0L / 3;
  const long double x1[] = {third, third, third};
  const long double nx1[] = {two_thirds, third, 1.0L};
  for (int j = 0; j < 3; ++j) {
    near(g.pos_lit_features.at(0, j), x1[j], "x1[" + std::to_string(j) + "]");
    near(g.neg_lit_features.at(0, j), nx1[j], "-x1[" + std::to_string(j) + "]");
  }
  const long double c1[] = {0, 1, 0, 1, two_thirds, third, 1};
  const long double c2[] = {1, third, 0, 0, 0, 1, 0};
  for (int j = 0; j < 7; ++j) {
    near(g.clause_features.at(1, j), c1[j], "clause1[" + std::to_string(j) + "]");
    near(g.clause_features.at(2, j), c2[j], "clause2[" + std::to_string(j) + "]");
  }
  for (const std::size_t k : {1u, 2u}) {
    for (std::size_t i = 0; i < kPositionalDim / 2; ++i) {
      const long double angle = static_cast<long double>(k) / std::pow(10000.0L, 2.0L * i / 10.0L);
      near(g.clause_features.at(k, 7 + 2 * i), std::sin(angle), "PE(" + std::to_string(k) + ")");
      near(g.clause_features.at(k, 8 + 2 * i), std::cos(angle), "PE(" + std::to_string(k) + ")");
    }
  }
  c.expect(std::abs(g.clause_features.at(1, 7) - 0.841471) < 5e-7, "PE(1)[0] vs 0.841471");
  c.expect(std::abs(g.clause_features.at(1, 8) - 0.540302) < 5e-7, "PE(1)[1] vs 0.540302");
  c.expect(std::abs(g.clause_features.at(1, 9) - 0.157827) < 5e-7, "PE(1)[2] vs 0.157827");
  c.note("literal, clause and PE values of T1 match");
  return c.result();
}

// ------------------------------------------------------------------------ 5

Outcome learning_signal(const fs::path& work) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  SyntheticSpec spec;
  spec.n_instances = 2000;
  spec.pos_prob_min = 0.1;
  spec.pos_prob_max = 0.9;
  spec.length_weights = {0.0, 0.3, 0.4, 0.3, 0.0};
  spec.seed = 5;
  generate_to_dir(spec, (work / "inst").string());
  LabelRequest req;
  req.instances_dir = (work / "inst").string();
  req.manifest_path = (work / "manifest.csv").string();
  req.oracle_path = GRASS_TEST_DATA "/planted_horn.oracle";
  req.num_folds = 5;
  req.fold_seed = 5;
  const auto ds = run_label(req);

  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.seed = 5;
  const auto graphs = build_dataset_graphs(ds, cfg.feature_mode, 0, 0);
  const auto cv = cross_validate_gnn(ds, graphs, cfg);
  const auto features = dataset_global_features(ds, 0);
  const auto gnn = evaluate(cv.selections, ds.records, ds.cutoff);
  auto base = [&](BaselineMethod m) {
    return evaluate(baseline_selections(ds, features, m, kAllFolds), ds.records, ds.cutoff);
  };
  const auto single = base(BaselineMethod::BestSingle);
  const auto ridge = base(BaselineMethod::Ridge);
  const auto knn = base(BaselineMethod::Knn);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

  std::cout << "  criterion 5 detail: gnn avg " << fmt(gnn.avg_runtime) << " acc " << fmt(gnn.accuracy)
            << " | best-single " << fmt(single.avg_runtime) << " | ridge " << fmt(ridge.avg_runtime)
            << " acc " << fmt(ridge.accuracy) << " | knn " << fmt(knn.avg_runtime) << " acc "
            << fmt(knn.accuracy) << " | oracle " << fmt(gnn.mean_best) << " | " << fmt(minutes, 3)
            << " min\n";
  c.expect(gnn.accuracy >= 0.80, "accuracy " + fmt(gnn.accuracy));
  c.expect(gnn.avg_runtime <= 0.95 * single.avg_runtime,
           "avg " + fmt(gnn.avg_runtime) + " vs best-single " + fmt(single.avg_runtime));
  c.expect(gnn.avg_runtime <= ridge.avg_runtime, "avg " + fmt(gnn.avg_runtime) + " vs ridge " + fmt(ridge.avg_runtime));
  c.expect(gnn.avg_runtime <= knn.avg_runtime, "avg " + fmt(gnn.avg_runtime) + " vs knn " + fmt(knn.avg_runtime));
  c.expect(minutes < 30.0, "took " + fmt(minutes) + " min");
  c.note("acc " + fmt(gnn.accuracy, 3) + ", avg " + fmt(gnn.avg_runtime) + " s vs best-single " +
         fmt(single.avg_runtime) + ", ridge " + fmt(ridge.avg_runtime) + ", knn " + fmt(knn.avg_runtime));
  return c.result();
}

// ------------------------------------------------------------------------ 6

Outcome metrics_oracle() {
  Check c;
  const std::vector<RuntimeRecord> two = {RuntimeRecord::make("a", {1.0, 10.0}),
                                          RuntimeRecord::make("b", {5.0, 2.0})};
  const auto rep = evaluate(std::vector<std::size_t>{0, 0}, two, 4.0);
  c.expect(rep.avg_runtime == 3.0, "avg " + fmt(rep.avg_runtime));
  c.expect(rep.solved_pct == 50.0, "solved " + fmt(rep.solved_pct));
  c.expect(rep.accuracy == 0.5, "acc " + fmt(rep.accuracy));
  c.expect(rep.cost_of_wrong == 3.0, "cost " + fmt(rep.cost_of_wrong));

  std::mt19937_64 rng(6);
  std::lognormal_distribution<double> t(1.0, 1.5);
  std::size_t violations = 0;
  for (int table = 0; table < 1000; ++table) {
    const std::size_t k = 2 + table % 5, n = 1 + table % 50;
    std::vector<RuntimeRecord> recs;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(k);
      for (auto& v : r) v = std::clamp(t(rng), 0.001, 500.0);
      recs.push_back(RuntimeRecord::make("r", r));
    }
    std::vector<std::size_t> any(n);
    for (auto& s : any) s = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    const auto r = evaluate(any, recs);
    violations += r.mean_best > r.avg_runtime;
    for (std::size_t fixed = 0; fixed < k; ++fixed) {
      const auto f = evaluate(std::vector<std::size_t>(n, fixed), recs);
      violations += f.mean_best > f.avg_runtime;
    }
  }
  c.expect(violations == 0, std::to_string(violations) + " oracle-bound violations");
  c.note("2-instance table exact; oracle bound holds on 1000 tables");
  return c.result();
}

// ------------------------------------------------------------------------ 7

Outcome permute_shape() {
  Check c;
  SyntheticSpec spec;
  spec.n_instances = 60;
  spec.seed = 7;
  const auto pool = generate(spec);
  OracleSpec oracle;
  oracle.seed = 7;
  SolverProfile s;
  s.name = "s";
  s.base_cost = 10.0;
  s.weights[3] = 1.0;  // horn_frac
  s.order_sensitivity = 0.5;
  oracle.solvers = {s};
  PermuteStudyConfig cfg;
  cfg.instances = 30;
  cfg.shuffles = 20;
  cfg.seed = 7;
  auto runtime = [&](const CnfInstance& i) { return oracle_runtimes(i, oracle)[0]; };
  const auto rows = permute_study(pool, cfg, runtime);
  const double dom = clause_dominance_fraction(rows);
  c.expect(rows.size() == 30, "rows " + std::to_string(rows.size()));
  c.expect(dom >= 0.8, "clause dominance " + fmt(dom));

  oracle.solvers[0].order_sensitivity = 0.0;
  const auto flat = permute_study(pool, cfg, runtime);
  bool exact_zero = true;
  for (const auto& r : flat) exact_zero = exact_zero && r.clause.std == 0.0;
  c.expect(exact_zero, "alpha=0 clause std not exactly 0");
  c.note("alpha>0 dominance " + fmt(dom, 3) + "; alpha=0 clause std exactly 0");
  return c.result();
}

// ------------------------------------------------------------------------ 8

struct RunFiles {
  std::string manifest, checkpoint, selections, report, baseline;
};

RunFiles pipeline_run(const fs::path& dir) {
  SyntheticSpec spec;
  spec.n_instances = 60;
  spec.seed = 8;
  generate_to_dir(spec, (dir / "inst").string());
  LabelRequest req;
  req.instances_dir = (dir / "inst").string();
  req.manifest_path = (dir / "manifest.csv").string();
  req.oracle_path = GRASS_TEST_DATA "/planted_horn.oracle";
  req.num_folds = 3;
  req.fold_seed = 8;
  run_label(req);
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.max_epochs = 5;
  cfg.seed = 8;
  const auto ckpt = (dir / "model.ckpt").string();
  run_train(req.manifest_path, 0, cfg, ckpt, (dir / "train.log.csv").string());
  const auto rows = run_select_fold(ckpt, req.manifest_path, 0, 0);
  write_selections(rows, (dir / "selections.csv").string());
  const auto ds = load_manifest(req.manifest_path);
  const auto matched = match_selections(read_selections((dir / "selections.csv").string()), ds);
  write_file((dir / "report.csv").string(), report_csv(evaluate(matched.selections, matched.records, ds.cutoff)));
  const auto knn = baseline_selections(ds, dataset_global_features(ds, 0), BaselineMethod::Knn, kAllFolds);
  write_selections(make_selection_rows(knn, ds.records), (dir / "knn.csv").string());
  return {read_file(req.manifest_path), read_file(ckpt), read_file((dir / "selections.csv").string()),
          read_file((dir / "report.csv").string()), read_file((dir / "knn.csv").string())};
}

Outcome determinism(const fs::path& work) {
  Check c;
  const auto a = pipeline_run(work / "a");
  const auto b = pipeline_run(work / "b");
  c.expect(a.manifest == b.manifest, "manifests differ");
  c.expect(a.checkpoint == b.checkpoint, "checkpoints differ");
  c.expect(a.selections == b.selections, "selections differ");
  c.expect(a.report == b.report, "reports differ");
  c.expect(a.baseline == b.baseline, "baseline selections differ");

  const auto params = load_checkpoint((work / "a" / "model.ckpt").string());
  save_checkpoint(params, (work / "copy.ckpt").string());
  const auto reloaded = load_checkpoint((work / "copy.ckpt").string());
  c.expect(read_file((work / "copy.ckpt").string()) == a.checkpoint, "re-saved checkpoint differs");
  SyntheticSpec spec;
  spec.n_instances = 20;
  spec.seed = 88;
  bool bit_exact = true;
  for (const auto& inst : generate(spec)) {
    const auto g = build_graph(inst);
    const auto x = forward(g, params).probs;
    const auto y = forward(g, reloaded).probs;
    bit_exact = bit_exact && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
  }
  c.expect(bit_exact, "reloaded checkpoint changes forward output");
  c.note("two seeded runs byte-identical (" + std::to_string(a.checkpoint.size()) +
         "-byte checkpoint); reload bit-exact");
  return c.result();
}

// ------------------------------------------------------------------------ 9

Outcome parser_robustness() {
  Check c;
  SyntheticSpec spec;
  spec.n_instances = 1000;
  spec.v_min = 1;
  spec.v_max = 60;
  spec.ratio_min = 0.5;
  spec.ratio_max = 6.0;
  spec.length_weights = {0.1, 0.2, 0.3, 0.2, 0.2};
  spec.seed = 9;
  std::size_t mismatches = 0;
  for (const auto& inst : generate(spec)) {
    const auto text = serialize_dimacs(inst);
    const auto back = parse_dimacs(text);
    mismatches += !(back == inst) || serialize_dimacs(back) != text;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");
  std::size_t wrong = 0;
  for (const auto& mc : grass::testing::malformed_suite()) {
    const auto got = grass::testing::error_of([&] { parse_dimacs(mc.text); });
    if (got != mc.code) {
      ++wrong;
      c.expect(false, std::string("malformed case '") + mc.text + "' gave " +
                          (got ? error_code_name(*got) : "no error"));
    }
  }
  c.note("1000 round trips identical; " + std::to_string(grass::testing::malformed_suite().size()) +
         " malformed inputs raise their error class");
  return c.result();
}

}  // namespace

int main(int argc, char** argv) {
  set_warnings_enabled(false);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  grass::testing::TempDir work("acceptance");

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"regret-loss contract", loss_contract},
      {"permutation invariances", permutation_invariance},
      {"feature fidelity", feature_fidelity},
      {"learning signal", [&] { return learning_signal(work.path() / "c5"); }},
      {"metrics oracle", metrics_oracle},
      {"permute-study shape", permute_shape},
      {"determinism and persistence", [&] { return determinism(work.path() / "c8"); }},
      {"parser robustness", parser_robustness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << out.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
