#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "grass/dataset.hpp"
#include "grass/error.hpp"
#include "grass/graph.hpp"
#include "grass/training.hpp"
#include "support.hpp"

using namespace grass;
using grass::testing::error_of;

namespace {

// Instances whose clauses are all Horn (at most one positive literal) or all
// strongly positive; the first kind favours solver 0, the second solver 1.
CnfInstance planted_instance(std::mt19937_64& rng, bool horn) {
  CnfInstance inst;
  inst.num_vars = std::uniform_int_distribution<std::uint32_t>(12, 24)(rng);
  const std::size_t m = 3 * inst.num_vars;
  std::uniform_int_distribution<std::uint32_t> var(1, inst.num_vars);
  for (std::size_t c = 0; c < m; ++c) {
    Clause cl;
    while (cl.size() < 3) {
      const auto v = static_cast<Literal>(var(rng));
      if (std::find_if(cl.begin(), cl.end(), [&](Literal l) { return std::abs(l) == v; }) != cl.end())
        continue;
      const bool positive = horn ? cl.empty() && std::bernoulli_distribution(0.5)(rng)
                                 : std::bernoulli_distribution(0.85)(rng);
      cl.push_back(positive ? v : -v);
    }
    inst.clauses.push_back(std::move(cl));
  }
  return inst;
}

struct Planted {
  std::vector<LiteralClauseGraph> graphs;
  std::vector<RuntimeRecord> records;
  std::vector<TrainingExample> examples(std::size_t begin, std::size_t end) const {
    std::vector<TrainingExample> out;
    for (std::size_t i = begin; i < end; ++i) out.push_back({&graphs[i], &records[i]});
    return out;
  }
};

Planted planted_set(std::size_t n, std::uint64_t seed) {
  Planted p;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const bool horn = i % 2 == 0;
    p.graphs.push_back(build_graph(planted_instance(rng, horn)));
    p.records.push_back(RuntimeRecord::make("i" + std::to_string(i),
                                            horn ? std::vector<double>{1.0, 10.0}
                                                 : std::vector<double>{10.0, 1.0}));
  }
  return p;
}

// Textbook bias-corrected Adam on a single scalar.
struct ScalarAdam {
  double m = 0, v = 0;
  int t = 0;
  double step(double x, double g, double lr) {
    ++t;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    return x - lr * mh / (std::sqrt(vh) + 1e-8);
  }
};

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.layers = 2;
  cfg.max_epochs = 40;
  cfg.batch_size = 16;
  cfg.patience = 40;
  cfg.learning_rate = 5e-3;
  cfg.seed = 3;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("regret loss on hand-computed values") {
  const auto r = RuntimeRecord::make("a", {1.0, 10.0});
  const std::vector<double> half = {0.5, 0.5};
  CHECK(regret_loss(half, r) == doctest::Approx(20.25));
  const auto g = regret_loss_grad(half, r);
  CHECK(g[0] == doctest::Approx(9.0));
  CHECK(g[1] == doctest::Approx(90.0));
  const std::vector<double> one_hot = {1.0, 0.0};
  CHECK(regret_loss(one_hot, r) == 0.0);
  CHECK(regret_loss(std::vector<double>{0.0, 1.0}, r) == doctest::Approx(81.0));
  for (const double g0 : regret_loss_grad(one_hot, r)) CHECK(g0 == 0.0);
  CHECK(error_of([&] { regret_loss(std::vector<double>{1.0}, r); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("regret loss is non-negative on random distributions") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::lognormal_distribution<double> t(0.0, 2.0);
  for (int n = 0; n < 10000; ++n) {
    const std::size_t k = 2 + n % 6;
    std::vector<double> probs(k), runtimes(k);
    double z = 0;
    for (std::size_t i = 0; i < k; ++i) {
      probs[i] = u(rng);
      z += probs[i];
      runtimes[i] = std::max(1e-6, t(rng));
    }
    for (auto& p : probs) p /= z;
    const auto rec = RuntimeRecord::make("r", runtimes);
    const double loss = regret_loss(probs, rec);
    REQUIRE(loss >= 0.0);
    double expected = 0;
    for (std::size_t i = 0; i < k; ++i) expected += probs[i] * runtimes[i];
    CHECK(loss == doctest::Approx((expected - rec.best_time) * (expected - rec.best_time)));
  }
}

TEST_CASE("loss gradient matches finite differences") {
  const auto r = RuntimeRecord::make("a", {3.0, 0.5, 7.0});
  std::vector<double> p = {0.2, 0.3, 0.5};
  const auto g = regret_loss_grad(p, r);
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto hi = p, lo = p;
    hi[i] += 1e-6;
    lo[i] -= 1e-6;
    CHECK(g[i] == doctest::Approx((regret_loss(hi, r) - regret_loss(lo, r)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("runtime records pick the lowest-index optimum") {
  const auto r = RuntimeRecord::make("x", {4.0, 2.0, 2.0});
  CHECK(r.best_solver == 1);
  CHECK(r.best_time == 2.0);
  CHECK(r.is_optimal(2));
  CHECK_FALSE(r.is_optimal(0));
  CHECK(error_of([] { RuntimeRecord::make("x", {}); }) == ErrorCode::MissingRuntimes);
  CHECK(error_of([] { RuntimeRecord::make("x", {1.0, 0.0}); }) == ErrorCode::MissingRuntimes);
  CHECK(error_of([] { RuntimeRecord::make("x", {1.0, std::nan("")}); }) == ErrorCode::MissingRuntimes);
}

TEST_CASE("adam follows the bias-corrected update") {
  ModelConfig mc;
  mc.hidden = 2;
  mc.layers = 1;
  mc.num_solvers = 2;
  auto p = ModelParameters::initialize(mc, 1);
  const auto start = p;
  auto state = AdamState::for_params(p);
  AdamConfig cfg;
  cfg.lr = 0.01;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> gs;
  std::vector<ScalarAdam> ref(p.num_scalars());
  std::vector<double> x;
  for (const auto& t : p.tensors())
    for (const float v : t.data) x.push_back(v);

  for (int step = 0; step < 5; ++step) {
    auto g = Gradients::zeros_like(p);
    std::size_t flat = 0;
    for (auto& t : g.tensors)
      for (auto& v : t) {
        v = nd(rng);
        x[flat] = static_cast<float>(ref[flat].step(x[flat], v, cfg.lr));
        ++flat;
      }
    adam_step(p, g, state, cfg);
    if (step == 0) {
      // First step moves each weight by lr in the direction opposite its gradient.
      std::size_t i = 0;
      for (std::size_t ti = 0; ti < p.tensors().size(); ++ti)
        for (std::size_t j = 0; j < p.tensor(ti).data.size(); ++j, ++i) {
          const double moved = static_cast<double>(p.tensor(ti).data[j]) - start.tensor(ti).data[j];
          CHECK(std::abs(moved) == doctest::Approx(cfg.lr).epsilon(1e-4));
          CHECK((moved < 0) == (g.tensors[ti][j] > 0));
        }
    }
  }
  CHECK(state.step == 5);
  std::size_t flat = 0;
  for (const auto& t : p.tensors())
    for (const float v : t.data) CHECK(v == doctest::Approx(x[flat++]).epsilon(1e-6));

  auto wrong = Gradients::zeros_like(p);
  wrong.tensors.pop_back();
  CHECK(error_of([&] { adam_step(p, wrong, state, cfg); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("training config validation") {
  auto check_bad = [](auto mutate) {
    TrainConfig cfg;
    mutate(cfg);
    return error_of([&] { cfg.validate(); });
  };
  CHECK_FALSE(check_bad([](TrainConfig&) {}));
  CHECK(check_bad([](TrainConfig& c) { c.learning_rate = 0; }) == ErrorCode::InvalidArgument);
  CHECK(check_bad([](TrainConfig& c) { c.batch_size = 0; }) == ErrorCode::InvalidArgument);
  CHECK(check_bad([](TrainConfig& c) { c.patience = 0; }) == ErrorCode::InvalidArgument);
  CHECK(check_bad([](TrainConfig& c) { c.val_fraction = 1.0; }) == ErrorCode::InvalidArgument);
  CHECK(check_bad([](TrainConfig& c) { c.hidden = 0; }) == ErrorCode::InvalidArgument);
  CHECK(check_bad([](TrainConfig& c) { c.layers = 0; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fit learns a planted dominance rule") {
  const auto data = planted_set(400, 61);
  const auto train_set = data.examples(0, 300);
  const auto test_set = data.examples(300, 400);
  const auto cfg = quick_config();
  const auto result = fit(train_set, 2, cfg);
  ModelConfig mc;
  mc.hidden = cfg.hidden;
  mc.layers = cfg.layers;
  mc.num_solvers = 2;
  const auto init = ModelParameters::initialize(mc, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const double before = mean_regret(init, train_set);
  const double after = mean_regret(result.params, train_set);
  MESSAGE("regret before " << before << " after " << after);
  CHECK(after <= 0.1 * before);

  std::size_t correct = 0;
  for (const auto& ex : test_set) correct += select_solver(*ex.graph, result.params) == ex.record->best_solver;
  CHECK(correct >= 95);
}

TEST_CASE("early stopping keeps the best validation epoch") {
  const auto data = planted_set(80, 62);
  auto cfg = quick_config();
  cfg.learning_rate = 0.05;
  cfg.patience = 3;
  cfg.max_epochs = 60;
  const auto ex = data.examples(0, 80);
  const auto result = fit(ex, 2, cfg);
  REQUIRE_FALSE(result.log.empty());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  for (const auto& e : result.log) {
    if (e.val_loss < best) {
      best = e.val_loss;
      best_epoch = e.epoch;
    }
  }
  CHECK(result.best_epoch == best_epoch);
  CHECK(result.best_val_loss == best);
  if (result.log.size() < cfg.max_epochs) CHECK(result.log.size() == best_epoch + cfg.patience);
  CHECK(result.log.back().epoch == result.log.size());
}

TEST_CASE("fit is deterministic and independent of thread count") {
  const auto data = planted_set(60, 63);
  auto cfg = quick_config();
  cfg.max_epochs = 5;
  const auto ex = data.examples(0, 60);
  const auto a = fit(ex, 2, cfg);
  cfg.threads = 4;
  const auto b = fit(ex, 2, cfg);
  CHECK(a.params == b.params);
  CHECK(a.log.back().val_loss == b.log.back().val_loss);
  cfg.seed = 4;
  CHECK_FALSE(fit(ex, 2, cfg).params == a.params);
}

TEST_CASE("zero epochs returns the initial parameters") {
  const auto data = planted_set(10, 64);
  auto cfg = quick_config();
  cfg.max_epochs = 0;
  const auto r = fit(data.examples(0, 10), 2, cfg);
  CHECK(r.log.empty());
  CHECK(r.best_epoch == 0);
}

TEST_CASE("fit rejects inconsistent inputs") {
  const auto data = planted_set(10, 65);
  const auto cfg = quick_config();
  CHECK(error_of([&] { fit({}, 2, cfg); }) == ErrorCode::EmptyFold);
  CHECK(error_of([&] { fit(data.examples(0, 10), 3, cfg); }) == ErrorCode::MissingRuntimes);
  auto other = cfg;
  other.feature_mode = FeatureMode::Random;
  CHECK(error_of([&] { fit(data.examples(0, 10), 2, other); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("train respects folds") {
  const auto data = planted_set(20, 66);
  LabeledDataset ds;
  ds.records = data.records;
  ds.solver_names = {"horn", "other"};
  ds.num_folds = 4;
  for (std::size_t i = 0; i < 20; ++i) ds.paths.push_back("x.cnf");
  ds.assign_folds();
  auto cfg = quick_config();
  cfg.max_epochs = 2;
  const auto r = train(ds, data.graphs, 1, cfg);
  CHECK(r.params.solver_names == ds.solver_names);
  CHECK(error_of([&] { train(ds, data.graphs, 4, cfg); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([&] { train(ds, std::span(data.graphs).first(5), 0, cfg); }) ==
        ErrorCode::InvalidArgument);
  LabeledDataset single = ds;
  single.num_folds = 1;
  single.assign_folds();
  CHECK(error_of([&] { train(single, data.graphs, 0, cfg); }) == ErrorCode::EmptyFold);
}

TEST_CASE("selection rejects a foreign feature schema") {
  ModelConfig mc;
  mc.hidden = 4;
  mc.layers = 1;
  mc.num_solvers = 2;
  auto p = ModelParameters::initialize(mc, 1);
  CHECK_FALSE(error_of([&] { select_solver(grass::testing::t1(), p); }));
  p.set_schema_hash(p.schema_hash() + 1);
  CHECK(error_of([&] { select_solver(grass::testing::t1(), p); }) == ErrorCode::SchemaMismatch);
}
