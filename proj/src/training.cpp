#include "grass/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "grass/error.hpp"
#include "grass/parallel.hpp"
#include "grass/textio.hpp"

namespace grass {

namespace {

void check_probs(std::span<const double> probs, const RuntimeRecord& record) {
  if (probs.size() != record.runtimes.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "distribution has " + std::to_string(probs.size()) + " entries, record has " +
                    std::to_string(record.runtimes.size()) + " runtimes");
  }
}

double expected_gap(std::span<const double> probs, const RuntimeRecord& record) {
  double expected = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) expected += probs[k] * record.runtimes[k];
  return expected - record.best_time;
}

RuntimeRecord log_record(const RuntimeRecord& r) {
  RuntimeRecord out = r;
  for (auto& t : out.runtimes) t = std::log1p(t);
  out.best_time = std::log1p(r.best_time);
  return out;
}

struct ExampleLoss {
  double loss = 0.0;
  Gradients grads;
};

ExampleLoss loss_and_grad(const ModelParameters& params, const LiteralClauseGraph& g,
                          const RuntimeRecord& r) {
  Tape tape;
  const auto dist = forward(g, params, &tape);
  ExampleLoss out;
  out.loss = regret_loss(dist.probs, r);
  const auto dprobs = regret_loss_grad(dist.probs, r);
  out.grads = backward(g, params, tape, dprobs);
  return out;
}

}  // namespace

double regret_loss(std::span<const double> probs, const RuntimeRecord& record) {
  check_probs(probs, record);
  const double gap = expected_gap(probs, record);
  return gap * gap;
}

std::vector<double> regret_loss_grad(std::span<const double> probs,
                                     const RuntimeRecord& record) {
  check_probs(probs, record);
  const double gap = expected_gap(probs, record);
  std::vector<double> g(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) g[k] = 2.0 * gap * record.runtimes[k];
  return g;
}

AdamState AdamState::for_params(const ModelParameters& p) {
  AdamState s;
  for (const auto& t : p.tensors()) {
    s.m.emplace_back(t.data.size(), 0.0);
    s.v.emplace_back(t.data.size(), 0.0);
  }
  return s;
}

void adam_step(ModelParameters& params, const Gradients& grads, AdamState& state,
               const AdamConfig& cfg) {
  auto& tensors = params.tensors();
  if (grads.tensors.size() != tensors.size() || state.m.size() != tensors.size() ||
      state.v.size() != tensors.size()) {
    throw Error(ErrorCode::DimensionMismatch, "optimizer state does not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& p = tensors[i].data;
    const auto& g = grads.tensors[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
      throw Error(ErrorCode::DimensionMismatch, "gradient shape mismatch for " + tensors[i].name);
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] = static_cast<float>(p[j] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
  if (batch_size == 0) bad("batch_size must be positive");
  if (patience == 0) bad("patience must be positive");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) bad("val_fraction must lie in (0, 1)");
  if (hidden == 0) bad("hidden width must be positive");
  if (layers == 0) bad("layer count must be positive");
}

double mean_regret(const ModelParameters& params, std::span<const TrainingExample> examples,
                   bool log_runtime) {
  if (examples.empty()) return 0.0;
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), 0, [&](std::size_t i) {
    const auto dist = forward(*examples[i].graph, params);
    losses[i] = log_runtime ? regret_loss(dist.probs, log_record(*examples[i].record))
                            : regret_loss(dist.probs, *examples[i].record);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) /
         static_cast<double>(examples.size());
}

TrainResult fit(std::span<const TrainingExample> examples, std::size_t num_solvers,
                const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw Error(ErrorCode::EmptyFold, "no training instances");
  for (const auto& ex : examples) {
    if (ex.record->runtimes.size() != num_solvers) {
      throw Error(ErrorCode::MissingRuntimes,
                  "instance '" + ex.record->instance_id + "' lacks runtimes for all " +
                      std::to_string(num_solvers) + " solvers");
    }
    if (ex.graph->mode != cfg.feature_mode) {
      throw Error(ErrorCode::InvalidArgument, "graph feature mode differs from training config");
    }
  }

  // Records used by the loss; log-transformed copies when requested.
  std::vector<RuntimeRecord> transformed;
  std::vector<TrainingExample> data(examples.begin(), examples.end());
  if (cfg.log_runtime) {
    transformed.reserve(data.size());
    for (const auto& ex : data) transformed.push_back(log_record(*ex.record));
    for (std::size_t i = 0; i < data.size(); ++i) data[i].record = &transformed[i];
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_val = 0;
  if (data.size() >= 2) {
    n_val = static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(data.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, data.size() - 1);
  }
  std::vector<TrainingExample> val, tr;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? val : tr).push_back(data[order[i]]);
  }
  if (val.empty()) val = tr;

  ModelConfig mcfg;
  mcfg.hidden = cfg.hidden;
  mcfg.layers = cfg.layers;
  mcfg.num_solvers = num_solvers;
  mcfg.feature_mode = cfg.feature_mode;
  mcfg.homogeneous = cfg.homogeneous;

  TrainResult result;
  result.params = ModelParameters::initialize(mcfg, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  if (cfg.max_epochs == 0) return result;

  ModelParameters params = result.params;
  AdamState adam = AdamState::for_params(params);
  AdamConfig acfg;
  acfg.lr = cfg.learning_rate;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> train_order(tr.size());
  std::iota(train_order.begin(), train_order.end(), 0);
  std::vector<ExampleLoss> slots(std::min(cfg.batch_size, tr.size()));
  Gradients batch_grad = Gradients::zeros_like(params);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(train_order.begin(), train_order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < tr.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, tr.size() - start);
      parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto& ex = tr[train_order[start + i]];
        slots[i] = loss_and_grad(params, *ex.graph, *ex.record);
      });
      batch_grad.set_zero();
      for (std::size_t i = 0; i < n; ++i) {
        loss_sum += slots[i].loss;
        batch_grad.add(slots[i].grads);
      }
      batch_grad.scale(1.0 / static_cast<double>(n));
      adam_step(params, batch_grad, adam, acfg);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(tr.size());
    entry.val_loss = mean_regret(params, val);
    result.log.push_back(entry);

    if (entry.val_loss < result.best_val_loss) {
      result.best_val_loss = entry.val_loss;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

TrainResult train(const LabeledDataset& ds, std::span<const LiteralClauseGraph> graphs,
                  std::size_t fold, const TrainConfig& cfg) {
  if (graphs.size() != ds.records.size()) {
    throw Error(ErrorCode::InvalidArgument, "graph list is not aligned with the dataset");
  }
  if (fold != kAllFolds && fold >= ds.num_folds) {
    throw Error(ErrorCode::InvalidArgument, "fold index out of range");
  }
  const auto idx = ds.train_indices(fold);
  if (idx.empty()) throw Error(ErrorCode::EmptyFold, "fold leaves no training instances");
  std::vector<TrainingExample> examples;
  examples.reserve(idx.size());
  for (const auto i : idx) examples.push_back({&graphs[i], &ds.records[i]});
  auto result = fit(examples, ds.num_solvers(), cfg);
  result.params.solver_names = ds.solver_names;
  return result;
}

void write_train_log(const std::vector<EpochLog>& log, const std::string& path) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' +
           format_double(e.val_loss) + '\n';
  }
  write_file(path, out);
}

std::size_t select_solver(const LiteralClauseGraph& graph, const ModelParameters& params) {
  if (params.schema_hash() != feature_schema_hash()) {
    throw Error(ErrorCode::SchemaMismatch,
                "checkpoint was trained with a different feature schema");
  }
  return forward(graph, params).argmax();
}

std::size_t select_solver(const CnfInstance& inst, const ModelParameters& params) {
  if (params.schema_hash() != feature_schema_hash()) {
    throw Error(ErrorCode::SchemaMismatch,
                "checkpoint was trained with a different feature schema");
  }
  return select_solver(build_graph(inst, params.config().feature_mode), params);
}

}  // namespace grass
