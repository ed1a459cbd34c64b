#include "grass/grass.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "grass/error.hpp"
#include "grass/pipeline.hpp"

struct grass_instance {
  grass::CnfInstance inst;
};

struct grass_graph {
  grass::LiteralClauseGraph graph;
};

struct grass_model {
  grass::ModelParameters params;
};

struct grass_dataset {
  grass::LabeledDataset ds;
};

namespace {

thread_local std::string g_last_error;

grass_status to_status(grass::ErrorCode c) {
  using grass::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return GRASS_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return GRASS_ERR_IO;
    case ErrorCode::MalformedHeader: return GRASS_ERR_MALFORMED_HEADER;
    case ErrorCode::InvalidToken: return GRASS_ERR_INVALID_TOKEN;
    case ErrorCode::LiteralOutOfRange: return GRASS_ERR_LITERAL_OUT_OF_RANGE;
    case ErrorCode::ClauseCountMismatch: return GRASS_ERR_CLAUSE_COUNT_MISMATCH;
    case ErrorCode::EmptyClause: return GRASS_ERR_EMPTY_CLAUSE;
    case ErrorCode::DimensionMismatch: return GRASS_ERR_DIMENSION_MISMATCH;
    case ErrorCode::EmptyGraph: return GRASS_ERR_EMPTY_GRAPH;
    case ErrorCode::StaleTape: return GRASS_ERR_STALE_TAPE;
    case ErrorCode::SchemaMismatch: return GRASS_ERR_SCHEMA_MISMATCH;
    case ErrorCode::BadCheckpoint: return GRASS_ERR_BAD_CHECKPOINT;
    case ErrorCode::EmptyFold: return GRASS_ERR_EMPTY_FOLD;
    case ErrorCode::MissingRuntimes: return GRASS_ERR_MISSING_RUNTIMES;
    case ErrorCode::MissingSelection: return GRASS_ERR_MISSING_SELECTION;
    case ErrorCode::MissingBinary: return GRASS_ERR_MISSING_BINARY;
    case ErrorCode::SolverCrash: return GRASS_ERR_SOLVER_CRASH;
  }
  return GRASS_ERR_INTERNAL;
}

template <typename Fn>
grass_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return GRASS_OK;
  } catch (const grass::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GRASS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GRASS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GRASS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw grass::Error(grass::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
  }
}

std::string str_or_empty(const char* s) { return s ? std::string(s) : std::string(); }

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

grass::TrainConfig to_train_config(const grass_train_config& c) {
  grass::TrainConfig cfg;
  cfg.learning_rate = c.learning_rate;
  cfg.max_epochs = c.max_epochs;
  cfg.batch_size = c.batch_size;
  cfg.patience = c.patience;
  cfg.val_fraction = c.val_fraction;
  cfg.hidden = c.hidden;
  cfg.layers = c.layers;
  cfg.feature_mode =
      grass::parse_feature_mode(c.feature_mode ? c.feature_mode : "custom_pe");
  cfg.homogeneous = c.homogeneous != 0;
  cfg.log_runtime = c.log_runtime != 0;
  cfg.threads = c.threads;
  cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

extern "C" {

const char* grass_version(void) { return "1.0.0"; }

const char* grass_status_name(grass_status status) {
  switch (status) {
    case GRASS_OK: return "Ok";
    case GRASS_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int c = static_cast<int>(status);
  if (c >= 1 && c <= static_cast<int>(grass::ErrorCode::SolverCrash) + 1) {
    return grass::error_code_name(static_cast<grass::ErrorCode>(c - 1));
  }
  return "Unknown";
}

const char* grass_last_error(void) { return g_last_error.c_str(); }

void grass_string_free(char* s) { std::free(s); }

void grass_set_warnings(int enabled) { grass::set_warnings_enabled(enabled != 0); }

// ---------------------------------------------------------------- instances

grass_status grass_instance_load(const char* path, grass_instance** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new grass_instance{grass::load_dimacs(path)};
  });
}

grass_status grass_instance_parse(const char* text, size_t length, grass_instance** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new grass_instance{grass::parse_dimacs(std::string_view(text, length))};
  });
}

grass_status grass_instance_save(const grass_instance* inst, const char* path) {
  return guarded([&] {
    require(inst, "instance");
    require(path, "path");
    grass::save_dimacs(inst->inst, path);
  });
}

void grass_instance_free(grass_instance* inst) { delete inst; }

uint32_t grass_instance_num_vars(const grass_instance* inst) {
  return inst ? inst->inst.num_vars : 0;
}

size_t grass_instance_num_clauses(const grass_instance* inst) {
  return inst ? inst->inst.num_clauses() : 0;
}

// ------------------------------------------------------------------- graphs

grass_status grass_graph_build(const grass_instance* inst, const char* feature_mode,
                               uint64_t seed, grass_graph** out) {
  return guarded([&] {
    require(inst, "instance");
    require(out, "out");
    const auto mode = grass::parse_feature_mode(feature_mode ? feature_mode : "custom_pe");
    *out = new grass_graph{grass::build_graph(inst->inst, mode, seed)};
  });
}

void grass_graph_free(grass_graph* graph) { delete graph; }

size_t grass_graph_num_nodes(const grass_graph* graph) {
  return graph ? graph->graph.num_nodes() : 0;
}

size_t grass_graph_num_clauses(const grass_graph* graph) {
  return graph ? graph->graph.n_clauses : 0;
}

size_t grass_graph_num_edges(const grass_graph* graph) {
  return graph ? graph->graph.edges_lit_clause.size() + graph->graph.num_pos_neg_edges() : 0;
}

grass_status grass_graph_write(const grass_graph* graph, const char* path) {
  return guarded([&] {
    require(graph, "graph");
    require(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw grass::Error(grass::ErrorCode::Io, std::string("cannot open '") + path + "'");
    grass::write_graph(graph->graph, out);
    if (!out) throw grass::Error(grass::ErrorCode::Io, std::string("failed writing '") + path + "'");
  });
}

grass_status grass_featurize(const char* instance_path, const char* feature_mode, uint64_t seed,
                             const char* out_path, double* seconds) {
  return guarded([&] {
    require(instance_path, "instance_path");
    require(out_path, "out_path");
    const auto mode = grass::parse_feature_mode(feature_mode ? feature_mode : "custom_pe");
    const double s = grass::run_featurize(instance_path, mode, seed, out_path);
    if (seconds) *seconds = s;
  });
}

// ------------------------------------------------------------------- models

grass_status grass_model_load(const char* path, grass_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new grass_model{grass::load_checkpoint(path)};
  });
}

grass_status grass_model_save(const grass_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    grass::save_checkpoint(model->params, path);
  });
}

void grass_model_free(grass_model* model) { delete model; }

size_t grass_model_num_solvers(const grass_model* model) {
  return model ? model->params.config().num_solvers : 0;
}

const char* grass_model_solver_name(const grass_model* model, size_t k) {
  if (!model || k >= model->params.solver_names.size()) return "";
  return model->params.solver_names[k].c_str();
}

grass_status grass_model_predict(const grass_model* model, const grass_instance* inst,
                                 double* probs, size_t probs_len, size_t* selected) {
  return guarded([&] {
    require(model, "model");
    require(inst, "instance");
    const auto& p = model->params;
    if (p.schema_hash() != grass::feature_schema_hash()) {
      throw grass::Error(grass::ErrorCode::SchemaMismatch,
                         "checkpoint was trained with a different feature schema");
    }
    const auto dist =
        grass::forward(grass::build_graph(inst->inst, p.config().feature_mode), p);
    if (probs) {
      if (probs_len != dist.probs.size()) {
        throw grass::Error(grass::ErrorCode::DimensionMismatch,
                           "probability buffer must hold " + std::to_string(dist.probs.size()) +
                               " values");
      }
      std::copy(dist.probs.begin(), dist.probs.end(), probs);
    }
    if (selected) *selected = dist.argmax();
  });
}

// ----------------------------------------------------------------- datasets

grass_status grass_dataset_load(const char* manifest_path, grass_dataset** out) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out, "out");
    *out = new grass_dataset{grass::load_manifest(manifest_path)};
  });
}

void grass_dataset_free(grass_dataset* ds) { delete ds; }

size_t grass_dataset_num_records(const grass_dataset* ds) {
  return ds ? ds->ds.records.size() : 0;
}

size_t grass_dataset_num_solvers(const grass_dataset* ds) { return ds ? ds->ds.num_solvers() : 0; }

double grass_dataset_cutoff(const grass_dataset* ds) { return ds ? ds->ds.cutoff : 0.0; }

grass_status grass_dataset_runtime(const grass_dataset* ds, size_t record, size_t solver,
                                   double* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (record >= ds->ds.records.size() || solver >= ds->ds.num_solvers()) {
      throw grass::Error(grass::ErrorCode::InvalidArgument, "record or solver out of range");
    }
    *out = ds->ds.records[record].runtimes[solver];
  });
}

grass_status grass_dataset_best_solver(const grass_dataset* ds, size_t record, size_t* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (record >= ds->ds.records.size()) {
      throw grass::Error(grass::ErrorCode::InvalidArgument, "record out of range");
    }
    *out = ds->ds.records[record].best_solver;
  });
}

grass_status grass_dataset_fold(const grass_dataset* ds, size_t record, size_t* out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    if (record >= ds->ds.folds.size()) {
      throw grass::Error(grass::ErrorCode::InvalidArgument, "record out of range");
    }
    *out = ds->ds.folds[record];
  });
}

// --------------------------------------------------------------- generation

void grass_generate_config_default(grass_generate_config* cfg) {
  if (!cfg) return;
  const grass::SyntheticSpec spec;
  cfg->n_instances = spec.n_instances;
  cfg->v_min = spec.v_min;
  cfg->v_max = spec.v_max;
  cfg->ratio_min = spec.ratio_min;
  cfg->ratio_max = spec.ratio_max;
  for (std::size_t i = 0; i < 5; ++i) cfg->length_weights[i] = spec.length_weights[i];
  cfg->pos_prob_min = spec.pos_prob_min;
  cfg->pos_prob_max = spec.pos_prob_max;
  cfg->seed = spec.seed;
}

grass_status grass_generate(const grass_generate_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "config");
    require(out_dir, "out_dir");
    grass::SyntheticSpec spec;
    spec.n_instances = cfg->n_instances;
    spec.v_min = cfg->v_min;
    spec.v_max = cfg->v_max;
    spec.ratio_min = cfg->ratio_min;
    spec.ratio_max = cfg->ratio_max;
    for (std::size_t i = 0; i < 5; ++i) spec.length_weights[i] = cfg->length_weights[i];
    spec.pos_prob_min = cfg->pos_prob_min;
    spec.pos_prob_max = cfg->pos_prob_max;
    spec.seed = cfg->seed;
    grass::generate_to_dir(spec, out_dir);
  });
}

// ---------------------------------------------------------------- labelling

void grass_label_config_default(grass_label_config* cfg) {
  if (!cfg) return;
  const grass::LabelRequest req;
  *cfg = grass_label_config{};
  cfg->cutoff = req.cutoff;
  cfg->jobs = req.jobs;
  cfg->folds = req.num_folds;
  cfg->fold_seed = req.fold_seed;
  cfg->max_vars = req.max_vars;
}

grass_status grass_label(const grass_label_config* cfg, size_t* num_labeled) {
  return guarded([&] {
    require(cfg, "config");
    require(cfg->instances_dir, "instances_dir");
    require(cfg->manifest_path, "manifest_path");
    grass::LabelRequest req;
    req.instances_dir = cfg->instances_dir;
    req.manifest_path = cfg->manifest_path;
    req.oracle_path = str_or_empty(cfg->oracle_path);
    req.solvers_path = str_or_empty(cfg->solvers_path);
    req.cutoff = cfg->cutoff;
    req.jobs = cfg->jobs;
    req.num_folds = cfg->folds;
    req.fold_seed = cfg->fold_seed;
    req.max_vars = cfg->max_vars;
    const auto ds = grass::run_label(req);
    if (num_labeled) *num_labeled = ds.records.size();
  });
}

// ----------------------------------------------------------------- training

void grass_train_config_default(grass_train_config* cfg) {
  if (!cfg) return;
  const grass::TrainConfig d;
  cfg->learning_rate = d.learning_rate;
  cfg->max_epochs = d.max_epochs;
  cfg->batch_size = d.batch_size;
  cfg->patience = d.patience;
  cfg->val_fraction = d.val_fraction;
  cfg->hidden = d.hidden;
  cfg->layers = d.layers;
  cfg->feature_mode = grass::feature_mode_name(d.feature_mode);
  cfg->homogeneous = d.homogeneous ? 1 : 0;
  cfg->log_runtime = d.log_runtime ? 1 : 0;
  cfg->threads = d.threads;
  cfg->seed = d.seed;
}

grass_status grass_train(const char* manifest_path, size_t fold, const grass_train_config* cfg,
                         const char* checkpoint_path, const char* log_path,
                         grass_train_summary* summary) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(cfg, "config");
    require(checkpoint_path, "checkpoint_path");
    const auto result = grass::run_train(manifest_path, fold, to_train_config(*cfg),
                                         checkpoint_path, str_or_empty(log_path));
    if (summary) {
      summary->epochs_run = result.log.size();
      summary->best_epoch = result.best_epoch;
      summary->best_val_loss = result.best_val_loss;
      summary->final_train_loss = result.log.empty() ? 0.0 : result.log.back().train_loss;
    }
  });
}

grass_status grass_cross_validate(const char* manifest_path, const grass_train_config* cfg,
                                  const char* out_dir) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(cfg, "config");
    require(out_dir, "out_dir");
    grass::run_cross_validate(manifest_path, to_train_config(*cfg), out_dir);
  });
}

// ------------------------------------------------------- selection and eval

grass_status grass_select_fold(const char* checkpoint_path, const char* manifest_path,
                               size_t fold, size_t threads, const char* out_path) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(manifest_path, "manifest_path");
    require(out_path, "out_path");
    grass::write_selections(grass::run_select_fold(checkpoint_path, manifest_path, fold, threads),
                            out_path);
  });
}

grass_status grass_baseline(const char* manifest_path, const char* method, size_t fold,
                            size_t threads, const char* out_path) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(method, "method");
    require(out_path, "out_path");
    const auto m = grass::parse_baseline_method(method);
    const auto ds = grass::load_manifest(manifest_path);
    const auto features = grass::dataset_global_features(ds, threads);
    const auto sel = grass::baseline_selections(ds, features, m, fold);
    std::vector<grass::RuntimeRecord> records;
    if (fold == grass::kAllFolds) {
      records = ds.records;
    } else {
      for (const auto i : ds.test_indices(fold)) records.push_back(ds.records[i]);
    }
    grass::write_selections(grass::make_selection_rows(sel, records), out_path);
  });
}

grass_status grass_evaluate(const char* selections_path, const char* manifest_path,
                            double cutoff, grass_report* report, char** csv, char** table) {
  return guarded([&] {
    require(selections_path, "selections_path");
    require(manifest_path, "manifest_path");
    const auto ds = grass::load_manifest(manifest_path);
    const auto matched = grass::match_selections(grass::read_selections(selections_path), ds);
    const auto rep =
        grass::evaluate(matched.selections, matched.records, cutoff > 0.0 ? cutoff : ds.cutoff);
    if (report) {
      report->num_instances = rep.num_instances;
      report->cutoff = rep.cutoff;
      report->avg_runtime = rep.avg_runtime;
      report->solved_pct = rep.solved_pct;
      report->accuracy = rep.accuracy;
      report->cost_of_wrong = rep.cost_of_wrong;
      report->cost_of_wrong_empty = rep.cost_of_wrong_empty ? 1 : 0;
      report->wrong_count = rep.wrong_count;
      report->mean_best = rep.mean_best;
      for (std::size_t q = 0; q < 4; ++q) {
        report->quartile_upper[q] = rep.quartiles[q].upper;
        report->quartile_count[q] = rep.quartiles[q].count;
        report->quartile_avg_runtime[q] = rep.quartiles[q].avg_runtime;
        report->quartile_avg_best[q] = rep.quartiles[q].avg_best;
      }
    }
    char* csv_out = csv ? dup_string(grass::report_csv(rep)) : nullptr;
    char* table_out = nullptr;
    try {
      if (table) table_out = dup_string(grass::report_table(rep, selections_path));
    } catch (...) {
      std::free(csv_out);
      throw;
    }
    if (csv) *csv = csv_out;
    if (table) *table = table_out;
  });
}

// ------------------------------------------------------------ permute study

void grass_permute_config_default(grass_permute_config* cfg) {
  if (!cfg) return;
  const grass::PermuteStudyRequest req;
  *cfg = grass_permute_config{};
  cfg->solver = req.solver;
  cfg->cutoff = req.cutoff;
  cfg->instances = req.study.instances;
  cfg->shuffles = req.study.shuffles;
  cfg->seed = req.study.seed;
}

grass_status grass_permute_study(const grass_permute_config* cfg, grass_permute_summary* summary) {
  return guarded([&] {
    require(cfg, "config");
    require(cfg->instances_dir, "instances_dir");
    grass::PermuteStudyRequest req;
    req.instances_dir = cfg->instances_dir;
    req.oracle_path = str_or_empty(cfg->oracle_path);
    req.solvers_path = str_or_empty(cfg->solvers_path);
    if (req.oracle_path.empty() == req.solvers_path.empty()) {
      throw grass::Error(grass::ErrorCode::InvalidArgument,
                         "permute study needs exactly one of an oracle or a solver config");
    }
    req.solver = cfg->solver;
    req.cutoff = cfg->cutoff;
    req.study.instances = cfg->instances;
    req.study.shuffles = cfg->shuffles;
    req.study.seed = cfg->seed;
    req.out_path = str_or_empty(cfg->out_path);
    const auto s = grass::run_permute_study(req);
    if (summary) {
      summary->rows = s.rows;
      summary->clause_dominance = s.clause_dominance;
      summary->mean_clause_std = s.mean_clause_std;
      summary->mean_var_std = s.mean_var_std;
    }
  });
}

}  // extern "C"
