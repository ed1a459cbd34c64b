/* C interface to the grass solver-selection library.
 *
 * Every fallible call returns a grass_status. On failure a message is
 * available from grass_last_error() until the next call on the same thread.
 * Objects returned through out-parameters are owned by the caller and freed
 * with the matching *_free function. Strings returned as char** are freed
 * with grass_string_free.
 */
#ifndef GRASS_GRASS_H
#define GRASS_GRASS_H

#include <stddef.h>
#include <stdint.h>

#if defined(GRASS_BUILDING_LIBRARY)
#define GRASS_API __attribute__((visibility("default")))
#else
#define GRASS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum grass_status {
  GRASS_OK = 0,
  GRASS_ERR_INVALID_ARGUMENT = 1,
  GRASS_ERR_IO = 2,
  GRASS_ERR_MALFORMED_HEADER = 3,
  GRASS_ERR_INVALID_TOKEN = 4,
  GRASS_ERR_LITERAL_OUT_OF_RANGE = 5,
  GRASS_ERR_CLAUSE_COUNT_MISMATCH = 6,
  GRASS_ERR_EMPTY_CLAUSE = 7,
  GRASS_ERR_DIMENSION_MISMATCH = 8,
  GRASS_ERR_EMPTY_GRAPH = 9,
  GRASS_ERR_STALE_TAPE = 10,
  GRASS_ERR_SCHEMA_MISMATCH = 11,
  GRASS_ERR_BAD_CHECKPOINT = 12,
  GRASS_ERR_EMPTY_FOLD = 13,
  GRASS_ERR_MISSING_RUNTIMES = 14,
  GRASS_ERR_MISSING_SELECTION = 15,
  GRASS_ERR_MISSING_BINARY = 16,
  GRASS_ERR_SOLVER_CRASH = 17,
  GRASS_ERR_INTERNAL = 99
} grass_status;

/* Passed as a fold index to mean "every fold" / "no held-out fold". */
#define GRASS_ALL_FOLDS ((size_t)-1)

GRASS_API const char* grass_version(void);
GRASS_API const char* grass_status_name(grass_status status);
GRASS_API const char* grass_last_error(void);
GRASS_API void grass_string_free(char* s);
/* Parser and pipeline warnings go to stderr unless disabled. */
GRASS_API void grass_set_warnings(int enabled);

/* ------------------------------------------------------------ instances */

typedef struct grass_instance grass_instance;

GRASS_API grass_status grass_instance_load(const char* path, grass_instance** out);
GRASS_API grass_status grass_instance_parse(const char* text, size_t length,
                                            grass_instance** out);
GRASS_API grass_status grass_instance_save(const grass_instance* inst, const char* path);
GRASS_API void grass_instance_free(grass_instance* inst);
GRASS_API uint32_t grass_instance_num_vars(const grass_instance* inst);
GRASS_API size_t grass_instance_num_clauses(const grass_instance* inst);

/* ---------------------------------------------------------------- graphs */

typedef struct grass_graph grass_graph;

/* feature_mode: "custom_pe", "custom", "random" or "node_type". */
GRASS_API grass_status grass_graph_build(const grass_instance* inst, const char* feature_mode,
                                         uint64_t seed, grass_graph** out);
GRASS_API void grass_graph_free(grass_graph* graph);
GRASS_API size_t grass_graph_num_nodes(const grass_graph* graph);
GRASS_API size_t grass_graph_num_clauses(const grass_graph* graph);
GRASS_API size_t grass_graph_num_edges(const grass_graph* graph);
GRASS_API grass_status grass_graph_write(const grass_graph* graph, const char* path);

/* Builds the graph of `instance_path`, writes it to `out_path` and reports
 * the featurization time in seconds. */
GRASS_API grass_status grass_featurize(const char* instance_path, const char* feature_mode,
                                       uint64_t seed, const char* out_path, double* seconds);

/* ---------------------------------------------------------------- models */

typedef struct grass_model grass_model;

GRASS_API grass_status grass_model_load(const char* path, grass_model** out);
GRASS_API grass_status grass_model_save(const grass_model* model, const char* path);
GRASS_API void grass_model_free(grass_model* model);
GRASS_API size_t grass_model_num_solvers(const grass_model* model);
/* Empty string when the checkpoint carries no names. */
GRASS_API const char* grass_model_solver_name(const grass_model* model, size_t k);

/* Writes the K solver probabilities into `probs` (may be NULL) and the
 * selected solver index into `selected` (may be NULL). */
GRASS_API grass_status grass_model_predict(const grass_model* model, const grass_instance* inst,
                                           double* probs, size_t probs_len, size_t* selected);

/* -------------------------------------------------------------- datasets */

typedef struct grass_dataset grass_dataset;

GRASS_API grass_status grass_dataset_load(const char* manifest_path, grass_dataset** out);
GRASS_API void grass_dataset_free(grass_dataset* ds);
GRASS_API size_t grass_dataset_num_records(const grass_dataset* ds);
GRASS_API size_t grass_dataset_num_solvers(const grass_dataset* ds);
GRASS_API double grass_dataset_cutoff(const grass_dataset* ds);
GRASS_API grass_status grass_dataset_runtime(const grass_dataset* ds, size_t record,
                                             size_t solver, double* out);
GRASS_API grass_status grass_dataset_best_solver(const grass_dataset* ds, size_t record,
                                                 size_t* out);
GRASS_API grass_status grass_dataset_fold(const grass_dataset* ds, size_t record, size_t* out);

/* ------------------------------------------------------------ generation */

typedef struct grass_generate_config {
  size_t n_instances;
  uint32_t v_min;
  uint32_t v_max;
  double ratio_min;
  double ratio_max;
  double length_weights[5]; /* lengths 1..5, summing to 1 */
  double pos_prob_min;
  double pos_prob_max;
  uint64_t seed;
} grass_generate_config;

GRASS_API void grass_generate_config_default(grass_generate_config* cfg);
GRASS_API grass_status grass_generate(const grass_generate_config* cfg, const char* out_dir);

/* -------------------------------------------------------------- labelling */

typedef struct grass_label_config {
  const char* instances_dir;
  const char* manifest_path;
  const char* oracle_path;  /* exactly one of oracle_path / solvers_path */
  const char* solvers_path;
  double cutoff;
  size_t jobs;
  size_t folds;
  uint64_t fold_seed;
  uint32_t max_vars; /* 0 = unlimited */
} grass_label_config;

GRASS_API void grass_label_config_default(grass_label_config* cfg);
GRASS_API grass_status grass_label(const grass_label_config* cfg, size_t* num_labeled);

/* --------------------------------------------------------------- training */

typedef struct grass_train_config {
  double learning_rate;
  size_t max_epochs;
  size_t batch_size;
  size_t patience;
  double val_fraction;
  size_t hidden;
  size_t layers;
  const char* feature_mode;
  int homogeneous;
  int log_runtime;
  size_t threads; /* 0 = all cores */
  uint64_t seed;
} grass_train_config;

typedef struct grass_train_summary {
  size_t epochs_run;
  size_t best_epoch;
  double best_val_loss;
  double final_train_loss;
} grass_train_summary;

GRASS_API void grass_train_config_default(grass_train_config* cfg);

/* Trains on the records outside `fold` and writes the checkpoint and (when
 * log_path is non-NULL) the per-epoch loss CSV. */
GRASS_API grass_status grass_train(const char* manifest_path, size_t fold,
                                   const grass_train_config* cfg, const char* checkpoint_path,
                                   const char* log_path, grass_train_summary* summary);

/* Trains one model per fold and writes fold<k>.ckpt, fold<k>.log.csv and the
 * out-of-fold selections.csv into out_dir. */
GRASS_API grass_status grass_cross_validate(const char* manifest_path,
                                            const grass_train_config* cfg, const char* out_dir);

/* ------------------------------------------------------ selection & eval */

/* Selections CSV for the records of `fold` (GRASS_ALL_FOLDS: every record). */
GRASS_API grass_status grass_select_fold(const char* checkpoint_path, const char* manifest_path,
                                         size_t fold, size_t threads, const char* out_path);

/* method: "ridge", "knn", "best-single" or "oracle". Fitted outside each
 * test fold; GRASS_ALL_FOLDS predicts every record out-of-fold. */
GRASS_API grass_status grass_baseline(const char* manifest_path, const char* method, size_t fold,
                                      size_t threads, const char* out_path);

typedef struct grass_report {
  size_t num_instances;
  double cutoff;
  double avg_runtime;
  double solved_pct;
  double accuracy;
  double cost_of_wrong;
  int cost_of_wrong_empty;
  size_t wrong_count;
  double mean_best;
  double quartile_upper[4];
  size_t quartile_count[4];
  double quartile_avg_runtime[4];
  double quartile_avg_best[4];
} grass_report;

/* Evaluates a selections CSV against a manifest. cutoff <= 0 uses the
 * manifest's cutoff. `csv` and `table` (either may be NULL) receive the
 * report as CSV and as a readable table. */
GRASS_API grass_status grass_evaluate(const char* selections_path, const char* manifest_path,
                                      double cutoff, grass_report* report, char** csv,
                                      char** table);

/* ---------------------------------------------------------- permute study */

typedef struct grass_permute_config {
  const char* instances_dir;
  const char* oracle_path;  /* exactly one of oracle_path / solvers_path */
  const char* solvers_path;
  size_t solver;
  double cutoff;
  size_t instances;
  size_t shuffles;
  uint64_t seed;
  const char* out_path;
} grass_permute_config;

typedef struct grass_permute_summary {
  size_t rows;
  double clause_dominance;
  double mean_clause_std;
  double mean_var_std;
} grass_permute_summary;

GRASS_API void grass_permute_config_default(grass_permute_config* cfg);
GRASS_API grass_status grass_permute_study(const grass_permute_config* cfg,
                                           grass_permute_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
