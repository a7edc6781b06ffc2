/*
 * Copyright 2026 The fairspectral Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FAIRSPECTRAL_FAIRSPECTRAL_H_
#define FAIRSPECTRAL_FAIRSPECTRAL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FAIRSPECTRAL_BUILDING_LIBRARY)
#define FS_API __attribute__((visibility("default")))
#else
#define FS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; FS_OK is zero. On failure the
 * message is available from fs_last_error() on the same thread until the
 * next call into the library. */
typedef enum fs_status {
  FS_OK = 0,
  FS_ERR_INVALID_ARGUMENT = 1,
  FS_ERR_IO = 2,
  FS_ERR_NUMERICAL = 3,
  FS_ERR_NO_CONVERGENCE = 4,
  FS_ERR_LIMIT_EXCEEDED = 5,
  FS_ERR_INTERNAL = 6
} fs_status;

typedef struct fs_graph fs_graph;
typedef struct fs_basis fs_basis;
typedef struct fs_model fs_model;

FS_API const char* fs_version(void);
FS_API const char* fs_last_error(void);
FS_API const char* fs_status_name(fs_status status);

/* Strings returned through char** out-parameters are owned by the caller. */
FS_API void fs_string_free(char* s);

/* ---- graphs ---- */

typedef struct fs_sbm_config {
  size_t n;
  double p_in;
  double p_out;
  double sensitive_homophily;
  double label_bias;
  size_t d;
  double noise_sd;
  double proxy_shift;
  uint64_t seed;
} fs_sbm_config;

FS_API fs_sbm_config fs_sbm_config_default(void);
FS_API fs_status fs_graph_generate_sbm(const fs_sbm_config* cfg, fs_graph** out);
FS_API fs_status fs_graph_load(const char* edge_list, const char* node_table,
                               const char* sensitive_column, const char* label_column,
                               fs_graph** out);
FS_API fs_status fs_graph_save(const fs_graph* g, const char* edge_list, const char* node_table);
/* Draws label-stratified train/val/test masks and stores them on the graph. */
FS_API fs_status fs_graph_make_splits(fs_graph* g, uint64_t seed);
FS_API fs_status fs_graph_save_splits(const fs_graph* g, const char* path);
FS_API fs_status fs_graph_load_splits(fs_graph* g, const char* path);
/* {"n", "undirected_edges", "stored_entries", "features", "sensitive",
 *  "positive_labels", "sensitive_ones", "split_sizes"} */
FS_API fs_status fs_graph_info_json(const fs_graph* g, char** out_json);
FS_API void fs_graph_free(fs_graph* g);

/* ---- spectral bases ---- */

typedef enum fs_operator { FS_OPERATOR_SYM_NORMALIZED = 0, FS_OPERATOR_RAW = 1 } fs_operator;
typedef enum fs_eig_method {
  FS_EIG_AUTO = 0,
  FS_EIG_LANCZOS = 1,
  FS_EIG_DENSE = 2
} fs_eig_method;

typedef struct fs_eig_options {
  size_t k;
  double tol;
  size_t max_iter;
  uint64_t seed;
  fs_operator op;
  fs_eig_method method;
  size_t dense_limit;
} fs_eig_options;

FS_API fs_eig_options fs_eig_options_default(void);
/* FS_ERR_LIMIT_EXCEEDED when the dense method is asked for n > dense_limit. */
FS_API fs_status fs_basis_compute(const fs_graph* g, const fs_eig_options* opts, fs_basis** out);
/* The leading k pairs of an existing basis. */
FS_API fs_status fs_basis_truncate(const fs_basis* b, size_t k, fs_basis** out);
FS_API fs_status fs_basis_save(const fs_basis* b, const char* path);
FS_API fs_status fs_basis_load(const char* path, fs_basis** out);
FS_API fs_status fs_basis_json(const fs_basis* b, int include_vectors, char** out_json);
FS_API size_t fs_basis_n(const fs_basis* b);
FS_API size_t fs_basis_k(const fs_basis* b);
/* Borrowed pointers, valid for the lifetime of the basis. Eigenvectors are
 * column-major n x k. */
FS_API const double* fs_basis_eigenvalues(const fs_basis* b);
FS_API const double* fs_basis_eigenvectors(const fs_basis* b);
/* Largest relative eigenvalue difference and largest principal angle
 * between the two eigenvector spans. */
FS_API fs_status fs_basis_compare(const fs_basis* a, const fs_basis* b, double* max_rel_diff,
                                  double* max_angle);
FS_API void fs_basis_free(fs_basis* b);

/* ---- lemma checks ----
 * `params_json` keys (all optional): n, seed, l_max, gap_min, even_only,
 * tolerance (lemma 1); n, j, l_max, seed, equal_alpha (lemma 2); n, seed,
 * index, l_values (lemma 3). A failed verdict is still FS_OK; read
 * "verdict" from the report. */
FS_API fs_status fs_lemma_verify(int lemma, const char* params_json, char** out_report_json);

/* ---- training and evaluation ----
 * `config_json` keys (all optional): model ("fugnn" | "baseline"), width,
 * layers, d_e, heads, d_ff, ln_eps, theta, propagation_steps, epochs, lr,
 * weight_decay, patience, operator ("sym-normalized" | "raw"),
 * fixed_splits (use the masks stored on the graph).
 * `basis` may be NULL for the baseline. The report aggregates the test
 * metrics over `seeds`; `out_model` and `out_history_jsonl` receive the run
 * of the first seed when non-NULL. */
FS_API fs_status fs_train(const fs_graph* g, const fs_basis* basis, const char* config_json,
                          const uint64_t* seeds, size_t num_seeds, char** out_report_json,
                          fs_model** out_model, char** out_history_jsonl);
/* Accuracy, delta SP and delta EO of `model` on split "train", "val" or
 * "test" of the masks stored on the graph. */
FS_API fs_status fs_evaluate(const fs_graph* g, const fs_basis* basis, const fs_model* model,
                             const char* split, char** out_report_json);
FS_API fs_status fs_model_save(const fs_model* m, const char* path);
FS_API fs_status fs_model_load(const char* path, fs_model** out);
FS_API fs_status fs_model_json(const fs_model* m, int include_values, char** out_json);
FS_API void fs_model_free(fs_model* m);

#ifdef __cplusplus
}
#endif

#endif /* FAIRSPECTRAL_FAIRSPECTRAL_H_ */
