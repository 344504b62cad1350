// Copyright 2026 The cesample Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to cesample. Every function that can fail returns a
 * ces_status; on failure ces_last_error() describes the problem. Handles
 * are opaque and owned by the caller, who releases them with the matching
 * *_free function. A dataset handle is immutable after creation and may be
 * shared between threads. */

#ifndef CESAMPLE_H_
#define CESAMPLE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CESAMPLE_BUILDING)
#    define CES_API __declspec(dllexport)
#  else
#    define CES_API __declspec(dllimport)
#  endif
#else
#  define CES_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ces_status {
  CES_OK = 0,
  CES_ERR_INVALID_ARGUMENT = 1,
  CES_ERR_IO = 2,
  CES_ERR_PARSE = 3,
  CES_ERR_BAD_MAGIC = 4,
  CES_ERR_UNSUPPORTED_VERSION = 5,
  CES_ERR_TRUNCATED = 6,
  CES_ERR_DIMENSION_MISMATCH = 7,
  CES_ERR_NON_FINITE = 8,
  CES_ERR_DUPLICATE_ID = 9,
  CES_ERR_UNKNOWN_FORMAT = 10,
  CES_ERR_INVALID_VALUE = 11,
  CES_ERR_MISSING_DATA = 12,
  CES_ERR_SUPPORT_VIOLATION = 13,
  CES_ERR_EMPTY_SUBSET = 14,
  CES_ERR_OUT_OF_MEMORY = 98,
  CES_ERR_INTERNAL = 99
} ces_status;

typedef enum ces_method {
  CES_METHOD_SRS = 0,
  CES_METHOD_CSS = 1,
  CES_METHOD_CES = 2
} ces_method;

typedef enum ces_objective {
  CES_OBJECTIVE_AUTO = 0,
  CES_OBJECTIVE_CROSS_ENTROPY = 1,
  CES_OBJECTIVE_KL = 2
} ces_objective;

typedef struct ces_dataset ces_dataset;
typedef struct ces_selection ces_selection;
typedef struct ces_experiment ces_experiment;

/* Message for the last failed call on this thread; never NULL. */
CES_API const char* ces_last_error(void);
CES_API const char* ces_status_name(ces_status status);
CES_API const char* ces_version(void);

/* ---- datasets ---------------------------------------------------------- */

CES_API ces_status ces_dataset_load(const char* manifest_path, ces_dataset** out);

/* Writes <prefix>.act.{bin,csv}, the optional .conf/.corr sidecars and
 * <prefix>.manifest. format is "binary" or "text". */
CES_API ces_status ces_dataset_save(const ces_dataset* dataset, const char* prefix,
                                    const char* format);
CES_API void ces_dataset_free(ces_dataset* dataset);

CES_API ces_status ces_dataset_shape(const ces_dataset* dataset, size_t* rows,
                                     size_t* cols);
CES_API int ces_dataset_has_confidence(const ces_dataset* dataset);
CES_API int ces_dataset_has_correctness(const ces_dataset* dataset);
CES_API ces_status ces_dataset_true_accuracy(const ces_dataset* dataset,
                                             double* accuracy);

/* Synthetic clustered dataset from a key=value spec file. seed_override and
 * invert_confidence (when nonzero) take precedence over the file. */
CES_API ces_status ces_synth_generate(const char* spec_path,
                                      const uint64_t* seed_override,
                                      int invert_confidence, ces_dataset** out);

/* Runs a dense model over an input matrix (CSV or CESA binary); the dataset
 * holds the last hidden layer, softmax confidence and, when labels_path is
 * not NULL, correctness. */
CES_API ces_status ces_infer(const char* model_path, const char* inputs_path,
                             const char* labels_path, ces_dataset** out);

/* ---- selection and estimation ----------------------------------------- */

typedef struct ces_select_params {
  size_t budget;
  uint64_t seed;
  size_t sections;   /* K, default 20 */
  size_t init;       /* p, default 30 */
  size_t group;      /* q, default 5 */
  size_t candidates; /* l, default 300 */
  ces_objective objective;
  double alpha;      /* default 1/(e^2-1) */
  const double* strata; /* NULL: 0.8,0.1,0.1 */
  size_t strata_len;
  const double* alloc;  /* NULL: 0.2,0.4,0.4 */
  size_t alloc_len;
  int proportional;     /* CSS: allocate n*|S_j|/|S| instead of alloc */
} ces_select_params;

CES_API void ces_select_params_init(ces_select_params* params);

CES_API ces_status ces_select(const ces_dataset* dataset, ces_method method,
                              const ces_select_params* params, ces_selection** out);
CES_API ces_status ces_selection_write(const ces_selection* selection,
                                       const ces_dataset* dataset, const char* path);
CES_API ces_status ces_selection_read(const char* path, const ces_dataset* dataset,
                                      ces_selection** out);
CES_API void ces_selection_free(ces_selection* selection);

CES_API ces_method ces_selection_method(const ces_selection* selection);
CES_API size_t ces_selection_size(const ces_selection* selection);
/* Copies up to capacity row indices; returns CES_ERR_INVALID_ARGUMENT if
 * capacity is smaller than ces_selection_size(). */
CES_API ces_status ces_selection_rows(const ces_selection* selection, size_t* rows,
                                      size_t capacity);
CES_API size_t ces_selection_trace_size(const ces_selection* selection);
CES_API ces_status ces_selection_trace(const ces_selection* selection, double* values,
                                       size_t capacity);

CES_API ces_status ces_estimate(const ces_dataset* dataset,
                                const ces_selection* selection, double* estimate,
                                size_t* sample_size);

/* ---- evaluation sweeps ------------------------------------------------- */

typedef struct ces_experiment_config {
  const ces_method* methods;
  size_t method_count;
  const size_t* sizes; /* NULL: 35,40,...,180 */
  size_t size_count;
  size_t repetitions;  /* default 50 */
  uint64_t seed;
  size_t threads;      /* default 1 */
  ces_select_params params; /* budget and seed are ignored */
} ces_experiment_config;

CES_API void ces_experiment_config_init(ces_experiment_config* config);

CES_API ces_status ces_evaluate(const ces_dataset* dataset,
                                const ces_experiment_config* config,
                                ces_experiment** out);
/* Writes <dir>/raw.csv and <dir>/agg.csv. */
CES_API ces_status ces_experiment_write(const ces_experiment* experiment,
                                        const char* dir);
CES_API double ces_experiment_true_accuracy(const ces_experiment* experiment);
CES_API size_t ces_experiment_pair_count(const ces_experiment* experiment);
/* label is owned by the experiment, e.g. "ces/srs". */
CES_API ces_status ces_experiment_pair(const ces_experiment* experiment, size_t index,
                                       const char** label, double* average_e);
CES_API ces_status ces_experiment_mse(const ces_experiment* experiment,
                                      ces_method method, size_t sample_size,
                                      double* mse);
CES_API void ces_experiment_free(ces_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* CESAMPLE_H_ */
