// Copyright 2026 The infonet Authors
//
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

/* C interface to the infonet library. All functions return an infonet_status;
 * on failure infonet_last_error() describes the most recent error on the
 * calling thread. Handles are opaque and must be released with their _free
 * function. */

#ifndef INFONET_INFONET_H_
#define INFONET_INFONET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define INFONET_API __declspec(dllexport)
#elif defined(__GNUC__)
#define INFONET_API __attribute__((visibility("default")))
#else
#define INFONET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum infonet_status {
  INFONET_OK = 0,
  INFONET_ERR_INVALID_ARGUMENT = 1,
  INFONET_ERR_IO = 2,
  INFONET_ERR_FORMAT = 3,
  INFONET_ERR_NUMERIC = 4,
  INFONET_ERR_RESOURCE = 5,
  INFONET_ERR_INTERNAL = 6
} infonet_status;

typedef enum infonet_modality { INFONET_BEARING = 0, INFONET_FOV = 1 } infonet_modality;
typedef enum infonet_metric { INFONET_MUTUAL = 0, INFONET_FISHER = 1 } infonet_metric;
typedef enum infonet_arch { INFONET_MAP_NET = 0, INFONET_COEFF_NET = 1 } infonet_arch;
typedef enum infonet_format { INFONET_PGM = 0, INFONET_CSV = 1 } infonet_format;

INFONET_API const char* infonet_version(void);
/* Message for the last failed call on this thread; "" if none. */
INFONET_API const char* infonet_last_error(void);
INFONET_API const char* infonet_status_string(infonet_status status);

/* Field, sensor and episode settings shared by the high-level calls. */
typedef struct infonet_problem {
  double side_length; /* meters */
  int n;              /* cells per side */
  int heading_bins;
  infonet_modality modality;
  infonet_metric metric;
  double sigma_deg; /* bearing noise */
  int steps;        /* per episode */
  int coeff_order;  /* K */
} infonet_problem;

/* 200 m field, n = 28, 36 headings, bearing, mutual, sigma 10, 20 steps, K 5. */
INFONET_API void infonet_problem_default(infonet_problem* out);

/* ---- Exact maps ------------------------------------------------------- */

typedef struct infonet_model infonet_model;

/* Builds the likelihood table for the problem (may allocate ~1 GB for FOV). */
INFONET_API infonet_status infonet_model_create(const infonet_problem* problem,
                                                infonet_model** out);
INFONET_API void infonet_model_free(infonet_model* model);
/* Number of map entries: n*n, or n*n*headings for FOV (heading-major). */
INFONET_API size_t infonet_model_map_size(const infonet_model* model);
INFONET_API size_t infonet_model_coeff_count(const infonet_model* model);

/* belief has n*n row-major entries summing to 1. out receives the normalized
 * map of the problem's metric. */
INFONET_API infonet_status infonet_model_map(const infonet_model* model, const double* belief,
                                             size_t belief_len, double* out, size_t out_len);
/* Coefficients of the normalized map. */
INFONET_API infonet_status infonet_model_coeffs(const infonet_model* model, const double* belief,
                                                size_t belief_len, double* out, size_t out_len);
/* Clamped, renormalized reconstruction from coefficients. */
INFONET_API infonet_status infonet_model_reconstruct(const infonet_model* model,
                                                     const double* coeffs, size_t coeffs_len,
                                                     double* out, size_t out_len);

/* ---- Networks --------------------------------------------------------- */

typedef struct infonet_network infonet_network;

INFONET_API infonet_status infonet_network_load(const char* path, infonet_network** out);
INFONET_API void infonet_network_free(infonet_network* net);
INFONET_API infonet_arch infonet_network_arch(const infonet_network* net);
INFONET_API size_t infonet_network_input_size(const infonet_network* net);
INFONET_API size_t infonet_network_output_size(const infonet_network* net);
/* Safe to call concurrently on one handle. */
INFONET_API infonet_status infonet_network_forward(const infonet_network* net,
                                                   const double* belief, size_t belief_len,
                                                   double* out, size_t out_len);

/* ---- Pipelines -------------------------------------------------------- */

INFONET_API infonet_status infonet_generate_dataset(const infonet_problem* problem, int episodes,
                                                    uint64_t seed, const char* out_path);

typedef struct infonet_train_options {
  infonet_arch arch;
  int epochs;
  int batch_size;
  double learning_rate;
  double validation_fraction;
  uint64_t seed;
  int augment;             /* nonzero trains on randomly mirrored and rotated samples */
  const char* history_csv; /* optional; NULL skips the loss history */
} infonet_train_options;

/* 100 epochs, batch 32, learning rate 1e-3, 10% validation, seed 0, augmented. */
INFONET_API void infonet_train_options_default(infonet_train_options* out);
INFONET_API infonet_status infonet_train(const char* dataset_path,
                                         const infonet_train_options* options,
                                         const char* weights_out);

/* Grid, modality, metric and K come from the weights files. */
INFONET_API infonet_status infonet_evaluate(const char* map_weights, const char* coeff_weights,
                                            int episodes, uint64_t seed,
                                            const char* report_path);

typedef struct infonet_benchmark_options {
  int reps;
  int warmup;
  uint64_t seed;
  const char* map_weights;   /* optional; NULL times an untrained map-net */
  const char* coeff_weights; /* optional; NULL times an untrained coeff-net */
} infonet_benchmark_options;

INFONET_API void infonet_benchmark_options_default(infonet_benchmark_options* out);
INFONET_API infonet_status infonet_benchmark(const infonet_problem* problem,
                                             const infonet_benchmark_options* options,
                                             const char* report_path);

typedef struct infonet_render_options {
  infonet_format format;
  int heading_bin;
  size_t sample;     /* dataset sample index */
  int render_belief; /* nonzero renders the belief instead of the map */
} infonet_render_options;

INFONET_API void infonet_render_options_default(infonet_render_options* out);
/* input is a dataset or a coefficient file. */
INFONET_API infonet_status infonet_render(const char* input,
                                          const infonet_render_options* options,
                                          const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* INFONET_INFONET_H_ */
