/* SPDX-License-Identifier: Apache-2.0 */

/*
 * C interface to the quasilocal energy library.
 *
 * Every entry point returns a qle_status. Functions that produce a result hand
 * back an owned qle_result through an out parameter; release it with
 * qle_result_free. On validation and solver failures the result is still
 * produced and holds the error document.
 */

#ifndef QLE_QLE_H
#define QLE_QLE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(QLE_BUILDING)
#define QLE_API __declspec(dllexport)
#else
#define QLE_API __declspec(dllimport)
#endif
#else
#define QLE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qle_status {
  QLE_OK = 0,
  QLE_ERR_VALIDATION = 2,
  QLE_ERR_SOLVER = 3,
  QLE_ERR_VERIFY_FAILED = 4,
  QLE_ERR_UNSUPPORTED = 5,
  QLE_ERR_INTERNAL = 6,
  QLE_ERR_ARGUMENT = 7
} qle_status;

typedef struct qle_result qle_result;

QLE_API const char* qle_version(void);

/* Message of the last failing call on this thread, or "" if none. */
QLE_API const char* qle_last_error(void);

/* Runs a configuration given as JSON text. */
QLE_API qle_status qle_compute(const char* config_json, qle_result** out);

/* Runs a named property suite: clifford, identities, kernel, positivity, agreement. */
QLE_API qle_status qle_verify(const char* suite, uint64_t seed, qle_result** out);

/* Refinement study against the closed-form value, doubling the grid levels - 1 times. */
QLE_API qle_status qle_convergence(const char* config_json, int levels, qle_result** out);

/* JSON document of the result; valid until qle_result_free. */
QLE_API const char* qle_result_json(const qle_result* r);

/* Energy of a compute result. Returns -INFINITY when unbounded below, NaN otherwise unavailable. */
QLE_API double qle_result_energy(const qle_result* r);

/* Kernel dimension of a compute result, or -1. */
QLE_API int qle_result_kernel_dim(const qle_result* r);

/* The "output" field of the configuration, or "" if unset. */
QLE_API const char* qle_result_output_path(const qle_result* r);

QLE_API void qle_result_free(qle_result* r);

#ifdef __cplusplus
}
#endif

#endif
