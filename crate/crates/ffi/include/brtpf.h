#ifndef BRTPF_H
#define BRTPF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrtpfStatus {
  BRTPF_STATUS_OK = 0,
  BRTPF_STATUS_NULL_ARGUMENT = 1,
  BRTPF_STATUS_INVALID_UTF8 = 2,
  BRTPF_STATUS_PARSE = 3,
  BRTPF_STATUS_IO = 4,
  BRTPF_STATUS_TRANSPORT = 5,
  BRTPF_STATUS_REJECTED = 6,
  BRTPF_STATUS_TIMEOUT = 7,
  BRTPF_STATUS_INVALID_ARGUMENT = 8,
  BRTPF_STATUS_PANIC = 9,
} BrtpfStatus;

typedef enum BrtpfEngine {
  BRTPF_ENGINE_TPF = 0,
  BRTPF_ENGINE_BRTPF = 1,
} BrtpfEngine;

/**
 * An immutable, loaded dataset.
 */
typedef struct BrtpfDataset BrtpfDataset;

/**
 * Solutions and metrics of an executed query.
 */
typedef struct BrtpfResult BrtpfResult;

/**
 * A running fragment server.
 */
typedef struct BrtpfServer BrtpfServer;

/**
 * Counters of one query execution.
 */
typedef struct BrtpfMetrics {
  uint64_t num_requests;
  uint64_t data_recv;
  double wall_time_ms;
  uint64_t result_count;
  bool timed_out;
} BrtpfMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *brtpf_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void brtpf_string_free(char *s);

/**
 * Loads an N-Triples file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BrtpfStatus brtpf_dataset_load(const char *path, struct BrtpfDataset **out);

/**
 * Parses N-Triples text held in memory.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BrtpfStatus brtpf_dataset_parse(const char *text, struct BrtpfDataset **out);

/**
 * Number of triples, or 0 for null.
 *
 * # Safety
 * `ds` must be null or a live dataset handle.
 */
size_t brtpf_dataset_len(const struct BrtpfDataset *ds);

/**
 * # Safety
 * `ds` must be null or a dataset handle not freed before.
 */
void brtpf_dataset_free(struct BrtpfDataset *ds);

/**
 * Starts serving `ds` on 127.0.0.1. Port 0 picks a free port. The server
 * keeps its own reference to the dataset.
 *
 * # Safety
 * `ds` must be a live dataset handle; `out` must be writable.
 */
enum BrtpfStatus brtpf_server_start(const struct BrtpfDataset *ds,
                                    size_t page_size,
                                    size_t max_mpr,
                                    uint16_t port,
                                    struct BrtpfServer **out);

/**
 * Base URL of a running server, e.g. `http://127.0.0.1:8080`; free with
 * [`brtpf_string_free`]. Null for a null handle.
 *
 * # Safety
 * `server` must be null or a live server handle.
 */
char *brtpf_server_url(const struct BrtpfServer *server);

/**
 * Stops the server and releases the handle.
 *
 * # Safety
 * `server` must be null or a server handle not stopped before.
 */
enum BrtpfStatus brtpf_server_stop(struct BrtpfServer *server);

/**
 * Evaluates the first query in `query_text` (query file syntax) against
 * the server at `endpoint`. `max_mpr` is ignored for TPF; `timeout_ms` 0
 * means no timeout. On timeout the status is `Timeout` and no result is
 * produced.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum BrtpfStatus brtpf_query_execute(const char *endpoint,
                                     const char *query_text,
                                     enum BrtpfEngine engine,
                                     size_t max_mpr,
                                     uint64_t timeout_ms,
                                     struct BrtpfResult **out);

/**
 * Number of solutions, or 0 for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t brtpf_result_len(const struct BrtpfResult *result);

/**
 * Solution `index` as `?x=<term> ?y=<term>` with variables in order; free
 * with [`brtpf_string_free`]. Null when out of range.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
char *brtpf_result_solution(const struct BrtpfResult *result, size_t index);

/**
 * Copies the execution metrics into `out`.
 *
 * # Safety
 * `result` must be a live result handle; `out` must be writable.
 */
enum BrtpfStatus brtpf_result_metrics(const struct BrtpfResult *result, struct BrtpfMetrics *out);

/**
 * # Safety
 * `result` must be null or a result handle not freed before.
 */
void brtpf_result_free(struct BrtpfResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRTPF_H */
