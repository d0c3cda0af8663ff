#ifndef INCCOUNT_H
#define INCCOUNT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IcFamily {
  IcFamily_Tree = 0,
  IcFamily_Star = 1,
  IcFamily_Path = 2,
  IcFamily_Gnp = 3,
} IcFamily;

typedef enum IcMode {
  IcMode_Experimental = 0,
  IcMode_Theoretical = 1,
} IcMode;

typedef enum IcRanrutVariant {
  IcRanrutVariant_PaperLiteral = 0,
  IcRanrutVariant_SameCopy = 1,
} IcRanrutVariant;

typedef enum IcStatus {
  IcStatus_Ok = 0,
  IcStatus_InvalidArgument = 1,
  IcStatus_InfeasibleDegreeBound = 2,
  IcStatus_RoundLimitExceeded = 3,
  IcStatus_DegreeBoundViolated = 4,
  IcStatus_BudgetOverflow = 5,
  IcStatus_Overflow = 6,
  IcStatus_Io = 7,
  IcStatus_NullPointer = 8,
  IcStatus_Panic = 9,
  IcStatus_Internal = 10,
} IcStatus;

typedef struct IcRunRecord IcRunRecord;

typedef struct IcSweepResult IcSweepResult;

typedef struct IcTopology IcTopology;

/*
 Parameters of a single run. Zero in `delta`, `period` or `max_rounds`
 selects the default (n - 1, static, automatic).
 */
typedef struct IcRunParams {
  enum IcFamily family;
  uintptr_t n;
  uintptr_t delta;
  uint64_t period;
  /*
   Edge probability, gnp only.
   */
  double p;
  uint64_t seed;
  double c;
  enum IcMode mode;
  uint64_t max_rounds;
  /*
   Forced on for gnp.
   */
  bool disconnection_tolerant;
  enum IcRanrutVariant ranrut_variant;
} IcRunParams;

typedef struct IcRounds {
  uint64_t total;
  uint64_t collection;
  uint64_t verification;
  uint64_t notification;
} IcRounds;

typedef struct IcPhaseTrace {
  uintptr_t k;
  uint64_t collection;
  uint64_t verification;
  uint64_t notification;
} IcPhaseTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread. Valid until the next
 call into the library from the same thread.
 */
const char *ic_last_error_message(void);

/*
 Frees a string returned by the library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void ic_string_free(char *s);

/*
 Defaults: static path, c = 1.01, experimental mode.
 */
struct IcRunParams ic_run_params_default(uintptr_t n);

/*
 Number of unlabeled rooted trees on `1..=n_max` vertices, written to
 `out[0..n_max]`. Fails with `Overflow` when a count exceeds 64 bits.

 # Safety
 `out` must point to at least `n_max` writable `uint64_t`.
 */
enum IcStatus ic_sizes_table(uintptr_t n_max, uint64_t *out);

/*
 Draws one topology. `delta == 0` means n - 1; `p` is read for gnp only.

 # Safety
 `out` must be a valid pointer to writable storage for a handle.
 */
enum IcStatus ic_topology_generate(enum IcFamily family,
                                   uintptr_t n,
                                   uintptr_t delta,
                                   double p,
                                   uint64_t seed,
                                   enum IcRanrutVariant variant,
                                   struct IcTopology **out);

/*
 # Safety
 `t` must be a live handle.
 */
uintptr_t ic_topology_node_count(const struct IcTopology *t);

/*
 # Safety
 `t` must be a live handle.
 */
uintptr_t ic_topology_edge_count(const struct IcTopology *t);

/*
 Copies up to `capacity` edges as `(u, v)` pairs (`u < v`, sorted) into
 `out`, which holds `2 * capacity` entries. Returns the number copied.

 # Safety
 `t` must be a live handle; `out` must have room for `2 * capacity` values.
 */
uintptr_t ic_topology_edges(const struct IcTopology *t, uintptr_t *out, uintptr_t capacity);

/*
 `{"n": .., "leader": 0, "edges": [[u, v], ..]}`.

 # Safety
 `t` must be a live handle.
 */
char *ic_topology_to_json(const struct IcTopology *t);

/*
 # Safety
 `t` must come from `ic_topology_generate` and not have been freed.
 */
void ic_topology_free(struct IcTopology *t);

/*
 Runs the protocol once. On `RoundLimitExceeded` a partial record is
 still stored in `out`.

 # Safety
 `params` must be readable and `out` writable.
 */
enum IcStatus ic_count(const struct IcRunParams *params, struct IcRunRecord **out);

/*
 The confirmed size, or 0 if the run did not finish.

 # Safety
 `r` must be a live handle.
 */
uintptr_t ic_run_record_estimate(const struct IcRunRecord *r);

/*
 # Safety
 `r` must be a live handle.
 */
struct IcRounds ic_run_record_rounds(const struct IcRunRecord *r);

/*
 Number of candidate sizes recorded.

 # Safety
 `r` must be a live handle.
 */
uintptr_t ic_run_record_trace_len(const struct IcRunRecord *r);

/*
 # Safety
 `r` must be a live handle and `out` writable.
 */
enum IcStatus ic_run_record_trace(const struct IcRunRecord *r,
                                  uintptr_t index,
                                  struct IcPhaseTrace *out);

/*
 # Safety
 `r` must be a live handle.
 */
char *ic_run_record_to_json(const struct IcRunRecord *r);

/*
 # Safety
 `r` must come from `ic_count` and not have been freed.
 */
void ic_run_record_free(struct IcRunRecord *r);

/*
 Runs a sweep described by a JSON specification.

 # Safety
 `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum IcStatus ic_sweep_run(const char *spec_json, uintptr_t workers, struct IcSweepResult **out);

/*
 One row per run, with the sweep CSV header.

 # Safety
 `s` must be a live handle.
 */
char *ic_sweep_result_to_csv(const struct IcSweepResult *s);

/*
 # Safety
 `s` must be a live handle.
 */
char *ic_sweep_result_to_json(const struct IcSweepResult *s);

/*
 # Safety
 `s` must come from `ic_sweep_run` and not have been freed.
 */
void ic_sweep_result_free(struct IcSweepResult *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INCCOUNT_H */
