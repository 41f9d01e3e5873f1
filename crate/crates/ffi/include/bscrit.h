#ifndef BSCRIT_H
#define BSCRIT_H

#include <stddef.h>
#include <stdint.h>

#define BSCRIT_OK 0

/**
 * The call ran but a check failed, or a derivation was inconclusive.
 */
#define BSCRIT_CHECK_FAILED 1

#define BSCRIT_CONTRADICTION 2

/**
 * Invalid configuration, domain error or failed numerical certificate.
 */
#define BSCRIT_CONFIG 3

#define BSCRIT_NULL_POINTER 4

#define BSCRIT_PANIC 5

#define BSCRIT_UTF8 6

#define BSCRIT_VERDICT_NONE -1

#define BSCRIT_VERDICT_UNBOUNDED_WITNESS 0

#define BSCRIT_VERDICT_CONSISTENT 1

#define BSCRIT_CONCLUSION_FORCES_EQUALITY 0

#define BSCRIT_CONCLUSION_CONTRADICTION 1

#define BSCRIT_CONCLUSION_INCONCLUSIVE 2

/**
 * Experiment configuration.
 */
typedef struct BscritConfig BscritConfig;

/**
 * Result of a blow-up run or a lemma suite.
 */
typedef struct BscritReport BscritReport;

/**
 * Necessity derivation trace.
 */
typedef struct BscritTrace BscritTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *bscrit_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void bscrit_string_free(char *s);

/**
 * Critical order `m_0` (or `m~_0` when `tilde` is nonzero) at `(1/p1, 1/p2)`, as `num/den`.
 *
 * # Safety
 * String arguments must be null-terminated; output pointers must be writable.
 */
int32_t bscrit_critical_order(const char *p1,
                              const char *p2,
                              uint32_t n,
                              int32_t tilde,
                              int64_t *out_num,
                              int64_t *out_den);

/**
 * Parses a `key = value` configuration.
 *
 * # Safety
 * `text` must be null-terminated; `out` must be writable.
 */
int32_t bscrit_config_parse(const char *src, BscritConfig **out);

/**
 * Default configuration at a triple; exponents like `"4/3"` or `"inf"`, `rho` like `"1/2"`.
 *
 * # Safety
 * String arguments must be null-terminated; `out` must be writable.
 */
int32_t bscrit_config_for_triple(const char *p1,
                                 const char *p2,
                                 const char *p,
                                 const char *rho,
                                 BscritConfig **out);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
int32_t bscrit_config_set_j_range(BscritConfig *cfg, uint32_t j_min, uint32_t j_max);

/**
 * The configuration in `key = value` form.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
int32_t bscrit_config_to_text(const BscritConfig *cfg, char **out);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void bscrit_config_free(BscritConfig *cfg);

/**
 * Runs the blow-up experiment. On `BSCRIT_OK` or `BSCRIT_CHECK_FAILED` a report is written to `out`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
int32_t bscrit_run_blowup(const BscritConfig *cfg,
                          BscritReport **out);

/**
 * Runs the full check suite. On `BSCRIT_OK` or `BSCRIT_CHECK_FAILED` a report is written to `out`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
int32_t bscrit_run_lemma_suite(const BscritConfig *cfg, BscritReport **out);

/**
 * One of the `BSCRIT_VERDICT_*` values.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
int32_t bscrit_report_verdict(const BscritReport *report, int32_t *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
int32_t bscrit_report_check_count(const BscritReport *report, uintptr_t *out);

/**
 * Fitted and predicted values of check `index`; `out_pass` receives 1 or 0.
 *
 * # Safety
 * `report` must be a live handle; output pointers must be writable.
 */
int32_t bscrit_report_check(const BscritReport *report,
                            uintptr_t index,
                            double *out_fitted,
                            double *out_predicted,
                            int32_t *out_pass);

/**
 * The report as JSON.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
int32_t bscrit_report_json(const BscritReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void bscrit_report_free(BscritReport *report);

/**
 * Derives the necessity constraint. Returns `BSCRIT_OK` for a forced equality,
 * `BSCRIT_CONTRADICTION` or `BSCRIT_CHECK_FAILED` (inconclusive) otherwise; the trace
 * is written to `out` in all three cases.
 *
 * # Safety
 * String arguments must be null-terminated; `out` must be writable.
 */
int32_t bscrit_derive(const char *p1,
                      const char *p2,
                      const char *p,
                      const char *rho,
                      uint32_t n,
                      BscritTrace **out);

/**
 * One of the `BSCRIT_CONCLUSION_*` values.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
int32_t bscrit_trace_conclusion(const BscritTrace *trace, int32_t *out);

/**
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
int32_t bscrit_trace_step_count(const BscritTrace *trace, uintptr_t *out);

/**
 * Re-applies every step; `BSCRIT_OK` when the trace replays exactly.
 *
 * # Safety
 * `trace` must be a live handle.
 */
int32_t bscrit_trace_replay(const BscritTrace *trace);

/**
 * The trace, one step per line.
 *
 * # Safety
 * `trace` must be a live handle; `out` must be writable.
 */
int32_t bscrit_trace_text(const BscritTrace *trace, char **out);

/**
 * # Safety
 * `trace` must be null or a handle not yet freed.
 */
void bscrit_trace_free(BscritTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BSCRIT_H */
