#ifndef K3SD_H
#define K3SD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum K3sdStatus {
  K3SD_STATUS_OK = 0,
  K3SD_STATUS_NULL_POINTER = 1,
  K3SD_STATUS_INVALID_UTF8 = 2,
  /*
   Scenario text could not be parsed or violates a bound.
   */
  K3SD_STATUS_PARSE = 3,
  /*
   The command cannot run on the given input.
   */
  K3SD_STATUS_INPUT = 4,
  /*
   The computation itself failed.
   */
  K3SD_STATUS_COMPUTE = 5,
  /*
   A panic was caught at the boundary.
   */
  K3SD_STATUS_INTERNAL = 6,
} K3sdStatus;

typedef enum K3sdCommand {
  K3SD_COMMAND_ANALYZE_NL = 0,
  K3SD_COMMAND_FM = 1,
  K3SD_COMMAND_SD_CHECK = 2,
  K3SD_COMMAND_KODAIRA = 3,
} K3sdCommand;

typedef enum K3sdVerdict {
  K3SD_VERDICT_PASS = 0,
  K3SD_VERDICT_WARN = 1,
  K3SD_VERDICT_FAIL = 2,
  K3SD_VERDICT_INFO = 3,
} K3sdVerdict;

typedef enum K3sdDirection {
  K3SD_DIRECTION_S = 0,
  K3SD_DIRECTION_T = 1,
} K3sdDirection;

/*
 The rendered outcome of one command.
 */
typedef struct K3sdReport K3sdReport;

/*
 A parsed scenario.
 */
typedef struct K3sdScenario K3sdScenario;

/*
 Counts for one strange-duality instance.
 */
typedef struct K3sdSdCounts {
  int64_t l_sigma;
  int64_t l_fiber;
  int64_t l_square;
  int64_t chi_l;
  int64_t d_v;
  int64_t d_w;
  /*
   `C(χ(L), d_v) = C(χ(L), d_w)`.
   */
  bool h0_equal;
} K3sdSdCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failing call on this thread; empty if none. The
 pointer stays valid until the next failing call on this thread.
 */
const char *k3sd_last_error(void);

/*
 Parses scenario TOML text into `*out`.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum K3sdStatus k3sd_scenario_parse(const char *text, struct K3sdScenario **out);

/*
 # Safety
 `scenario` must come from [`k3sd_scenario_parse`] or be null.
 */
void k3sd_scenario_free(struct K3sdScenario *scenario);

/*
 Runs a command on a scenario. A negative `bound` selects the default;
 `kodaira` uses the scenario's fibers. Failing checks still produce a
 report; inspect it with [`k3sd_report_overall`].

 # Safety
 `scenario` must be a live handle or null; `out` must be valid.
 */
enum K3sdStatus k3sd_run(const struct K3sdScenario *scenario,
                         enum K3sdCommand command,
                         int64_t bound,
                         struct K3sdReport **out);

/*
 Kodaira checks for a single fiber type such as `"I5"` or `"IIstar"`;
 `attach` is the 1-based component meeting the section.

 # Safety
 `fiber_type` must be a NUL-terminated string and `out` valid.
 */
enum K3sdStatus k3sd_run_kodaira(const char *fiber_type,
                                 uint32_t attach,
                                 int64_t bound,
                                 struct K3sdReport **out);

/*
 # Safety
 `report` must come from a run call or be null.
 */
void k3sd_report_free(struct K3sdReport *report);

/*
 Overall verdict; `Fail` for a null handle.

 # Safety
 `report` must be a live handle or null.
 */
enum K3sdVerdict k3sd_report_overall(const struct K3sdReport *report);

/*
 Renders the report, tab-separated when `machine` is set. Null on a null
 handle.

 # Safety
 `report` must be a live handle or null.
 */
char *k3sd_report_render(const struct K3sdReport *report, bool machine);

/*
 # Safety
 `s` must come from this library or be null.
 */
void k3sd_string_free(char *s);

/*
 Writes the 4×4 matrix of `S` or `T` on `(r, k, m, χ)` in row-major order.

 # Safety
 `out` must point to 16 writable `int64_t`.
 */
enum K3sdStatus k3sd_fm_matrix(enum K3sdDirection direction, int64_t *out);

/*
 Applies `S` or `T` to the class `(r, k, m, χ)`.

 # Safety
 `v` must point to 4 readable and `out` to 4 writable `int64_t`.
 */
enum K3sdStatus k3sd_apply_transform(const int64_t *v, enum K3sdDirection direction, int64_t *out);

/*
 Strange-duality counts for `v = r + H + a[pt]`, `w = s + H + b[pt]` on
 the rank-2 model of degree `2·ell`.

 # Safety
 `out` must be valid.
 */
enum K3sdStatus k3sd_sd_counts(int64_t ell,
                               int64_t r,
                               int64_t a,
                               int64_t s,
                               int64_t b,
                               struct K3sdSdCounts *out);

/*
 `C(n, k)` in base 10; null when `k > n` or `n` exceeds the supported size.
 */
char *k3sd_binomial(uint64_t n, uint64_t k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* K3SD_H */
