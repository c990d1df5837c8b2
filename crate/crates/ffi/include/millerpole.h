#ifndef MILLERPOLE_H
#define MILLERPOLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>

/**
 * Transfer function whose poles or zeros are requested.
 */
typedef enum MpModel {
  /**
   * Exact nodal analysis.
   */
  MP_MODEL_ORACLE = 0,
  /**
   * Feedback model without the feedforward path.
   */
  MP_MODEL_CLOSED_LOOP = 1,
  /**
   * Feedback model including the feedforward path (two-stage only).
   */
  MP_MODEL_CLOSED_LOOP_FEEDFORWARD = 2,
  /**
   * Loop transmission.
   */
  MP_MODEL_LOOP = 3,
} MpModel;

typedef enum MpScenario {
  MP_SCENARIO_FIG7A = 0,
  MP_SCENARIO_FIG7B = 1,
  MP_SCENARIO_FIG7C = 2,
  MP_SCENARIO_FIG7D = 3,
  MP_SCENARIO_FIG7E = 4,
  MP_SCENARIO_FIG11A = 5,
  MP_SCENARIO_FIG11B = 6,
  MP_SCENARIO_FIG11C = 7,
} MpScenario;

typedef enum MpStatus {
  MP_STATUS_OK = 0,
  MP_STATUS_NULL_POINTER = 1,
  MP_STATUS_INVALID_ARGUMENT = 2,
  MP_STATUS_NUMERIC = 3,
  MP_STATUS_BUFFER_TOO_SMALL = 4,
  MP_STATUS_PANIC = 5,
} MpStatus;

typedef enum MpTopology {
  MP_TOPOLOGY_TWO_STAGE = 0,
  MP_TOPOLOGY_CURRENT_BUFFER = 1,
  MP_TOPOLOGY_NMC = 2,
} MpTopology;

typedef struct MpCircuit MpCircuit;

typedef struct MpLocus MpLocus;

/**
 * `gm0` is optional; pass NaN when absent.
 */
typedef struct MpTwoStageParams {
  double gm;
  double r1;
  double r2;
  double c1;
  double c2;
  double cc;
  double gm0;
} MpTwoStageParams;

/**
 * `gm0` is optional; pass NaN when absent.
 */
typedef struct MpCurrentBufferParams {
  double gm;
  double gmc;
  double r1;
  double r2;
  double c1;
  double c2;
  double cc;
  double gm0;
} MpCurrentBufferParams;

typedef struct MpNmcParams {
  double gm0;
  double gm1;
  double gm2;
  double r0;
  double r1;
  double r2;
  double c0;
  double c1;
  double c2;
  double cc0;
  double cc1;
} MpNmcParams;

typedef struct MpComplex {
  double re;
  double im;
} MpComplex;

/**
 * Phase margins in degrees; absent values are NaN.
 */
typedef struct MpStability {
  enum MpScenario scenario;
  double gbw;
  double pm_deg;
  double pm_numeric_deg;
  double crossover;
  double pm_oracle_deg;
} MpStability;

/**
 * Split poles; absent poles are NaN.
 */
typedef struct MpSplit {
  struct MpComplex p_cd;
  struct MpComplex p_cnd1;
  struct MpComplex p_cnd2;
  size_t warning_count;
} MpSplit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mp_version(void);

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *mp_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string obtained from this library, freed once.
 */
void mp_string_free(char *s);

/**
 * # Safety
 * `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
 */
enum MpStatus mp_circuit_two_stage(const struct MpTwoStageParams *params, struct MpCircuit **out);

/**
 * # Safety
 * `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
 */
enum MpStatus mp_circuit_current_buffer(const struct MpCurrentBufferParams *params,
                                        struct MpCircuit **out);

/**
 * # Safety
 * `params` must be NULL or point to a valid struct; `out` must be NULL or writable.
 */
enum MpStatus mp_circuit_nmc(const struct MpNmcParams *params, struct MpCircuit **out);

/**
 * Loads a TOML or JSON parameter file. `topology` ("two-stage",
 * "current-buffer", "nmc") may be NULL when the file has one section.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `out` must be NULL or writable.
 */
enum MpStatus mp_circuit_from_file(const char *path, const char *topology, struct MpCircuit **out);

/**
 * # Safety
 * `c` must be NULL or a handle from this library, freed once.
 */
void mp_circuit_free(struct MpCircuit *c);

/**
 * # Safety
 * `c` must be a valid handle or NULL; `out` must be NULL or writable.
 */
enum MpStatus mp_circuit_topology(const struct MpCircuit *c, enum MpTopology *out);

/**
 * Poles of `model`, ascending in magnitude. `*len` receives the count; when
 * it exceeds `cap`, nothing is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * `buf` must hold `cap` elements; `len` must be writable.
 */
enum MpStatus mp_circuit_poles(const struct MpCircuit *c,
                               enum MpModel model,
                               struct MpComplex *buf,
                               size_t cap,
                               size_t *len);

/**
 * Finite zeros of `model`, with the same buffer protocol as [`mp_circuit_poles`].
 *
 * # Safety
 * `buf` must hold `cap` elements; `len` must be writable.
 */
enum MpStatus mp_circuit_zeros(const struct MpCircuit *c,
                               enum MpModel model,
                               struct MpComplex *buf,
                               size_t cap,
                               size_t *len);

/**
 * Full analysis report as JSON, identical to the `analyze` command output.
 * Release with [`mp_string_free`].
 *
 * # Safety
 * `c` must be a valid handle; `out` must be writable.
 */
enum MpStatus mp_circuit_analyze_json(const struct MpCircuit *c,
                                      bool feedforward,
                                      double tolerance,
                                      char **out);

/**
 * Scenario and phase margins. `tolerance` is the validity ratio (10 by default in the CLI).
 *
 * # Safety
 * `c` must be a valid handle; `out` must be writable.
 */
enum MpStatus mp_circuit_stability(const struct MpCircuit *c,
                                   double tolerance,
                                   struct MpStability *out);

/**
 * Pole-splitting result for the circuit's main loop.
 *
 * # Safety
 * `c` must be a valid handle; `out` must be writable.
 */
enum MpStatus mp_circuit_split(const struct MpCircuit *c, struct MpSplit *out);

/**
 * Pole splitting of a two-pole loop with dominant pole `p_od`,
 * nondominant pole `p_ond` (both negative) and midband gain `a0b0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MpStatus mp_split_two_pole(double p_od, double p_ond, double a0b0, struct MpSplit *out);

/**
 * Phase margin in degrees of a dominant-pole loop with a nondominant
 * complex pair of damping `xi` and natural frequency `omega_n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MpStatus mp_pm_complex_pair(double xi, double omega_n, double gbw, double *out);

/**
 * Root locus of the closed-loop poles over the main-loop gain
 * (`gm`, or `gm1` for NMC) from `k_min` to `k_max` with `n` log-spaced
 * base points. With `feedforward` the two-stage feedforward loop is swept.
 *
 * # Safety
 * `c` must be a valid handle; `out` must be writable.
 */
enum MpStatus mp_locus_sweep(const struct MpCircuit *c,
                             bool feedforward,
                             double k_min,
                             double k_max,
                             size_t n,
                             struct MpLocus **out);

/**
 * # Safety
 * `l` must be NULL or a handle from this library, freed once.
 */
void mp_locus_free(struct MpLocus *l);

/**
 * Number of gain points, including adaptive refinement; 0 for NULL.
 *
 * # Safety
 * `l` must be NULL or a valid handle.
 */
size_t mp_locus_len(const struct MpLocus *l);

/**
 * Number of branches; 0 for NULL.
 *
 * # Safety
 * `l` must be NULL or a valid handle.
 */
size_t mp_locus_branch_count(const struct MpLocus *l);

/**
 * Gain at point `i` and the position of `branch` there.
 *
 * # Safety
 * `l` must be a valid handle; `gain` and `root` must be writable.
 */
enum MpStatus mp_locus_point(const struct MpLocus *l,
                             size_t branch,
                             size_t i,
                             double *gain,
                             struct MpComplex *root);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MILLERPOLE_H */
