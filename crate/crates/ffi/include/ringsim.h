/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef RINGSIM_H
#define RINGSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RingsimStatus {
  RingsimStatus_Ok = 0,
  RingsimStatus_NullPointer = 1,
  /**
   * A parameter lies outside its physical range.
   */
  RingsimStatus_Domain = 2,
  RingsimStatus_Pole = 3,
  RingsimStatus_SingularPivot = 4,
  RingsimStatus_NonUnitary = 5,
  RingsimStatus_Dimension = 6,
  /**
   * A sign gate fails the success constraints.
   */
  RingsimStatus_InvalidNlpsg = 7,
  RingsimStatus_Other = 8,
  RingsimStatus_Panic = 9,
} RingsimStatus;

/**
 * Heralded CNOT built from two sign gates.
 */
typedef struct RingsimCnot RingsimCnot;

/**
 * Three-ring sign gate.
 */
typedef struct RingsimNetwork RingsimNetwork;

/**
 * One ring resonator. A NaN `phi` selects the default round-trip
 * partition.
 */
typedef struct RingsimRing {
  double tau;
  double eta;
  double theta;
  double phi;
} RingsimRing;

typedef struct RingsimComplex {
  double re;
  double im;
} RingsimComplex;

typedef struct RingsimVerdict {
  struct RingsimComplex beta[3];
  struct RingsimComplex s11;
  double residual;
  double s11_residual;
  double success_probability;
} RingsimVerdict;

typedef struct RingsimTruthRow {
  uint8_t control;
  uint8_t target;
  uint8_t output_control;
  uint8_t output_target;
  double probability;
  double fidelity;
  double leakage;
} RingsimTruthRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *ringsim_status_string(enum RingsimStatus status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ringsim_last_error_message(char *buf, size_t len);

/**
 * Builds a network from three rings and three in-line phases.
 *
 * # Safety
 * `rings` and `deltas` must point to 3 elements; `out` must be writable.
 */
enum RingsimStatus ringsim_network_new(const struct RingsimRing *rings,
                                       const double *deltas,
                                       struct RingsimNetwork **out);

/**
 * The optimal resonant gate with lower couplers at `tau = 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RingsimStatus ringsim_network_optimal(struct RingsimNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from this library not yet freed.
 */
void ringsim_network_free(struct RingsimNetwork *net);

/**
 * Writes the 3x3 scattering matrix in row-major order.
 *
 * # Safety
 * `net` must be a live handle; `out` must have room for 9 elements.
 */
enum RingsimStatus ringsim_network_scattering(const struct RingsimNetwork *net,
                                              struct RingsimComplex *out);

/**
 * # Safety
 * `net` must be a live handle; `out` must be writable.
 */
enum RingsimStatus ringsim_network_verdict(const struct RingsimNetwork *net,
                                           struct RingsimVerdict *out);

/**
 * Runs the sign gate on `alpha[0]|0> + alpha[1]|1> + alpha[2]|2>` (which
 * must be normalized) and writes the heralding probability. When `amplitudes`
 * is non-null it receives the three unnormalized heralded amplitudes.
 *
 * # Safety
 * `alpha` must point to 3 elements; `amplitudes` must be null or have room
 * for 3.
 */
enum RingsimStatus ringsim_nlpsg_success(const struct RingsimNetwork *net,
                                         const struct RingsimComplex *alpha,
                                         double *probability,
                                         struct RingsimComplex *amplitudes);

/**
 * Writes the closed-form optimal transmissions `t1, t2, t3`.
 *
 * # Safety
 * `out` must have room for 3 elements.
 */
enum RingsimStatus ringsim_optimal_point(double *out);

/**
 * Builds a CNOT from two sign gates. Fails with
 * `RingsimStatus_InvalidNlpsg` when either gate violates its constraints.
 *
 * # Safety
 * `nlpsg1` and `nlpsg2` must be live handles; `out` must be writable.
 */
enum RingsimStatus ringsim_cnot_new(const struct RingsimNetwork *nlpsg1,
                                    const struct RingsimNetwork *nlpsg2,
                                    struct RingsimCnot **out);

/**
 * # Safety
 * `cnot` must be null or a handle from this library not yet freed.
 */
void ringsim_cnot_free(struct RingsimCnot *cnot);

/**
 * Writes the four truth-table rows, inputs ordered 00, 01, 10, 11.
 *
 * # Safety
 * `cnot` must be a live handle; `out` must have room for 4 rows.
 */
enum RingsimStatus ringsim_cnot_truth_table(const struct RingsimCnot *cnot,
                                            struct RingsimTruthRow *out);

/**
 * Overlap of the heralded output of `(|0>+|1>)|0>/sqrt(2)` with the Bell
 * state `(|00>+|11>)/sqrt(2)`.
 *
 * # Safety
 * `cnot` must be a live handle; `out` must be writable.
 */
enum RingsimStatus ringsim_cnot_bell_overlap(const struct RingsimCnot *cnot, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RINGSIM_H */
