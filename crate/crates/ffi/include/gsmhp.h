#ifndef GSMHP_H
#define GSMHP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum GsmhpStatus {
  GSMHP_STATUS_OK = 0,
  GSMHP_STATUS_NULL_POINTER = 1,
  GSMHP_STATUS_INVALID_ARGUMENT = 2,
  GSMHP_STATUS_INFEASIBLE = 3,
  GSMHP_STATUS_SINGULAR_CHANNEL = 4,
  GSMHP_STATUS_DOMAIN = 5,
  GSMHP_STATUS_EXCESSIVE_SINGULARITY = 6,
  GSMHP_STATUS_CONFIG = 7,
  GSMHP_STATUS_IO = 8,
  GSMHP_STATUS_PANIC = 9,
} GsmhpStatus;

/**
 * Transmitter architecture.
 */
typedef enum GsmhpScheme {
  GSMHP_SCHEME_GSM_HP = 0,
  GSMHP_SCHEME_FDP = 1,
} GsmhpScheme;

/**
 * Analog stage model.
 */
typedef enum GsmhpRfMode {
  GSMHP_RF_MODE_IDEALIZED_ZF = 0,
  GSMHP_RF_MODE_EQUAL_GAIN = 1,
} GsmhpRfMode;

/**
 * Built-in parameter sweeps.
 */
typedef enum GsmhpSweep {
  GSMHP_SWEEP_USERS = 0,
  GSMHP_SWEEP_RF_CHAINS = 1,
  GSMHP_SWEEP_ANTENNAS_PER_GROUP = 2,
  GSMHP_SWEEP_COMPUTATION_POWER_VS_USERS = 3,
} GsmhpSweep;

/**
 * Opaque simulator handle.
 */
typedef struct GsmhpSimulator GsmhpSimulator;

/**
 * Power breakdown in Watts.
 */
typedef struct GsmhpPower {
  double p_pa_w;
  double p_rf_w;
  double p_switch_w;
  double p_transmission_w;
  double p_ce_w;
  double p_cd_w;
  double p_bb_w;
  double p_lp_c_w;
  double p_computation_w;
  double p_fix_w;
  double p_total_w;
} GsmhpPower;

/**
 * Monte-Carlo estimate at one configuration.
 */
typedef struct GsmhpPointResult {
  uint64_t n_drops;
  double r_total_bps;
  double r_total_std_err;
  double ee_bit_per_joule;
  uint64_t singular_redraws;
  struct GsmhpPower power;
} GsmhpPointResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if the last
 * call succeeded. Valid until the next call into this library on the same
 * thread.
 */
const char *gsmhp_last_error_message(void);

/**
 * New simulator with built-in defaults. Never returns null.
 */
struct GsmhpSimulator *gsmhp_simulator_new(void);

/**
 * Loads a TOML configuration file into a new simulator.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum GsmhpStatus gsmhp_simulator_from_config(const char *path, struct GsmhpSimulator **out);

/**
 * Releases a simulator. Null is ignored.
 *
 * # Safety
 * `sim` must come from this library and not be used afterwards.
 */
void gsmhp_simulator_free(struct GsmhpSimulator *sim);

/**
 * Sets users, RF chains, groups and antennas per group. The array is
 * re-shaped to the most square factorization of `n_m * n_k`.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum GsmhpStatus gsmhp_simulator_set_geometry(struct GsmhpSimulator *sim,
                                              uint32_t n_users,
                                              uint32_t n_rf,
                                              uint32_t n_m,
                                              uint32_t n_k);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum GsmhpStatus gsmhp_simulator_set_drops(struct GsmhpSimulator *sim, uint64_t n_drops);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum GsmhpStatus gsmhp_simulator_set_seed(struct GsmhpSimulator *sim, uint64_t seed);

/**
 * `mode` is a [`GsmhpRfMode`] value.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum GsmhpStatus gsmhp_simulator_set_mode(struct GsmhpSimulator *sim, uint32_t mode);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum GsmhpStatus gsmhp_simulator_set_p_max_w(struct GsmhpSimulator *sim, double p_max_w);

/**
 * Monte-Carlo evaluation of one scheme (a [`GsmhpScheme`] value) at the
 * simulator's configuration.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum GsmhpStatus gsmhp_simulator_evaluate(const struct GsmhpSimulator *sim,
                                          uint32_t scheme,
                                          struct GsmhpPointResult *out);

/**
 * Power breakdown of `scheme` (a [`GsmhpScheme`] value) at a given total
 * rate, without simulation.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum GsmhpStatus gsmhp_simulator_power(const struct GsmhpSimulator *sim,
                                       uint32_t scheme,
                                       double r_total_bps,
                                       struct GsmhpPower *out);

/**
 * Runs a built-in sweep (a [`GsmhpSweep`] value) around the simulator's
 * geometry and writes CSV.
 *
 * Points that cannot be evaluated are skipped; their count is stored in
 * `failed_points` when it is not null. Fails if no point succeeds.
 *
 * # Safety
 * `sim` must be a live handle, `csv_path` a valid NUL-terminated string and
 * `failed_points` null or valid.
 */
enum GsmhpStatus gsmhp_simulator_run_sweep(const struct GsmhpSimulator *sim,
                                           uint32_t sweep,
                                           const char *csv_path,
                                           uint64_t *failed_points);

/**
 * Spatial codebook size for `n_m` groups and `n_rf` RF chains.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GsmhpStatus gsmhp_num_spatial_schemes(uint32_t n_m, uint32_t n_rf, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSMHP_H */
