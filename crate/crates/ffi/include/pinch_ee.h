#ifndef PINCH_EE_H
#define PINCH_EE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PeeScheme {
  PEE_SCHEME_PROPOSED = 0,
  PEE_SCHEME_CONVENTIONAL = 1,
  PEE_SCHEME_MIN_POWER = 2,
  PEE_SCHEME_NEAREST = 3,
  PEE_SCHEME_EXHAUSTIVE = 4,
} PeeScheme;

typedef enum PeeStatus {
  PEE_STATUS_OK = 0,
  PEE_STATUS_NULL_POINTER = 1,
  PEE_STATUS_INVALID_CONFIG = 2,
  PEE_STATUS_INVALID_ARGUMENT = 3,
  /*
   No feasible activation could be found to start the search from.
   */
  PEE_STATUS_INFEASIBLE = 4,
  PEE_STATUS_SEARCH_SPACE_TOO_LARGE = 5,
  PEE_STATUS_INTERNAL = 6,
  PEE_STATUS_PANIC = 7,
} PeeStatus;

/*
 Opaque scenario handle: configuration, user drop and channel.
 */
typedef struct PeeScenario PeeScenario;

/*
 Scenario parameters in SI units (watts, hertz, metres, bits/s).
 */
typedef struct PeeParams {
  double region_width;
  double region_length;
  double waveguide_height;
  size_t num_positions;
  size_t num_users;
  double bandwidth_hz;
  double carrier_hz;
  double noise_psd_dbm_per_hz;
  double refractive_index;
  double attenuation_db_per_m;
  double static_power_w;
  double activation_power_w;
  double transmit_budget_w;
  double amplifier_efficiency;
  double min_rate_bps;
  double dinkelbach_tolerance;
  uint64_t seed;
} PeeParams;

/*
 Scalar summary of one solution. `ee` and `sum_rate` are NaN when
 `feasible` is false.
 */
typedef struct PeeOutcome {
  double ee;
  double sum_rate;
  double total_power;
  size_t n_active;
  bool feasible;
  size_t outer_iterations;
  size_t dinkelbach_iterations;
} PeeOutcome;

/*
 Default scenario parameters.
 */
struct PeeParams pee_params_default(void);

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next `pee_*` call on the same thread.
 */
const char *pee_last_error(void);

/*
 Static name of a status code.
 */
const char *pee_status_name(enum PeeStatus status);

/*
 Draws users uniformly in the region from `seed` and builds the channel.

 # Safety
 `params` must point to a valid `PeeParams`; `out` must be writable.
 */
enum PeeStatus pee_scenario_new(const struct PeeParams *params,
                                uint64_t seed,
                                struct PeeScenario **out);

/*
 Builds a scenario from explicit user coordinates (`num_users` entries in
 each of `xs`, `ys`). `seed` drives the random starting matching.

 # Safety
 `params` must be valid, `xs` and `ys` must hold `params->num_users`
 doubles each, and `out` must be writable.
 */
enum PeeStatus pee_scenario_from_users(const struct PeeParams *params,
                                       const double *xs,
                                       const double *ys,
                                       uint64_t seed,
                                       struct PeeScenario **out);

/*
 Releases a handle; null is ignored.

 # Safety
 `scenario` must be null or a handle not yet freed.
 */
void pee_scenario_free(struct PeeScenario *scenario);

/*
 Writes the `num_users` user positions as (x, y) pairs into `xy`.

 # Safety
 `scenario` must be a live handle and `xy` must hold `2 * num_users` doubles.
 */
enum PeeStatus pee_scenario_users(const struct PeeScenario *scenario, double *xy);

/*
 Number of users, or 0 for a null handle.

 # Safety
 `scenario` must be null or a live handle.
 */
size_t pee_scenario_num_users(const struct PeeScenario *scenario);

/*
 Number of candidate positions, or 0 for a null handle.

 # Safety
 `scenario` must be null or a live handle.
 */
size_t pee_scenario_num_positions(const struct PeeScenario *scenario);

/*
 Runs one scheme on the scenario. When `active_out` is non-null the
 chosen positions (ascending) are written to it, at most `active_cap` of
 them; `out->n_active` gives the full count. Exhaustive search refuses
 scenarios with more than `exhaustive_cap` positions.

 # Safety
 `scenario` must be live, `out` writable, and `active_out` null or
 writable for `active_cap` entries.
 */
enum PeeStatus pee_run_scheme(const struct PeeScenario *scenario,
                              enum PeeScheme scheme,
                              size_t exhaustive_cap,
                              struct PeeOutcome *out,
                              size_t *active_out,
                              size_t active_cap);

/*
 Optimal power split for a fixed activation set. `alpha_out` and
 `rates_out`, when non-null, receive `num_users` values indexed by user
 (not by decoding order); both are NaN when the set is infeasible.

 # Safety
 `scenario` must be live, `active` must hold `num_active` indices, `out`
 must be writable, and the optional buffers must hold `num_users` doubles.
 */
enum PeeStatus pee_solve_power_allocation(const struct PeeScenario *scenario,
                                          const size_t *active,
                                          size_t num_active,
                                          struct PeeOutcome *out,
                                          double *alpha_out,
                                          double *rates_out);

#endif  /* PINCH_EE_H */
