#ifndef RENDEZVOUS_H
#define RENDEZVOUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RdvStatus {
  RDV_STATUS_OK = 0,
  RDV_STATUS_NULL_POINTER = 1,
  /**
   * Bad parameter, config key or string encoding.
   */
  RDV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A formula was evaluated outside its domain, including zero drift.
   */
  RDV_STATUS_DOMAIN = 3,
  RDV_STATUS_IO = 4,
  RDV_STATUS_PANIC = 5,
} RdvStatus;

typedef enum RdvPolicy {
  RDV_POLICY_GREEDY = 0,
  RDV_POLICY_R_EXP3 = 1,
  RDV_POLICY_R_THOMPSON = 2,
  RDV_POLICY_R_OPTIMAL = 3,
} RdvPolicy;

/**
 * Arm numbering: up (+y), down (-y), right (+x), left (-x).
 */
typedef enum RdvArm {
  RDV_ARM_UP = 1,
  RDV_ARM_DOWN = 2,
  RDV_ARM_RIGHT = 3,
  RDV_ARM_LEFT = 4,
} RdvArm;

typedef enum RdvLogBase {
  RDV_LOG_BASE_NATURAL = 0,
  RDV_LOG_BASE_BASE10 = 1,
} RdvLogBase;

/**
 * Opaque experiment, as read from a key = value config.
 */
typedef struct RdvExperiment RdvExperiment;

/**
 * Opaque trial configuration.
 */
typedef struct RdvTrialConfig RdvTrialConfig;

/**
 * Channel parameters, plain data. Fill with [`rdv_channel_default`] and
 * adjust fields as needed.
 */
typedef struct RdvChannel {
  double p_i;
  double d_0;
  double n_p;
  double sigma;
  double x_c;
  double delta;
  /**
   * An [`RdvLogBase`] value.
   */
  uint32_t log_base;
} RdvChannel;

/**
 * Outcome of one trial.
 */
typedef struct RdvTrialSummary {
  bool met;
  uint64_t turns;
  /**
   * Sum over turns of the number of independently moving groups.
   */
  uint64_t group_steps;
  double traversed_distance;
  uint64_t num_groups;
} RdvTrialSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after a
 * success. Valid until the next call into the library on this thread.
 */
const char *rdv_last_error_message(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed yet.
 */
void rdv_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *rdv_version(void);

/**
 * Default channel: sigma 4 dB, n_p 4, X_c 75 m, step 0.1 m, natural log.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum RdvStatus rdv_channel_default(struct RdvChannel *out);

/**
 * Standard Gaussian tail probability.
 */
double rdv_q_function(double x);

/**
 * Probability that the `n_avg`-turn averaged reward of `arm` (an
 * [`RdvArm`] value) is positive for a player whose opponent sits at
 * `(x, y)`.
 *
 * # Safety
 * `channel` must be null or point to an `RdvChannel`; `out` must be null or
 * valid for writes.
 */
enum RdvStatus rdv_prob_positive(const struct RdvChannel *channel,
                                 double x,
                                 double y,
                                 uint32_t arm,
                                 uint64_t n_avg,
                                 double *out);

/**
 * Greedy expected meeting turns for opponent offset `(x, y)`.
 *
 * # Safety
 * As [`rdv_prob_positive`].
 */
enum RdvStatus rdv_greedy_meeting_bound(const struct RdvChannel *channel,
                                        double x,
                                        double y,
                                        double *out);

/**
 * R-Optimal meeting-turn bound with confidence multiplier `z`.
 *
 * # Safety
 * As [`rdv_prob_positive`].
 */
enum RdvStatus rdv_roptimal_meeting_bound(const struct RdvChannel *channel,
                                          double x,
                                          double y,
                                          double z,
                                          double *out);

/**
 * New configuration for `num_players` players placed uniformly in a square
 * of side `area_side`, all running `policy` (an [`RdvPolicy`] value). The
 * meeting radius defaults to two steps and the seed to 0.
 *
 * # Safety
 * `channel` must be null or point to an `RdvChannel`; `out` must be null or
 * valid for writes.
 */
enum RdvStatus rdv_trial_config_new(const struct RdvChannel *channel,
                                    uint32_t policy,
                                    size_t num_players,
                                    double area_side,
                                    uint64_t max_turns,
                                    struct RdvTrialConfig **out);

/**
 * Releases a configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must come from [`rdv_trial_config_new`] and not have been freed.
 */
void rdv_trial_config_free(struct RdvTrialConfig *cfg);

/**
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum RdvStatus rdv_trial_config_set_seed(struct RdvTrialConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum RdvStatus rdv_trial_config_set_meet_radius(struct RdvTrialConfig *cfg, double radius);

/**
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum RdvStatus rdv_trial_config_set_avg_window(struct RdvTrialConfig *cfg, size_t window);

/**
 * Learning rates: `a` for R-Exp3 and `epsilon` for R-Thompson.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum RdvStatus rdv_trial_config_set_rates(struct RdvTrialConfig *cfg, double a, double epsilon);

/**
 * Fixes player 0 at the origin and player 1 at `(x, y)`. Two players only.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum RdvStatus rdv_trial_config_set_relative_start(struct RdvTrialConfig *cfg, double x, double y);

/**
 * Runs one trial. Two-player configurations use the pairwise loop, larger
 * ones the group-merging loop.
 *
 * # Safety
 * `cfg` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum RdvStatus rdv_run_trial(const struct RdvTrialConfig *cfg, struct RdvTrialSummary *out);

/**
 * Parses a key = value experiment description.
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be null or
 * valid for writes.
 */
enum RdvStatus rdv_experiment_from_config_str(const char *text, struct RdvExperiment **out);

/**
 * Overrides one key, exactly like a config line `key = value`.
 *
 * # Safety
 * `exp` must be null or a live handle; `key` and `value` must be null or
 * NUL-terminated strings.
 */
enum RdvStatus rdv_experiment_set(struct RdvExperiment *exp, const char *key, const char *value);

/**
 * Runs the experiment and returns its CSV table. Release the string with
 * [`rdv_string_free`].
 *
 * # Safety
 * `exp` must be null or a live handle; `out` must be null or valid for
 * writes.
 */
enum RdvStatus rdv_experiment_run_csv(const struct RdvExperiment *exp, char **out);

/**
 * Releases an experiment. Null is ignored.
 *
 * # Safety
 * `exp` must come from [`rdv_experiment_from_config_str`] and not have been
 * freed.
 */
void rdv_experiment_free(struct RdvExperiment *exp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RENDEZVOUS_H */
