/*
 * latticewalk C API.
 *
 * Simulation of two-dimensional discrete-time quantum walks: unitary
 * evolution with optical-element coin schedules, entanglement analysis,
 * and a time-multiplexed fiber-loop detection model.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return LW_OK (0) on success or an LW_ERR_* code; the message
 * for the calling thread's last failure is available via lw_error_message().
 */
#ifndef LATTICEWALK_H
#define LATTICEWALK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LW_OK 0
#define LW_ERR_INTERNAL 1
#define LW_ERR_DOMAIN 2   /* invalid argument or configuration */
#define LW_ERR_PHYSICS 3  /* physical-constraint refusal */
#define LW_ERR_NUMERIC 4  /* numeric invariant violated */
#define LW_ERR_IO 5

/* EOM scope for lw_schedule_angles. */
#define LW_EOM_NONE 0
#define LW_EOM_EVERYWHERE 1
#define LW_EOM_DIAGONAL 2

/* Evolution order for lw_state_evolve. */
#define LW_ORDER_COMBINED 0
#define LW_ORDER_STAGED 1

typedef struct lw_schedule lw_schedule;
typedef struct lw_state lw_state;
typedef struct lw_dist lw_dist;
typedef struct lw_phase_model lw_phase_model;
typedef struct lw_records lw_records;

typedef struct lw_timing {
  double t_min_ns;       /* minimal round-trip time */
  double dtau1_ns;       /* x1-axis delay */
  double dtau2_ns;       /* x2-axis delay */
  double pulse_width_ns;
  double eom_delay_ns;   /* extra modulator insertion delay, usually 0 */
  int axis_swap;         /* exchange the delay/axis pairing */
} lw_timing;

typedef struct lw_loss {
  double input_coupling;
  double outcouple_minus; /* x1-1 loop */
  double outcouple_plus;  /* x1+1 loop */
  double step_survival;
  double detection_efficiency[4]; /* per coin basis state */
} lw_loss;

typedef struct lw_collision {
  int step_a, step_b;
  int x1_a, x2_a, x1_b, x2_b;
  double time_a_ns, time_b_ns;
} lw_collision;

const char* lw_version(void);

/* Message describing this thread's most recent failure ("" if none). */
const char* lw_error_message(void);

/* ---- reference configurations ------------------------------------- */

void lw_timing_paper(lw_timing* out);
void lw_loss_paper(lw_loss* out);
void lw_loss_lossless(lw_loss* out);

/* ---- coin schedules ------------------------------------------------ */

/*
 * name is one of: hadamard, controlled_xz, controlled_hadamard_23,
 * controlled_hadamard_24, nonlinear_cz_diagonal.
 */
int lw_schedule_named(const char* name, lw_schedule** out);

/*
 * Assembles the combined coin from wave-plate angles (radians) and an EOM
 * rule. With staged nonzero the schedule also carries the stage pair
 * (C1, C2) for hardware-order evolution.
 */
int lw_schedule_angles(const double theta[4], double eom_phase,
                       double eom_crosstalk, int eom_scope, int staged,
                       lw_schedule** out);

void lw_schedule_free(lw_schedule* schedule);
int lw_schedule_separable(const lw_schedule* schedule, int* out);
int lw_schedule_has_staged(const lw_schedule* schedule, int* out);

/* ---- walk states ---------------------------------------------------- */

int lw_state_localized(int x1, int x2, int c1, int c2, lw_state** out);

/*
 * Builds a state from parallel arrays of basis labels and amplitudes.
 * The amplitudes must be normalized within 1e-9.
 */
int lw_state_from_entries(int64_t count, const int* x1, const int* x2,
                          const int* c1, const int* c2, const double* re,
                          const double* im, lw_state** out);

void lw_state_free(lw_state* state);

/* Advances the state by `steps` walk steps in place. */
int lw_state_evolve(lw_state* state, const lw_schedule* schedule, int steps,
                    int order);

int lw_state_step_count(const lw_state* state, int* out);
int lw_state_norm(const lw_state* state, double* out);
int lw_state_entry_count(const lw_state* state, int64_t* out);

/* Entries are ordered by (x1, x2, c1, c2). */
int lw_state_entry(const lw_state* state, int64_t index, int* x1, int* x2,
                   int* c1, int* c2, double* re, double* im);

/* Exact von Neumann entropy across the (x1,c1) | (x2,c2) bipartition. */
int lw_state_entropy(const lw_state* state, double* bits);

int lw_state_position_dist(const lw_state* state, lw_dist** out);
int lw_state_coin_dist(const lw_state* state, lw_dist** out);

/* ---- distributions --------------------------------------------------- */

int lw_dist_new(int coin_resolved, lw_dist** out);

/* For position-only distributions pass c1 = c2 = 0. */
int lw_dist_add(lw_dist* dist, int x1, int x2, int c1, int c2, double weight);

/* Builds the distribution; weights are scaled to sum to 1. */
int lw_dist_finalize(lw_dist* dist, int normalize);

void lw_dist_free(lw_dist* dist);

int lw_dist_entry_count(const lw_dist* dist, int64_t* out);
int lw_dist_entry(const lw_dist* dist, int64_t index, int* x1, int* x2,
                  double* weight);
int lw_dist_coin_entry_count(const lw_dist* dist, int64_t* out);
int lw_dist_coin_entry(const lw_dist* dist, int64_t index, int* x1, int* x2,
                       int* c1, int* c2, double* weight);

/* Squared Bhattacharyya coefficient of two normalized distributions. */
int lw_similarity(const lw_dist* p, const lw_dist* q, double* out);

/* sum_x P(x,x). */
int lw_confinement(const lw_dist* dist, double* out);

/* max |P(x1,x2) - P1(x1) P2(x2)|. */
int lw_factorization_residual(const lw_dist* dist, double* out);

int lw_marginal_count(const lw_dist* dist, int axis, int64_t* out);
int lw_marginal_entry(const lw_dist* dist, int axis, int64_t index, int* x,
                      double* weight);

/* ---- entropy lower bound --------------------------------------------- */

int lw_phase_model_new(lw_phase_model** out);
int lw_phase_model_add(lw_phase_model* model, int x1, int x2, int c1, int c2,
                       double phase);
int lw_phase_model_from_state(const lw_state* state, lw_phase_model** out);
void lw_phase_model_free(lw_phase_model* model);

/*
 * Minimum entropy over the three coin-sector phases for candidate states
 * assembled from coin-resolved probabilities and model phases. grid <= 0
 * and threads <= 0 select defaults. phases_out may be NULL.
 */
int lw_entropy_lower_bound(const lw_dist* probabilities,
                           const lw_phase_model* model, int grid, int threads,
                           double* bits, double phases_out[3]);

/* ---- hardware model --------------------------------------------------- */

/* Arrival-time bin of (x1,x2) after `step` steps; parity enforced. */
int lw_arrival_time(int x1, int x2, int step, const lw_timing* timing,
                    double* out);

/*
 * ok becomes 1 when every time bin up to n_max is safely separated;
 * otherwise 0, with the first offending pair stored in *collision when
 * the pointer is non-NULL.
 */
int lw_check_overlap(const lw_timing* timing, int n_max, int* ok,
                     lw_collision* collision);

int lw_simulate(const lw_schedule* schedule, const lw_loss* loss,
                const lw_timing* timing, int n_steps, int64_t trials,
                uint64_t seed, int threads, lw_records** out);

void lw_records_free(lw_records* records);
int lw_records_count(const lw_records* records, int64_t* out);
int lw_records_entry(const lw_records* records, int64_t index,
                     int64_t* trial_id, int* step, double* arrival_time_ns,
                     int* coin_state);
int lw_records_entered(const lw_records* records, int64_t* out);
int lw_records_alive_after(const lw_records* records, int step, int64_t* out);

int lw_records_write(const lw_records* records, const char* path);
int lw_records_read(const char* path, lw_records** out);

/*
 * Maps records at `step` back to positions, applies the per-coin
 * calibration and normalizes. unassigned (nullable) receives the number
 * of records matching no bin within half a pulse width.
 */
int lw_reconstruct(const lw_records* records, const lw_timing* timing,
                   int step, const double calibration[4], lw_dist** out,
                   int64_t* unassigned);

/* Expected detections per step (out has n_steps slots). */
int lw_expected_events(const lw_schedule* schedule, const lw_loss* loss,
                       int n_steps, int64_t trials, double* out);

/* ---- reference oracles (debugging) ------------------------------------ */

/* Max amplitude difference between the sparse walk and the dense oracle. */
int lw_oracle_dense_diff(const lw_schedule* schedule, int x1, int x2, int c1,
                         int c2, int steps, double* out);

/*
 * Max deviation between the 2D walk's position distribution and the
 * two-walker coincidence distribution for a named coin.
 */
int lw_oracle_isomorphism_diff(const char* name, int steps, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LATTICEWALK_H */
