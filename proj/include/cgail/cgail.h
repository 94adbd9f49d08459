#ifndef CGAIL_CGAIL_H_
#define CGAIL_CGAIL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define CGAIL_API __declspec(dllexport)
#else
#  define CGAIL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cgail_status {
  CGAIL_OK = 0,
  CGAIL_ERR_INVALID_ARGUMENT = 1,
  CGAIL_ERR_CONFIG = 2,
  CGAIL_ERR_IO = 3,
  CGAIL_ERR_SINGULAR = 4,
  CGAIL_ERR_STEP_SIZE = 5,
  CGAIL_ERR_NON_FINITE = 6,
  CGAIL_ERR_DIVERGENCE = 7,
  CGAIL_ERR_DEGENERATE = 8,
  CGAIL_ERR_INFEASIBLE = 9,
  CGAIL_ERR_INTERNAL = 10
} cgail_status;

/* Message of the last failed call on this thread; "" after a success. */
CGAIL_API const char* cgail_last_error(void);
CGAIL_API const char* cgail_status_name(cgail_status status);
CGAIL_API const char* cgail_version(void);

/* ---- tabular MDPs and policies ------------------------------------------ */

typedef struct cgail_mdp cgail_mdp;
typedef struct cgail_policy cgail_policy;

/* transition is row-major [s][a][s'], eval_reward [s][a]. */
CGAIL_API cgail_status cgail_mdp_create(int n_states, int n_actions,
                                        const double* transition,
                                        const double* init_dist, double gamma,
                                        const double* eval_reward,
                                        cgail_mdp** out);
CGAIL_API cgail_status cgail_mdp_from_json(const char* text, cgail_mdp** out);
CGAIL_API cgail_status cgail_mdp_load(const char* path, cgail_mdp** out);
/* expert may be NULL; *expert is set to NULL if the fixture ships none. */
CGAIL_API cgail_status cgail_mdp_builtin(const char* name, cgail_mdp** mdp,
                                         cgail_policy** expert);
/* Writes the fixture names, comma separated, into buf. */
CGAIL_API cgail_status cgail_builtin_names(char* buf, size_t len);
CGAIL_API cgail_status cgail_mdp_to_json(const cgail_mdp* mdp, char* buf,
                                         size_t len, size_t* needed);
CGAIL_API void cgail_mdp_free(cgail_mdp* mdp);
CGAIL_API int cgail_mdp_n_states(const cgail_mdp* mdp);
CGAIL_API int cgail_mdp_n_actions(const cgail_mdp* mdp);
CGAIL_API double cgail_mdp_gamma(const cgail_mdp* mdp);

/* probs is row-major [s][a]; entries below 1e-8 are floored. */
CGAIL_API cgail_status cgail_policy_create(int n_states, int n_actions,
                                           const double* probs,
                                           cgail_policy** out);
CGAIL_API cgail_status cgail_policy_from_json(const char* text,
                                              cgail_policy** out);
CGAIL_API cgail_status cgail_policy_uniform(int n_states, int n_actions,
                                            cgail_policy** out);
CGAIL_API cgail_status cgail_policy_soft_optimal(const cgail_mdp* mdp,
                                                 double temperature,
                                                 cgail_policy** out);
CGAIL_API cgail_status cgail_policy_probs(const cgail_policy* policy,
                                          double* out, size_t len);
CGAIL_API void cgail_policy_free(cgail_policy* policy);

/* ---- exact evaluation ---------------------------------------------------- */

CGAIL_API cgail_status cgail_occupancy(const cgail_mdp* mdp,
                                       const cgail_policy* policy,
                                       double* out, size_t len);
CGAIL_API cgail_status cgail_policy_return(const cgail_mdp* mdp,
                                           const cgail_policy* policy,
                                           double* out);
/* disc is [s][a] in (0, 1); q and advantage are [s][a]. */
CGAIL_API cgail_status cgail_value_tables(const cgail_mdp* mdp,
                                          const cgail_policy* policy,
                                          const double* disc, double lambda,
                                          double* occupancy, double* q,
                                          double* advantage);

/* ---- tabular GAIL flow --------------------------------------------------- */

CGAIL_API cgail_status cgail_objective_vd(const cgail_mdp* mdp,
                                          const cgail_policy* policy,
                                          const cgail_policy* expert,
                                          const double* disc, double* out);
CGAIL_API cgail_status cgail_objective_vpi(const cgail_mdp* mdp,
                                           const cgail_policy* policy,
                                           const double* disc, double lambda,
                                           double* out);
CGAIL_API cgail_status cgail_drifts(const cgail_mdp* mdp,
                                    const cgail_policy* policy,
                                    const cgail_policy* expert,
                                    const double* disc, double lambda,
                                    double* d_disc, double* d_policy);
CGAIL_API cgail_status cgail_desired_state_report(const cgail_mdp* mdp,
                                                  const cgail_policy* expert,
                                                  double lambda,
                                                  double* max_abs_disc_drift,
                                                  double* max_abs_policy_drift);

typedef struct cgail_flow_record {
  int step;
  double t;
  double vd;
  double vpi;
  double max_abs_disc_drift;
  double max_abs_policy_drift;
  double policy_distance_to_expert;
  double projection_magnitude;
} cgail_flow_record;

typedef struct cgail_flow_trace cgail_flow_trace;

/* init_disc may be NULL for D = 1/2 everywhere. */
CGAIL_API cgail_status cgail_flow_integrate(const cgail_mdp* mdp,
                                            const cgail_policy* expert,
                                            const cgail_policy* init_policy,
                                            const double* init_disc,
                                            double lambda, double dt, int steps,
                                            cgail_flow_trace** out);
CGAIL_API size_t cgail_flow_trace_length(const cgail_flow_trace* trace);
CGAIL_API cgail_status cgail_flow_trace_record(const cgail_flow_trace* trace,
                                               size_t i, cgail_flow_record* out);
CGAIL_API cgail_status cgail_flow_trace_write_csv(const cgail_flow_trace* trace,
                                                  const char* path);
CGAIL_API void cgail_flow_trace_free(cgail_flow_trace* trace);

/* ---- one-step system ----------------------------------------------------- */

typedef struct cgail_scalar_params {
  double c;
  double lambda;
  double expert_prob;
  double k;
  double alpha;
} cgail_scalar_params;

typedef enum cgail_integrator { CGAIL_EULER = 0, CGAIL_RK4 = 1 } cgail_integrator;

CGAIL_API cgail_status cgail_scalar_drift(const cgail_scalar_params* p, double x,
                                          double y, int controlled, double* dx,
                                          double* dy);
CGAIL_API cgail_status cgail_controller(const cgail_scalar_params* p, double x,
                                        double y, double* u1, double* u2);

typedef struct cgail_trajectory cgail_trajectory;

CGAIL_API cgail_status cgail_scalar_integrate(const cgail_scalar_params* p,
                                              double x0, double y0,
                                              int controlled, double dt,
                                              long steps,
                                              cgail_integrator integrator,
                                              int record_every,
                                              cgail_trajectory** out);
CGAIL_API size_t cgail_trajectory_length(const cgail_trajectory* traj);
CGAIL_API cgail_status cgail_trajectory_state(const cgail_trajectory* traj,
                                              size_t i, double* t, double* x,
                                              double* y);
CGAIL_API cgail_status cgail_trajectory_terminal(const cgail_trajectory* traj,
                                                 double* t, double* x,
                                                 double* y);
CGAIL_API long cgail_trajectory_clamp_events(const cgail_trajectory* traj);
CGAIL_API double cgail_trajectory_terminal_distance(const cgail_trajectory* traj);
CGAIL_API cgail_status cgail_trajectory_write_csv(const cgail_trajectory* traj,
                                                  const char* path);
CGAIL_API void cgail_trajectory_free(cgail_trajectory* traj);

/* Writes up to cap roots; *count receives the total found. */
CGAIL_API cgail_status cgail_find_equilibria(const cgail_scalar_params* p,
                                             int controlled, int grid,
                                             double* xs, double* ys,
                                             double* residuals, size_t cap,
                                             size_t* count);

/* ---- linear stability ---------------------------------------------------- */

typedef struct cgail_jacobian {
  double a11, a12, a21, a22;
  double det;
  double trace;
  double eig_re[2];
  double eig_im[2];
} cgail_jacobian;

typedef struct cgail_verdict {
  int assumption_holds;
  int eig_stable;
  int det_trace_stable;
  int agree;
  int marginal;
  double det_term;
  double trace_term;
} cgail_verdict;

CGAIL_API cgail_status cgail_jacobian_closed_form(const cgail_scalar_params* p,
                                                  cgail_jacobian* out);
CGAIL_API cgail_status cgail_jacobian_numeric(const cgail_scalar_params* p,
                                              double step, cgail_jacobian* out);
CGAIL_API cgail_status cgail_classify(const cgail_scalar_params* p,
                                      cgail_verdict* out);

typedef struct cgail_range {
  double lo;
  double hi;
  int n;
} cgail_range;

typedef struct cgail_audit_spec {
  cgail_range c, lambda, expert_prob, k, alpha;
  double dt;
  double horizon;
  double tolerance;
  double perturb_x;
  double perturb_y_rel;
  int threads;
} cgail_audit_spec;

typedef struct cgail_audit_row {
  cgail_scalar_params params;
  cgail_jacobian jacobian;
  cgail_verdict verdict;
  int converged;
  double terminal_distance;
  long clamp_events;
  int counterexample;
} cgail_audit_row;

typedef struct cgail_audit cgail_audit;

CGAIL_API void cgail_audit_spec_default(cgail_audit_spec* spec);
CGAIL_API cgail_status cgail_audit_run(const cgail_audit_spec* spec,
                                       cgail_audit** out);
CGAIL_API size_t cgail_audit_length(const cgail_audit* audit);
CGAIL_API cgail_status cgail_audit_row_at(const cgail_audit* audit, size_t i,
                                          cgail_audit_row* out);
CGAIL_API size_t cgail_audit_assumption_rows(const cgail_audit* audit);
CGAIL_API size_t cgail_audit_counterexamples(const cgail_audit* audit);
CGAIL_API size_t cgail_audit_marginal_rows(const cgail_audit* audit);
CGAIL_API cgail_status cgail_audit_write_csv(const cgail_audit* audit,
                                             const char* path);
CGAIL_API void cgail_audit_free(cgail_audit* audit);

/* ---- training ------------------------------------------------------------ */

typedef enum cgail_ground_cost { CGAIL_COST_HOP = 0, CGAIL_COST_DISCRETE = 1 } cgail_ground_cost;
typedef enum cgail_init_policy { CGAIL_INIT_UNIFORM = 0, CGAIL_INIT_EXPERT = 1 } cgail_init_policy;

typedef struct cgail_train_config {
  double k;
  double lambda;
  double alpha;
  double lr_disc;
  double lr_policy;
  int n_traj_per_iter;
  int horizon;
  int iterations;
  uint64_t seed;
  int oracle_policy_controller;
  int n_expert_traj;
  int eval_traj;
  int eval_horizon;
  cgail_ground_cost ground_cost;
  cgail_init_policy init_policy;
} cgail_train_config;

typedef struct cgail_training_record {
  int iter;
  double ret;
  double normalized_return;
  double disc_mean;
  double disc_dev_half;
  double tv_to_expert;
  double wasserstein_state;
  double regularizer_value;
} cgail_training_record;

typedef struct cgail_run_summary {
  const char* group;
  double k;
  uint64_t seed;
  int has_convergence_step;
  int convergence_step;
  double oscillation_range;
  double final_normalized_return;
  double final_wasserstein;
} cgail_run_summary;

typedef struct cgail_training_trace cgail_training_trace;

CGAIL_API void cgail_train_config_default(cgail_train_config* config);
CGAIL_API cgail_status cgail_train(const cgail_mdp* mdp,
                                   const cgail_policy* expert,
                                   const cgail_train_config* config,
                                   cgail_training_trace** out);
CGAIL_API size_t cgail_training_trace_length(const cgail_training_trace* trace);
CGAIL_API cgail_status cgail_training_trace_record(
    const cgail_training_trace* trace, size_t i, cgail_training_record* out);
/* out->group is left NULL. */
CGAIL_API cgail_status cgail_training_trace_summary(
    const cgail_training_trace* trace, int window, cgail_run_summary* out);
CGAIL_API cgail_status cgail_training_trace_write_csv(
    const cgail_training_trace* trace, const char* path);
CGAIL_API cgail_status cgail_training_trace_write_summary(
    const cgail_training_trace* trace, const char* group, int window,
    const char* path);
CGAIL_API void cgail_training_trace_free(cgail_training_trace* trace);

CGAIL_API cgail_status cgail_oscillation_range(const double* returns, size_t n,
                                               int window, double* out);
/* *found = 0 if no step reaches 95% of the max. */
CGAIL_API cgail_status cgail_convergence_step(const double* returns, size_t n,
                                              int* found, int* step);

/* ---- metrics and aggregation -------------------------------------------- */

/* Exact transport cost between weights p and q (length n) under the
   row-major n x n ground cost. */
CGAIL_API cgail_status cgail_transport_cost(const double* p, const double* q,
                                            const double* cost, size_t n,
                                            double* out);
CGAIL_API cgail_status cgail_hop_distance(const cgail_mdp* mdp, double* out,
                                          size_t len);

typedef struct cgail_mean_std {
  double mean;
  double std;
  int count;
} cgail_mean_std;

typedef struct cgail_aggregate_row {
  const char* group; /* valid while the aggregate lives */
  int runs;
  cgail_mean_std convergence_step;
  cgail_mean_std oscillation_range;
  cgail_mean_std final_normalized_return;
  cgail_mean_std final_wasserstein;
} cgail_aggregate_row;

typedef struct cgail_aggregate cgail_aggregate;

CGAIL_API cgail_status cgail_aggregate_create(cgail_aggregate** out);
CGAIL_API cgail_status cgail_aggregate_add(cgail_aggregate* agg,
                                           const cgail_run_summary* run);
/* Parses a summary file written by cgail_training_trace_write_summary. */
CGAIL_API cgail_status cgail_aggregate_add_file(cgail_aggregate* agg,
                                                const char* path);
CGAIL_API size_t cgail_aggregate_length(cgail_aggregate* agg);
CGAIL_API cgail_status cgail_aggregate_row_at(cgail_aggregate* agg, size_t i,
                                              cgail_aggregate_row* out);
CGAIL_API cgail_status cgail_aggregate_write_csv(cgail_aggregate* agg,
                                                 const char* path);
CGAIL_API cgail_status cgail_aggregate_write_json(cgail_aggregate* agg,
                                                  const char* path);
CGAIL_API void cgail_aggregate_free(cgail_aggregate* agg);

/* ---- one-step batch output ---------------------------------------------- */

/* Per-trajectory summary rows (params, converged, terminal_distance,
   clamp_events); converged means terminal distance below tolerance. */
CGAIL_API cgail_status cgail_write_sweep_summary(
    const cgail_trajectory* const* trajs, size_t n, double tolerance,
    const char* path);
CGAIL_API cgail_status cgail_write_equilibria_csv(const double* xs,
                                                  const double* ys,
                                                  const double* residuals,
                                                  size_t n, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* CGAIL_CGAIL_H_ */
