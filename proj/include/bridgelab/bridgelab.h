/* C interface to bridgelab: opaque handles, status codes, caller-owned buffers.
 * Every function returning bl_status leaves a message for bl_last_error() on
 * failure; the message is per thread and valid until the next failing call. */
#ifndef BRIDGELAB_H
#define BRIDGELAB_H

#include <stddef.h>

#if defined(BRIDGELAB_BUILDING_LIBRARY)
#define BL_API __attribute__((visibility("default")))
#else
#define BL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bl_status {
  BL_OK = 0,
  BL_ERR_DOMAIN = 1,
  BL_ERR_DOMAIN_ESCAPE = 2,
  BL_ERR_NON_FINITE = 3,
  BL_ERR_NO_CONVERGENCE = 4,
  BL_ERR_MAX_ITERATIONS = 5,
  BL_ERR_UNSUPPORTED_KIND = 6,
  BL_ERR_UNSUPPORTED_ENDPOINTS = 7,
  BL_ERR_NON_UNIFORM_GRID = 8,
  BL_ERR_OFF_GRID = 9,
  BL_ERR_OUT_OF_RANGE = 10,
  BL_ERR_DEGENERATE_SERIES = 11,
  BL_ERR_MISSING_PREREQUISITE = 12,
  BL_ERR_CONFIG = 13,
  BL_ERR_INVALID_ARGUMENT = 14,
  BL_ERR_IO = 15,
  BL_ERR_INTERNAL = 99
} bl_status;

typedef enum bl_potential_kind {
  BL_QUADRATIC_ISOTROPIC = 0,
  BL_QUADRATIC_MATRIX = 1,
  BL_NEG_LOG = 2
} bl_potential_kind;

typedef enum bl_method { BL_METHOD_SHOOTING = 0, BL_METHOD_ACTION = 1, BL_METHOD_AUTO = 2 } bl_method;

typedef enum bl_solver { BL_SOLVER_SHOOTING = 0, BL_SOLVER_ACTION_MIN = 1, BL_SOLVER_CLOSED_FORM = 2 } bl_solver;

typedef enum bl_rate_model { BL_RATE_POWER_LAW = 0, BL_RATE_EXPONENTIAL = 1 } bl_rate_model;

typedef struct bl_potential bl_potential;
typedef struct bl_trajectory bl_trajectory;
typedef struct bl_bridge bl_bridge;
typedef struct bl_bound_reports bl_bound_reports;

typedef struct bl_solver_options {
  int method; /* bl_method */
  int max_iter;
  int restarts;
  double tol_boundary;
  int grid_points;
  int steps; /* 0 = default */
} bl_solver_options;

typedef struct bl_bridge_info {
  double horizon;
  double cost;
  double energy_mean;
  double energy_maxdev;
  double energy_tolerance;
  double newton_residual;
  double boundary_error;
  int solver; /* bl_solver */
  int iterations;
  int two_sided;
} bl_bridge_info;

typedef struct bl_bound_report {
  int bound_id; /* 1..12 */
  int applicable;
  int pass;
  int reverse; /* 1 when evaluated on the y -> x bridge */
  double lhs;
  double rhs;
  double margin;
  double t;     /* NaN when not pointwise */
  double theta; /* NaN unless a turnpike fraction */
} bl_bound_report;

typedef struct bl_rate_fit {
  double exponent;
  double prefactor;
  double residual;
  int model; /* bl_rate_model */
} bl_rate_fit;

typedef struct bl_gamma_expansion {
  double excess;
  double limit_target;
  double first_order;
  double first_order_target;
} bl_gamma_expansion;

BL_API const char* bl_version(void);
BL_API const char* bl_last_error(void);
BL_API const char* bl_status_name(bl_status status);

/* Potentials. `a` is a row-major dim x dim symmetric matrix. */
BL_API bl_status bl_potential_create(bl_potential_kind kind, int dim, const double* a,
                                     bl_potential** out);
BL_API void bl_potential_free(bl_potential* p);
BL_API int bl_potential_dim(const bl_potential* p);
BL_API bl_status bl_potential_value(const bl_potential* p, const double* x, double* out);
BL_API bl_status bl_potential_gradient(const bl_potential* p, const double* x, double* out);
BL_API bl_status bl_potential_hessian_apply(const bl_potential* p, const double* x,
                                            const double* v, double* out);
BL_API bl_status bl_potential_convexity_defect(const bl_potential* p, const double* x,
                                               const double* v, double* out);

/* Trajectories. */
BL_API bl_status bl_gradient_flow(const bl_potential* p, const double* x0, double horizon,
                                  int steps, bl_trajectory** out);
BL_API void bl_trajectory_free(bl_trajectory* t);
BL_API size_t bl_trajectory_size(const bl_trajectory* t);
BL_API int bl_trajectory_dim(const bl_trajectory* t);
/* Copies node k; any of time/state/velocity may be NULL. */
BL_API bl_status bl_trajectory_node(const bl_trajectory* t, size_t k, double* time, double* state,
                                    double* velocity);
BL_API bl_status bl_trajectory_state_at(const bl_trajectory* t, double time, double* state);
BL_API bl_status bl_action_cost(const bl_potential* p, const bl_trajectory* t, double* out);

/* Bridges. `opts` may be NULL for defaults. */
BL_API void bl_solver_options_default(bl_solver_options* opts);
BL_API bl_status bl_solve_bridge(const bl_potential* p, const double* x, const double* y,
                                 double horizon, const bl_solver_options* opts, bl_bridge** out);
BL_API bl_status bl_closed_form_bridge(const bl_potential* p, const double* x, const double* y,
                                       double horizon, int steps, bl_bridge** out);
BL_API void bl_bridge_free(bl_bridge* b);
BL_API bl_status bl_bridge_get_info(const bl_bridge* b, bl_bridge_info* out);
/* Borrowed view, valid while the bridge lives. */
BL_API const bl_trajectory* bl_bridge_trajectory(const bl_bridge* b);

/* Bound catalogue on a solved bridge between x and y. */
BL_API bl_status bl_verify_bounds(const bl_potential* p, const bl_bridge* b, const double* x,
                                  const double* y, const double* times, size_t n_times,
                                  const double* thetas, size_t n_thetas, bl_bound_reports** out);
BL_API size_t bl_bound_reports_count(const bl_bound_reports* r);
BL_API bl_status bl_bound_reports_get(const bl_bound_reports* r, size_t i, bl_bound_report* out);
BL_API void bl_bound_reports_free(bl_bound_reports* r);

BL_API bl_status bl_fit_rate(const double* abscissa, const double* values, size_t n,
                             bl_rate_model model, bl_rate_fit* out);

/* Gaussian family: N(x0, 1) to N(x1, 1) over [0, T]. quad_steps 0 = default. */
BL_API bl_status bl_gaussian_fluct(double horizon, double* out);
BL_API bl_status bl_gaussian_marginal(double x0, double x1, double horizon, double t, double* mean,
                                      double* variance);
BL_API bl_status bl_gaussian_cost(double x0, double x1, double horizon, int quad_steps,
                                  double* out);
BL_API bl_status bl_gaussian_energy(double x0, double x1, double horizon, double t, double* out);
BL_API bl_status bl_gaussian_w2(double mean_a, double var_a, double mean_b, double var_b,
                                double* out);
BL_API bl_status bl_gaussian_gamma_expansion(double x0, double x1, double horizon, int quad_steps,
                                             bl_gamma_expansion* out);

/* Experiments. Returns the process exit code (0, 1 or 2); messages go to stderr.
 * `path` may be "builtin:NAME". `out_dir` may be NULL. */
BL_API int bl_run_config(const char* path, int keep_going, int threads, const char* out_dir);
BL_API size_t bl_builtin_count(void);
BL_API const char* bl_builtin_name(size_t i);
/* NULL for unknown names. */
BL_API const char* bl_builtin_json(const char* name);

#ifdef __cplusplus
}
#endif

#endif /* BRIDGELAB_H */
