#include "bridgelab/bridgelab.h"

#include <cmath>
#include <iostream>
#include <new>
#include <string>

#include "bridgelab/bounds.hpp"
#include "bridgelab/bridge.hpp"
#include "bridgelab/experiment.hpp"
#include "bridgelab/flow.hpp"
#include "bridgelab/functionals.hpp"
#include "bridgelab/gaussian.hpp"

using namespace bridgelab;

struct bl_potential {
  Potential p;
};
struct bl_trajectory {
  Trajectory t;
};
struct bl_bridge {
  BridgeSolution s;
  bl_trajectory view;
};
struct bl_bound_reports {
  std::vector<BoundReport> items;
};

namespace {

thread_local std::string g_last_error;

bl_status set_error(bl_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
bl_status guarded(F&& f) {
  try {
    f();
    return BL_OK;
  } catch (const Error& e) {
    return set_error(static_cast<bl_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(BL_ERR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* msg) {
  if (!ok) fail(ErrorCode::InvalidArgument, msg);
}

Vector vec(const double* x, int dim) {
  require(x != nullptr, "null vector argument");
  return Eigen::Map<const Vector>(x, dim);
}

void copy_out(const Vector& v, double* out) { Eigen::Map<Vector>(out, v.size()) = v; }

SolverOptions to_options(const bl_solver_options* o) {
  SolverOptions s;
  if (!o) return s;
  require(o->method >= 0 && o->method <= 2, "unknown solver method");
  s.method = static_cast<SolveMethod>(o->method);
  s.max_iter = o->max_iter;
  s.restarts = o->restarts;
  s.tol_boundary = o->tol_boundary;
  s.grid_points = o->grid_points;
  s.steps = o->steps;
  require(s.max_iter > 0 && s.restarts > 0 && s.tol_boundary > 0.0 && s.grid_points >= 5 &&
              s.steps >= 0,
          "invalid solver options");
  return s;
}

}  // namespace

extern "C" {

const char* bl_version(void) { return "1.0.0"; }

const char* bl_last_error(void) { return g_last_error.c_str(); }

const char* bl_status_name(bl_status status) {
  if (status == BL_OK) return "OK";
  if (status == BL_ERR_INTERNAL) return "InternalError";
  return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

bl_status bl_potential_create(bl_potential_kind kind, int dim, const double* a,
                              bl_potential** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = nullptr;
    switch (kind) {
      case BL_QUADRATIC_ISOTROPIC:
        *out = new bl_potential{Potential::quadratic_isotropic(dim)};
        return;
      case BL_NEG_LOG:
        *out = new bl_potential{Potential::neg_log(dim)};
        return;
      case BL_QUADRATIC_MATRIX: {
        require(dim > 0 && a != nullptr, "QuadraticMatrix needs dim > 0 and a matrix");
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) m(i, j) = a[i * dim + j];
        *out = new bl_potential{Potential::quadratic_matrix(m)};
        return;
      }
    }
    fail(ErrorCode::UnsupportedKind, "unknown potential kind");
  });
}

void bl_potential_free(bl_potential* p) { delete p; }

int bl_potential_dim(const bl_potential* p) { return p ? p->p.dim() : 0; }

bl_status bl_potential_value(const bl_potential* p, const double* x, double* out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = p->p.value(vec(x, p->p.dim()));
  });
}

bl_status bl_potential_gradient(const bl_potential* p, const double* x, double* out) {
  return guarded([&] {
    require(p && out, "null argument");
    copy_out(p->p.gradient(vec(x, p->p.dim())), out);
  });
}

bl_status bl_potential_hessian_apply(const bl_potential* p, const double* x, const double* v,
                                     double* out) {
  return guarded([&] {
    require(p && out, "null argument");
    copy_out(p->p.hessian_apply(vec(x, p->p.dim()), vec(v, p->p.dim())), out);
  });
}

bl_status bl_potential_convexity_defect(const bl_potential* p, const double* x, const double* v,
                                        double* out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = p->p.convexity_defect(vec(x, p->p.dim()), vec(v, p->p.dim()));
  });
}

bl_status bl_gradient_flow(const bl_potential* p, const double* x0, double horizon, int steps,
                           bl_trajectory** out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = nullptr;
    *out = new bl_trajectory{gradient_flow(p->p, vec(x0, p->p.dim()), horizon, steps)};
  });
}

void bl_trajectory_free(bl_trajectory* t) { delete t; }

size_t bl_trajectory_size(const bl_trajectory* t) { return t ? t->t.size() : 0; }

int bl_trajectory_dim(const bl_trajectory* t) { return t ? t->t.dim() : 0; }

bl_status bl_trajectory_node(const bl_trajectory* t, size_t k, double* time, double* state,
                             double* velocity) {
  return guarded([&] {
    require(t != nullptr, "null trajectory");
    if (k >= t->t.size()) fail(ErrorCode::OutOfRange, "node index out of range");
    if (time) *time = t->t.times[k];
    if (state) copy_out(t->t.states[k], state);
    if (velocity) copy_out(t->t.velocities[k], velocity);
  });
}

bl_status bl_trajectory_state_at(const bl_trajectory* t, double time, double* state) {
  return guarded([&] {
    require(t && state, "null argument");
    copy_out(t->t.state_at(time), state);
  });
}

bl_status bl_action_cost(const bl_potential* p, const bl_trajectory* t, double* out) {
  return guarded([&] {
    require(p && t && out, "null argument");
    *out = action_cost(t->t, p->p);
  });
}

void bl_solver_options_default(bl_solver_options* opts) {
  if (!opts) return;
  const SolverOptions s;
  opts->method = static_cast<int>(s.method);
  opts->max_iter = s.max_iter;
  opts->restarts = s.restarts;
  opts->tol_boundary = s.tol_boundary;
  opts->grid_points = s.grid_points;
  opts->steps = s.steps;
}

bl_status bl_solve_bridge(const bl_potential* p, const double* x, const double* y, double horizon,
                          const bl_solver_options* opts, bl_bridge** out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = nullptr;
    const int d = p->p.dim();
    auto* b = new bl_bridge{solve_bridge(p->p, vec(x, d), vec(y, d), horizon, to_options(opts)), {}};
    b->view.t = b->s.trajectory;
    *out = b;
  });
}

bl_status bl_closed_form_bridge(const bl_potential* p, const double* x, const double* y,
                                double horizon, int steps, bl_bridge** out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = nullptr;
    const int d = p->p.dim();
    auto* b = new bl_bridge{closed_form_bridge_solution(p->p, vec(x, d), vec(y, d), horizon, steps),
                            {}};
    b->view.t = b->s.trajectory;
    *out = b;
  });
}

void bl_bridge_free(bl_bridge* b) { delete b; }

bl_status bl_bridge_get_info(const bl_bridge* b, bl_bridge_info* out) {
  return guarded([&] {
    require(b && out, "null argument");
    const BridgeSolution& s = b->s;
    out->horizon = s.horizon();
    out->cost = s.cost;
    out->energy_mean = s.energy_mean;
    out->energy_maxdev = s.energy_maxdev;
    out->energy_tolerance = s.energy_tolerance;
    out->newton_residual = s.newton_residual;
    out->boundary_error = s.boundary_error;
    out->solver = static_cast<int>(s.solver);
    out->iterations = s.iterations;
    out->two_sided = s.two_sided ? 1 : 0;
  });
}

const bl_trajectory* bl_bridge_trajectory(const bl_bridge* b) { return b ? &b->view : nullptr; }

bl_status bl_verify_bounds(const bl_potential* p, const bl_bridge* b, const double* x,
                           const double* y, const double* times, size_t n_times,
                           const double* thetas, size_t n_thetas, bl_bound_reports** out) {
  return guarded([&] {
    require(p && b && out, "null argument");
    require(n_times == 0 || times, "null times");
    require(n_thetas == 0 || thetas, "null thetas");
    *out = nullptr;
    const int d = p->p.dim();
    BoundCase c;
    c.x = vec(x, d);
    c.y = vec(y, d);
    c.horizon = b->s.horizon();
    c.bridge = b->s;
    c.times.assign(times, times + n_times);
    c.thetas.assign(thetas, thetas + n_thetas);
    *out = new bl_bound_reports{verify_bounds(p->p, c)};
  });
}

size_t bl_bound_reports_count(const bl_bound_reports* r) { return r ? r->items.size() : 0; }

bl_status bl_bound_reports_get(const bl_bound_reports* r, size_t i, bl_bound_report* out) {
  return guarded([&] {
    require(r && out, "null argument");
    if (i >= r->items.size()) fail(ErrorCode::OutOfRange, "report index out of range");
    const BoundReport& b = r->items[i];
    out->bound_id = static_cast<int>(b.id);
    out->applicable = b.applicable ? 1 : 0;
    out->pass = b.pass ? 1 : 0;
    out->reverse = b.context.orientation == "reverse" ? 1 : 0;
    out->lhs = b.lhs;
    out->rhs = b.rhs;
    out->margin = b.margin;
    out->t = b.context.t;
    out->theta = b.context.theta;
  });
}

void bl_bound_reports_free(bl_bound_reports* r) { delete r; }

bl_status bl_fit_rate(const double* abscissa, const double* values, size_t n, bl_rate_model model,
                      bl_rate_fit* out) {
  return guarded([&] {
    require(out && (n == 0 || (abscissa && values)), "null argument");
    require(model == BL_RATE_POWER_LAW || model == BL_RATE_EXPONENTIAL, "unknown rate model");
    std::vector<std::pair<double, double>> series;
    for (size_t i = 0; i < n; ++i) series.emplace_back(abscissa[i], values[i]);
    const RateFit f = fit_rate(series, model == BL_RATE_POWER_LAW ? RateModel::PowerLaw
                                                                  : RateModel::Exponential);
    out->exponent = f.exponent;
    out->prefactor = f.prefactor;
    out->residual = f.residual;
    out->model = model;
  });
}

bl_status bl_gaussian_fluct(double horizon, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = gaussian::fluct_param(horizon);
  });
}

bl_status bl_gaussian_marginal(double x0, double x1, double horizon, double t, double* mean,
                               double* variance) {
  return guarded([&] {
    require(mean && variance, "null argument");
    const gaussian::Gaussian1D g = gaussian::bridge_marginal({x0, x1, horizon}, t);
    *mean = g.mean;
    *variance = g.variance;
  });
}

bl_status bl_gaussian_cost(double x0, double x1, double horizon, int quad_steps, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const gaussian::GaussianBridge gb(x0, x1, horizon);
    *out = gaussian::gaussian_cost(gb, quad_steps ? quad_steps : gaussian::default_quad_steps(horizon));
  });
}

bl_status bl_gaussian_energy(double x0, double x1, double horizon, double t, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = gaussian::gaussian_energy({x0, x1, horizon}, t);
  });
}

bl_status bl_gaussian_w2(double mean_a, double var_a, double mean_b, double var_b, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = gaussian::w2_gaussian({mean_a, var_a}, {mean_b, var_b});
  });
}

bl_status bl_gaussian_gamma_expansion(double x0, double x1, double horizon, int quad_steps,
                                      bl_gamma_expansion* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const gaussian::GaussianBridge gb(x0, x1, horizon);
    const gaussian::GammaExpansion g = gaussian::gamma_expansion(
        gb, quad_steps ? quad_steps : gaussian::default_quad_steps(horizon));
    out->excess = g.excess;
    out->limit_target = g.limit_target;
    out->first_order = g.first_order;
    out->first_order_target = g.first_order_target;
  });
}

int bl_run_config(const char* path, int keep_going, int threads, const char* out_dir) {
  if (!path) {
    g_last_error = "null config path";
    std::cerr << "InvalidArgument: null config path\n";
    return 1;
  }
  RunOptions opts;
  opts.keep_going = keep_going != 0;
  opts.threads = threads;
  if (out_dir) opts.out_dir = std::string(out_dir);
  opts.log = &std::cerr;
  try {
    return run_config(path, opts);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    std::cerr << "InternalError: " << e.what() << '\n';
    return 2;
  }
}

size_t bl_builtin_count(void) { return builtin_config_names().size(); }

const char* bl_builtin_name(size_t i) {
  static const std::vector<std::string> names = builtin_config_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

const char* bl_builtin_json(const char* name) {
  if (!name) return nullptr;
  static thread_local std::string text;
  try {
    text = builtin_config_json(name);
  } catch (const Error& e) {
    g_last_error = e.what();
    return nullptr;
  }
  return text.c_str();
}

}  // extern "C"
