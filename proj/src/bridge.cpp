#include "bridgelab/bridge.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/LU>

#include "bridgelab/flow.hpp"
#include "bridgelab/functionals.hpp"

namespace bridgelab {

const char* method_name(SolveMethod m) noexcept {
  switch (m) {
    case SolveMethod::Shooting: return "shooting";
    case SolveMethod::Action: return "action";
    case SolveMethod::Auto: return "auto";
  }
  return "unknown";
}

const char* solver_name(SolverKind s) noexcept {
  switch (s) {
    case SolverKind::Shooting: return "Shooting";
    case SolverKind::ActionMin: return "ActionMin";
    case SolverKind::ClosedForm: return "ClosedForm";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_endpoints(const Potential& p, const Vector& x, const Vector& y, double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    fail(ErrorCode::InvalidArgument, "bridge horizon must be positive and finite");
  if (x.size() != p.dim() || y.size() != p.dim())
    fail(ErrorCode::InvalidArgument, "endpoint dimension does not match the potential");
  if (!p.in_domain(x) || !p.in_domain(y))
    fail(ErrorCode::Domain, "bridge endpoints must lie in the potential's domain");
}

// Fills cost, energy statistics and residual diagnostics from the trajectory.
void finish_solution(BridgeSolution& sol, const Potential& p, const Vector& x, const Vector& y) {
  const Trajectory& traj = sol.trajectory;
  sol.cost = action_cost(traj, p);
  const EnergyStats energy = conserved_energy(traj, p);
  sol.energy_mean = energy.mean;
  sol.energy_maxdev = energy.maxdev;
  sol.energy_tolerance = 1e-6 * (1.0 + std::abs(energy.mean));
  sol.newton_residual = traj.size() >= 5 ? newton_residual(traj, p) : 0.0;
  sol.boundary_error = std::max((traj.states.front() - x).lpNorm<Eigen::Infinity>(),
                                (traj.states.back() - y).lpNorm<Eigen::Infinity>());
}

// Fixed-step RK4 for the phase system x' = w, w' = scale * F''(x) F'(x) with
// preallocated stage buffers. With scale = T^2 and unit step 1/N this is the
// Newton system in the rescaled time s = t / T.
class PhaseIntegrator {
 public:
  PhaseIntegrator(const Potential& p, double accel_scale)
      : p_(p), scale_(accel_scale) {
    const int d = p.dim();
    for (Vector* b : {&k1x_, &k1w_, &k2x_, &k2w_, &k3x_, &k3w_, &k4x_, &k4w_, &tx_, &acc_})
      b->resize(d);
  }

  /// Advances (x, w) by `steps` steps of size h. When `sink` is set it is
  /// called with (k, x, w) for k = 1..steps after each step.
  void run(Vector& x, Vector& w, double h, int steps,
           const std::function<void(int, const Vector&, const Vector&)>& sink = {}) {
    for (int k = 1; k <= steps; ++k) {
      step(x, w, h);
      if (!x.allFinite() || !w.allFinite())
        fail(ErrorCode::NonFinite, "phase integration overflowed");
      if (sink) sink(k, x, w);
    }
  }

 private:
  void accel(const Vector& x, Vector& out) {
    p_.newton_acceleration_into(x, acc_);
    out = scale_ * acc_;
  }

  void step(Vector& x, Vector& w, double h) {
    k1x_ = w;
    accel(x, k1w_);
    tx_ = x + (0.5 * h) * k1x_;
    k2x_ = w + (0.5 * h) * k1w_;
    accel(tx_, k2w_);
    tx_ = x + (0.5 * h) * k2x_;
    k3x_ = w + (0.5 * h) * k2w_;
    accel(tx_, k3w_);
    tx_ = x + h * k3x_;
    k4x_ = w + h * k3w_;
    accel(tx_, k4w_);
    x += (h / 6.0) * (k1x_ + 2.0 * k2x_ + 2.0 * k3x_ + k4x_);
    w += (h / 6.0) * (k1w_ + 2.0 * k2w_ + 2.0 * k3w_ + k4w_);
    if (!p_.in_domain(x)) fail(ErrorCode::Domain, "phase trajectory left the domain");
  }

  const Potential& p_;
  double scale_;
  Vector k1x_, k1w_, k2x_, k2w_, k3x_, k3w_, k4x_, k4w_, tx_, acc_;
};

// Geometry of one shooting problem.
struct ShootingSetup {
  const Potential& p;
  Vector x, y;
  double horizon;
  int steps;
  // Rescaled time for strongly convex potentials on long horizons.
  bool scaled;

  double unit_step() const { return scaled ? 1.0 / steps : horizon / steps; }
  double accel_scale() const { return scaled ? horizon * horizon : 1.0; }
  double velocity_unit() const { return scaled ? horizon : 1.0; }

  // Integrates from (start, v) over `n` steps in direction `sign`; returns
  // the physical end state and velocity, or nullopt on a domain escape or
  // overflow.
  std::optional<std::pair<Vector, Vector>> integrate(const Vector& start, const Vector& v,
                                                     int n, double sign) const {
    PhaseIntegrator integ(p, accel_scale());
    Vector xs = start;
    Vector ws = v * velocity_unit();
    try {
      integ.run(xs, ws, sign * unit_step(), n);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Domain || e.code() == ErrorCode::NonFinite) return std::nullopt;
      throw;
    }
    return std::make_pair(xs, Vector(ws / velocity_unit()));
  }

  // Stores nodes [first, first + n] of a uniform grid on [0, T].
  void record(const Vector& start, const Vector& v, int first, int n, double sign,
              Trajectory& out) const {
    PhaseIntegrator integ(p, accel_scale());
    Vector xs = start;
    Vector ws = v * velocity_unit();
    const double vu = velocity_unit();
    auto node_time = [&](int k) { return k == steps ? horizon : horizon * k / steps; };
    auto put = [&](int idx, const Vector& xx, const Vector& ww) {
      out.times[idx] = node_time(idx);
      out.states[idx] = xx;
      out.velocities[idx] = ww / vu;
    };
    put(first, xs, ws);
    const int dir = sign > 0 ? 1 : -1;
    integ.run(xs, ws, sign * unit_step(), n,
              [&](int k, const Vector& xx, const Vector& ww) { put(first + dir * k, xx, ww); });
  }
};

struct NewtonOutcome {
  bool converged = false;
  bool initial_failed = false;
  // Stopped because the landing error cannot reach tol in double precision.
  bool ill_conditioned = false;
  Vector unknown;
  double residual = kInf;
  int iterations = 0;
};

using ResidualFn = std::function<std::optional<Vector>(const Vector&)>;

// Damped Newton with a forward-difference Jacobian. The step is halved (at
// most 30 times) until the residual decreases. Iteration continues past `tol`
// while it keeps paying off, down to `polish_tol`. With `guard` set, it gives
// up early once |J| eps |z| shows the tolerance is out of reach.
NewtonOutcome damped_newton(const ResidualFn& residual, const Vector& z0, int max_iter,
                            double tol, double polish_tol, bool guard = false) {
  NewtonOutcome out;
  out.unknown = z0;
  std::optional<Vector> r = residual(z0);
  if (!r) {
    out.initial_failed = true;
    return out;
  }
  Vector rz = *r;
  double res = rz.lpNorm<Eigen::Infinity>();
  const int n = static_cast<int>(z0.size());
  const int m = static_cast<int>(rz.size());

  for (int it = 0; it < max_iter && res > polish_tol; ++it) {
    const Vector& z = out.unknown;
    const double delta = 1e-8 * (1.0 + z.norm());
    Matrix jac(m, n);
    bool jac_ok = true;
    for (int j = 0; j < n && jac_ok; ++j) {
      Vector zp = z;
      zp[j] += delta;
      std::optional<Vector> rp = residual(zp);
      double dj = delta;
      if (!rp) {
        zp[j] = z[j] - delta;
        rp = residual(zp);
        dj = -delta;
      }
      if (!rp) {
        jac_ok = false;
        break;
      }
      jac.col(j) = (*rp - rz) / dj;
    }
    if (!jac_ok || !jac.allFinite()) break;
    if (guard && res > tol) {
      const double floor = jac.cwiseAbs().rowwise().sum().maxCoeff() *
                           std::numeric_limits<double>::epsilon() * (1.0 + z.norm());
      if (floor > 0.1 * tol) {
        out.ill_conditioned = true;
        break;
      }
    }

    const Vector dz = jac.fullPivLu().solve(-rz);
    if (!dz.allFinite()) break;

    bool accepted = false;
    double lambda = 1.0;
    for (int halving = 0; halving <= 30; ++halving, lambda *= 0.5) {
      const Vector trial = z + lambda * dz;
      std::optional<Vector> rt = residual(trial);
      if (!rt) continue;
      const double rt_norm = rt->lpNorm<Eigen::Infinity>();
      if (rt_norm < res) {
        const double previous = res;
        out.unknown = trial;
        rz = *rt;
        res = rt_norm;
        accepted = true;
        out.iterations = it + 1;
        if (res <= tol && res > 0.25 * previous) it = max_iter;  // polishing stalled
        break;
      }
    }
    if (!accepted) break;
  }
  out.residual = res;
  out.converged = res <= tol;
  return out;
}

// Two-sided shooting: integrate forward from (x, v0) and backward from
// (y, vT) to T/2 and match position and velocity there. Both endpoints are
// then exact and the sensitivity is e^{rho T / 2} instead of e^{rho T}.
std::optional<BridgeSolution> two_sided_shoot(const ShootingSetup& setup, const Vector& v0,
                                              const Vector& v_end, const SolverOptions& opts) {
  const int d = setup.p.dim();
  const int half = setup.steps / 2;
  ResidualFn residual = [&](const Vector& z) -> std::optional<Vector> {
    auto fwd = setup.integrate(setup.x, z.head(d), half, +1.0);
    if (!fwd) return std::nullopt;
    auto bwd = setup.integrate(setup.y, z.tail(d), setup.steps - half, -1.0);
    if (!bwd) return std::nullopt;
    Vector r(2 * d);
    r.head(d) = fwd->first - bwd->first;
    r.tail(d) = fwd->second - bwd->second;
    return r;
  };
  Vector z0(2 * d);
  z0 << v0, v_end;
  const NewtonOutcome o =
      damped_newton(residual, z0, opts.max_iter, opts.tol_boundary, 1e-3 * opts.tol_boundary);
  if (!o.converged) return std::nullopt;

  BridgeSolution sol;
  Trajectory& traj = sol.trajectory;
  traj.times.resize(setup.steps + 1);
  traj.states.resize(setup.steps + 1);
  traj.velocities.resize(setup.steps + 1);
  // Backward half first so the forward half owns the matching node.
  setup.record(setup.y, o.unknown.tail(d), setup.steps, setup.steps - half, -1.0, traj);
  setup.record(setup.x, o.unknown.head(d), 0, half, +1.0, traj);
  sol.iterations = o.iterations;
  sol.two_sided = true;
  return sol;
}

// Multiple shooting over `segments` pieces of the grid. Unknowns are the
// initial velocity and (state, velocity) at each interior break; residuals
// are the continuity gaps plus the landing error. Per-segment sensitivity is
// e^{rho T / segments}.
std::optional<BridgeSolution> multiple_shoot(const ShootingSetup& setup, int segments,
                                             const SolverOptions& opts, int& iterations) {
  const int d = setup.p.dim();
  std::vector<int> breaks(segments + 1);
  for (int j = 0; j <= segments; ++j)
    breaks[j] = static_cast<int>(std::llround(static_cast<double>(setup.steps) * j / segments));
  const int n = d + 2 * d * (segments - 1);

  // Straight-line guess between the endpoints.
  const Vector slope = (setup.y - setup.x) / setup.horizon;
  Vector z0(n);
  z0.head(d) = slope;
  for (int j = 1; j < segments; ++j) {
    const double frac = static_cast<double>(breaks[j]) / setup.steps;
    z0.segment(d + 2 * d * (j - 1), d) = setup.x + frac * (setup.y - setup.x);
    z0.segment(2 * d + 2 * d * (j - 1), d) = slope;
  }
  auto node = [&](const Vector& z, int j) -> std::pair<Vector, Vector> {
    if (j == 0) return {setup.x, z.head(d)};
    return {z.segment(d + 2 * d * (j - 1), d), z.segment(2 * d + 2 * d * (j - 1), d)};
  };

  ResidualFn residual = [&](const Vector& z) -> std::optional<Vector> {
    Vector r(n);
    for (int j = 0; j < segments; ++j) {
      const auto [xs, vs] = node(z, j);
      auto end = setup.integrate(xs, vs, breaks[j + 1] - breaks[j], +1.0);
      if (!end) return std::nullopt;
      if (j + 1 < segments) {
        const auto [xn, vn] = node(z, j + 1);
        r.segment(2 * d * j, d) = end->first - xn;
        r.segment(2 * d * j + d, d) = end->second - vn;
      } else {
        r.tail(d) = end->first - setup.y;
      }
    }
    return r;
  };
  const NewtonOutcome o =
      damped_newton(residual, z0, opts.max_iter, opts.tol_boundary, 1e-3 * opts.tol_boundary);
  iterations = o.iterations;
  if (!o.converged) return std::nullopt;

  BridgeSolution sol;
  Trajectory& traj = sol.trajectory;
  traj.times.resize(setup.steps + 1);
  traj.states.resize(setup.steps + 1);
  traj.velocities.resize(setup.steps + 1);
  // Last segment first so each break node keeps its solved state.
  for (int j = segments - 1; j >= 0; --j) {
    const auto [xs, vs] = node(o.unknown, j);
    setup.record(xs, vs, breaks[j], breaks[j + 1] - breaks[j], +1.0, traj);
  }
  sol.iterations = o.iterations;
  sol.two_sided = true;
  return sol;
}

std::optional<BridgeSolution> single_shoot(const ShootingSetup& setup, const Vector& v0,
                                           const SolverOptions& opts, NewtonOutcome& outcome) {
  ResidualFn residual = [&](const Vector& v) -> std::optional<Vector> {
    auto end = setup.integrate(setup.x, v, setup.steps, +1.0);
    if (!end) return std::nullopt;
    return Vector(end->first - setup.y);
  };
  outcome = damped_newton(residual, v0, opts.max_iter, opts.tol_boundary,
                          1e-3 * opts.tol_boundary, true);
  if (!outcome.converged) return std::nullopt;

  BridgeSolution sol;
  Trajectory& traj = sol.trajectory;
  traj.times.resize(setup.steps + 1);
  traj.states.resize(setup.steps + 1);
  traj.velocities.resize(setup.steps + 1);
  setup.record(setup.x, outcome.unknown, 0, setup.steps, +1.0, traj);
  sol.iterations = outcome.iterations;
  return sol;
}

// Re-solves on a finer grid, warm-started from a converged coarse solution.
std::optional<BridgeSolution> refine_shoot(const ShootingSetup& fine, const BridgeSolution& coarse,
                                           const SolverOptions& opts) {
  const Vector& v0 = coarse.trajectory.velocities.front();
  if (!coarse.two_sided) {
    NewtonOutcome outcome;
    if (auto sol = single_shoot(fine, v0, opts, outcome)) return sol;
  }
  return two_sided_shoot(fine, v0, coarse.trajectory.velocities.back(), opts);
}

// Grid doublings allowed when the default step policy misses the conservation
// tolerance near a stiff point of the potential.
constexpr int kMaxRefinements = 3;

}  // namespace

BridgeSolution solve_bridge_shooting(const Potential& p, const Vector& x, const Vector& y,
                                     double horizon, const SolverOptions& opts) {
  check_endpoints(p, x, y, horizon);
  if (opts.max_iter < 1 || opts.restarts < 1 || !(opts.tol_boundary > 0.0))
    fail(ErrorCode::InvalidArgument, "invalid shooting options");

  int steps = opts.steps > 0 ? opts.steps : default_steps(horizon);
  if (steps % 2 != 0) ++steps;
  if (steps < 4) steps = 4;
  const bool scaled = p.has_positive_rho() && horizon > 30.0;
  const ShootingSetup setup{p, x, y, horizon, steps, scaled};

  // Start velocities, tried in order. The action-minimization slope is only
  // computed if the cheaper guesses fail.
  const Vector linear = (y - x) / horizon;
  const Vector flow = -p.gradient(x);
  std::vector<std::function<std::optional<Vector>()>> starts = {
      [&] { return std::optional<Vector>(linear); },
      [&] { return std::optional<Vector>(flow); },
      [&]() -> std::optional<Vector> {
        try {
          SolverOptions aopts = opts;
          aopts.action_max_iter = std::min(opts.action_max_iter, 20000);
          const BridgeSolution a = solve_bridge_action(p, x, y, horizon, opts.grid_points, aopts);
          return a.trajectory.velocities.front();
        } catch (const Error&) {
          return std::nullopt;
        }
      },
      [&] { return std::optional<Vector>(0.5 * (linear + flow)); },
      [&] { return std::optional<Vector>(flow + linear); },
  };

  bool any_finite = false;
  bool segmented_tried = false;
  double best_residual = kInf;
  const int attempts = std::min<int>(opts.restarts, static_cast<int>(starts.size()));
  for (int s = 0; s < attempts; ++s) {
    const std::optional<Vector> v0 = starts[s]();
    if (!v0 || !v0->allFinite()) continue;

    NewtonOutcome outcome;
    std::optional<BridgeSolution> sol = single_shoot(setup, *v0, opts, outcome);
    if (!outcome.initial_failed) {
      any_finite = true;
      best_residual = std::min(best_residual, outcome.residual);
    }
    if (!sol && !outcome.initial_failed) {
      // Landing error stalled above tolerance: match at the midpoint instead.
      Vector v_end = p.gradient(y);
      if (auto end = setup.integrate(x, outcome.unknown, steps, +1.0);
          end && (end->first - y).lpNorm<Eigen::Infinity>() < 1e-2 * (1.0 + y.norm()))
        v_end = end->second;
      sol = two_sided_shoot(setup, outcome.unknown, v_end, opts);
      // Still too sensitive: split the horizon further.
      // Its guess does not depend on the start, so it runs once.
      for (int segments = 4; !sol && !segmented_tried && segments <= 32 && steps / segments >= 2;
           segments *= 2) {
        int its = 0;
        sol = multiple_shoot(setup, segments, opts, its);
      }
      segmented_tried = true;
    }
    if (sol) {
      sol->solver = SolverKind::Shooting;
      sol->start_index = s;
      finish_solution(*sol, p, x, y);
      // An explicit step count is honored as given.
      int fine_steps = steps;
      for (int level = 0; opts.steps == 0 && level < kMaxRefinements &&
                          sol->energy_maxdev > sol->energy_tolerance;
           ++level) {
        fine_steps *= 2;
        const ShootingSetup fine{p, x, y, horizon, fine_steps, scaled};
        std::optional<BridgeSolution> next = refine_shoot(fine, *sol, opts);
        if (!next) break;
        next->solver = SolverKind::Shooting;
        next->start_index = s;
        next->iterations += sol->iterations;
        next->two_sided = next->two_sided || sol->two_sided;
        finish_solution(*next, p, x, y);
        sol = std::move(next);
      }
      return *sol;
    }
  }

  std::ostringstream os;
  os << "shooting failed for " << p.describe() << " on T=" << horizon << " after " << attempts
     << " starts";
  if (!any_finite) fail(ErrorCode::DomainEscape, os.str() + ": every start left the domain");
  os << "; best landing error " << best_residual;
  fail(ErrorCode::NoConvergence, os.str());
}

// ---------------------------------------------------------------------------
// Action minimization

namespace {

// Discrete action sum_k |w_{k+1} - w_k|^2 / h + h sum'' |F'(w_k)|^2 with pinned
// endpoints; the unknown packs the interior nodes row by row.
class DiscreteAction {
 public:
  DiscreteAction(const Potential& p, const Vector& x, const Vector& y, double horizon, int nodes)
      : p_(p), x_(x), y_(y), nodes_(nodes), d_(p.dim()), h_(horizon / (nodes - 1)) {}

  int unknowns() const { return (nodes_ - 2) * d_; }
  double step() const { return h_; }

  Vector node(const Vector& z, int k) const {
    if (k == 0) return x_;
    if (k == nodes_ - 1) return y_;
    return z.segment((k - 1) * d_, d_);
  }

  bool feasible(const Vector& z) const {
    if (!z.allFinite()) return false;
    if (p_.domain() != Domain::PositiveOrthant) return true;
    return (z.array() > 0.0).all();
  }

  double value(const Vector& z) const {
    double kinetic = 0.0, potential = 0.0;
    Vector prev = x_;
    for (int k = 0; k < nodes_; ++k) {
      const Vector cur = node(z, k);
      if (k > 0) kinetic += (cur - prev).squaredNorm();
      const double w = (k == 0 || k == nodes_ - 1) ? 0.5 : 1.0;
      potential += w * p_.gradient(cur).squaredNorm();
      prev = cur;
    }
    return kinetic / h_ + h_ * potential;
  }

  Vector gradient(const Vector& z) const {
    Vector g(unknowns());
    for (int k = 1; k < nodes_ - 1; ++k) {
      const Vector cur = node(z, k);
      g.segment((k - 1) * d_, d_) =
          (2.0 / h_) * (2.0 * cur - node(z, k - 1) - node(z, k + 1)) +
          (2.0 * h_) * p_.newton_acceleration(cur);
    }
    return g;
  }

  // Inverse of the kinetic Hessian (2/h) tridiag(-1, 2, -1), per coordinate.
  Vector precondition(const Vector& r) const {
    const int m = nodes_ - 2;
    Vector out(r.size());
    std::vector<double> c(m), dd(m);
    for (int j = 0; j < d_; ++j) {
      // Thomas algorithm on tridiag(-1, 2, -1) q = r h / 2.
      for (int i = 0; i < m; ++i) dd[i] = 0.5 * h_ * r[i * d_ + j];
      double beta = 2.0;
      c[0] = -1.0 / beta;
      dd[0] /= beta;
      for (int i = 1; i < m; ++i) {
        beta = 2.0 + c[i - 1];
        c[i] = -1.0 / beta;
        dd[i] = (dd[i] + dd[i - 1]) / beta;
      }
      for (int i = m - 2; i >= 0; --i) dd[i] -= c[i] * dd[i + 1];
      for (int i = 0; i < m; ++i) out[i * d_ + j] = dd[i];
    }
    return out;
  }

 private:
  const Potential& p_;
  Vector x_, y_;
  int nodes_, d_;
  double h_;
};

}  // namespace

BridgeSolution solve_bridge_action(const Potential& p, const Vector& x, const Vector& y,
                                   double horizon, int grid_points, const SolverOptions& opts) {
  check_endpoints(p, x, y, horizon);
  if (grid_points < 3) fail(ErrorCode::InvalidArgument, "action minimization needs >= 3 nodes");
  const int d = p.dim();
  const DiscreteAction action(p, x, y, horizon, grid_points);

  // Linear initial path, floored into the positive orthant when required.
  Vector z(action.unknowns());
  for (int k = 1; k < grid_points - 1; ++k) {
    const double s = static_cast<double>(k) / (grid_points - 1);
    Vector node = (1.0 - s) * x + s * y;
    if (p.domain() == Domain::PositiveOrthant) node = node.cwiseMax(1e-6);
    z.segment((k - 1) * d, d) = node;
  }

  constexpr int kMemory = 10;
  std::deque<std::pair<Vector, Vector>> memory;  // (s, y) pairs
  double f = action.value(z);
  Vector g = action.gradient(z);
  int iterations = 0;
  bool converged = g.size() == 0 || g.lpNorm<Eigen::Infinity>() < opts.action_grad_tol;

  while (!converged && iterations < opts.action_max_iter) {
    // Preconditioned L-BFGS two-loop recursion.
    Vector q = g;
    std::vector<double> alphas(memory.size());
    for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
      const auto& [s, yv] = memory[i];
      alphas[i] = s.dot(q) / yv.dot(s);
      q -= alphas[i] * yv;
    }
    Vector r = action.precondition(q);
    if (!memory.empty()) {
      const auto& [s, yv] = memory.back();
      const Vector py = action.precondition(yv);
      r *= s.dot(yv) / yv.dot(py);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, yv] = memory[i];
      const double b = yv.dot(r) / yv.dot(s);
      r += (alphas[i] - b) * s;
    }
    Vector dir = -r;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -action.precondition(g);
      slope = g.dot(dir);
    }

    // Backtracking with sufficient decrease 1e-4 and shrink factor 0.5.
    double step = 1.0;
    bool moved = false;
    Vector z_new, g_new;
    double f_new = 0.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      z_new = z + step * dir;
      if (!action.feasible(z_new)) continue;
      f_new = action.value(z_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        moved = true;
        break;
      }
    }
    if (!moved) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      std::ostringstream os;
      os << "action line search stalled at |grad| = " << g.lpNorm<Eigen::Infinity>();
      fail(ErrorCode::MaxIterations, os.str());
    }
    g_new = action.gradient(z_new);
    const Vector s = z_new - z;
    const Vector yv = g_new - g;
    if (s.dot(yv) > 1e-300) {
      memory.emplace_back(s, yv);
      if (memory.size() > kMemory) memory.pop_front();
    }
    z = std::move(z_new);
    g = std::move(g_new);
    f = f_new;
    ++iterations;
    converged = g.lpNorm<Eigen::Infinity>() < opts.action_grad_tol;
  }
  if (!converged) {
    std::ostringstream os;
    os << "action minimization hit " << opts.action_max_iter << " iterations with |grad| = "
       << g.lpNorm<Eigen::Infinity>();
    fail(ErrorCode::MaxIterations, os.str());
  }

  BridgeSolution sol;
  Trajectory& traj = sol.trajectory;
  const double h = action.step();
  traj.times.resize(grid_points);
  traj.states.resize(grid_points);
  traj.velocities.resize(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    traj.times[k] = k == grid_points - 1 ? horizon : horizon * k / (grid_points - 1);
    traj.states[k] = action.node(z, k);
  }
  const int last = grid_points - 1;
  traj.velocities[0] = (-3.0 * traj.states[0] + 4.0 * traj.states[1] - traj.states[2]) / (2 * h);
  traj.velocities[last] =
      (3.0 * traj.states[last] - 4.0 * traj.states[last - 1] + traj.states[last - 2]) / (2 * h);
  for (int k = 1; k < last; ++k)
    traj.velocities[k] = (traj.states[k + 1] - traj.states[k - 1]) / (2 * h);

  sol.solver = SolverKind::ActionMin;
  sol.iterations = iterations;
  finish_solution(sol, p, x, y);
  return sol;
}

BridgeSolution solve_bridge(const Potential& p, const Vector& x, const Vector& y,
                            double horizon, const SolverOptions& opts) {
  switch (opts.method) {
    case SolveMethod::Shooting:
      return solve_bridge_shooting(p, x, y, horizon, opts);
    case SolveMethod::Action:
      return solve_bridge_action(p, x, y, horizon, opts.grid_points, opts);
    case SolveMethod::Auto:
      break;
  }
  try {
    return solve_bridge_shooting(p, x, y, horizon, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::DomainEscape) throw;
    return solve_bridge_action(p, x, y, horizon, opts.grid_points, opts);
  }
}

double newton_residual(const Trajectory& traj, const Potential& p) {
  if (traj.size() < 5) fail(ErrorCode::InvalidArgument, "newton_residual needs >= 5 nodes");
  const double h = traj.uniform_step();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const Vector acc = (traj.states[k + 1] - 2.0 * traj.states[k] + traj.states[k - 1]) / (h * h);
    worst = std::max(worst, (acc - p.newton_acceleration(traj.states[k])).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Closed forms

QuadraticBridgeCoefficients quadratic_bridge_coefficients(const Vector& x, const Vector& y,
                                                          double horizon) {
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  const double e = std::exp(-horizon);
  const double denom = -std::expm1(-2.0 * horizon);
  return {(x - y * e) / denom, (y - x * e) / denom};
}

double neglog_loop_energy(double x, double horizon) {
  if (!(x > 0.0)) fail(ErrorCode::Domain, "NegLog endpoint must be positive");
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  // (x^2 - sqrt(x^4 + T^2)) / (T^2 / 2), rationalized.
  return -2.0 / (x * x + std::hypot(x * x, horizon));
}

namespace {

void check_neglog_loop(const Vector& x, const Vector& y) {
  if (x.size() != 1 || y.size() != 1)
    fail(ErrorCode::UnsupportedEndpoints, "NegLog closed form is one-dimensional");
  if (std::abs(x[0] - y[0]) > 1e-14 * (1.0 + std::abs(x[0])))
    fail(ErrorCode::UnsupportedEndpoints, "NegLog closed form requires x == y");
  if (!(x[0] > 0.0)) fail(ErrorCode::Domain, "NegLog endpoint must be positive");
}

void check_time(double horizon, double t) {
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  if (t < 0.0 || t > horizon) fail(ErrorCode::OutOfRange, "t must lie in [0, T]");
}

}  // namespace

Vector closed_form_bridge(PotentialKind kind, const Vector& x, const Vector& y, double horizon,
                          double t) {
  check_time(horizon, t);
  switch (kind) {
    case PotentialKind::QuadraticIsotropic: {
      if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "endpoint dimensions differ");
      const auto c = quadratic_bridge_coefficients(x, y, horizon);
      return std::exp(-t) * c.alpha + std::exp(-(horizon - t)) * c.beta;
    }
    case PotentialKind::NegLog: {
      check_neglog_loop(x, y);
      // X_t^2 = x^2 + t^2 E + 2 t sqrt(1 + E x^2) = x^2 + 2 t (T - t) / q
      // with q = x^2 + sqrt(x^4 + T^2).
      const double x0 = x[0];
      const double q = x0 * x0 + std::hypot(x0 * x0, horizon);
      Vector out(1);
      out[0] = std::sqrt(x0 * x0 + 2.0 * t * (horizon - t) / q);
      return out;
    }
    default:
      fail(ErrorCode::UnsupportedKind, std::string("no closed-form bridge for ") + kind_name(kind));
  }
}

Vector closed_form_bridge_velocity(PotentialKind kind, const Vector& x, const Vector& y,
                                   double horizon, double t) {
  check_time(horizon, t);
  switch (kind) {
    case PotentialKind::QuadraticIsotropic: {
      const auto c = quadratic_bridge_coefficients(x, y, horizon);
      return -std::exp(-t) * c.alpha + std::exp(-(horizon - t)) * c.beta;
    }
    case PotentialKind::NegLog: {
      check_neglog_loop(x, y);
      const double x0 = x[0];
      const double q = x0 * x0 + std::hypot(x0 * x0, horizon);
      const double xt = std::sqrt(x0 * x0 + 2.0 * t * (horizon - t) / q);
      Vector out(1);
      out[0] = (horizon - 2.0 * t) / (q * xt);
      return out;
    }
    default:
      fail(ErrorCode::UnsupportedKind, std::string("no closed-form bridge for ") + kind_name(kind));
  }
}

BridgeSolution closed_form_bridge_solution(const Potential& p, const Vector& x, const Vector& y,
                                           double horizon, int steps) {
  check_endpoints(p, x, y, horizon);
  if (p.kind() != PotentialKind::QuadraticIsotropic && p.kind() != PotentialKind::NegLog)
    fail(ErrorCode::UnsupportedKind, std::string("no closed-form bridge for ") + p.describe());
  if (steps == 0) steps = default_steps(horizon);
  if (steps < 2) fail(ErrorCode::InvalidArgument, "closed-form sampling needs >= 2 steps");

  BridgeSolution sol;
  Trajectory& traj = sol.trajectory;
  traj.times.resize(steps + 1);
  traj.states.resize(steps + 1);
  traj.velocities.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = k == steps ? horizon : horizon * k / steps;
    traj.times[k] = t;
    traj.states[k] = closed_form_bridge(p.kind(), x, y, horizon, t);
    traj.velocities[k] = closed_form_bridge_velocity(p.kind(), x, y, horizon, t);
  }
  sol.solver = SolverKind::ClosedForm;
  finish_solution(sol, p, x, y);
  return sol;
}

}  // namespace bridgelab
