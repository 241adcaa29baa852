#pragma once

#include <string>

#include "bridgelab/potential.hpp"
#include "bridgelab/trajectory.hpp"

namespace bridgelab {

enum class SolveMethod { Shooting, Action, Auto };
enum class SolverKind { Shooting, ActionMin, ClosedForm };

const char* method_name(SolveMethod m) noexcept;
const char* solver_name(SolverKind s) noexcept;

struct SolverOptions {
  SolveMethod method = SolveMethod::Auto;
  /// Newton iterations per shooting start.
  int max_iter = 100;
  /// Number of shooting starts before NoConvergence.
  int restarts = 5;
  /// Landing error accepted at t = T (sup norm).
  double tol_boundary = 1e-9;
  /// Nodes used by action minimization.
  int grid_points = 201;
  /// RK4 intervals for shooting; 0 means default_steps(T), doubled up to three
  /// times while energy_maxdev exceeds energy_tolerance.
  int steps = 0;
  int action_max_iter = 100000;
  double action_grad_tol = 1e-8;
};

/// An F-interpolation between x and y on [0, T] with its diagnostics.
struct BridgeSolution {
  Trajectory trajectory;
  /// Action of the path, computed by action_cost on `trajectory`.
  double cost = 0.0;
  double energy_mean = 0.0;
  double energy_maxdev = 0.0;
  /// Conservation tolerance 1e-6 (1 + |energy_mean|) that energy_maxdev is held to.
  double energy_tolerance = 0.0;
  double newton_residual = 0.0;
  /// max(|X_0 - x|, |X_T - y|) in sup norm.
  double boundary_error = 0.0;
  SolverKind solver = SolverKind::Shooting;
  /// Newton or quasi-Newton iterations spent on the accepted solve.
  int iterations = 0;
  /// Which shooting start produced the solution (0-based), -1 otherwise.
  int start_index = -1;
  /// True when a segmented shooting fallback (two-sided or multiple) produced
  /// the solution.
  bool two_sided = false;
  double horizon() const { return trajectory.end_time(); }
};

/// Shooting on the initial velocity for X'' = F''(X) F'(X), X_0 = x, X_T = y.
/// Throws NoConvergence when every start fails and DomainEscape when every
/// start leaves the domain.
BridgeSolution solve_bridge_shooting(const Potential& p, const Vector& x, const Vector& y,
                                     double horizon, const SolverOptions& opts = {});

/// Direct minimization of the discretized action over the interior nodes of
/// a uniform grid with `grid_points` nodes.
BridgeSolution solve_bridge_action(const Potential& p, const Vector& x, const Vector& y,
                                   double horizon, int grid_points,
                                   const SolverOptions& opts = {});

/// Dispatches on opts.method; Auto tries shooting and falls back to action
/// minimization.
BridgeSolution solve_bridge(const Potential& p, const Vector& x, const Vector& y,
                            double horizon, const SolverOptions& opts = {});

/// max over interior nodes of |central second difference - F''(X) F'(X)|.
double newton_residual(const Trajectory& traj, const Potential& p);

/// Coefficients of the quadratic bridge X_t = e^{-t} alpha + e^{-(T-t)} beta.
struct QuadraticBridgeCoefficients {
  Vector alpha;
  Vector beta;
};
QuadraticBridgeCoefficients quadratic_bridge_coefficients(const Vector& x, const Vector& y,
                                                          double horizon);

/// Conserved quantity of the x -> x NegLog bridge in dimension one,
/// (x^2 - sqrt(x^4 + T^2)) / (T^2 / 2).
double neglog_loop_energy(double x, double horizon);

/// Closed-form X_t for QuadraticIsotropic (any x, y) and NegLog in dimension
/// one with x == y.
Vector closed_form_bridge(PotentialKind kind, const Vector& x, const Vector& y, double horizon,
                          double t);
Vector closed_form_bridge_velocity(PotentialKind kind, const Vector& x, const Vector& y,
                                   double horizon, double t);

/// Closed-form bridge sampled on `steps` uniform intervals, packaged with the
/// same diagnostics as a numerical solve.
BridgeSolution closed_form_bridge_solution(const Potential& p, const Vector& x, const Vector& y,
                                           double horizon, int steps = 0);

}  // namespace bridgelab
