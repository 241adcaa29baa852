#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bridgelab/bridge.hpp"
#include "bridgelab/potential.hpp"
#include "bridgelab/trajectory.hpp"

namespace bridgelab {

/// Quadrature of |x'|^2 + |F'(x)|^2 over a uniform grid using the stored
/// velocities: composite trapezoid with Gregory end corrections through second
/// differences (plain trapezoid below 6 nodes).
double action_cost(const Trajectory& traj, const Potential& p);

/// Gregory-corrected trapezoid of uniformly spaced samples.
double gregory_trapezoid(const std::vector<double>& values, double step);

struct EnergyStats {
  double mean = 0.0;
  double maxdev = 0.0;
  std::vector<std::pair<double, double>> samples;
};

/// E(t) = |x'(t)|^2 - |F'(x(t))|^2 at every node.
EnergyStats conserved_energy(const Trajectory& traj, const Potential& p);

/// phi_t = F'(x(t)) + x'(t) at the grid node t (OffGrid otherwise).
Vector defect_field(const Trajectory& traj, const Potential& p, double t);

struct EnvelopeCheck {
  double dcdt = 0.0;
  double neg_energy = 0.0;
  double gap = 0.0;
};

/// Central difference of the optimal cost in T against -E_T at T.
EnvelopeCheck envelope_check(const Potential& p, const Vector& x, const Vector& y,
                             double horizon, double h, const SolverOptions& opts = {});

struct ConcavityProfile {
  std::vector<double> times;
  std::vector<double> values;
  /// Largest central second difference of `values`; positive entries signal a
  /// departure from concavity.
  double max_second_difference = 0.0;
  /// Index of the node attaining max_second_difference.
  std::size_t argmax = 0;
  double step = 0.0;
  /// max |values|, the scale the concavity tolerance is measured against.
  double scale = 0.0;

  /// max_second_difference <= rel_tol * scale.
  bool concave(double rel_tol = 1e-8) const { return max_second_difference <= rel_tol * scale; }
};

/// Lambda(t) = exp(-a Phi(t)) on a uniform grid and its largest second difference.
ConcavityProfile concavity_profile(const std::vector<std::pair<double, double>>& phi, double a);

/// Phi along a trajectory for the three concavity maps.
/// Costa: F(S_t(x)) along a gradient flow, used with a = 2/n.
std::vector<std::pair<double, double>> costa_series(const Trajectory& flow, const Potential& p);
/// Ripani: F(X_t) along a bridge, used with a = 1/n.
std::vector<std::pair<double, double>> ripani_series(const Trajectory& bridge, const Potential& p);
/// Improved Ripani: F(X_t) + int_0^t |F'(X_s)|^2 ds along a bridge, a = 1/n.
std::vector<std::pair<double, double>> improved_ripani_series(const Trajectory& bridge,
                                                              const Potential& p);
/// Derivative of the improved Ripani map, <F'(X_t), X'_t> + |F'(X_t)|^2, per node.
std::vector<std::pair<double, double>> improved_ripani_rate(const Trajectory& bridge,
                                                            const Potential& p);

}  // namespace bridgelab
