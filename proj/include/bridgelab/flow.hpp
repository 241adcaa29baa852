#pragma once

#include "bridgelab/potential.hpp"
#include "bridgelab/trajectory.hpp"

namespace bridgelab {

/// ceil(max(100, 100 T)): the step count used when a caller passes 0.
int default_steps(double horizon);

/// Gradient flow S_t(x0) of dS/dt = -F'(S) on [0, T] by fixed-step RK4 over
/// `steps` uniform intervals (0 picks default_steps). Velocities are -F'(S).
/// On the positive orthant a step whose stages leave the domain is retried as
/// two half steps, at most 40 levels deep, before DomainEscape is raised.
Trajectory gradient_flow(const Potential& p, const Vector& x0, double horizon, int steps = 0);

/// The two solvable flows: e^{-t} x0 for QuadraticIsotropic and
/// sqrt(2t + x0^2) componentwise for NegLog.
Vector closed_form_flow(PotentialKind kind, const Vector& x0, double t);

}  // namespace bridgelab
