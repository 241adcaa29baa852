#include "bridgelab/flow.hpp"

#include <cmath>
#include <sstream>

#include "bridgelab/ode.hpp"

namespace bridgelab {

int default_steps(double horizon) {
  return static_cast<int>(std::ceil(std::max(100.0, 100.0 * horizon)));
}

namespace {

constexpr int kMaxHalvings = 40;

// Advances the flow by h, splitting the step whenever an RK4 stage or the
// result falls outside the domain.
Vector advance(const Potential& p, const Vector& x, double h, int depth) {
  const auto field = [&p](const Vector& s) -> Vector { return -p.gradient(s); };
  try {
    Vector next = ode::rk4_step(field, x, h);
    if (!next.allFinite()) fail(ErrorCode::NonFinite, "gradient flow state overflowed");
    if (!p.in_domain(next)) fail(ErrorCode::Domain, "step left the domain");
    return next;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Domain) throw;
    if (depth >= kMaxHalvings) {
      std::ostringstream os;
      os << "gradient flow left the domain after " << kMaxHalvings << " step halvings";
      fail(ErrorCode::DomainEscape, os.str());
    }
    const Vector mid = advance(p, x, 0.5 * h, depth + 1);
    return advance(p, mid, 0.5 * h, depth + 1);
  }
}

}  // namespace

Trajectory gradient_flow(const Potential& p, const Vector& x0, double horizon, int steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    fail(ErrorCode::InvalidArgument, "flow horizon must be positive and finite");
  if (steps == 0) steps = default_steps(horizon);
  if (steps < 2) fail(ErrorCode::InvalidArgument, "gradient flow needs at least 2 steps");
  if (!p.in_domain(x0)) fail(ErrorCode::Domain, "flow start point outside the domain");

  const double h = horizon / steps;
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.velocities.reserve(steps + 1);

  Vector x = x0;
  for (int k = 0; k <= steps; ++k) {
    traj.times.push_back(k == steps ? horizon : k * h);
    traj.states.push_back(x);
    traj.velocities.push_back(-p.gradient(x));
    if (k < steps) x = advance(p, x, h, 0);
  }
  return traj;
}

Vector closed_form_flow(PotentialKind kind, const Vector& x0, double t) {
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "flow time must be nonnegative");
  switch (kind) {
    case PotentialKind::QuadraticIsotropic:
      return std::exp(-t) * x0;
    case PotentialKind::NegLog:
      if (!(x0.array() > 0.0).all()) fail(ErrorCode::Domain, "NegLog flow needs positive start");
      return (2.0 * t + x0.array().square()).sqrt().matrix();
    default:
      fail(ErrorCode::UnsupportedKind,
           std::string("no closed-form flow for ") + kind_name(kind));
  }
}

}  // namespace bridgelab
