#include "bridgelab/functionals.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bridgelab {

double gregory_trapezoid(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 2) fail(ErrorCode::InvalidArgument, "quadrature needs at least two samples");
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < n; ++i) sum += f[i];
  sum *= h;
  if (n >= 6) {
    const double d0 = f[1] - f[0];
    const double dn = f[n - 1] - f[n - 2];
    const double dd0 = f[2] - 2.0 * f[1] + f[0];
    const double ddn = f[n - 1] - 2.0 * f[n - 2] + f[n - 3];
    sum -= h / 12.0 * (dn - d0) + h / 24.0 * (ddn + dd0);
  }
  return sum;
}

double action_cost(const Trajectory& traj, const Potential& p) {
  if (traj.size() < 3) fail(ErrorCode::InvalidArgument, "action_cost needs >= 3 nodes");
  const double h = traj.uniform_step();
  std::vector<double> integrand(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
    integrand[k] = traj.velocities[k].squaredNorm() + p.gradient(traj.states[k]).squaredNorm();
  return gregory_trapezoid(integrand, h);
}

EnergyStats conserved_energy(const Trajectory& traj, const Potential& p) {
  traj.validate();
  EnergyStats stats;
  stats.samples.reserve(traj.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double e =
        traj.velocities[k].squaredNorm() - p.gradient(traj.states[k]).squaredNorm();
    stats.samples.emplace_back(traj.times[k], e);
    sum += e;
  }
  stats.mean = sum / static_cast<double>(traj.size());
  for (const auto& [t, e] : stats.samples)
    stats.maxdev = std::max(stats.maxdev, std::abs(e - stats.mean));
  return stats;
}

Vector defect_field(const Trajectory& traj, const Potential& p, double t) {
  const std::size_t k = traj.node_index(t);
  return p.gradient(traj.states[k]) + traj.velocities[k];
}

EnvelopeCheck envelope_check(const Potential& p, const Vector& x, const Vector& y,
                             double horizon, double h, const SolverOptions& opts) {
  if (!(h > 0.0) || !(horizon - h > 0.0))
    fail(ErrorCode::InvalidArgument, "envelope step must satisfy 0 < h < T");
  const double c_plus = solve_bridge(p, x, y, horizon + h, opts).cost;
  const double c_minus = solve_bridge(p, x, y, horizon - h, opts).cost;
  const BridgeSolution mid = solve_bridge(p, x, y, horizon, opts);
  EnvelopeCheck out;
  out.dcdt = (c_plus - c_minus) / (2.0 * h);
  out.neg_energy = -mid.energy_mean;
  out.gap = std::abs(out.dcdt - out.neg_energy);
  return out;
}

ConcavityProfile concavity_profile(const std::vector<std::pair<double, double>>& phi, double a) {
  if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "concavity exponent a must be positive");
  if (phi.size() < 3) fail(ErrorCode::InvalidArgument, "concavity profile needs >= 3 samples");
  ConcavityProfile prof;
  prof.times.reserve(phi.size());
  prof.values.reserve(phi.size());
  for (const auto& [t, v] : phi) {
    prof.times.push_back(t);
    prof.values.push_back(std::exp(-a * v));
  }
  const double span = prof.times.back() - prof.times.front();
  prof.step = span / static_cast<double>(phi.size() - 1);
  for (std::size_t i = 1; i < prof.times.size(); ++i) {
    const double hi = prof.times[i] - prof.times[i - 1];
    if (!(hi > 0.0) || std::abs(hi - prof.step) > 1e-12 * prof.step + 1e-15 * std::abs(prof.times[i])) {
      std::ostringstream os;
      os << "concavity profile needs a uniform grid (step " << i << " is " << hi << ")";
      fail(ErrorCode::NonUniformGrid, os.str());
    }
  }
  prof.max_second_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prof.values.size(); ++i)
    prof.scale = std::max(prof.scale, std::abs(prof.values[i]));
  for (std::size_t i = 1; i + 1 < prof.values.size(); ++i) {
    const double d2 = prof.values[i + 1] - 2.0 * prof.values[i] + prof.values[i - 1];
    if (d2 > prof.max_second_difference) {
      prof.max_second_difference = d2;
      prof.argmax = i;
    }
  }
  return prof;
}

std::vector<std::pair<double, double>> costa_series(const Trajectory& flow, const Potential& p) {
  flow.validate();
  std::vector<std::pair<double, double>> out;
  out.reserve(flow.size());
  for (std::size_t k = 0; k < flow.size(); ++k)
    out.emplace_back(flow.times[k], p.value(flow.states[k]));
  return out;
}

std::vector<std::pair<double, double>> ripani_series(const Trajectory& bridge, const Potential& p) {
  return costa_series(bridge, p);
}

std::vector<std::pair<double, double>> improved_ripani_series(const Trajectory& bridge,
                                                              const Potential& p) {
  bridge.validate();
  std::vector<std::pair<double, double>> out;
  out.reserve(bridge.size());
  // Cumulative trapezoid of the Fisher term, corrected at each step with the
  // exact endpoint derivatives d|F'|^2/dt = 2 <F''F', x'>.
  double integral = 0.0;
  double prev_f = 0.0, prev_df = 0.0;
  for (std::size_t k = 0; k < bridge.size(); ++k) {
    const Vector g = p.gradient(bridge.states[k]);
    const double fk = g.squaredNorm();
    const double dfk = 2.0 * p.hessian_apply(bridge.states[k], g).dot(bridge.velocities[k]);
    if (k > 0) {
      const double h = bridge.times[k] - bridge.times[k - 1];
      integral += 0.5 * h * (prev_f + fk) + h * h / 12.0 * (prev_df - dfk);
    }
    out.emplace_back(bridge.times[k], p.value(bridge.states[k]) + integral);
    prev_f = fk;
    prev_df = dfk;
  }
  return out;
}

std::vector<std::pair<double, double>> improved_ripani_rate(const Trajectory& bridge,
                                                            const Potential& p) {
  bridge.validate();
  std::vector<std::pair<double, double>> out;
  out.reserve(bridge.size());
  for (std::size_t k = 0; k < bridge.size(); ++k) {
    const Vector g = p.gradient(bridge.states[k]);
    out.emplace_back(bridge.times[k], g.dot(bridge.velocities[k]) + g.squaredNorm());
  }
  return out;
}

}  // namespace bridgelab
