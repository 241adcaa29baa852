#include "bridgelab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bridgelab {

void Trajectory::validate() const {
  if (times.size() < 2) fail(ErrorCode::InvalidArgument, "trajectory needs at least two nodes");
  if (states.size() != times.size() || velocities.size() != times.size())
    fail(ErrorCode::InvalidArgument, "trajectory arrays have different lengths");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      fail(ErrorCode::InvalidArgument, "trajectory times must strictly increase");
}

double Trajectory::uniform_step() const {
  validate();
  const double span = times.back() - times.front();
  const double h = span / static_cast<double>(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double hi = times[i] - times[i - 1];
    // Node times are computed as t0 + i*h, so spacing jitters at the level of
    // span*eps; anything above 1e-12 relative is a genuinely different step.
    if (std::abs(hi - h) > 1e-12 * h + 8.0 * 2.2e-16 * std::abs(times[i])) {
      std::ostringstream os;
      os << "grid spacing varies: step " << i << " is " << hi << ", mean is " << h;
      fail(ErrorCode::NonUniformGrid, os.str());
    }
  }
  return h;
}

std::size_t Trajectory::node_index(double t) const {
  validate();
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const double tol = 1e-9 * (1.0 + std::abs(times.back() - times.front())) /
                     static_cast<double>(times.size());
  std::size_t best = times.size();
  if (it != times.end() && std::abs(*it - t) <= tol) best = static_cast<std::size_t>(it - times.begin());
  if (it != times.begin() && std::abs(*(it - 1) - t) <= tol)
    best = static_cast<std::size_t>(it - times.begin()) - 1;
  if (best == times.size()) {
    std::ostringstream os;
    os << "time " << t << " is not a grid node";
    fail(ErrorCode::OffGrid, os.str());
  }
  return best;
}

namespace {

std::size_t bracket(const std::vector<double>& times, double t) {
  if (t < times.front() - 1e-12 * (1.0 + std::abs(times.front())) ||
      t > times.back() + 1e-12 * (1.0 + std::abs(times.back()))) {
    std::ostringstream os;
    os << "time " << t << " outside [" << times.front() << ", " << times.back() << "]";
    fail(ErrorCode::OutOfRange, os.str());
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return std::min(k, times.size() - 2);
}

}  // namespace

Vector Trajectory::state_at(double t) const {
  validate();
  const std::size_t k = bracket(times, t);
  const double h = times[k + 1] - times[k];
  const double s = std::clamp((t - times[k]) / h, 0.0, 1.0);
  if (s == 0.0) return states[k];
  if (s == 1.0) return states[k + 1];
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * states[k] + h10 * h * velocities[k] + h01 * states[k + 1] +
         h11 * h * velocities[k + 1];
}

Vector Trajectory::velocity_at(double t) const {
  validate();
  const std::size_t k = bracket(times, t);
  const double h = times[k + 1] - times[k];
  const double s = std::clamp((t - times[k]) / h, 0.0, 1.0);
  if (s == 0.0) return velocities[k];
  if (s == 1.0) return velocities[k + 1];
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * states[k] + d01 * states[k + 1]) / h + d10 * velocities[k] +
         d11 * velocities[k + 1];
}

Trajectory Trajectory::reversed() const {
  validate();
  Trajectory r;
  const std::size_t n = times.size();
  r.times.resize(n);
  r.states.resize(n);
  r.velocities.resize(n);
  const double t0 = times.front(), t1 = times.back();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    r.times[i] = t0 + (t1 - times[j]);
    r.states[i] = states[j];
    r.velocities[i] = -velocities[j];
  }
  r.times.front() = t0;
  r.times.back() = t1;
  return r;
}

}  // namespace bridgelab
