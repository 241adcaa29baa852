#include "bridgelab/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "bridgelab/error.hpp"

namespace bridgelab::gaussian {

namespace {

void check_variance(const Gaussian1D& g) {
  if (!(g.variance > 0.0)) fail(ErrorCode::InvalidArgument, "variance must be positive");
}

}  // namespace

double fluct_param(double horizon) {
  if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
  // sqrt((T-1)^2 + 2T) - (T-1) = sqrt(T^2 + 1) - T + 1; the first two terms
  // cancel for large T, so use 1/(sqrt(T^2+1) + T).
  return 1.0 + 1.0 / (std::hypot(horizon, 1.0) + horizon);
}

GaussianBridge::GaussianBridge(double x0, double x1, double horizon)
    : x0_(x0), x1_(x1), horizon_(horizon), dt2_(fluct_param(horizon)) {
  if (!std::isfinite(x0) || !std::isfinite(x1))
    fail(ErrorCode::InvalidArgument, "Gaussian means must be finite");
}

namespace {

void check_time(const GaussianBridge& gb, double t) {
  if (!(t >= 0.0 && t <= gb.horizon())) fail(ErrorCode::OutOfRange, "t must lie in [0, T]");
}

}  // namespace

double GaussianBridge::mean_at(double t) const {
  return (horizon_ - t) / horizon_ * x0_ + t / horizon_ * x1_;
}

double GaussianBridge::variance_at(double t) const {
  return 1.0 + 2.0 * t * (horizon_ - t) / (dt2_ + horizon_);
}

double GaussianBridge::variance_rate_at(double t) const {
  return 2.0 * (horizon_ - 2.0 * t) / (dt2_ + horizon_);
}

Gaussian1D bridge_marginal(const GaussianBridge& gb, double t) {
  check_time(gb, t);
  return {gb.mean_at(t), gb.variance_at(t)};
}

Gaussian1D heat_flow_gaussian(const Gaussian1D& g, double t) {
  check_variance(g);
  if (!(t >= 0.0)) fail(ErrorCode::InvalidArgument, "heat flow time must be nonnegative");
  return {g.mean, g.variance + 2.0 * t};
}

double w2_gaussian(const Gaussian1D& a, const Gaussian1D& b) {
  check_variance(a);
  check_variance(b);
  return std::hypot(std::sqrt(a.variance) - std::sqrt(b.variance), a.mean - b.mean);
}

double gaussian_energy(const GaussianBridge& gb, double t) {
  check_time(gb, t);
  const double s = gb.variance_at(t);
  const double ds = gb.variance_rate_at(t);
  const double drift = (gb.x1() - gb.x0()) / gb.horizon();
  return ds * ds / (4.0 * s) + drift * drift - 1.0 / s;
}

double cost_integrand(const GaussianBridge& gb, double t) {
  const double s = gb.variance_at(t);
  const double ds = gb.variance_rate_at(t);
  const double drift = (gb.x1() - gb.x0()) / gb.horizon();
  return ds * ds / (4.0 * s) + drift * drift + 1.0 / s;
}

double gaussian_cost(const GaussianBridge& gb, int quad_steps) {
  if (quad_steps < 10) fail(ErrorCode::InvalidArgument, "quad_steps must be at least 10");
  const int n = quad_steps % 2 == 0 ? quad_steps : quad_steps + 1;
  const double h = gb.horizon() / n;
  double sum = cost_integrand(gb, 0.0) + cost_integrand(gb, gb.horizon());
  for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * cost_integrand(gb, i * h);
  return sum * h / 3.0;
}

double rel_entropy_gaussian(const Gaussian1D& g) {
  check_variance(g);
  return -0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * g.variance);
}

double fisher_information(const Gaussian1D& g) {
  check_variance(g);
  return 1.0 / g.variance;
}

GammaExpansion gamma_expansion(const GaussianBridge& gb, int quad_steps) {
  if (!(gb.horizon() >= 1.0)) fail(ErrorCode::InvalidArgument, "gamma expansion needs T >= 1");
  constexpr double n = 1.0;
  GammaExpansion out;
  const double cost = gaussian_cost(gb, quad_steps);
  out.excess = cost - 2.0 * n * std::log(4.0 * std::numbers::pi * gb.horizon());
  out.limit_target = 2.0 * rel_entropy_gaussian({gb.x0(), 1.0}) +
                     2.0 * rel_entropy_gaussian({gb.x1(), 1.0});
  out.first_order = gb.horizon() * (out.excess - out.limit_target);
  const double gap = gb.x0() - gb.x1();
  out.first_order_target = 0.25 * (gap * gap + 2.0);
  return out;
}

double schrodinger_value(const GaussianBridge& gb, int quad_steps) {
  const double cost = gaussian_cost(gb, quad_steps);
  return 0.25 * cost + 0.5 * (rel_entropy_gaussian({gb.x0(), 1.0}) +
                              rel_entropy_gaussian({gb.x1(), 1.0}));
}

int default_quad_steps(double horizon) {
  const double n = std::max(1000.0, 40.0 * horizon);
  return 2 * static_cast<int>(std::ceil(n / 2.0));
}

}  // namespace bridgelab::gaussian
