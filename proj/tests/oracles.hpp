#pragma once

// Reference values computed independently of the library: hand-derived closed
// forms and a plain adaptive Simpson integrator. Nothing here calls bridgelab.

#include <cmath>
#include <functional>

namespace oracle {

// Quadratic potential |x|^2/2: the bridge solves x'' = x, so in one coordinate
// X_t = (x sinh(T - t) + y sinh t) / sinh T.
inline double quad_state(double x, double y, double T, double t) {
  return (x * std::sinh(T - t) + y * std::sinh(t)) / std::sinh(T);
}

inline double quad_velocity(double x, double y, double T, double t) {
  return (-x * std::cosh(T - t) + y * std::cosh(t)) / std::sinh(T);
}

// Integrating by parts with X'' = X: int (X'^2 + X^2) = [X X']_0^T.
inline double quad_cost(double x, double y, double T) {
  return y * quad_velocity(x, y, T, T) - x * quad_velocity(x, y, T, 0.0);
}

// X'^2 - X^2 evaluated at t = 0.
inline double quad_energy(double x, double y, double T) {
  const double v = quad_velocity(x, y, T, 0.0);
  return v * v - x * x;
}

// int_0^T dt / (1 + a t (T - t)) for a > 0, by partial fractions.
inline double inv_parabola_integral(double a, double T) {
  const double r = std::sqrt(a * a * T * T + 4.0 * a);
  return 2.0 / r * std::log((r + a * T) / (r - a * T));
}

// -log x on the half line, loop x -> x. With E = X'^2 - 1/X^2 one gets
// (X^2)'' = 2E, hence X_t^2 = x^2 - E t (T - t), and matching X'_0 to E picks
// the negative root of E^2 T^2 / 4 - E x^2 - 1 = 0.
inline double neglog_loop_energy(double x, double T) {
  return -2.0 / (x * x + std::sqrt(x * x * x * x + T * T));
}

inline double neglog_loop_state(double x, double T, double t) {
  return std::sqrt(x * x - neglog_loop_energy(x, T) * t * (T - t));
}

// int (X'^2 + 1/X^2) = E T + 2 int dt / X^2.
inline double neglog_loop_cost(double x, double T) {
  const double e = neglog_loop_energy(x, T);
  return e * T + 2.0 / (x * x) * inv_parabola_integral(-e / (x * x), T);
}

// The expression printed for the loop energy, kept to show it disagrees.
inline double neglog_loop_energy_printed(double x, double T) {
  return (-x * x - std::sqrt(x * x * x * x + T * T)) / (T * T / 2.0);
}

// Gradient flow of -log x: S_t = sqrt(2t + x^2); its action is
// int 2/(2t + x^2) = log((2T + x^2) / x^2).
inline double neglog_flow_cost(double x, double T) { return std::log((2.0 * T + x * x) / (x * x)); }

// Gaussian bridge between N(x0, 1) and N(x1, 1).
inline double gauss_fluct(double T) { return std::sqrt((T - 1.0) * (T - 1.0) + 2.0 * T) - (T - 1.0); }

inline double gauss_variance(double T, double t) {
  return 1.0 + 2.0 * t * (T - t) / (gauss_fluct(T) + T);
}

// Writing sigma = 1 + a t (T - t), sigma'^2 = a^2 T^2 - 4 a (sigma - 1), which
// turns the cost integrand into constants plus a multiple of 1/sigma.
inline double gauss_cost(double x0, double x1, double T) {
  const double a = 2.0 / (gauss_fluct(T) + T);
  const double drift = (x1 - x0) / T;
  return T * (drift * drift - a) + (a * a * T * T / 4.0 + a + 1.0) * inv_parabola_integral(a, T);
}

// At t = T/2 the variance is stationary.
inline double gauss_energy(double x0, double x1, double T) {
  const double drift = (x1 - x0) / T;
  return drift * drift - 1.0 / gauss_variance(T, T / 2.0);
}

// Differential entropy of N(m, v), sign flipped.
inline double neg_entropy(double variance) {
  return -0.5 * std::log(2.0 * M_PI * std::exp(1.0) * variance);
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 50) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return detail::simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol,
                              depth);
}

}  // namespace oracle
