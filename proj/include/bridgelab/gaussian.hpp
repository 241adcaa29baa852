#pragma once

namespace bridgelab::gaussian {

/// N(mean, variance) on the real line.
struct Gaussian1D {
  double mean = 0.0;
  double variance = 1.0;
};

/// Entropic interpolation for the heat semigroup between N(x0, 1) and N(x1, 1)
/// over [0, T]. Its marginals are N(x_t, sigma_t) with x_t linear in t and the
/// variance sigma_t = 1 + 2 t (T - t) / (D_T^2 + T).
class GaussianBridge {
 public:
  GaussianBridge(double x0, double x1, double horizon);

  double x0() const noexcept { return x0_; }
  double x1() const noexcept { return x1_; }
  double horizon() const noexcept { return horizon_; }
  /// D_T^2.
  double fluct() const noexcept { return dt2_; }

  double mean_at(double t) const;
  double variance_at(double t) const;
  /// d sigma_t / dt = 2 (T - 2t) / (D_T^2 + T).
  double variance_rate_at(double t) const;

 private:
  double x0_, x1_, horizon_, dt2_;
};

/// D_T^2 = sqrt((T - 1)^2 + 2T) - (T - 1).
double fluct_param(double horizon);

Gaussian1D bridge_marginal(const GaussianBridge& gb, double t);

/// Heat flow with generator the Laplacian: variance grows by 2t.
Gaussian1D heat_flow_gaussian(const Gaussian1D& g, double t);

/// W2 between two Gaussians: sqrt((sd1 - sd2)^2 + (m1 - m2)^2).
double w2_gaussian(const Gaussian1D& a, const Gaussian1D& b);

/// Conserved quantity sigma'^2 / (4 sigma) + ((x1 - x0)/T)^2 - 1/sigma at t.
double gaussian_energy(const GaussianBridge& gb, double t);

/// Integrand of the cost: sigma'^2 / (4 sigma) + ((x1 - x0)/T)^2 + 1/sigma.
double cost_integrand(const GaussianBridge& gb, double t);

/// Composite Simpson quadrature of cost_integrand over [0, T].
double gaussian_cost(const GaussianBridge& gb, int quad_steps);

/// Relative entropy against Lebesgue measure, -log(2 pi e variance) / 2.
double rel_entropy_gaussian(const Gaussian1D& g);

/// Fisher information relative to Lebesgue measure, 1 / variance.
double fisher_information(const Gaussian1D& g);

struct GammaExpansion {
  /// C_T - 2 log(4 pi T).
  double excess = 0.0;
  /// 2 F(mu) + 2 F(nu).
  double limit_target = 0.0;
  /// T (excess - limit_target).
  double first_order = 0.0;
  /// ((x0 - x1)^2 + 2) / 4.
  double first_order_target = 0.0;
};

GammaExpansion gamma_expansion(const GaussianBridge& gb, int quad_steps);

/// C_T / 4 + (F(mu) + F(nu)) / 2.
double schrodinger_value(const GaussianBridge& gb, int quad_steps);

/// Even Simpson panel count max(1000, 40 T): the integrand varies on a unit
/// time scale near both ends whatever the horizon.
int default_quad_steps(double horizon);

}  // namespace bridgelab::gaussian
