#pragma once

#include <Eigen/Core>

namespace bridgelab::ode {

/// One classical fourth-order Runge-Kutta step of y' = f(y) for an autonomous
/// field. `f` must accept and return Eigen::VectorXd.
template <typename Field>
Eigen::VectorXd rk4_step(const Field& f, const Eigen::VectorXd& y, double h) {
  const Eigen::VectorXd k1 = f(y);
  const Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace bridgelab::ode
