#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "bridgelab/error.hpp"

namespace bridgelab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class PotentialKind { QuadraticIsotropic, QuadraticMatrix, NegLog, Custom };
enum class Domain { AllSpace, PositiveOrthant };

const char* kind_name(PotentialKind kind) noexcept;

/// User-supplied callbacks for a Custom potential. `gradient` and
/// `hessian_apply` may be left empty; central differences are used instead.
/// Without a gradient the Hessian action comes from mixed second differences
/// of `value` with a step of order eps^(1/4).
struct CustomFunctions {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hessian_apply;
};

/// Declared convexity class of a Custom potential: F'' >= rho Id + (1/n) F' F'^T.
/// Empty `rho` means no lower Hessian bound is claimed; empty `n_dim` is n = infinity.
struct ConvexityClass {
  std::optional<double> rho;
  std::optional<double> n_dim;
};

/// A convex potential F on R^d with its gradient, Hessian action and a
/// convexity certificate. Immutable after construction.
class Potential {
 public:
  static Potential quadratic_isotropic(int dim);
  /// F(x) = x^T A x / 2 with A symmetric; rho is the smallest eigenvalue of A.
  static Potential quadratic_matrix(const Matrix& a);
  /// F(x) = -sum_i log x_i on the positive orthant, (0, dim)-convex.
  static Potential neg_log(int dim);
  static Potential custom(int dim, CustomFunctions fns, ConvexityClass convexity,
                          Domain domain = Domain::AllSpace);

  int dim() const noexcept { return dim_; }
  PotentialKind kind() const noexcept { return kind_; }
  Domain domain() const noexcept { return domain_; }
  std::optional<double> rho() const noexcept { return rho_; }
  /// Dimension parameter n; empty means n = infinity.
  std::optional<double> n_dim() const noexcept { return n_dim_; }
  bool has_positive_rho() const noexcept { return rho_ && *rho_ > 0.0; }
  /// Minimizer x*, available whenever rho > 0.
  const std::optional<Vector>& minimizer() const noexcept { return minimizer_; }
  const Matrix& matrix() const noexcept { return matrix_; }

  bool in_domain(const Vector& x) const;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector hessian_apply(const Vector& x, const Vector& v) const;
  /// F''(x) F'(x), the right-hand side of the Newton equation.
  Vector newton_acceleration(const Vector& x) const;
  /// Same as newton_acceleration, writing into a pre-sized `out` without
  /// allocating for the builtin kinds.
  void newton_acceleration_into(const Vector& x, Vector& out) const;

  /// v^T (F''(x) - rho Id - (1/n) F'(x) F'(x)^T) v with the declared (rho, n);
  /// a missing rho counts as 0 and n = infinity drops the rank-one term.
  double convexity_defect(const Vector& x, const Vector& v) const;
  double convexity_defect(const Vector& x, const Vector& v, double rho,
                          std::optional<double> n_dim) const;

  std::string describe() const;

 private:
  Potential() = default;
  void check_point(const Vector& x) const;
  void locate_minimizer();

  int dim_ = 0;
  PotentialKind kind_ = PotentialKind::QuadraticIsotropic;
  Domain domain_ = Domain::AllSpace;
  std::optional<double> rho_;
  std::optional<double> n_dim_;
  std::optional<Vector> minimizer_;
  Matrix matrix_;
  CustomFunctions custom_;
};

/// Finite-difference steps used by the Custom fallbacks.
double gradient_fd_step(const Vector& x);
double hessian_fd_step(const Vector& x);

}  // namespace bridgelab
