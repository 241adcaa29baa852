#include "bridgelab/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace bridgelab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::DomainEscape: return "DomainEscape";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::UnsupportedEndpoints: return "UnsupportedEndpoints";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::OffGrid: return "OffGrid";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::MissingPrerequisite: return "MissingPrerequisite";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
  }
  return "UnknownError";
}

const char* kind_name(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::QuadraticIsotropic: return "QuadraticIsotropic";
    case PotentialKind::QuadraticMatrix: return "QuadraticMatrix";
    case PotentialKind::NegLog: return "NegLog";
    case PotentialKind::Custom: return "Custom";
  }
  return "Unknown";
}

double gradient_fd_step(const Vector& x) {
  return std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
}

double hessian_fd_step(const Vector& x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
}

Potential Potential::quadratic_isotropic(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "potential dimension must be positive");
  Potential p;
  p.dim_ = dim;
  p.kind_ = PotentialKind::QuadraticIsotropic;
  p.rho_ = 1.0;
  p.minimizer_ = Vector::Zero(dim);
  return p;
}

Potential Potential::quadratic_matrix(const Matrix& a) {
  if (a.rows() < 1 || a.rows() != a.cols())
    fail(ErrorCode::InvalidArgument, "QuadraticMatrix needs a non-empty square matrix");
  if (!a.allFinite()) fail(ErrorCode::InvalidArgument, "QuadraticMatrix entries must be finite");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))
    fail(ErrorCode::InvalidArgument, "QuadraticMatrix must be symmetric");

  Potential p;
  p.dim_ = static_cast<int>(a.rows());
  p.kind_ = PotentialKind::QuadraticMatrix;
  p.matrix_ = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.matrix_, Eigen::EigenvaluesOnly);
  p.rho_ = eig.eigenvalues().minCoeff();
  if (*p.rho_ > 0.0) p.minimizer_ = Vector::Zero(p.dim_);
  return p;
}

Potential Potential::neg_log(int dim) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "potential dimension must be positive");
  Potential p;
  p.dim_ = dim;
  p.kind_ = PotentialKind::NegLog;
  p.domain_ = Domain::PositiveOrthant;
  p.rho_ = 0.0;
  p.n_dim_ = static_cast<double>(dim);
  return p;
}

Potential Potential::custom(int dim, CustomFunctions fns, ConvexityClass convexity,
                            Domain domain) {
  if (dim < 1) fail(ErrorCode::InvalidArgument, "potential dimension must be positive");
  if (!fns.value) fail(ErrorCode::InvalidArgument, "Custom potential requires a value function");
  if (convexity.n_dim && !(*convexity.n_dim > 0.0))
    fail(ErrorCode::InvalidArgument, "dimension parameter n must be positive");
  Potential p;
  p.dim_ = dim;
  p.kind_ = PotentialKind::Custom;
  p.domain_ = domain;
  p.rho_ = convexity.rho;
  p.n_dim_ = convexity.n_dim;
  p.custom_ = std::move(fns);
  if (p.has_positive_rho()) p.locate_minimizer();
  return p;
}

bool Potential::in_domain(const Vector& x) const {
  if (x.size() != dim_ || !x.allFinite()) return false;
  if (domain_ == Domain::PositiveOrthant) return (x.array() > 0.0).all();
  return true;
}

void Potential::check_point(const Vector& x) const {
  if (x.size() != dim_) {
    std::ostringstream os;
    os << "point has dimension " << x.size() << ", potential has " << dim_;
    fail(ErrorCode::InvalidArgument, os.str());
  }
  if (!in_domain(x)) {
    std::ostringstream os;
    os << "point outside the domain of " << kind_name(kind_) << ": (" << x.transpose() << ")";
    fail(ErrorCode::Domain, os.str());
  }
}

double Potential::value(const Vector& x) const {
  check_point(x);
  switch (kind_) {
    case PotentialKind::QuadraticIsotropic: return 0.5 * x.squaredNorm();
    case PotentialKind::QuadraticMatrix: return 0.5 * x.dot(matrix_ * x);
    case PotentialKind::NegLog: return -x.array().log().sum();
    case PotentialKind::Custom: return custom_.value(x);
  }
  return 0.0;
}

Vector Potential::gradient(const Vector& x) const {
  check_point(x);
  switch (kind_) {
    case PotentialKind::QuadraticIsotropic: return x;
    case PotentialKind::QuadraticMatrix: return matrix_ * x;
    case PotentialKind::NegLog: return -x.array().inverse().matrix();
    case PotentialKind::Custom:
      break;
  }
  if (custom_.gradient) return custom_.gradient(x);

  const double h = gradient_fd_step(x);
  Vector g(dim_);
  Vector xp = x;
  for (int i = 0; i < dim_; ++i) {
    xp[i] = x[i] + h;
    const double fp = value(xp);
    xp[i] = x[i] - h;
    const double fm = value(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector Potential::hessian_apply(const Vector& x, const Vector& v) const {
  check_point(x);
  if (v.size() != dim_) fail(ErrorCode::InvalidArgument, "direction has wrong dimension");
  if (!v.allFinite()) fail(ErrorCode::NonFinite, "direction is not finite");
  switch (kind_) {
    case PotentialKind::QuadraticIsotropic: return v;
    case PotentialKind::QuadraticMatrix: return matrix_ * v;
    case PotentialKind::NegLog: return (v.array() / x.array().square()).matrix();
    case PotentialKind::Custom:
      break;
  }
  if (custom_.hessian_apply) return custom_.hessian_apply(x, v);

  const double vnorm = v.norm();
  if (vnorm == 0.0) return Vector::Zero(dim_);
  const Vector u = v / vnorm;
  if (custom_.gradient) {
    const double h = hessian_fd_step(x);
    return vnorm * (gradient(x + h * u) - gradient(x - h * u)) / (2.0 * h);
  }
  // Values only: differencing a differenced gradient would square the noise,
  // so take mixed second differences of F along e_i and u directly.
  const double h = std::sqrt(gradient_fd_step(x));
  Vector out(dim_);
  Vector e = Vector::Zero(dim_);
  for (int i = 0; i < dim_; ++i) {
    e[i] = h;
    const Vector hu = h * u;
    out[i] = (value(x + e + hu) - value(x + e - hu) - value(x - e + hu) + value(x - e - hu)) /
             (4.0 * h * h);
    e[i] = 0.0;
  }
  return vnorm * out;
}

Vector Potential::newton_acceleration(const Vector& x) const {
  return hessian_apply(x, gradient(x));
}

void Potential::newton_acceleration_into(const Vector& x, Vector& out) const {
  if (x.size() != dim_ || !in_domain(x)) check_point(x);
  switch (kind_) {
    case PotentialKind::QuadraticIsotropic:
      out = x;
      return;
    case PotentialKind::NegLog:
      out = -x.array().cube().inverse().matrix();
      return;
    default:
      out = newton_acceleration(x);
  }
}

double Potential::convexity_defect(const Vector& x, const Vector& v) const {
  return convexity_defect(x, v, rho_.value_or(0.0), n_dim_);
}

double Potential::convexity_defect(const Vector& x, const Vector& v, double rho,
                                   std::optional<double> n_dim) const {
  const Vector hv = hessian_apply(x, v);
  double defect = v.dot(hv) - rho * v.squaredNorm();
  if (n_dim) {
    const double proj = gradient(x).dot(v);
    defect -= proj * proj / *n_dim;
  }
  return defect;
}

void Potential::locate_minimizer() {
  // Backtracking gradient descent until |F'| < 1e-10.
  Vector x = Vector::Zero(dim_);
  if (!in_domain(x)) x = Vector::Ones(dim_);
  double step = 1.0;
  for (int it = 0; it < 100000; ++it) {
    const Vector g = gradient(x);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) < 1e-10) {
      minimizer_ = x;
      return;
    }
    const double fx = value(x);
    step = std::min(1.0, 2.0 * step);
    while (true) {
      const Vector trial = x - step * g;
      if (in_domain(trial) && value(trial) <= fx - 1e-4 * step * gn2) {
        x = trial;
        break;
      }
      step *= 0.5;
      if (step < 1e-300) fail(ErrorCode::NoConvergence, "minimizer search stalled");
    }
  }
  fail(ErrorCode::NoConvergence, "minimizer search did not reach |F'| < 1e-10");
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << kind_name(kind_) << "(dim=" << dim_ << ")";
  return os.str();
}

}  // namespace bridgelab
