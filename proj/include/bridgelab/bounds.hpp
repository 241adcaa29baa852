#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bridgelab/bridge.hpp"
#include "bridgelab/potential.hpp"

namespace bridgelab {

enum class BoundId { B1 = 1, B2, B3, B4, B5, B6, B7, B8, B9, B10, B11, B12 };

const char* bound_name(BoundId id) noexcept;

/// Where a bound was evaluated. Times that do not apply are NaN.
struct BoundContext {
  std::string potential;
  /// "forward" evaluates the bridge x -> y, "reverse" the bridge y -> x.
  std::string orientation = "forward";
  Vector x;
  Vector y;
  double horizon = 0.0;
  double t = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  /// Sub-inequality or evaluation point label, e.g. "energy", "cost", "X_t".
  std::string detail;
  double tol_boundary = 0.0;
  int grid_points = 0;
};

struct BoundReport {
  BoundId id = BoundId::B1;
  /// False when the potential lacks the convexity the bound assumes; lhs, rhs
  /// and margin are NaN in that case.
  bool applicable = true;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs - lhs.
  double margin = 0.0;
  /// margin >= -bound_tolerance(rhs). Always true when not applicable.
  bool pass = true;
  BoundContext context;
};

/// 1e-8 (1 + |rhs|).
double bound_tolerance(double rhs);

BoundReport make_report(BoundId id, double lhs, double rhs, BoundContext ctx);

/// A solved bridge with the evaluation points for the catalogue.
struct BoundCase {
  Vector x;
  Vector y;
  double horizon = 0.0;
  BridgeSolution bridge;
  /// Cost at T = 1. Solved on demand with `solver` when missing.
  std::optional<double> c1;
  /// Evaluation times in (0, T) for the pointwise bounds.
  std::vector<double> times;
  /// Fractions theta in (0, 1) for the turnpike bound.
  std::vector<double> thetas;
  SolverOptions solver;
  /// Evaluate the y -> x orientation as well.
  bool both_orientations = true;
};

/// Evaluates B1..B12 on a solved case. Bounds needing a positive rho (B4-B7,
/// B9, B10) or a finite n (B1-B3, B8, B11, B12) produce one non-applicable
/// report per orientation when the potential does not qualify. Throws
/// MissingPrerequisite when C_1 is needed, absent and cannot be solved for.
std::vector<BoundReport> verify_bounds(const Potential& p, const BoundCase& c);

/// The sinh two-endpoint bound on F(X_t) for rho-convex F, written through
/// h(t) = F(X_t) - F(x*) + E/(4 rho), which satisfies h'' >= 4 rho^2 h.
double sinh_entropy_bound(double rho, double horizon, double t, double fx, double fy,
                          double fstar, double energy);

/// The two-term cost bound minimized over t in (0, T).
double cost_bound_inf(double rho, double horizon, double fx, double fy, double fstar);

enum class RateModel { PowerLaw, Exponential };

const char* rate_model_name(RateModel m) noexcept;

struct RateFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  /// RMS residual of the fit in log space.
  double residual = 0.0;
  RateModel model = RateModel::PowerLaw;
};

/// Least squares of log(value) against log(T) (PowerLaw) or T (Exponential).
/// Needs >= 4 points, strictly increasing T and positive values; throws
/// DegenerateSeries otherwise.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateModel model);

/// One JSON array of report records.
std::string bound_reports_json(const std::vector<BoundReport>& reports, int indent = 2);

/// Header plus one CSV row per report.
void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports);

}  // namespace bridgelab
