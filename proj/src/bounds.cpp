#include "bridgelab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "bridgelab/flow.hpp"
#include "bridgelab/format.hpp"

namespace bridgelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// coth(u) for u > 0 without overflow.
double coth(double u) { return 1.0 / std::tanh(u); }

// sinh(a) / sinh(b) for 0 <= a <= b, stable for large arguments.
double sinh_ratio(double a, double b) {
  if (a == 0.0) return 0.0;
  return std::exp(a - b) * std::expm1(-2.0 * a) / std::expm1(-2.0 * b);
}

// Flow S_t(x) sampled where the bounds need it: closed form when one exists,
// otherwise a fine RK4 run interpolated with Hermite cubics.
class FlowSampler {
 public:
  FlowSampler(const Potential& p, const Vector& x0, double horizon) : p_(p), x0_(x0) {
    if (p.kind() != PotentialKind::QuadraticIsotropic && p.kind() != PotentialKind::NegLog)
      traj_ = gradient_flow(p, x0, horizon, std::max(default_steps(horizon), 4000));
  }
  Vector at(double t) const {
    if (traj_.size() == 0) return closed_form_flow(p_.kind(), x0_, t);
    return traj_.state_at(t);
  }

 private:
  const Potential& p_;
  Vector x0_;
  Trajectory traj_;
};

struct Orientation {
  const char* label;
  const Vector& a;
  const Vector& b;
  Trajectory traj;
};

}  // namespace

const char* bound_name(BoundId id) noexcept {
  static const char* names[] = {"B1", "B2", "B3", "B4",  "B5",  "B6",
                                "B7", "B8", "B9", "B10", "B11", "B12"};
  const int i = static_cast<int>(id) - 1;
  return i >= 0 && i < 12 ? names[i] : "B?";
}

double bound_tolerance(double rhs) { return 1e-8 * (1.0 + std::abs(rhs)); }

BoundReport make_report(BoundId id, double lhs, double rhs, BoundContext ctx) {
  BoundReport r;
  r.id = id;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = r.margin >= -bound_tolerance(rhs);
  r.context = std::move(ctx);
  return r;
}

double sinh_entropy_bound(double rho, double horizon, double t, double fx, double fy,
                          double fstar, double energy) {
  const double shift = energy / (4.0 * rho);
  const double h0 = fx - fstar + shift;
  const double h1 = fy - fstar + shift;
  const double w0 = sinh_ratio(2.0 * rho * (horizon - t), 2.0 * rho * horizon);
  const double w1 = sinh_ratio(2.0 * rho * t, 2.0 * rho * horizon);
  return fstar - shift + w0 * h0 + w1 * h1;
}

double cost_bound_inf(double rho, double horizon, double fx, double fy, double fstar) {
  const double gx = fx - fstar;
  const double gy = fy - fstar;
  auto g = [&](double t) {
    double v = 0.0;
    if (gx != 0.0) v += 2.0 * coth(rho * t) * gx;
    if (gy != 0.0) v += 2.0 * coth(rho * (horizon - t)) * gy;
    return v;
  };
  // Coarse scan of the open interval, then golden section on the best bracket.
  constexpr int n = 4000;
  const double dt = horizon / n;
  int best = 1;
  double best_v = g(dt);
  for (int i = 2; i < n; ++i) {
    const double v = g(i * dt);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double lo = std::max((best - 1) * dt, 1e-12 * horizon);
  double hi = std::min((best + 1) * dt, horizon * (1.0 - 1e-12));
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - ratio * (hi - lo), d = lo + ratio * (hi - lo);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * horizon; ++it) {
    if (gc < gd) {
      hi = d;
      d = c;
      gd = gc;
      c = hi - ratio * (hi - lo);
      gc = g(c);
    } else {
      lo = c;
      c = d;
      gc = gd;
      d = lo + ratio * (hi - lo);
      gd = g(d);
    }
  }
  return std::min({best_v, gc, gd});
}

std::vector<BoundReport> verify_bounds(const Potential& p, const BoundCase& c) {
  const double T = c.horizon;
  if (!(T > 0.0)) fail(ErrorCode::InvalidArgument, "bound case needs T > 0");
  const Trajectory& fwd = c.bridge.trajectory;
  fwd.validate();
  if (std::abs(fwd.end_time() - T) > 1e-12 * (1.0 + T))
    fail(ErrorCode::InvalidArgument, "bridge horizon does not match the case horizon");
  for (double t : c.times)
    if (!(t > 0.0 && t < T)) fail(ErrorCode::OutOfRange, "evaluation times must lie in (0, T)");
  for (double th : c.thetas)
    if (!(th > 0.0 && th < 1.0)) fail(ErrorCode::OutOfRange, "theta must lie in (0, 1)");

  const double cost = c.bridge.cost;
  const double energy = c.bridge.energy_mean;
  const bool has_rho = p.has_positive_rho();
  const bool has_n = p.n_dim().has_value();

  std::optional<double> c1 = c.c1;
  if (has_n && !c1) {
    if (std::abs(T - 1.0) <= 1e-15) {
      c1 = cost;
    } else {
      try {
        c1 = solve_bridge(p, c.x, c.y, 1.0, c.solver).cost;
      } catch (const Error& e) {
        fail(ErrorCode::MissingPrerequisite,
             std::string("C_1 is required and could not be solved: ") + e.what());
      }
    }
  }

  std::vector<Orientation> sides;
  sides.push_back({"forward", c.x, c.y, fwd});
  if (c.both_orientations) sides.push_back({"reverse", c.y, c.x, fwd.reversed()});

  std::vector<BoundReport> out;
  for (const Orientation& side : sides) {
    BoundContext base;
    base.potential = p.describe();
    base.orientation = side.label;
    base.x = side.a;
    base.y = side.b;
    base.horizon = T;
    base.tol_boundary = c.solver.tol_boundary;
    base.grid_points = static_cast<int>(fwd.size());
    auto ctx = [&](double t, double theta, std::string detail) {
      BoundContext k = base;
      k.t = t;
      k.theta = theta;
      k.detail = std::move(detail);
      return k;
    };
    auto not_applicable = [&](BoundId id, const char* why) {
      BoundReport r;
      r.id = id;
      r.applicable = false;
      r.lhs = r.rhs = r.margin = kNaN;
      r.context = ctx(kNaN, kNaN, why);
      out.push_back(std::move(r));
    };

    const double fa = p.value(side.a);
    const double fb = p.value(side.b);
    const FlowSampler flow(p, side.a, T);

    auto phi_sq = [&](double t) {
      const Vector xt = side.traj.state_at(t);
      return (p.gradient(xt) + side.traj.velocity_at(t)).squaredNorm();
    };

    // Bounds assuming F'' >= rho Id with rho > 0.
    if (has_rho) {
      const double r = *p.rho();
      const double fstar = p.value(*p.minimizer());
      const double budget = cost + 2.0 * fb - 2.0 * fa;
      for (double t : c.times) {
        const double rhs = 2.0 * r / std::expm1(2.0 * r * (T - t)) * budget;
        out.push_back(make_report(BoundId::B4, phi_sq(t), rhs, ctx(t, kNaN, "phi")));
      }
      {
        const double diff = fa - fb;
        const double rhs = 2.0 * r / std::expm1(r * T) *
                           std::sqrt(std::max(0.0, cost * cost - 4.0 * diff * diff));
        out.push_back(make_report(BoundId::B5, std::abs(energy), rhs, ctx(kNaN, kNaN, "energy")));
      }
      for (double t : c.times) {
        const double lhs = p.value(side.traj.state_at(t));
        const double rhs = sinh_entropy_bound(r, T, t, fa, fb, fstar, energy);
        out.push_back(make_report(BoundId::B6, lhs, rhs, ctx(t, kNaN, "F(X_t)")));
      }
      for (double t : c.times) {
        const double lhs = (side.traj.state_at(t) - flow.at(t)).norm();
        const double denom = std::exp(-2.0 * r * t) - std::exp(-2.0 * r * T);
        const double rhs = t * std::exp(-r * T) * std::sqrt(2.0 * r / denom * budget);
        out.push_back(make_report(BoundId::B7, lhs, rhs, ctx(t, kNaN, "distance")));
      }
      out.push_back(make_report(BoundId::B9, cost, cost_bound_inf(r, T, fa, fb, fstar),
                                ctx(kNaN, kNaN, "cost")));
      auto log_sobolev = [&](const Vector& z, double t, const char* what) {
        const double lhs = 2.0 * r * (p.value(z) - fstar);
        out.push_back(make_report(BoundId::B10, lhs, p.gradient(z).squaredNorm(),
                                  ctx(t, kNaN, what)));
      };
      log_sobolev(side.a, 0.0, "x");
      for (double t : c.times) log_sobolev(side.traj.state_at(t), t, "X_t");
    } else {
      for (BoundId id : {BoundId::B4, BoundId::B5, BoundId::B6, BoundId::B7, BoundId::B9,
                         BoundId::B10})
        not_applicable(id, "needs rho > 0");
    }

    // Bounds assuming (0, n)-convexity with finite n.
    if (has_n) {
      const double n = *p.n_dim();
      const double log_budget = *c1 + 2.0 * n * std::log(T);
      out.push_back(make_report(BoundId::B1, -energy, 2.0 * n / T, ctx(kNaN, kNaN, "energy")));
      if (T >= 1.0) {
        out.push_back(make_report(BoundId::B1, cost, log_budget, ctx(kNaN, kNaN, "cost")));
      }
      for (double t : c.times) {
        const double rhs = (2.0 * fb - 2.0 * fa + log_budget) / (T - t);
        out.push_back(make_report(BoundId::B2, phi_sq(t), rhs, ctx(t, kNaN, "phi")));
      }
      for (double th : c.thetas) {
        const double t = th * T;
        const double lhs = p.gradient(side.traj.state_at(t)).squaredNorm();
        const double rhs = n / (2.0 * T * th * (1.0 - th));
        out.push_back(make_report(BoundId::B3, lhs, rhs, ctx(t, th, "fisher")));
      }
      for (double t : c.times) {
        const double lhs = (side.traj.state_at(t) - flow.at(t)).norm();
        const double rhs = 2.0 * std::sqrt(2.0 * (fb - fa) + log_budget) *
                           (std::sqrt(T) - std::sqrt(T - t));
        out.push_back(make_report(BoundId::B8, lhs, rhs, ctx(t, kNaN, "distance")));
      }
      {
        const double lhs = fa - p.value(flow.at(T));
        const double rhs = 0.5 * n * std::log1p(2.0 * T / n * p.gradient(side.a).squaredNorm());
        out.push_back(make_report(BoundId::B11, lhs, rhs, ctx(T, kNaN, "entropy gap")));
      }
      for (double t : c.times) {
        const double lhs = p.gradient(flow.at(t)).squaredNorm();
        out.push_back(make_report(BoundId::B12, lhs, n / (2.0 * t), ctx(t, kNaN, "flow fisher")));
      }
    } else {
      for (BoundId id : {BoundId::B1, BoundId::B2, BoundId::B3, BoundId::B8, BoundId::B11,
                         BoundId::B12})
        not_applicable(id, "needs finite n");
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const BoundReport& l, const BoundReport& r) {
    return static_cast<int>(l.id) < static_cast<int>(r.id);
  });
  return out;
}

const char* rate_model_name(RateModel m) noexcept {
  return m == RateModel::PowerLaw ? "PowerLaw" : "Exponential";
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, RateModel model) {
  if (series.size() < 4) fail(ErrorCode::DegenerateSeries, "rate fit needs at least 4 points");
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto [t, v] = series[i];
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::DegenerateSeries, "rate fit needs positive finite values");
    if (!std::isfinite(t) || (model == RateModel::PowerLaw && !(t > 0.0)))
      fail(ErrorCode::DegenerateSeries, "rate fit abscissae must be finite (and positive for PowerLaw)");
    if (i > 0 && !(t > series[i - 1].first))
      fail(ErrorCode::DegenerateSeries, "rate fit abscissae must increase");
  }
  const std::size_t m = series.size();
  std::vector<double> u(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    u[i] = model == RateModel::PowerLaw ? std::log(series[i].first) : series[i].first;
    w[i] = std::log(series[i].second);
  }
  double mu = 0.0, mw = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mu += u[i];
    mw += w[i];
  }
  mu /= m;
  mw /= m;
  double suu = 0.0, suw = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suw += (u[i] - mu) * (w[i] - mw);
  }
  RateFit fit;
  fit.model = model;
  fit.exponent = suw / suu;
  const double intercept = mw - fit.exponent * mu;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = w[i] - (intercept + fit.exponent * u[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json vec_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string vec_text(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += fmt17(v[i]);
  }
  return s;
}

}  // namespace

std::string bound_reports_json(const std::vector<BoundReport>& reports, int indent) {
  nlohmann::json arr = nlohmann::json::array();
  for (const BoundReport& r : reports) {
    const BoundContext& k = r.context;
    arr.push_back({
        {"bound", bound_name(r.id)},
        {"applicable", r.applicable},
        {"lhs", number(r.lhs)},
        {"rhs", number(r.rhs)},
        {"margin", number(r.margin)},
        {"pass", r.pass},
        {"context",
         {{"potential", k.potential},
          {"orientation", k.orientation},
          {"x", vec_json(k.x)},
          {"y", vec_json(k.y)},
          {"T", k.horizon},
          {"t", number(k.t)},
          {"theta", number(k.theta)},
          {"detail", k.detail},
          {"tol_boundary", k.tol_boundary},
          {"grid_points", k.grid_points}}},
    });
  }
  return arr.dump(indent);
}

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& reports) {
  os << "bound,applicable,orientation,T,t,theta,detail,lhs,rhs,margin,pass,potential,x,y,"
        "tol_boundary,grid_points\n";
  for (const BoundReport& r : reports) {
    const BoundContext& k = r.context;
    os << bound_name(r.id) << ',' << (r.applicable ? 1 : 0) << ',' << k.orientation << ','
       << fmt17(k.horizon) << ',' << fmt17(k.t) << ',' << fmt17(k.theta) << ',' << k.detail
       << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs) << ',' << fmt17(r.margin) << ','
       << (r.pass ? 1 : 0) << ',' << k.potential << ',' << vec_text(k.x) << ','
       << vec_text(k.y) << ',' << fmt17(k.tol_boundary) << ',' << k.grid_points << '\n';
  }
}

}  // namespace bridgelab
