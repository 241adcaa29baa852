// Acceptance run: one PASS/FAIL line per criterion, indented detail lines
// below it. Exit status is nonzero when any criterion fails.
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bridgelab/bounds.hpp"
#include "bridgelab/bridge.hpp"
#include "bridgelab/experiment.hpp"
#include "bridgelab/flow.hpp"
#include "bridgelab/functionals.hpp"
#include "bridgelab/gaussian.hpp"
#include "oracles.hpp"

using namespace bridgelab;
namespace fs = std::filesystem;
namespace ga = bridgelab::gaussian;

namespace {

int g_failed = 0;

void verdict(int id, bool ok, const std::string& summary) {
  std::printf("%-2d %s  %s\n", id, ok ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  std::printf("     ");
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vector scalar(double v) { return Vector::Constant(1, v); }

void quadratic_oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = Potential::quadratic_isotropic(1);
  double worst_traj = 0.0, worst_e = 0.0, worst_c = 0.0;
  int cases = 0;
  for (double T : {0.5, 1.0, 2.0, 5.0}) {
    for (auto [x, y] : {std::pair{2.0, 1.0}, {1.0, 1.0}, {-1.0, 3.0}}) {
      SolverOptions o;
      o.method = SolveMethod::Shooting;
      const auto b = solve_bridge(p, scalar(x), scalar(y), T, o);
      // X_t = e^{-t} alpha + e^{-(T-t)} beta with both ends pinned.
      const double q = std::exp(-T);
      const double alpha = (x - q * y) / (1.0 - q * q), beta = (y - q * x) / (1.0 - q * q);
      for (std::size_t k = 0; k < b.trajectory.size(); ++k)
        worst_traj = std::max(worst_traj, std::abs(b.trajectory.states[k][0] -
                                                   oracle::quad_state(x, y, T, b.trajectory.times[k])));
      worst_e = std::max(worst_e, std::abs(b.energy_mean + 4.0 * q * alpha * beta));
      worst_c = std::max(worst_c, std::abs(b.cost - (1.0 - q * q) * (alpha * alpha + beta * beta)));
      ++cases;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = cases == 12 && worst_traj <= 1e-7 && worst_e <= 1e-7 && worst_c <= 1e-6 &&
                  secs < 5.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "quadratic oracle, %d cases: traj %.2e (<=1e-7), E %.2e (<=1e-7), C %.2e (<=1e-6), "
                "%.2f s (<5)",
                cases, worst_traj, worst_e, worst_c, secs);
  verdict(1, ok, buf);
}

void neglog_loop_energy_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = Potential::neg_log(1);
  double worst_printed = 0.0, worst_exact = 0.0, worst_traj = 0.0;
  std::vector<std::string> rows;
  for (double T : {2.0, 5.0, 10.0, 50.0}) {
    const auto b = solve_bridge(p, scalar(1), scalar(1), T);
    const double printed = oracle::neglog_loop_energy_printed(1, T);
    const double exact = oracle::neglog_loop_energy(1, T);
    worst_printed = std::max(worst_printed, std::abs(b.energy_mean - printed) / std::abs(printed));
    worst_exact = std::max(worst_exact, std::abs(b.energy_mean - exact) / std::abs(exact));
    for (std::size_t k = 0; k < b.trajectory.size(); ++k)
      worst_traj = std::max(worst_traj, std::abs(b.trajectory.states[k][0] -
                                                 oracle::neglog_loop_state(1, T, b.trajectory.times[k])));
    char row[200];
    std::snprintf(row, sizeof row, "T=%-4g E=%.10f  printed %.10f  x^2-root form %.10f", T,
                  b.energy_mean, printed, exact);
    rows.push_back(row);
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_printed <= 1e-6 && worst_traj <= 1e-6 && secs < 10.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "loop energy vs (-x^2-sqrt(x^4+T^2))/(T^2/2): rel %.2e (<=1e-6); traj %.2e "
                "(<=1e-6); %.2f s (<10)",
                worst_printed, worst_traj, secs);
  verdict(2, ok, buf);
  for (const auto& r : rows) detail("%s", r.c_str());
  detail("against (x^2-sqrt(x^4+T^2))/(T^2/2), which the loop closed form implies: rel %.2e",
         worst_exact);
}

struct NegLogSeries {
  std::vector<std::pair<double, double>> t_abs_energy;
  std::vector<std::pair<double, double>> distance;
  double cost_1e3 = 0.0;
  double secs = 0.0;
};

NegLogSeries neglog_series() {
  NegLogSeries s;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = Potential::neg_log(1);
  const double flow_1 = std::sqrt(2.0 + 1.0);
  for (double T : {10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0}) {
    const auto b = solve_bridge(p, scalar(1), scalar(1), T);
    s.t_abs_energy.emplace_back(T, T * std::abs(b.energy_mean));
    s.distance.emplace_back(T, std::abs(b.trajectory.state_at(1.0)[0] - flow_1));
    if (T == 1000.0) s.cost_1e3 = b.cost;
  }
  s.secs = seconds_since(t0);
  return s;
}

void asymptotics(const NegLogSeries& s) {
  const double ratio = s.cost_1e3 / (2.0 * std::log(1000.0));
  const auto fit = fit_rate(s.t_abs_energy, RateModel::PowerLaw);
  const bool ok = ratio >= 0.9 && ratio <= 1.1 && std::abs(fit.exponent) <= 0.05 && s.secs < 30.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "C_1000/(2 log 1000) = %.4f in [0.9,1.1]; T|E_T| exponent %.4f (0 +- 0.05); "
                "%.2f s (<30)",
                ratio, fit.exponent, s.secs);
  verdict(3, ok, buf);
}

void envelope_identity() {
  const double h = 1e-3;
  const auto q = envelope_check(Potential::quadratic_isotropic(1), scalar(2), scalar(1), 2.0, h);
  const auto n = envelope_check(Potential::neg_log(1), scalar(1), scalar(1), 5.0, h);
  const double T = 10.0;
  const int steps = ga::default_quad_steps(T + h);
  const double dcdt = (ga::gaussian_cost(ga::GaussianBridge(0, 3, T + h), steps) -
                       ga::gaussian_cost(ga::GaussianBridge(0, 3, T - h), steps)) /
                      (2.0 * h);
  const double g_gap = std::abs(dcdt + ga::gaussian_energy(ga::GaussianBridge(0, 3, T), 0.0));
  const bool ok = q.gap <= 1e-4 && n.gap <= 1e-4 && g_gap <= 1e-4;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "|dC/dT + E| at h=1e-3: quadratic %.2e, NegLog %.2e, Gaussian %.2e (<=1e-4)", q.gap,
                n.gap, g_gap);
  verdict(4, ok, buf);
}

fs::path scratch(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() / ("bridgelab_accept_" + std::to_string(::getpid()) + "_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void bound_catalogue() {
  int runs = 0, bound_fail = 0, solve_fail = 0;
  std::size_t rows = 0;
  std::vector<std::string> lines;
  for (const auto& name : builtin_config_names()) {
    const auto cfg = load_config("builtin:" + name);
    if (cfg.mode != ExperimentMode::Verify) continue;
    const auto dir = scratch(name);
    RunOptions opts;
    opts.out_dir = dir.string();
    const auto res = run_experiment(cfg, opts);
    std::ifstream in(dir / "bounds.csv");
    std::string line;
    std::getline(in, line);
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    char row[160];
    std::snprintf(row, sizeof row, "%-20s reports %zu, failed %d, solver failures %d",
                  name.c_str(), n, res.bound_failures, res.failures);
    lines.push_back(row);
    rows += n;
    bound_fail += res.bound_failures;
    solve_fail += res.failures;
    ++runs;
    fs::remove_all(dir);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "B1-B12 over %d verify configs: %zu reports, %d failed, %d solver failures",
                runs, rows, bound_fail, solve_fail);
  verdict(5, runs >= 5 && rows > 0 && bound_fail == 0 && solve_fail == 0, buf);
  for (const auto& l : lines) detail("%s", l.c_str());
}

void turnpike_sharpness() {
  const auto p = Potential::neg_log(1);
  BoundCase c;
  c.x = scalar(1);
  c.y = scalar(1);
  c.horizon = 1000.0;
  c.bridge = solve_bridge(p, c.x, c.y, c.horizon);
  c.times = {500.0};
  c.thetas = {0.5};
  c.both_orientations = false;
  double ratio = NAN;
  for (const auto& r : verify_bounds(p, c))
    if (r.id == BoundId::B3 && r.applicable) ratio = r.lhs / r.rhs;
  char buf[160];
  std::snprintf(buf, sizeof buf, "B3 lhs/rhs at theta=0.5, T=1000: %.6f (>0.5)", ratio);
  verdict(6, ratio > 0.5, buf);
}

void flow_rates(const NegLogSeries& s) {
  const auto p = Potential::quadratic_isotropic(1);
  std::vector<std::pair<double, double>> quad;
  for (int T = 4; T <= 12; ++T) {
    const auto b = solve_bridge(p, scalar(1), scalar(1), T);
    quad.emplace_back(T, std::abs(b.trajectory.state_at(1.0)[0] - std::exp(-1.0)));
  }
  const auto fq = fit_rate(quad, RateModel::Exponential);
  const auto fn = fit_rate(s.distance, RateModel::PowerLaw);
  const bool ok = std::abs(fq.exponent + 1.0) <= 0.05 && std::abs(fn.exponent + 1.0) <= 0.1;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "|X_1 - S_1|: quadratic Exponential rate %.4f (-1 +- 0.05), NegLog PowerLaw %.4f "
                "(-1 +- 0.1)",
                fq.exponent, fn.exponent);
  verdict(7, ok, buf);
}

void gamma_expansion_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const double T = 1e4;
  double worst_limit = 0.0, worst_first = 0.0;
  std::vector<std::string> rows;
  for (double x1 : {0.0, 3.0}) {
    const auto g = ga::gamma_expansion(ga::GaussianBridge(0.0, x1, T), ga::default_quad_steps(T));
    worst_limit = std::max(worst_limit, std::abs(g.excess - g.limit_target));
    const double rel = std::abs(g.first_order - g.first_order_target) / g.first_order_target;
    worst_first = std::max(worst_first, rel);
    char row[200];
    std::snprintf(row, sizeof row,
                  "(0,%g): excess %.6f limit %.6f; T*(excess-limit) %.4f vs ((x0-x1)^2+2)/4 = %.4f",
                  x1, g.excess, g.limit_target, g.first_order, g.first_order_target);
    rows.push_back(row);
  }
  const double secs = seconds_since(t0);
  const bool limit_ok = worst_limit <= 1e-2;
  const bool first_ok = worst_first <= 0.10;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Gaussian expansion at T=1e4: limit gap %.2e (<=1e-2) %s; first-order rel %.3f "
                "(<=0.10) %s; %.2f s (<5)",
                worst_limit, limit_ok ? "ok" : "off", worst_first, first_ok ? "ok" : "off", secs);
  verdict(8, limit_ok && first_ok && secs < 5.0, buf);
  for (const auto& r : rows) detail("%s", r.c_str());
  detail("the first-order term tends to (x0-x1)^2 + 2, four times the stated target");
}

void heat_flow_rate() {
  double worst = 0.0;
  std::string parts;
  for (double x1 : {0.0, 3.0}) {
    std::vector<std::pair<double, double>> w;
    for (double T : {10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0}) {
      const ga::GaussianBridge gb(0.0, x1, T);
      w.emplace_back(T, ga::w2_gaussian(ga::bridge_marginal(gb, 1.0),
                                        ga::heat_flow_gaussian({0.0, 1.0}, 1.0)));
    }
    const double e = fit_rate(w, RateModel::PowerLaw).exponent;
    worst = std::max(worst, std::abs(e + 1.0));
    char b[64];
    std::snprintf(b, sizeof b, "%s(0,%g) %.4f", parts.empty() ? "" : ", ", x1, e);
    parts += b;
  }
  verdict(9, worst <= 0.05, "W2 to heat flow at t=1, log-log slope: " + parts + " (-1 +- 0.05)");
}

void concavity_suite() {
  bool ok = true;
  double worst = -INFINITY;
  int profiles = 0;
  auto check = [&](const ConcavityProfile& prof) {
    ++profiles;
    const double rel = prof.max_second_difference / prof.scale;
    worst = std::max(worst, rel);
    ok = ok && prof.max_second_difference <= 1e-8 * prof.scale;
  };
  for (int d : {1, 2, 3}) {
    const auto p = Potential::neg_log(d);
    const Vector x = Vector::LinSpaced(d, 1.0, 0.5);
    const Vector y = Vector::LinSpaced(d, 2.0, 1.5);
    for (double T : {1.0, 5.0, 20.0}) {
      check(concavity_profile(costa_series(gradient_flow(p, x, T), p), 2.0 / d));
      const auto b = solve_bridge(p, x, y, T);
      check(concavity_profile(ripani_series(b.trajectory, p), 1.0 / d));
      check(concavity_profile(improved_ripani_series(b.trajectory, p), 1.0 / d));
    }
  }
  std::vector<std::pair<double, double>> line;
  for (int k = 0; k <= 200; ++k) line.emplace_back(0.01 * k, 0.01 * k);
  const auto control = concavity_profile(line, 1.0);
  const bool flagged = !control.concave();
  char buf[220];
  std::snprintf(buf, sizeof buf,
                "Costa/Ripani/improved Ripani: %d profiles, max 2nd diff / scale %.2e (<=1e-8); "
                "exp(-t) control %s",
                profiles, worst, flagged ? "flagged" : "NOT flagged");
  verdict(10, ok && flagged, buf);
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

void determinism() {
  int configs = 0, differing = 0;
  std::size_t files = 0;
  for (const auto& name : builtin_config_names()) {
    const auto cfg = load_config("builtin:" + name);
    const auto a = scratch(name + "_a"), b = scratch(name + "_b");
    RunOptions oa, ob;
    oa.out_dir = a.string();
    ob.out_dir = b.string();
    run_experiment(cfg, oa);
    run_experiment(cfg, ob);
    const auto ca = read_csvs(a), cb = read_csvs(b);
    files += ca.size();
    if (ca.empty() || ca != cb) {
      ++differing;
      detail("%s: outputs differ or are missing", name.c_str());
    }
    ++configs;
    fs::remove_all(a);
    fs::remove_all(b);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d builtin configs run twice, %zu CSV files, %d differing",
                configs, files, differing);
  verdict(11, differing == 0 && configs > 0, buf);
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, quadratic_oracle_suite);
  guarded(2, neglog_loop_energy_check);
  NegLogSeries series;
  bool have_series = false;
  try {
    series = neglog_series();
    have_series = true;
  } catch (const std::exception& e) {
    detail("NegLog sweep failed: %s", e.what());
  }
  if (have_series) {
    guarded(3, [&] { asymptotics(series); });
  } else {
    verdict(3, false, "NegLog sweep unavailable");
  }
  guarded(4, envelope_identity);
  guarded(5, bound_catalogue);
  guarded(6, turnpike_sharpness);
  if (have_series) {
    guarded(7, [&] { flow_rates(series); });
  } else {
    verdict(7, false, "NegLog sweep unavailable");
  }
  guarded(8, gamma_expansion_check);
  guarded(9, heat_flow_rate);
  guarded(10, concavity_suite);
  guarded(11, determinism);
  std::printf("%d of 11 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
