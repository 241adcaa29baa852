#include "bridgelab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "bridgelab/bounds.hpp"
#include "bridgelab/flow.hpp"
#include "bridgelab/format.hpp"
#include "bridgelab/functionals.hpp"
#include "bridgelab/gaussian.hpp"

namespace bridgelab {

using nlohmann::json;
namespace fs = std::filesystem;

const char* mode_name(ExperimentMode m) noexcept {
  switch (m) {
    case ExperimentMode::Bridge: return "bridge";
    case ExperimentMode::Flow: return "flow";
    case ExperimentMode::Gaussian: return "gaussian";
    case ExperimentMode::Verify: return "verify";
    case ExperimentMode::Sweep: return "sweep";
  }
  return "unknown";
}

Potential PotentialSpec::build() const {
  switch (kind) {
    case PotentialKind::QuadraticIsotropic: return Potential::quadratic_isotropic(dim);
    case PotentialKind::NegLog: return Potential::neg_log(dim);
    case PotentialKind::QuadraticMatrix: {
      Matrix a(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = matrix[static_cast<std::size_t>(i * dim + j)];
      return Potential::quadratic_matrix(a);
    }
    case PotentialKind::Custom: break;
  }
  fail(ErrorCode::Config, "Custom potentials cannot be built from a config");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::Config, msg); }

void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      config_error(where + ": unknown field \"" + it.key() + "\"");
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) config_error(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_error(what + " must be finite");
  return d;
}

int get_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) config_error(what + " must be an integer");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& v, const std::string& what) {
  if (!v.is_array()) config_error(what + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_number(v[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

Vector get_point(const json& v, const std::string& what) {
  if (v.is_number()) return Vector::Constant(1, get_number(v, what));
  const std::vector<double> xs = get_numbers(v, what);
  if (xs.empty()) config_error(what + " must not be empty");
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

PotentialSpec parse_potential(const json& v) {
  if (!v.is_object()) config_error("potential must be an object");
  reject_unknown(v, {"kind", "dim", "matrix"}, "potential");
  PotentialSpec spec;
  if (!v.contains("kind") || !v["kind"].is_string()) config_error("potential.kind is required");
  const std::string kind = v["kind"].get<std::string>();
  if (kind == "QuadraticIsotropic") spec.kind = PotentialKind::QuadraticIsotropic;
  else if (kind == "QuadraticMatrix") spec.kind = PotentialKind::QuadraticMatrix;
  else if (kind == "NegLog") spec.kind = PotentialKind::NegLog;
  else config_error("potential.kind must be QuadraticIsotropic, QuadraticMatrix or NegLog");

  if (spec.kind == PotentialKind::QuadraticMatrix) {
    if (!v.contains("matrix") || !v["matrix"].is_array() || v["matrix"].empty())
      config_error("QuadraticMatrix needs potential.matrix as an array of rows");
    const json& rows = v["matrix"];
    spec.dim = static_cast<int>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::vector<double> row = get_numbers(rows[i], "potential.matrix row");
      if (row.size() != rows.size()) config_error("potential.matrix must be square");
      spec.matrix.insert(spec.matrix.end(), row.begin(), row.end());
    }
    if (v.contains("dim") && get_int(v["dim"], "potential.dim") != spec.dim)
      config_error("potential.dim disagrees with the matrix size");
  } else {
    if (v.contains("matrix")) config_error("potential.matrix is only valid for QuadraticMatrix");
    spec.dim = v.contains("dim") ? get_int(v["dim"], "potential.dim") : 1;
  }
  if (spec.dim < 1) config_error("potential.dim must be positive");
  return spec;
}

SolverOptions parse_solver(const json& v) {
  if (!v.is_object()) config_error("solver must be an object");
  reject_unknown(v, {"max_iter", "tol_boundary", "grid_points", "method", "restarts", "steps"},
                 "solver");
  SolverOptions o;
  if (v.contains("max_iter")) o.max_iter = get_int(v["max_iter"], "solver.max_iter");
  if (v.contains("restarts")) o.restarts = get_int(v["restarts"], "solver.restarts");
  if (v.contains("steps")) o.steps = get_int(v["steps"], "solver.steps");
  if (v.contains("grid_points")) o.grid_points = get_int(v["grid_points"], "solver.grid_points");
  if (v.contains("tol_boundary"))
    o.tol_boundary = get_number(v["tol_boundary"], "solver.tol_boundary");
  if (v.contains("method")) {
    if (!v["method"].is_string()) config_error("solver.method must be a string");
    const std::string m = v["method"].get<std::string>();
    if (m == "shooting") o.method = SolveMethod::Shooting;
    else if (m == "action") o.method = SolveMethod::Action;
    else if (m == "auto") o.method = SolveMethod::Auto;
    else config_error("solver.method must be shooting, action or auto");
  }
  if (o.max_iter < 1) config_error("solver.max_iter must be positive");
  if (o.restarts < 1) config_error("solver.restarts must be positive");
  if (o.steps < 0) config_error("solver.steps must be nonnegative");
  if (o.grid_points < 5) config_error("solver.grid_points must be at least 5");
  if (!(o.tol_boundary > 0.0)) config_error("solver.tol_boundary must be positive");
  return o;
}

void check_fractions(const std::vector<double>& v, const std::string& what) {
  for (double f : v)
    if (!(f > 0.0 && f < 1.0)) config_error(what + " entries must lie in (0, 1)");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("config must be a JSON object");
  reject_unknown(root,
                 {"name", "mode", "potential", "endpoints", "T_values", "theta_values",
                  "time_fractions", "sweep_time", "solver", "outputs"},
                 "config");

  ExperimentConfig cfg;
  if (!root.contains("name") || !root["name"].is_string() ||
      root["name"].get<std::string>().empty())
    config_error("name is required");
  cfg.name = root["name"].get<std::string>();

  if (!root.contains("mode") || !root["mode"].is_string()) config_error("mode is required");
  const std::string mode = root["mode"].get<std::string>();
  if (mode == "bridge") cfg.mode = ExperimentMode::Bridge;
  else if (mode == "flow") cfg.mode = ExperimentMode::Flow;
  else if (mode == "gaussian") cfg.mode = ExperimentMode::Gaussian;
  else if (mode == "verify") cfg.mode = ExperimentMode::Verify;
  else if (mode == "sweep") cfg.mode = ExperimentMode::Sweep;
  else config_error("mode must be bridge, flow, gaussian, verify or sweep");

  if (root.contains("potential")) cfg.potential = parse_potential(root["potential"]);
  else if (cfg.mode != ExperimentMode::Gaussian) config_error("potential is required");

  if (!root.contains("endpoints") || !root["endpoints"].is_object())
    config_error("endpoints is required");
  const json& ep = root["endpoints"];
  reject_unknown(ep, {"x", "y"}, "endpoints");
  if (!ep.contains("x")) config_error("endpoints.x is required");
  cfg.x = get_point(ep["x"], "endpoints.x");
  if (ep.contains("y")) cfg.y = get_point(ep["y"], "endpoints.y");
  else if (cfg.mode == ExperimentMode::Flow) cfg.y = cfg.x;
  else config_error("endpoints.y is required");
  if (cfg.x.size() != cfg.y.size()) config_error("endpoints.x and endpoints.y differ in dimension");

  if (cfg.potential) {
    if (cfg.x.size() != cfg.potential->dim)
      config_error("endpoints dimension does not match potential.dim");
    if (cfg.potential->kind == PotentialKind::NegLog &&
        (!(cfg.x.array() > 0.0).all() || !(cfg.y.array() > 0.0).all()))
      config_error("NegLog endpoints must have positive coordinates");
  } else if (cfg.x.size() != 1) {
    config_error("gaussian mode takes scalar endpoints (the two means)");
  }

  if (!root.contains("T_values")) config_error("T_values is required");
  cfg.T_values = get_numbers(root["T_values"], "T_values");
  if (cfg.T_values.empty()) config_error("T_values must not be empty");
  for (std::size_t i = 0; i < cfg.T_values.size(); ++i) {
    if (!(cfg.T_values[i] > 0.0)) config_error("T_values must be positive");
    if (i > 0 && !(cfg.T_values[i] > cfg.T_values[i - 1]))
      config_error("T_values must be strictly increasing");
  }
  if (cfg.mode == ExperimentMode::Gaussian)
    for (double t : cfg.T_values)
      if (t < 1.0) config_error("gaussian mode needs T_values >= 1");

  cfg.theta_values = root.contains("theta_values")
                         ? get_numbers(root["theta_values"], "theta_values")
                         : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  check_fractions(cfg.theta_values, "theta_values");
  cfg.time_fractions = root.contains("time_fractions")
                           ? get_numbers(root["time_fractions"], "time_fractions")
                           : std::vector<double>{0.25, 0.5, 0.75};
  check_fractions(cfg.time_fractions, "time_fractions");
  if (root.contains("sweep_time")) {
    cfg.sweep_time = get_number(root["sweep_time"], "sweep_time");
    if (!(cfg.sweep_time > 0.0)) config_error("sweep_time must be positive");
  }
  if (cfg.mode == ExperimentMode::Sweep) {
    if (cfg.T_values.size() < 4) config_error("sweep mode needs at least 4 T_values");
    if (!(cfg.T_values.front() > cfg.sweep_time))
      config_error("sweep mode needs every T above sweep_time");
  }

  if (root.contains("solver")) cfg.solver = parse_solver(root["solver"]);

  cfg.csv_dir = "out/" + cfg.name;
  if (root.contains("outputs")) {
    const json& out = root["outputs"];
    if (!out.is_object()) config_error("outputs must be an object");
    reject_unknown(out, {"csv_dir", "json_path"}, "outputs");
    if (out.contains("csv_dir")) {
      if (!out["csv_dir"].is_string()) config_error("outputs.csv_dir must be a string");
      cfg.csv_dir = out["csv_dir"].get<std::string>();
    }
    if (out.contains("json_path")) {
      if (!out["json_path"].is_string()) config_error("outputs.json_path must be a string");
      cfg.json_path = out["json_path"].get<std::string>();
    }
  }
  if (cfg.json_path.empty()) cfg.json_path = (fs::path(cfg.csv_dir) / "summary.json").string();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const std::string prefix = "builtin:";
  if (path.rfind(prefix, 0) == 0) return parse_config(builtin_config_json(path.substr(prefix.size())));
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Running

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers. Each job writes only
// its own slot, so the caller reads results in index order afterwards.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job,
                  const std::atomic<bool>& stop) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n && !stop; i = next++) job(i);
  };
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

std::string t_tag(double T) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", T);
  return buf;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

bool has_closed_form(const Potential& p, const Vector& x, const Vector& y) {
  if (p.kind() == PotentialKind::QuadraticIsotropic) return true;
  return p.kind() == PotentialKind::NegLog && p.dim() == 1 && x[0] == y[0];
}

bool has_closed_flow(const Potential& p) {
  return p.kind() == PotentialKind::QuadraticIsotropic || p.kind() == PotentialKind::NegLog;
}

Vector flow_state(const Potential& p, const Vector& x0, double t) {
  if (has_closed_flow(p)) return closed_form_flow(p.kind(), x0, t);
  return gradient_flow(p, x0, t, std::max(default_steps(t), 1000)).states.back();
}

class Writer {
 public:
  Writer(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

  std::ofstream open(const std::string& name) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorCode::Io, "cannot write " + path.string());
    result_.files.push_back(path.string());
    return os;
  }

 private:
  fs::path dir_;
  RunResult& result_;
};

void write_json_file(const fs::path& path, const json& doc, RunResult& result) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::Io, "cannot write " + path.string());
  os << doc.dump(2) << '\n';
  result.files.push_back(path.string());
}

json bridge_diagnostics(const BridgeSolution& s) {
  return {{"cost", s.cost},
          {"energy_mean", s.energy_mean},
          {"energy_maxdev", s.energy_maxdev},
          {"energy_tolerance", s.energy_tolerance},
          {"newton_residual", s.newton_residual},
          {"boundary_error", s.boundary_error},
          {"solver", solver_name(s.solver)},
          {"iterations", s.iterations},
          {"start_index", s.start_index},
          {"two_sided", s.two_sided}};
}

void write_trajectory_csv(std::ostream& os, const BridgeSolution& s, const Potential& p) {
  const Trajectory& tr = s.trajectory;
  const int d = tr.dim();
  os << 't';
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  for (int i = 1; i <= d; ++i) os << ",v_" << i;
  os << ",E,phi_norm\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const Vector g = p.gradient(tr.states[k]);
    os << fmt17(tr.times[k]);
    for (int i = 0; i < d; ++i) os << ',' << fmt17(tr.states[k][i]);
    for (int i = 0; i < d; ++i) os << ',' << fmt17(tr.velocities[k][i]);
    os << ',' << fmt17(tr.velocities[k].squaredNorm() - g.squaredNorm()) << ','
       << fmt17((g + tr.velocities[k]).norm()) << '\n';
  }
}

// Per-T slot filled by a worker.
struct Slot {
  bool done = false;
  std::string error;
  std::optional<BridgeSolution> bridge;
  std::optional<Trajectory> flow;
  std::vector<BoundReport> reports;
  json extra = json::object();
};

struct Runner {
  const ExperimentConfig& cfg;
  const RunOptions& opts;
  std::optional<Potential> potential;
  std::vector<Slot> slots;
  std::mutex log_mutex;

  void log(const std::string& msg) {
    if (!opts.log) return;
    std::lock_guard<std::mutex> lock(log_mutex);
    *opts.log << msg << '\n';
  }

  void solve_slot(std::size_t i) {
    const double T = cfg.T_values[i];
    Slot& s = slots[i];
    const Potential& p = *potential;
    switch (cfg.mode) {
      case ExperimentMode::Bridge: {
        s.bridge = solve_bridge(p, cfg.x, cfg.y, T, cfg.solver);
        const Trajectory& tr = s.bridge->trajectory;
        if (has_closed_form(p, cfg.x, cfg.y)) {
          double err = 0.0;
          for (std::size_t k = 0; k < tr.size(); ++k)
            err = std::max(err, (tr.states[k] -
                                 closed_form_bridge(p.kind(), cfg.x, cfg.y, T, tr.times[k]))
                                    .lpNorm<Eigen::Infinity>());
          double cost_exact, energy_exact;
          if (p.kind() == PotentialKind::QuadraticIsotropic) {
            const auto c = quadratic_bridge_coefficients(cfg.x, cfg.y, T);
            cost_exact = -std::expm1(-2.0 * T) * (c.alpha.squaredNorm() + c.beta.squaredNorm());
            energy_exact = -4.0 * std::exp(-T) * c.alpha.dot(c.beta);
          } else {
            cost_exact = closed_form_bridge_solution(p, cfg.x, cfg.y, T).cost;
            energy_exact = neglog_loop_energy(cfg.x[0], T);
          }
          s.extra["trajectory_error"] = err;
          s.extra["cost_exact"] = cost_exact;
          s.extra["energy_exact"] = energy_exact;
        }
        if (T > cfg.sweep_time) {
          s.extra["distance_to_flow"] =
              (tr.state_at(cfg.sweep_time) - flow_state(p, cfg.x, cfg.sweep_time)).norm();
        }
        break;
      }
      case ExperimentMode::Flow: {
        s.flow = gradient_flow(p, cfg.x, T, cfg.solver.steps);
        if (has_closed_flow(p)) {
          double err = 0.0;
          for (std::size_t k = 0; k < s.flow->size(); ++k)
            err = std::max(err, (s.flow->states[k] - closed_form_flow(p.kind(), cfg.x,
                                                                      s.flow->times[k]))
                                    .lpNorm<Eigen::Infinity>());
          s.extra["closed_form_error"] = err;
        }
        break;
      }
      case ExperimentMode::Gaussian: {
        namespace g = gaussian;
        const g::GaussianBridge gb(cfg.x[0], cfg.y[0], T);
        const int q = g::default_quad_steps(T);
        const g::GammaExpansion ge = g::gamma_expansion(gb, q);
        const double tw = std::min(cfg.sweep_time, T);
        const double w2 = g::w2_gaussian(g::bridge_marginal(gb, tw),
                                         g::heat_flow_gaussian({cfg.x[0], 1.0}, tw));
        s.extra = {{"fluct", gb.fluct()},
                   {"cost", g::gaussian_cost(gb, q)},
                   {"excess", ge.excess},
                   {"limit_target", ge.limit_target},
                   {"first_order", ge.first_order},
                   {"first_order_target", ge.first_order_target},
                   {"energy", g::gaussian_energy(gb, 0.5 * T)},
                   {"w2_to_heat_flow", w2},
                   {"schrodinger", g::schrodinger_value(gb, q)},
                   {"quad_steps", q}};
        break;
      }
      case ExperimentMode::Verify: {
        s.bridge = solve_bridge(p, cfg.x, cfg.y, T, cfg.solver);
        BoundCase bc;
        bc.x = cfg.x;
        bc.y = cfg.y;
        bc.horizon = T;
        bc.bridge = *s.bridge;
        bc.solver = cfg.solver;
        for (double f : cfg.time_fractions) bc.times.push_back(f * T);
        bc.thetas = cfg.theta_values;
        s.reports = verify_bounds(p, bc);
        break;
      }
      case ExperimentMode::Sweep: {
        s.bridge = solve_bridge(p, cfg.x, cfg.y, T, cfg.solver);
        const Trajectory& tr = s.bridge->trajectory;
        const double e = std::abs(s.bridge->energy_mean);
        const double fisher_mid = p.gradient(tr.state_at(0.5 * T)).squaredNorm();
        s.extra = {{"cost", s.bridge->cost},
                   {"abs_energy", e},
                   {"T_abs_energy", T * e},
                   {"distance_to_flow",
                    (tr.state_at(cfg.sweep_time) - flow_state(p, cfg.x, cfg.sweep_time)).norm()},
                   {"fisher_mid", fisher_mid}};
        if (p.n_dim()) s.extra["turnpike_ratio"] = fisher_mid / (2.0 * *p.n_dim() / T);
        break;
      }
    }
    s.done = true;
  }
};

json config_echo(const ExperimentConfig& cfg) {
  json j = {{"name", cfg.name},
            {"mode", mode_name(cfg.mode)},
            {"x", vec_json(cfg.x)},
            {"y", vec_json(cfg.y)},
            {"T_values", cfg.T_values},
            {"solver",
             {{"method", method_name(cfg.solver.method)},
              {"max_iter", cfg.solver.max_iter},
              {"restarts", cfg.solver.restarts},
              {"tol_boundary", cfg.solver.tol_boundary},
              {"grid_points", cfg.solver.grid_points},
              {"steps", cfg.solver.steps}}}};
  if (cfg.potential) {
    j["potential"] = {{"kind", kind_name(cfg.potential->kind)}, {"dim", cfg.potential->dim}};
  }
  return j;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunResult result;
  Runner run{cfg, opts, std::nullopt, std::vector<Slot>(cfg.T_values.size()), {}};
  if (cfg.potential) run.potential = cfg.potential->build();

  fs::path csv_dir = cfg.csv_dir;
  fs::path json_path = cfg.json_path;
  if (opts.out_dir) {
    csv_dir = *opts.out_dir;
    json_path = csv_dir / fs::path(cfg.json_path).filename();
  }
  fs::create_directories(csv_dir);

  std::atomic<bool> stop{false};
  parallel_for(
      cfg.T_values.size(), opts.threads,
      [&](std::size_t i) {
        try {
          run.solve_slot(i);
          run.log(cfg.name + ": T=" + t_tag(cfg.T_values[i]) + " done");
        } catch (const Error& e) {
          run.slots[i].error = std::string(error_code_name(e.code())) + ": " + e.what();
          run.log(cfg.name + ": T=" + t_tag(cfg.T_values[i]) + " failed (" +
                  run.slots[i].error + ")");
          if (!opts.keep_going) stop = true;
        }
      },
      stop);

  // Without keep_going only the prefix before the first failure is reported,
  // so the artifacts do not depend on scheduling.
  std::size_t usable = run.slots.size();
  for (std::size_t i = 0; i < run.slots.size(); ++i) {
    if (!run.slots[i].error.empty()) ++result.failures;
    if (!opts.keep_going && !run.slots[i].done) {
      usable = i;
      break;
    }
  }
  if (!opts.keep_going && usable < run.slots.size()) result.failures = 1;

  Writer writer(csv_dir, result);
  json cases = json::array();
  const Potential* p = run.potential ? &*run.potential : nullptr;

  std::ofstream summary = writer.open(cfg.mode == ExperimentMode::Verify ? "bounds.csv"
                                      : cfg.mode == ExperimentMode::Gaussian ? "gaussian.csv"
                                      : cfg.mode == ExperimentMode::Sweep    ? "series.csv"
                                                                             : "summary.csv");
  switch (cfg.mode) {
    case ExperimentMode::Bridge:
      summary << "T,cost,energy_mean,energy_maxdev,boundary_error,newton_residual,solver,"
                 "iterations,cost_exact,energy_exact,trajectory_error,distance_to_flow\n";
      break;
    case ExperimentMode::Flow:
      summary << "T,final_state_norm,final_value,closed_form_error\n";
      break;
    case ExperimentMode::Gaussian:
      summary << "T,fluct,cost,excess,limit_target,first_order,first_order_target,energy,"
                 "w2_to_heat_flow,schrodinger\n";
      break;
    case ExperimentMode::Verify:
      break;
    case ExperimentMode::Sweep:
      summary << "T,cost,abs_energy,T_abs_energy,distance_to_flow,fisher_mid,turnpike_ratio\n";
      break;
  }
  auto extra = [](const Slot& s, const char* key) {
    return s.extra.contains(key) ? fmt17(s.extra[key].get<double>()) : std::string("nan");
  };

  std::vector<BoundReport> all_reports;
  for (std::size_t i = 0; i < usable; ++i) {
    const Slot& s = run.slots[i];
    const double T = cfg.T_values[i];
    json c = {{"T", T}};
    if (!s.done) {
      c["error"] = s.error;
      cases.push_back(c);
      continue;
    }
    switch (cfg.mode) {
      case ExperimentMode::Bridge: {
        std::ofstream os = writer.open("bridge_T" + t_tag(T) + ".csv");
        write_trajectory_csv(os, *s.bridge, *p);
        const BridgeSolution& b = *s.bridge;
        summary << fmt17(T) << ',' << fmt17(b.cost) << ',' << fmt17(b.energy_mean) << ','
                << fmt17(b.energy_maxdev) << ',' << fmt17(b.boundary_error) << ','
                << fmt17(b.newton_residual) << ',' << solver_name(b.solver) << ','
                << b.iterations << ',' << extra(s, "cost_exact") << ','
                << extra(s, "energy_exact") << ',' << extra(s, "trajectory_error") << ','
                << extra(s, "distance_to_flow") << '\n';
        c["bridge"] = bridge_diagnostics(b);
        break;
      }
      case ExperimentMode::Flow: {
        std::ofstream os = writer.open("flow_T" + t_tag(T) + ".csv");
        const Trajectory& tr = *s.flow;
        const int d = tr.dim();
        os << 't';
        for (int k = 1; k <= d; ++k) os << ",s_" << k;
        for (int k = 1; k <= d; ++k) os << ",v_" << k;
        os << ",F\n";
        for (std::size_t k = 0; k < tr.size(); ++k) {
          os << fmt17(tr.times[k]);
          for (int j = 0; j < d; ++j) os << ',' << fmt17(tr.states[k][j]);
          for (int j = 0; j < d; ++j) os << ',' << fmt17(tr.velocities[k][j]);
          os << ',' << fmt17(p->value(tr.states[k])) << '\n';
        }
        summary << fmt17(T) << ',' << fmt17(tr.states.back().norm()) << ','
                << fmt17(p->value(tr.states.back())) << ',' << extra(s, "closed_form_error")
                << '\n';
        c["final_state"] = vec_json(tr.states.back());
        break;
      }
      case ExperimentMode::Gaussian:
        summary << fmt17(T);
        for (const char* key : {"fluct", "cost", "excess", "limit_target", "first_order",
                                "first_order_target", "energy", "w2_to_heat_flow", "schrodinger"})
          summary << ',' << extra(s, key);
        summary << '\n';
        break;
      case ExperimentMode::Verify: {
        int failed = 0, applicable = 0;
        for (const BoundReport& r : s.reports) {
          applicable += r.applicable ? 1 : 0;
          failed += r.pass ? 0 : 1;
        }
        result.bound_failures += failed;
        all_reports.insert(all_reports.end(), s.reports.begin(), s.reports.end());
        c["bridge"] = bridge_diagnostics(*s.bridge);
        c["reports"] = s.reports.size();
        c["applicable"] = applicable;
        c["failed"] = failed;
        break;
      }
      case ExperimentMode::Sweep:
        summary << fmt17(T);
        for (const char* key : {"cost", "abs_energy", "T_abs_energy", "distance_to_flow",
                                "fisher_mid", "turnpike_ratio"})
          summary << ',' << extra(s, key);
        summary << '\n';
        c["bridge"] = bridge_diagnostics(*s.bridge);
        break;
    }
    if (!s.extra.empty()) c["values"] = s.extra;
    cases.push_back(c);
  }
  if (cfg.mode == ExperimentMode::Verify) write_bound_csv(summary, all_reports);
  summary.close();

  json doc = {{"config", config_echo(cfg)}, {"cases", cases}};

  if (cfg.mode == ExperimentMode::Sweep) {
    std::ofstream os = writer.open("rates.csv");
    os << "quantity,model,exponent,prefactor,residual,points\n";
    json rates = json::array();
    for (const char* key : {"cost", "abs_energy", "T_abs_energy", "distance_to_flow",
                            "fisher_mid"}) {
      std::vector<std::pair<double, double>> series;
      for (std::size_t i = 0; i < usable; ++i)
        if (run.slots[i].done)
          series.emplace_back(cfg.T_values[i], run.slots[i].extra[key].get<double>());
      for (RateModel m : {RateModel::PowerLaw, RateModel::Exponential}) {
        json entry = {{"quantity", key}, {"model", rate_model_name(m)}};
        try {
          const RateFit f = fit_rate(series, m);
          os << key << ',' << rate_model_name(m) << ',' << fmt17(f.exponent) << ','
             << fmt17(f.prefactor) << ',' << fmt17(f.residual) << ',' << series.size() << '\n';
          entry["exponent"] = f.exponent;
          entry["prefactor"] = f.prefactor;
          entry["residual"] = f.residual;
        } catch (const Error& e) {
          os << key << ',' << rate_model_name(m) << ",nan,nan,nan," << series.size() << '\n';
          entry["error"] = e.what();
        }
        rates.push_back(entry);
      }
    }
    doc["rates"] = rates;
  }
  if (cfg.mode == ExperimentMode::Verify) {
    doc["bound_failures"] = result.bound_failures;
    if (result.bound_failures > 0)
      run.log(cfg.name + ": " + std::to_string(result.bound_failures) + " bound reports failed");
  }
  doc["failures"] = result.failures;
  write_json_file(json_path, doc, result);

  result.exit_code = result.failures > 0 ? 2 : 0;
  return result;
}

int run_config(const std::string& path, const RunOptions& opts) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const Error& e) {
    if (opts.log) *opts.log << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  try {
    return run_experiment(cfg, opts).exit_code;
  } catch (const Error& e) {
    if (opts.log) *opts.log << error_code_name(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::Io || e.code() == ErrorCode::Config ? 1 : 2;
  } catch (const fs::filesystem_error& e) {
    if (opts.log) *opts.log << "IoError: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bridgelab
