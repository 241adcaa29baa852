#include <map>
#include <string>
#include <vector>

#include "bridgelab/experiment.hpp"

namespace bridgelab {

namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table = {
      {"quadratic-3.1.1", R"({
  "name": "quadratic-3.1.1",
  "mode": "bridge",
  "potential": {"kind": "QuadraticIsotropic", "dim": 2},
  "endpoints": {"x": [2.0, -1.0], "y": [1.0, 0.5]},
  "T_values": [1, 2, 5, 10],
  "solver": {"method": "shooting", "tol_boundary": 1e-9}
})"},
      {"neglog-A.1", R"({
  "name": "neglog-A.1",
  "mode": "bridge",
  "potential": {"kind": "NegLog", "dim": 1},
  "endpoints": {"x": 1.0, "y": 1.0},
  "T_values": [2, 5, 10, 50],
  "solver": {"method": "shooting", "tol_boundary": 1e-9}
})"},
      {"flow-neglog", R"({
  "name": "flow-neglog",
  "mode": "flow",
  "potential": {"kind": "NegLog", "dim": 1},
  "endpoints": {"x": 1.0},
  "T_values": [1, 4, 10]
})"},
      {"gaussian-A.2", R"({
  "name": "gaussian-A.2",
  "mode": "gaussian",
  "endpoints": {"x": 0.0, "y": 3.0},
  "T_values": [10, 100, 1000, 10000]
})"},
      {"verify-quadratic", R"({
  "name": "verify-quadratic",
  "mode": "verify",
  "potential": {"kind": "QuadraticIsotropic", "dim": 1},
  "endpoints": {"x": 2.0, "y": 1.0},
  "T_values": [2, 5, 10, 20],
  "time_fractions": [0.25, 0.5, 0.75],
  "theta_values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
})"},
      {"verify-quadratic-2d", R"({
  "name": "verify-quadratic-2d",
  "mode": "verify",
  "potential": {"kind": "QuadraticMatrix", "matrix": [[2.0, 0.5], [0.5, 1.0]]},
  "endpoints": {"x": [1.5, -0.5], "y": [-1.0, 2.0]},
  "T_values": [2, 5, 10, 20],
  "time_fractions": [0.25, 0.5, 0.75],
  "theta_values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
})"},
      {"verify-neglog", R"({
  "name": "verify-neglog",
  "mode": "verify",
  "potential": {"kind": "NegLog", "dim": 1},
  "endpoints": {"x": 1.0, "y": 2.0},
  "T_values": [2, 5, 10, 20],
  "time_fractions": [0.25, 0.5, 0.75],
  "theta_values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
})"},
      {"verify-neglog-loop", R"({
  "name": "verify-neglog-loop",
  "mode": "verify",
  "potential": {"kind": "NegLog", "dim": 1},
  "endpoints": {"x": 1.0, "y": 1.0},
  "T_values": [2, 5, 10, 20],
  "time_fractions": [0.25, 0.5, 0.75],
  "theta_values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
})"},
      {"verify-neglog-2d", R"({
  "name": "verify-neglog-2d",
  "mode": "verify",
  "potential": {"kind": "NegLog", "dim": 2},
  "endpoints": {"x": [1.0, 0.5], "y": [2.0, 1.5]},
  "T_values": [2, 5, 10, 20],
  "time_fractions": [0.25, 0.5, 0.75],
  "theta_values": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
})"},
      {"sweep-quadratic", R"({
  "name": "sweep-quadratic",
  "mode": "sweep",
  "potential": {"kind": "QuadraticIsotropic", "dim": 1},
  "endpoints": {"x": 1.0, "y": 1.0},
  "T_values": [4, 5, 6, 7, 8, 9, 10, 11, 12],
  "sweep_time": 1.0
})"},
      {"sweep-neglog", R"({
  "name": "sweep-neglog",
  "mode": "sweep",
  "potential": {"kind": "NegLog", "dim": 1},
  "endpoints": {"x": 1.0, "y": 1.0},
  "T_values": [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000],
  "sweep_time": 1.0
})"},
  };
  return table;
}

}  // namespace

std::vector<std::string> builtin_config_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : builtins()) names.push_back(name);
  return names;
}

std::string builtin_config_json(const std::string& name) {
  const auto& table = builtins();
  const auto it = table.find(name);
  if (it == table.end()) fail(ErrorCode::Config, "unknown builtin config \"" + name + "\"");
  return it->second;
}

}  // namespace bridgelab
