#pragma once

#include <cstddef>
#include <vector>

#include "bridgelab/potential.hpp"

namespace bridgelab {

/// A sampled path in R^d: strictly increasing times with one state and one
/// velocity per time.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> velocities;

  std::size_t size() const noexcept { return times.size(); }
  int dim() const noexcept { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }

  /// Throws InvalidArgument unless the arrays are aligned, have >= 2 entries
  /// and the times strictly increase.
  void validate() const;

  /// Uniform step of the grid; throws NonUniformGrid if spacing varies by more
  /// than 1e-12 relative.
  double uniform_step() const;

  /// Index of the node at time t; throws OffGrid if t is not a node.
  std::size_t node_index(double t) const;

  /// Cubic Hermite interpolation of the state from states and velocities;
  /// exact at the nodes.
  Vector state_at(double t) const;
  Vector velocity_at(double t) const;

  /// The path run backwards, t -> T - t, with velocities negated.
  Trajectory reversed() const;
};

}  // namespace bridgelab
