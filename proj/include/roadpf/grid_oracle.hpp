#pragma once

#include <span>
#include <vector>

#include "roadpf/filter.hpp"
#include "roadpf/road_network.hpp"
#include "roadpf/sensor_models.hpp"

namespace roadpf {

/// Network discretised into equal cells of width <= delta along every
/// segment; each cell is represented by its midpoint.
class DiscreteStateSpace {
 public:
  DiscreteStateSpace(const RoadNetwork& network, double delta = 0.5);

  std::size_t size() const { return cells_.size(); }
  const std::vector<NetworkPosition>& cells() const { return cells_; }
  double width(std::size_t cell) const { return widths_[cell]; }
  double delta() const { return delta_; }
  const RoadNetwork& network() const { return *network_; }

  /// Cell containing the position.
  std::size_t cell_of(const NetworkPosition& x) const;

 private:
  const RoadNetwork* network_;
  double delta_;
  std::vector<NetworkPosition> cells_;
  std::vector<double> widths_;
  std::vector<std::size_t> first_cell_;  // per segment index
  std::vector<std::size_t> cell_count_;  // per segment index
};

struct OracleStep {
  std::vector<double> posterior;
  bool degenerate = false;  // every cell had zero mass
};

/// Cell masses of the initial belief both filters start from: the
/// observation likelihood restricted to the proposal truncation disc.
OracleStep exact_initial(const ObservationModel& obs_model, GpsPoint y0, const DiscreteStateSpace& space);

/// Bayes filter recursion with the integral replaced by a sum over cells:
/// post[j] ~ p(y | c_j) * sum_i p(c_j | c_i, u) * prior[i] * width_j.
OracleStep exact_filter_step(std::span<const double> prior, const StepInput& input,
                             const ObservationModel& obs_model, const TransitionModel& trans_model,
                             const DiscreteStateSpace& space);

/// Particle weights binned to cells.
std::vector<double> bin_particles(const Belief& belief, const DiscreteStateSpace& space);

/// Half the L1 distance between the binned belief and the exact cell masses.
double tv_distance(const Belief& belief, std::span<const double> exact, const DiscreteStateSpace& space);
double tv_distance(std::span<const double> p, std::span<const double> q);

}  // namespace roadpf
