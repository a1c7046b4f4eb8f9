#include "roadpf/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace roadpf {

DiscreteStateSpace::DiscreteStateSpace(const RoadNetwork& network, double delta)
    : network_(&network), delta_(delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("cell width must be positive");
  for (const auto& s : network.segments()) {
    const auto count = static_cast<std::size_t>(std::ceil(s.length / delta - 1e-9));
    const double w = s.length / static_cast<double>(count);
    first_cell_.push_back(cells_.size());
    cell_count_.push_back(count);
    for (std::size_t k = 0; k < count; ++k) {
      const double offset = (static_cast<double>(k) + 0.5) * w;
      cells_.push_back({s.id, offset, s.point_at(offset)});
      widths_.push_back(w);
    }
  }
}

std::size_t DiscreteStateSpace::cell_of(const NetworkPosition& x) const {
  const std::size_t seg = network_->segment_index(x.segment_id);
  const double w = widths_[first_cell_[seg]];
  const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(x.offset / w)));
  return first_cell_[seg] + std::min(k, cell_count_[seg] - 1);
}

namespace {

OracleStep normalized(std::vector<double> mass) {
  OracleStep out;
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) {
    out.degenerate = true;
    out.posterior = std::move(mass);
    return out;
  }
  for (double& v : mass) v /= total;
  out.posterior = std::move(mass);
  return out;
}

}  // namespace

OracleStep exact_initial(const ObservationModel& obs_model, GpsPoint y0, const DiscreteStateSpace& space) {
  const ObservationProposal proposal(obs_model, space.network(), y0);
  std::vector<double> mass(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) mass[j] = proposal.density(space.cells()[j]) * space.width(j);
  return normalized(std::move(mass));
}

OracleStep exact_filter_step(std::span<const double> prior, const StepInput& input,
                             const ObservationModel& obs_model, const TransitionModel& trans_model,
                             const DiscreteStateSpace& space) {
  if (prior.size() != space.size()) throw std::invalid_argument("prior does not match the state space");
  const auto& cells = space.cells();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior[i] > 0.0) support.push_back(i);
  }
  std::vector<double> mass(space.size(), 0.0);
  for (std::size_t j = 0; j < space.size(); ++j) {
    const double likelihood = observation_density(obs_model, cells[j], input.y);
    if (!(likelihood > 0.0)) continue;
    double predicted = 0.0;
    for (const std::size_t i : support) {
      predicted += transition_density(trans_model, cells[i].point, cells[j].point, input.u) * prior[i];
    }
    mass[j] = likelihood * predicted * space.width(j);
  }
  return normalized(std::move(mass));
}

std::vector<double> bin_particles(const Belief& belief, const DiscreteStateSpace& space) {
  std::vector<double> binned(space.size(), 0.0);
  double total = 0.0;
  for (const auto& p : belief.particles) total += p.weight;
  if (!(total > 0.0)) return binned;
  for (const auto& p : belief.particles) binned[space.cell_of(p.state)] += p.weight / total;
  return binned;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in size");
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) sum += std::abs(p[j] - q[j]);
  return 0.5 * sum;
}

double tv_distance(const Belief& belief, std::span<const double> exact, const DiscreteStateSpace& space) {
  const auto binned = bin_particles(belief, space);
  if (std::all_of(binned.begin(), binned.end(), [](double v) { return v == 0.0; })) return 1.0;
  return tv_distance(binned, exact);
}

}  // namespace roadpf
