#pragma once

#include <stdexcept>
#include <vector>

#include "roadpf/road_network.hpp"
#include "roadpf/stats.hpp"

namespace roadpf {

using GpsPoint = Point;

/// No road segment lies inside the proposal truncation disc.
class NoCandidateSegments : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Isotropic Gaussian GPS noise with standard deviation `sigma`. Proposals
/// are restricted to the disc of radius truncation_k * sigma around the fix.
struct ObservationModel {
  double sigma = 10.0;
  double truncation_k = 4.0;

  void validate() const;
  double truncation_radius() const { return truncation_k * sigma; }
};

/// Gaussian on Cartesian displacement with mean equal to the control and
/// standard deviation max(sigma_floor, alpha * u).
struct TransitionModel {
  double sigma_floor = 2.0;
  double alpha = 0.1;

  void validate() const;
  double sigma(double u) const;
};

struct ProposalDraw {
  NetworkPosition position;
  double proposal_density = 0.0;
};

/// p(y | x) as a two-dimensional isotropic Gaussian density (1/m^2).
double observation_density(const ObservationModel& model, const NetworkPosition& x, GpsPoint y);

/// Observation-centred proposal on the network: the observation likelihood
/// restricted to the part of the network inside the truncation disc and
/// normalised along the network.
///
/// Sampling is two-step. A segment is picked with probability proportional
/// to its Gaussian mass N(a|0,sigma) * [Phi(b_hi/sigma) - Phi(b_lo/sigma)],
/// where a is the perpendicular distance from the fix to the segment line and
/// [b_lo, b_hi] is the part of the segment inside the disc measured from the
/// foot of the perpendicular. The offset is then a normal draw truncated to
/// that interval. The resulting density is p(y|x) / Z with Z the summed mass.
class ObservationProposal {
 public:
  struct Component {
    std::size_t segment_index = 0;
    double foot = 0.0;  // offset of the foot of the perpendicular (may lie off the segment)
    double perp = 0.0;  // unsigned perpendicular distance
    double lo = 0.0;    // admissible offsets [lo, hi]
    double hi = 0.0;
    double mass = 0.0;
  };

  ObservationProposal(const ObservationModel& model, const RoadNetwork& network, GpsPoint y);

  bool empty() const { return normalizer_ <= 0.0; }
  /// Sum of component masses; equal to the integral of p(y|x) over the support.
  double normalizer() const { return normalizer_; }
  const std::vector<Component>& components() const { return components_; }
  GpsPoint observation() const { return y_; }

  /// Throws NoCandidateSegments when empty().
  ProposalDraw sample(Rng& rng) const;
  double density(const NetworkPosition& x) const;

 private:
  const RoadNetwork* network_;
  ObservationModel model_;
  GpsPoint y_;
  std::vector<Component> components_;
  std::vector<double> cumulative_;
  double normalizer_ = 0.0;
};

ProposalDraw sample_observation_proposal(const ObservationModel& model, const RoadNetwork& network,
                                         GpsPoint y, Rng& rng);

double proposal_density(const ObservationModel& model, const RoadNetwork& network, GpsPoint y,
                        const NetworkPosition& x);

/// N(|x_cur - x_prev| ; u, sigma_t(u)), in 1/m. Not normalised over the network.
double transition_density(const TransitionModel& model, const NetworkPosition& x_prev,
                          const NetworkPosition& x_cur, double u);

/// Same kernel evaluated on raw points, for hot loops.
double transition_density(const TransitionModel& model, Point prev, Point cur, double u);

/// Exact sampler for the transition kernel restricted to the network.
///
/// The kernel N(|x - from|; u, sigma_t) has a total network mass that
/// depends on `from` (how much road crosses the annulus). mass() returns
/// that integral and sample() draws x with density kernel / mass().
/// Support is truncated at `k_sigma` transition standard deviations.
class TransitionKernel {
 public:
  TransitionKernel(const TransitionModel& model, const RoadNetwork& network, Point from, double u,
                   double k_sigma = 8.0);

  double mass() const { return mass_; }
  bool empty() const { return !(mass_ > 0.0); }
  NetworkPosition sample(Rng& rng) const;

 private:
  struct Piece {
    std::size_t segment_index;
    double s0;
    double s1;
  };

  double value_at(const Segment& s, double offset) const;

  const RoadNetwork* network_;
  Point from_;
  double u_;
  double sigma_;
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_;
  double mass_ = 0.0;
};

}  // namespace roadpf
