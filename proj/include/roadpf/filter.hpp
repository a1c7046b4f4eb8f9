#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roadpf/road_network.hpp"
#include "roadpf/sensor_models.hpp"
#include "roadpf/stats.hpp"

namespace roadpf {

struct Particle {
  NetworkPosition state;
  double weight = 0.0;
};

/// Weighted particle approximation of the filtering distribution at step t.
/// When `failed` is set the weights are the raw (unnormalised) ones.
struct Belief {
  std::vector<Particle> particles;
  std::size_t t = 0;
  bool failed = false;
  std::string failure_reason;

  std::size_t size() const { return particles.size(); }
  std::vector<double> weights() const;
};

/// One filter step: the new fix, the control since the previous fix, and
/// the elapsed time.
struct StepInput {
  GpsPoint y;
  double u = 0.0;
  double dt = 1.0;
};

enum class Method { standard, improved };
enum class ResamplingScheme { multinomial, systematic };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

/// Raw weights summing to at most this are treated as a lost track.
inline constexpr double kFailureEpsilon = 1e-300;

bool detect_failure(std::span<const double> raw_weights);

double effective_sample_size(const Belief& belief);

/// Ancestor indices drawn according to `weights` (need not be normalised).
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, Rng& rng,
                                          ResamplingScheme scheme = ResamplingScheme::multinomial);

/// m draws from the observation proposal around y0, each with weight 1/m.
Belief init_from_observation(const ObservationModel& model, const RoadNetwork& network, GpsPoint y0,
                             std::size_t m, Rng& rng);

/// Re-initialisation after a lost track; same contract as init_from_observation.
Belief recover(const ObservationModel& model, const RoadNetwork& network, GpsPoint y, std::size_t m,
               Rng& rng);

/// Conventional update: resample ancestors, propagate through the transition
/// kernel, weight by the observation likelihood.
///
/// The kernel N(|x - x'|; u, sigma_t) is sampled exactly on the network via
/// TransitionKernel. Its network mass c(x') varies with the ancestor, so the
/// weight is p(y|x) * c(x'), which keeps the target identical to the one the
/// improved update and the exact grid filter use.
Belief standard_update(const Belief& belief, const StepInput& input, const ObservationModel& obs_model,
                       const TransitionModel& trans_model, const RoadNetwork& network, Rng& rng,
                       ResamplingScheme scheme = ResamplingScheme::multinomial);

/// Improved update: sample around y_t from the observation proposal and
/// weight each draw by sum_i p(x_t | x_{t-1}^(i), u) w^(i), times the
/// correction p(y|x) / q(x) for the truncated proposal actually sampled.
/// The correction is the constant Z on the proposal support.
Belief improved_update(const Belief& belief, const StepInput& input, const ObservationModel& obs_model,
                       const TransitionModel& trans_model, const RoadNetwork& network, Rng& rng);

/// Per-interval filter inputs and the beliefs produced from them.
struct BeliefHistory {
  std::vector<Belief> beliefs;         // t = 0..T
  std::vector<double> times;           // seconds, one per belief
  std::vector<GpsPoint> observations;  // one per belief
  std::vector<double> controls;        // T entries, u_{t-1}
  std::set<std::size_t> failure_steps;

  std::size_t size() const { return beliefs.size(); }
};

struct TrackerOptions {
  Method method = Method::improved;
  std::size_t particles = 10;
  ObservationModel observation;
  TransitionModel transition;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
};

struct TimedFix {
  double t = 0.0;
  GpsPoint y;
};

/// Runs the chosen filter over a sequence of fixes. Controls are the
/// Cartesian distances between consecutive fixes. A failed step is recorded
/// in failure_steps and the filter recovers from that step's fix.
BeliefHistory run_tracker(const RoadNetwork& network, std::span<const TimedFix> fixes,
                          const TrackerOptions& options, Rng& rng);

}  // namespace roadpf
