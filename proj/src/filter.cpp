#include "roadpf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace roadpf {

namespace {

void require_live(const Belief& belief) {
  if (belief.failed) throw std::logic_error("cannot update a failed belief; recover first");
  if (belief.particles.empty()) throw std::logic_error("cannot update an empty belief");
}

// Normalises in place, or flags failure and leaves the raw weights.
void finalize(Belief& out, const std::vector<double>& raw) {
  if (detect_failure(raw)) {
    out.failed = true;
    out.failure_reason = "particle weights sum to zero";
    for (std::size_t j = 0; j < raw.size(); ++j) out.particles[j].weight = raw[j];
    return;
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (std::size_t j = 0; j < raw.size(); ++j) out.particles[j].weight = raw[j] / total;
}

}  // namespace

std::vector<double> Belief::weights() const {
  std::vector<double> w;
  w.reserve(particles.size());
  for (const auto& p : particles) w.push_back(p.weight);
  return w;
}

std::string_view to_string(Method method) {
  return method == Method::standard ? "standard" : "improved";
}

Method parse_method(std::string_view text) {
  if (text == "standard") return Method::standard;
  if (text == "improved") return Method::improved;
  throw std::invalid_argument("unknown method '" + std::string(text) + "' (expected standard|improved)");
}

bool detect_failure(std::span<const double> raw_weights) {
  double total = 0.0;
  for (const double w : raw_weights) total += w;
  return !(total > kFailureEpsilon);
}

double effective_sample_size(const Belief& belief) {
  if (belief.failed) throw std::logic_error("effective sample size of a failed belief");
  double sum_sq = 0.0;
  for (const auto& p : belief.particles) sum_sq += p.weight * p.weight;
  return 1.0 / sum_sq;
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, Rng& rng,
                                          ResamplingScheme scheme) {
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  const double total = cumulative.empty() ? 0.0 : cumulative.back();
  if (!(total > 0.0)) throw std::invalid_argument("resampling requires a positive total weight");
  std::vector<std::size_t> out;
  out.reserve(count);
  auto locate = [&](double target) {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    // Skip trailing zero-weight entries that share the final cumulative value.
    while (weights[static_cast<std::size_t>(it - cumulative.begin())] <= 0.0 && it != cumulative.begin()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
  };
  if (scheme == ResamplingScheme::multinomial) {
    for (std::size_t k = 0; k < count; ++k) out.push_back(locate(uniform01(rng) * total));
  } else {
    const double step = total / static_cast<double>(count);
    const double start = uniform01(rng) * step;
    for (std::size_t k = 0; k < count; ++k) out.push_back(locate(start + step * static_cast<double>(k)));
  }
  return out;
}

Belief init_from_observation(const ObservationModel& model, const RoadNetwork& network, GpsPoint y0,
                             std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("particle count must be at least 1");
  const ObservationProposal proposal(model, network, y0);
  Belief belief;
  belief.particles.reserve(m);
  const double w = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) belief.particles.push_back({proposal.sample(rng).position, w});
  return belief;
}

Belief recover(const ObservationModel& model, const RoadNetwork& network, GpsPoint y, std::size_t m,
               Rng& rng) {
  return init_from_observation(model, network, y, m, rng);
}

Belief standard_update(const Belief& belief, const StepInput& input, const ObservationModel& obs_model,
                       const TransitionModel& trans_model, const RoadNetwork& network, Rng& rng,
                       ResamplingScheme scheme) {
  require_live(belief);
  const std::size_t m = belief.size();
  const auto prior = belief.weights();
  const auto ancestors = resample_indices(prior, m, rng, scheme);

  // Many particles share an ancestor after resampling; build each kernel once.
  std::vector<std::optional<TransitionKernel>> kernels(m);
  Belief out;
  out.t = belief.t + 1;
  out.particles.resize(m);
  std::vector<double> raw(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t a = ancestors[j];
    if (!kernels[a]) kernels[a].emplace(trans_model, network, belief.particles[a].state.point, input.u);
    const TransitionKernel& kernel = *kernels[a];
    if (kernel.empty()) {
      out.particles[j].state = belief.particles[a].state;
      continue;
    }
    out.particles[j].state = kernel.sample(rng);
    raw[j] = observation_density(obs_model, out.particles[j].state, input.y) * kernel.mass();
  }
  finalize(out, raw);
  return out;
}

Belief improved_update(const Belief& belief, const StepInput& input, const ObservationModel& obs_model,
                       const TransitionModel& trans_model, const RoadNetwork& network, Rng& rng) {
  require_live(belief);
  const std::size_t m = belief.size();
  Belief out;
  out.t = belief.t + 1;

  const ObservationProposal proposal(obs_model, network, input.y);
  if (proposal.empty()) {
    out.particles = belief.particles;
    for (auto& p : out.particles) p.weight = 0.0;
    out.failed = true;
    out.failure_reason = "no candidate segments near the observation";
    return out;
  }

  // Flattened previous cloud; zero-weight particles cannot contribute.
  std::vector<double> prev_e, prev_n, prev_w;
  prev_e.reserve(m);
  prev_n.reserve(m);
  prev_w.reserve(m);
  for (const auto& p : belief.particles) {
    if (!(p.weight > 0.0)) continue;
    prev_e.push_back(p.state.point.e);
    prev_n.push_back(p.state.point.n);
    prev_w.push_back(p.weight);
  }
  const double sigma_t = trans_model.sigma(input.u);
  const double inv_sigma = 1.0 / sigma_t;
  const double norm_const = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma_t);
  const std::size_t live = prev_w.size();

  out.particles.resize(m);
  std::vector<double> raw(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const ProposalDraw draw = proposal.sample(rng);
    out.particles[j].state = draw.position;
    const double e = draw.position.point.e;
    const double n = draw.position.point.n;
    double sum = 0.0;
    for (std::size_t i = 0; i < live; ++i) {
      const double de = e - prev_e[i];
      const double dn = n - prev_n[i];
      const double z = (std::sqrt(de * de + dn * dn) - input.u) * inv_sigma;
      const double z2 = z * z;
      if (z2 <= 1500.0) sum += prev_w[i] * std::exp(-0.5 * z2);
    }
    const double correction = observation_density(obs_model, draw.position, input.y) / draw.proposal_density;
    raw[j] = sum * norm_const * correction;
  }
  finalize(out, raw);
  return out;
}

BeliefHistory run_tracker(const RoadNetwork& network, std::span<const TimedFix> fixes,
                          const TrackerOptions& options, Rng& rng) {
  options.observation.validate();
  options.transition.validate();
  if (fixes.empty()) throw std::invalid_argument("tracker needs at least one fix");
  const std::size_t m = options.particles;

  BeliefHistory history;
  history.beliefs.push_back(init_from_observation(options.observation, network, fixes[0].y, m, rng));
  history.times.push_back(fixes[0].t);
  history.observations.push_back(fixes[0].y);

  for (std::size_t k = 1; k < fixes.size(); ++k) {
    const StepInput input{fixes[k].y, distance(fixes[k].y, fixes[k - 1].y), fixes[k].t - fixes[k - 1].t};
    const Belief& prev = history.beliefs.back();
    Belief next;
    if (prev.failed) {
      next.failed = true;
    } else if (options.method == Method::standard) {
      next = standard_update(prev, input, options.observation, options.transition, network, rng,
                             options.resampling);
    } else {
      next = improved_update(prev, input, options.observation, options.transition, network, rng);
    }
    if (next.failed) {
      history.failure_steps.insert(k);
      Belief failed = std::move(next);
      try {
        next = recover(options.observation, network, input.y, m, rng);
      } catch (const NoCandidateSegments& e) {
        next = std::move(failed);
        if (next.particles.empty()) next.particles = prev.particles;
        next.failed = true;
        next.failure_reason = e.what();
      }
    }
    next.t = k;
    history.beliefs.push_back(std::move(next));
    history.times.push_back(fixes[k].t);
    history.observations.push_back(fixes[k].y);
    history.controls.push_back(input.u);
  }
  return history;
}

}  // namespace roadpf
