#include "roadpf/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "roadpf/csv.hpp"

namespace roadpf {

namespace {

void check_span(const BeliefHistory& history, std::size_t first, std::size_t last) {
  if (history.beliefs.empty()) throw std::invalid_argument("empty belief history");
  if (first > last || last >= history.size()) throw std::out_of_range("trajectory span out of range");
  if (history.controls.size() + 1 != history.size() || history.times.size() != history.size()) {
    throw std::invalid_argument("belief history lengths are inconsistent");
  }
  for (std::size_t t = first; t <= last; ++t) {
    if (history.beliefs[t].failed) throw std::invalid_argument("trajectory span contains a failed belief");
    if (history.beliefs[t].particles.empty()) throw std::invalid_argument("trajectory span has an empty belief");
    if (t > first && history.failure_steps.contains(t)) {
      throw std::invalid_argument("trajectory span crosses a recovery");
    }
  }
}

Trajectory assemble(const BeliefHistory& history, std::size_t first, std::vector<std::size_t> index,
                    std::vector<double> scores) {
  Trajectory path;
  path.first_step = first;
  path.particle_index = std::move(index);
  path.score_trace = std::move(scores);
  for (std::size_t k = 0; k < path.particle_index.size(); ++k) {
    path.states.push_back(history.beliefs[first + k].particles[path.particle_index[k]].state);
    path.times.push_back(history.times[first + k]);
  }
  return path;
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

}  // namespace

Trajectory extract_path(const BeliefHistory& history, const TransitionModel& trans_model, std::size_t first,
                        std::size_t last) {
  check_span(history, first, last);
  const std::size_t steps = last - first + 1;
  std::vector<std::size_t> index(steps);
  std::vector<double> scores(steps);

  const auto& final_particles = history.beliefs[last].particles;
  std::size_t best = 0;
  for (std::size_t i = 1; i < final_particles.size(); ++i) {
    if (final_particles[i].weight > final_particles[best].weight) best = i;
  }
  index[steps - 1] = best;
  scores[steps - 1] = final_particles[best].weight;

  for (std::size_t t = last; t > first; --t) {
    const NetworkPosition& chosen = history.beliefs[t].particles[index[t - first]].state;
    const double u = history.controls[t - 1];
    const auto& candidates = history.beliefs[t - 1].particles;
    std::size_t arg = 0;
    double top = -1.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const double score = transition_density(trans_model, candidates[j].state, chosen, u) * candidates[j].weight;
      if (score > top) {
        top = score;
        arg = j;
      }
    }
    index[t - 1 - first] = arg;
    scores[t - 1 - first] = top;
  }
  return assemble(history, first, std::move(index), std::move(scores));
}

Trajectory extract_path(const BeliefHistory& history, const TransitionModel& trans_model) {
  if (history.beliefs.empty()) throw std::invalid_argument("empty belief history");
  return extract_path(history, trans_model, 0, history.size() - 1);
}

Trajectory extract_path_viterbi(const BeliefHistory& history, const TransitionModel& trans_model,
                                const ObservationModel& obs_model, std::size_t first, std::size_t last) {
  check_span(history, first, last);
  const std::size_t steps = last - first + 1;
  std::vector<std::vector<double>> delta(steps);
  std::vector<std::vector<std::size_t>> back(steps);

  const auto& p0 = history.beliefs[first].particles;
  for (const auto& p : p0) delta[0].push_back(safe_log(observation_density(obs_model, p.state, history.observations[first])));

  for (std::size_t k = 1; k < steps; ++k) {
    const std::size_t t = first + k;
    const auto& prev = history.beliefs[t - 1].particles;
    const auto& cur = history.beliefs[t].particles;
    const double u = history.controls[t - 1];
    delta[k].resize(cur.size());
    back[k].resize(cur.size());
    for (std::size_t j = 0; j < cur.size(); ++j) {
      double top = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        const double s = delta[k - 1][i] + safe_log(transition_density(trans_model, prev[i].state, cur[j].state, u));
        if (s > top) {
          top = s;
          arg = i;
        }
      }
      delta[k][j] = top + safe_log(observation_density(obs_model, cur[j].state, history.observations[t]));
      back[k][j] = arg;
    }
  }

  std::vector<std::size_t> index(steps);
  std::size_t best = 0;
  for (std::size_t j = 1; j < delta[steps - 1].size(); ++j) {
    if (delta[steps - 1][j] > delta[steps - 1][best]) best = j;
  }
  index[steps - 1] = best;
  for (std::size_t k = steps - 1; k > 0; --k) index[k - 1] = back[k][index[k]];
  std::vector<double> scores(steps);
  for (std::size_t k = 0; k < steps; ++k) scores[k] = delta[k][index[k]];
  return assemble(history, first, std::move(index), std::move(scores));
}

Trajectory extract_path_viterbi(const BeliefHistory& history, const TransitionModel& trans_model,
                                const ObservationModel& obs_model) {
  if (history.beliefs.empty()) throw std::invalid_argument("empty belief history");
  return extract_path_viterbi(history, trans_model, obs_model, 0, history.size() - 1);
}

double sequence_log_score(const BeliefHistory& history, const TransitionModel& trans_model,
                          const ObservationModel& obs_model, std::size_t first,
                          std::span<const std::size_t> particle_index) {
  double score = 0.0;
  for (std::size_t k = 0; k < particle_index.size(); ++k) {
    const std::size_t t = first + k;
    const auto& x = history.beliefs[t].particles[particle_index[k]].state;
    score += safe_log(observation_density(obs_model, x, history.observations[t]));
    if (k > 0) {
      const auto& prev = history.beliefs[t - 1].particles[particle_index[k - 1]].state;
      score += safe_log(transition_density(trans_model, prev, x, history.controls[t - 1]));
    }
  }
  return score;
}

std::vector<std::pair<std::size_t, std::size_t>> fragment_spans(const BeliefHistory& history) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  bool open = false;
  std::size_t start = 0;
  for (std::size_t t = 0; t < history.size(); ++t) {
    const bool usable = !history.beliefs[t].failed;
    const bool breaks = history.failure_steps.contains(t);
    if (open && (!usable || breaks)) {
      spans.emplace_back(start, t - 1);
      open = false;
    }
    if (usable && !open) {
      start = t;
      open = true;
    }
  }
  if (open) spans.emplace_back(start, history.size() - 1);
  return spans;
}

std::vector<Trajectory> extract_fragments(const BeliefHistory& history, const TransitionModel& trans_model) {
  std::vector<Trajectory> out;
  for (const auto& [first, last] : fragment_spans(history)) out.push_back(extract_path(history, trans_model, first, last));
  return out;
}

void write_trajectory_csv(std::span<const Trajectory> fragments, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string());
  out << "t,segment_id,offset_m,e,n\n";
  for (const auto& path_fragment : fragments) {
    for (std::size_t k = 0; k < path_fragment.size(); ++k) {
      const auto& s = path_fragment.states[k];
      out << format_fixed(path_fragment.times[k], 3) << ',' << s.segment_id << ',' << format_fixed(s.offset, 9)
          << ',' << format_fixed(s.point.e, 9) << ',' << format_fixed(s.point.n, 9) << '\n';
    }
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require_header(table, {"t", "segment_id", "offset_m", "e", "n"}, path);
  std::vector<TrajectoryRow> rows;
  for (const auto& r : table.rows) {
    rows.push_back({parse_double(r[0]), static_cast<int>(parse_int(r[1])), parse_double(r[2]),
                    {parse_double(r[3]), parse_double(r[4])}});
  }
  return rows;
}

}  // namespace roadpf
