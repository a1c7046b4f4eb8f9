#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "roadpf/filter.hpp"

namespace roadpf {

/// One contiguous path through the particle sets of a belief history.
struct Trajectory {
  std::size_t first_step = 0;               // index into the history of states[0]
  std::vector<double> times;                // seconds, one per state
  std::vector<NetworkPosition> states;
  std::vector<std::size_t> particle_index;  // chosen particle per step
  std::vector<double> score_trace;          // chaining score per step

  std::size_t size() const { return states.size(); }
};

/// Backward dynamic-programming routine: take the highest-weight particle at
/// the last step, then repeatedly pick the predecessor maximising
/// p(x_t | x_{t-1}, u_{t-1}) * w_{t-1}. Ties go to the lowest particle index.
///
/// Operates on steps [first, last] of the history, which must not contain a
/// failed belief or a recovery after `first`.
Trajectory extract_path(const BeliefHistory& history, const TransitionModel& trans_model, std::size_t first,
                        std::size_t last);
Trajectory extract_path(const BeliefHistory& history, const TransitionModel& trans_model);

/// Max-product alternative: maximises prod_t p(x_t | x_{t-1}, u) * p(y_t | x_t)
/// over all particle sequences by forward recursion and backtracking.
/// score_trace holds the running log score along the chosen path.
Trajectory extract_path_viterbi(const BeliefHistory& history, const TransitionModel& trans_model,
                                const ObservationModel& obs_model, std::size_t first, std::size_t last);
Trajectory extract_path_viterbi(const BeliefHistory& history, const TransitionModel& trans_model,
                                const ObservationModel& obs_model);

/// Log of the max-product objective for a given particle-index sequence.
double sequence_log_score(const BeliefHistory& history, const TransitionModel& trans_model,
                          const ObservationModel& obs_model, std::size_t first,
                          std::span<const std::size_t> particle_index);

/// Inclusive [first, last] step ranges of contiguous non-failed spans.
std::vector<std::pair<std::size_t, std::size_t>> fragment_spans(const BeliefHistory& history);

/// Greedy backward paths per fragment.
std::vector<Trajectory> extract_fragments(const BeliefHistory& history, const TransitionModel& trans_model);

/// CSV with header `t,segment_id,offset_m,e,n`; fragments are concatenated.
struct TrajectoryRow {
  double t = 0.0;
  int segment_id = 0;
  double offset = 0.0;
  Point point;
};

void write_trajectory_csv(std::span<const Trajectory> fragments, const std::filesystem::path& path);
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace roadpf
