#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "roadpf/filter.hpp"
#include "roadpf/simulator.hpp"
#include "roadpf/trajectory.hpp"

namespace roadpf {

/// A trace with every 10th record (1-based positions 10, 20, ...) held out.
struct HoldoutSplit {
  GpsTrace kept;
  std::vector<TimedFix> removed;
  std::vector<std::size_t> removed_indices;  // 0-based positions in the original trace
};

HoldoutSplit holdout_split(const GpsTrace& trace, std::size_t every = 10);

double distance_to_polyline(Point p, std::span<const Point> polyline);

/// Minimum distance from each point to the polyline through `states`.
std::vector<double> prediction_error(std::span<const Point> removed, std::span<const NetworkPosition> states);

struct PredictionErrors {
  std::vector<double> errors;
  std::size_t unscored = 0;
};

/// Scores held-out fixes against inferred path fragments. Each fix is
/// measured against the polyline through the states of the fragment whose
/// time span covers it. Fixes outside every fragment's time span (lost-track
/// gaps, or past the final kept fix) are counted as unscored.
PredictionErrors prediction_error(std::span<const TimedFix> removed, std::span<const Trajectory> fragments);

struct ExperimentConfig {
  std::string config_id = "default";
  Method method = Method::improved;
  std::size_t m = 10;
  int interval_s = 10;
  double sigma_m = 10.0;
  std::uint64_t seed = 1;

  int grid_n = 10;
  double spacing_m = 100.0;
  int duration_s = 3600;
  SpeedParams speed;
  double truncation_k = 4.0;
  TransitionModel transition;
  /// Filter-side GPS sigma; <= 0 means "use sigma_m", floored at min_filter_sigma.
  double filter_sigma_m = 0.0;
  double min_filter_sigma_m = 1.0;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  /// Optional fixed network; a grid_n x grid_n grid is built when null.
  std::shared_ptr<const RoadNetwork> network;

  ObservationModel observation_model() const;
  TrackerOptions tracker_options() const;
};

struct MetricsRecord {
  std::string config_id;
  Method method = Method::improved;
  std::size_t m = 0;
  int interval_s = 0;
  double sigma_m = 0.0;
  std::uint64_t seed = 0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double failure_rate = 0.0;
  std::size_t unscored = 0;
  std::size_t scored = 0;
  std::size_t steps = 0;
  std::size_t failures = 0;
  std::string err;

  bool ok() const { return err.empty(); }
};

struct CrossValidation {
  HoldoutSplit split;
  BeliefHistory history;
  std::vector<Trajectory> fragments;
  PredictionErrors errors;
};

/// Hold out, track the kept fixes, extract paths, score the held-out fixes.
CrossValidation cross_validate(const RoadNetwork& network, const GpsTrace& trace, const TrackerOptions& options,
                               Rng& rng);

/// Fills percentiles and failure statistics from a cross-validation run.
void fill_metrics(MetricsRecord& record, const CrossValidation& cv);

/// Simulate, hold out, track, extract, score. Deterministic given the config.
/// The simulated trace depends only on the scenario (network, duration,
/// interval, sigma, speed, seed), so both methods see the same data.
MetricsRecord run_experiment(const ExperimentConfig& config);

/// Every config crossed with every seed; rows come back in config-major
/// order whatever order they finish in. Failures are recorded in `err`.
std::vector<MetricsRecord> sweep(std::span<const ExperimentConfig> configs, std::span<const std::uint64_t> seeds,
                                 unsigned jobs = 1);

/// Mean of each metric over seeds for rows sharing a config_id.
struct ConfigSummary {
  std::string config_id;
  Method method = Method::improved;
  std::size_t m = 0;
  int interval_s = 0;
  double sigma_m = 0.0;
  double mean_p25 = 0.0;
  double mean_p50 = 0.0;
  double mean_p75 = 0.0;
  double mean_failure_rate = 0.0;
  std::size_t rows = 0;
};
std::vector<ConfigSummary> summarize(std::span<const MetricsRecord> records);

std::string results_csv_header();
std::string results_csv_row(const MetricsRecord& record);
void write_results_csv(std::span<const MetricsRecord> records, const std::filesystem::path& path);
std::vector<MetricsRecord> read_results_csv(const std::filesystem::path& path);

}  // namespace roadpf
