#include "roadpf/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include "roadpf/csv.hpp"

namespace roadpf {

HoldoutSplit holdout_split(const GpsTrace& trace, std::size_t every) {
  if (trace.records.empty()) throw std::invalid_argument("cannot split an empty trace");
  if (every < 2) throw std::invalid_argument("holdout stride must be at least 2");
  HoldoutSplit split;
  split.kept.interval = trace.interval;
  split.kept.sigma = trace.sigma;
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    if ((k + 1) % every == 0) {
      split.removed.push_back(trace.records[k]);
      split.removed_indices.push_back(k);
    } else {
      split.kept.records.push_back(trace.records[k]);
    }
  }
  return split;
}

double distance_to_polyline(Point p, std::span<const Point> polyline) {
  if (polyline.empty()) throw std::invalid_argument("distance to an empty polyline");
  if (polyline.size() == 1) return distance(p, polyline.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < polyline.size(); ++k) {
    best = std::min(best, point_segment_distance(p, polyline[k - 1], polyline[k]));
  }
  return best;
}

std::vector<double> prediction_error(std::span<const Point> removed, std::span<const NetworkPosition> states) {
  if (states.empty()) throw std::invalid_argument("prediction error against an empty trajectory");
  std::vector<Point> line;
  line.reserve(states.size());
  for (const auto& s : states) line.push_back(s.point);
  std::vector<double> out;
  out.reserve(removed.size());
  for (const Point p : removed) out.push_back(distance_to_polyline(p, line));
  return out;
}

PredictionErrors prediction_error(std::span<const TimedFix> removed, std::span<const Trajectory> fragments) {
  PredictionErrors out;
  for (const auto& fix : removed) {
    const Trajectory* cover = nullptr;
    for (const auto& f : fragments) {
      if (!f.times.empty() && f.times.front() <= fix.t && fix.t <= f.times.back()) {
        cover = &f;
        break;
      }
    }
    if (cover == nullptr) {
      ++out.unscored;
      continue;
    }
    std::vector<Point> line;
    line.reserve(cover->states.size());
    for (const auto& state : cover->states) line.push_back(state.point);
    out.errors.push_back(distance_to_polyline(fix.y, line));
  }
  return out;
}

ObservationModel ExperimentConfig::observation_model() const {
  const double sigma = filter_sigma_m > 0.0 ? filter_sigma_m : sigma_m;
  return {std::max(sigma, min_filter_sigma_m), truncation_k};
}

TrackerOptions ExperimentConfig::tracker_options() const {
  TrackerOptions options;
  options.method = method;
  options.particles = m;
  options.observation = observation_model();
  options.transition = transition;
  options.resampling = resampling;
  return options;
}

CrossValidation cross_validate(const RoadNetwork& network, const GpsTrace& trace, const TrackerOptions& options,
                               Rng& rng) {
  CrossValidation cv;
  cv.split = holdout_split(trace);
  cv.history = run_tracker(network, cv.split.kept.records, options, rng);
  cv.fragments = extract_fragments(cv.history, options.transition);
  cv.errors = prediction_error(cv.split.removed, cv.fragments);
  return cv;
}

void fill_metrics(MetricsRecord& record, const CrossValidation& cv) {
  record.steps = cv.history.size() - 1;
  record.failures = cv.history.failure_steps.size();
  record.failure_rate =
      record.steps == 0 ? 0.0 : static_cast<double>(record.failures) / static_cast<double>(record.steps);
  record.unscored = cv.errors.unscored;
  record.scored = cv.errors.errors.size();
  if (cv.errors.errors.empty()) {
    record.p25 = record.p50 = record.p75 = std::nan("");
    record.err = "no scored held-out fixes";
    return;
  }
  record.p25 = percentile(cv.errors.errors, 0.25);
  record.p50 = percentile(cv.errors.errors, 0.50);
  record.p75 = percentile(cv.errors.errors, 0.75);
}

MetricsRecord run_experiment(const ExperimentConfig& config) {
  MetricsRecord record;
  record.config_id = config.config_id;
  record.method = config.method;
  record.m = config.m;
  record.interval_s = config.interval_s;
  record.sigma_m = config.sigma_m;
  record.seed = config.seed;

  std::shared_ptr<const RoadNetwork> network = config.network;
  if (!network) network = std::make_shared<const RoadNetwork>(make_grid_network(config.grid_n, config.spacing_m));

  Rng sim_rng = make_rng({config.seed, 0x5157u, static_cast<std::uint64_t>(config.duration_s),
                          static_cast<std::uint64_t>(config.interval_s), std::bit_cast<std::uint64_t>(config.sigma_m),
                          static_cast<std::uint64_t>(config.grid_n), std::bit_cast<std::uint64_t>(config.spacing_m)});
  Rng filter_rng = make_rng({config.seed, 0xF17Eu, static_cast<std::uint64_t>(config.method), config.m,
                             static_cast<std::uint64_t>(config.interval_s),
                             std::bit_cast<std::uint64_t>(config.sigma_m)});

  const TruePath path = generate_route(*network, config.duration_s, config.speed, sim_rng);
  const GpsTrace trace = observe(path, config.interval_s, config.sigma_m, sim_rng);
  const CrossValidation cv = cross_validate(*network, trace, config.tracker_options(), filter_rng);
  fill_metrics(record, cv);
  return record;
}

std::vector<MetricsRecord> sweep(std::span<const ExperimentConfig> configs, std::span<const std::uint64_t> seeds,
                                 unsigned jobs) {
  if (configs.empty()) throw std::invalid_argument("sweep needs at least one config");
  const std::size_t total = configs.size() * seeds.size();
  std::vector<MetricsRecord> rows(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      ExperimentConfig config = configs[k / seeds.size()];
      config.seed = seeds[k % seeds.size()];
      try {
        rows[k] = run_experiment(config);
      } catch (const std::exception& e) {
        MetricsRecord& r = rows[k];
        r.config_id = config.config_id;
        r.method = config.method;
        r.m = config.m;
        r.interval_s = config.interval_s;
        r.sigma_m = config.sigma_m;
        r.seed = config.seed;
        r.p25 = r.p50 = r.p75 = r.failure_rate = std::nan("");
        r.err = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  return rows;
}

std::vector<ConfigSummary> summarize(std::span<const MetricsRecord> records) {
  std::vector<ConfigSummary> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    auto [it, fresh] = slot.emplace(r.config_id, out.size());
    if (fresh) {
      ConfigSummary s;
      s.config_id = r.config_id;
      s.method = r.method;
      s.m = r.m;
      s.interval_s = r.interval_s;
      s.sigma_m = r.sigma_m;
      out.push_back(s);
    }
    ConfigSummary& s = out[it->second];
    s.mean_p25 += r.p25;
    s.mean_p50 += r.p50;
    s.mean_p75 += r.p75;
    s.mean_failure_rate += r.failure_rate;
    ++s.rows;
  }
  for (auto& s : out) {
    const double n = static_cast<double>(s.rows);
    s.mean_p25 /= n;
    s.mean_p50 /= n;
    s.mean_p75 /= n;
    s.mean_failure_rate /= n;
  }
  return out;
}

std::string results_csv_header() {
  return "config_id,method,m,interval_s,sigma_m,seed,p25_m,p50_m,p75_m,failure_rate,unscored,err";
}

std::string results_csv_row(const MetricsRecord& r) {
  std::string err = r.err;
  std::replace(err.begin(), err.end(), ',', ';');
  std::replace(err.begin(), err.end(), '\n', ' ');
  return r.config_id + ',' + std::string(to_string(r.method)) + ',' + std::to_string(r.m) + ',' +
         std::to_string(r.interval_s) + ',' + format_fixed(r.sigma_m, 3) + ',' + std::to_string(r.seed) + ',' +
         format_fixed(r.p25, 6) + ',' + format_fixed(r.p50, 6) + ',' + format_fixed(r.p75, 6) + ',' +
         format_fixed(r.failure_rate, 6) + ',' + std::to_string(r.unscored) + ',' + err;
}

void write_results_csv(std::span<const MetricsRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string());
  out << results_csv_header() << '\n';
  for (const auto& r : records) out << results_csv_row(r) << '\n';
}

std::vector<MetricsRecord> read_results_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require_header(table,
                 {"config_id", "method", "m", "interval_s", "sigma_m", "seed", "p25_m", "p50_m", "p75_m",
                  "failure_rate", "unscored", "err"},
                 path);
  std::vector<MetricsRecord> out;
  for (const auto& row : table.rows) {
    MetricsRecord r;
    r.config_id = row[0];
    r.method = parse_method(row[1]);
    r.m = static_cast<std::size_t>(parse_int(row[2]));
    r.interval_s = static_cast<int>(parse_int(row[3]));
    r.sigma_m = parse_double(row[4]);
    r.seed = static_cast<std::uint64_t>(parse_int(row[5]));
    r.p25 = parse_double(row[6]);
    r.p50 = parse_double(row[7]);
    r.p75 = parse_double(row[8]);
    r.failure_rate = parse_double(row[9]);
    r.unscored = static_cast<std::size_t>(parse_int(row[10]));
    r.err = row[11];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace roadpf
