#include "roadpf/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "roadpf/csv.hpp"
#include "roadpf/evaluation.hpp"
#include "roadpf/filter.hpp"
#include "roadpf/road_network.hpp"
#include "roadpf/simulator.hpp"
#include "roadpf/svg_plot.hpp"
#include "roadpf/trajectory.hpp"

namespace roadpf {

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

/// Invalid parameter combination detected after parsing.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FilterFlags {
  std::string method = "improved";
  std::size_t m = 10;
  double sigma_obs = 10.0;
  double sigma_floor = 2.0;
  double alpha = 0.1;
  double truncation_k = 4.0;
  std::string resampling = "multinomial";
  std::uint64_t seed = 1;

  TrackerOptions options() const {
    TrackerOptions o;
    try {
      o.method = parse_method(method);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    o.particles = m;
    o.observation = {sigma_obs, truncation_k};
    o.transition = {sigma_floor, alpha};
    o.resampling = resampling == "systematic" ? ResamplingScheme::systematic : ResamplingScheme::multinomial;
    try {
      o.observation.validate();
      o.transition.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return o;
  }
};

void add_filter_flags(CLI::App* cmd, FilterFlags& f) {
  cmd->add_option("--method", f.method, "Tracking method")->check(CLI::IsMember({"standard", "improved"}));
  cmd->add_option("--m", f.m, "Number of particles")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  cmd->add_option("--sigma-obs", f.sigma_obs, "GPS noise std. dev. assumed by the filter (m)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sigma-floor", f.sigma_floor, "Minimum transition noise std. dev. (m)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", f.alpha, "Transition noise per meter of control")->check(CLI::NonNegativeNumber);
  cmd->add_option("--truncation-k", f.truncation_k, "Proposal truncation radius in sigma units")
      ->check(CLI::Range(3.0, 1e6));
  cmd->add_option("--resampling", f.resampling, "Resampling scheme for the standard filter")
      ->check(CLI::IsMember({"multinomial", "systematic"}));
  cmd->add_option("--seed", f.seed, "Random seed");
}

std::vector<TimedFix> fixes_of(const GpsTrace& trace) { return trace.records; }

void write_diagnostics_csv(const BeliefHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string());
  out << "t,ess,max_weight,failed\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    const Belief& b = history.beliefs[k];
    double max_w = 0.0;
    for (const auto& p : b.particles) max_w = std::max(max_w, p.weight);
    const double ess = b.failed ? 0.0 : effective_sample_size(b);
    const bool failed = b.failed || history.failure_steps.contains(k);
    out << format_fixed(history.times[k], 3) << ',' << format_fixed(ess, 6) << ',' << format_fixed(max_w, 6) << ','
        << (failed ? 1 : 0) << '\n';
  }
}

std::string config_id_of(const ExperimentConfig& c) {
  std::ostringstream id;
  id << to_string(c.method) << "_m" << c.m << "_i" << c.interval_s << "_s" << format_fixed(c.sigma_m, 0);
  return id.str();
}

void write_sweep_plots(std::span<const MetricsRecord> rows, const std::filesystem::path& dir) {
  const auto summary = summarize(rows);
  if (summary.empty()) return;
  std::set<int> intervals;
  std::set<double> sigmas;
  std::set<std::size_t> ms;
  for (const auto& s : summary) {
    intervals.insert(s.interval_s);
    sigmas.insert(s.sigma_m);
    ms.insert(s.m);
  }
  // Sweep axis: the first of interval, sigma, m that takes several values.
  enum class Axis { interval, sigma, m } axis = Axis::interval;
  std::string axis_label = "sampling interval (s)";
  if (intervals.size() <= 1 && sigmas.size() > 1) {
    axis = Axis::sigma;
    axis_label = "sensor noise sigma (m)";
  } else if (intervals.size() <= 1 && sigmas.size() <= 1 && ms.size() > 1) {
    axis = Axis::m;
    axis_label = "particles m";
  }
  auto x_of = [&](const ConfigSummary& s) {
    switch (axis) {
      case Axis::sigma: return s.sigma_m;
      case Axis::m: return static_cast<double>(s.m);
      default: return static_cast<double>(s.interval_s);
    }
  };
  auto series_of = [&](const ConfigSummary& s) {
    std::string name(to_string(s.method));
    if (axis != Axis::m && ms.size() > 1) name += " m=" + std::to_string(s.m);
    if (axis != Axis::interval && intervals.size() > 1) name += " " + std::to_string(s.interval_s) + "s";
    if (axis != Axis::sigma && sigmas.size() > 1) name += " sigma=" + format_fixed(s.sigma_m, 0);
    return name;
  };
  std::map<std::string, PlotSeries> p50, failure;
  for (const auto& s : summary) {
    const std::string name = series_of(s);
    p50[name].name = name;
    p50[name].points.emplace_back(x_of(s), s.mean_p50);
    failure[name].name = name;
    failure[name].points.emplace_back(x_of(s), s.mean_failure_rate);
  }
  auto flatten = [](std::map<std::string, PlotSeries>& m) {
    std::vector<PlotSeries> out;
    for (auto& [_, s] : m) {
      std::sort(s.points.begin(), s.points.end());
      out.push_back(s);
    }
    return out;
  };
  std::filesystem::create_directories(dir);
  const auto p50_series = flatten(p50);
  const auto failure_series = flatten(failure);
  std::ofstream(dir / "p50.svg") << line_chart_svg("Median prediction error", axis_label, "p50 error (m)", p50_series);
  std::ofstream(dir / "failure_rate.svg")
      << line_chart_svg("Lost-track rate", axis_label, "failure rate", failure_series);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle tracking on road networks with observation-centred particle filters"};
  app.name("roadpf");
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read key = value options from a file (flags override it)");
  app.allow_config_extras(false);
  app.require_subcommand(1);

  // gen-network
  int grid_n = 10;
  double spacing = 100.0;
  std::string network_out = "network.json";
  auto* gen = app.add_subcommand("gen-network", "Write an n x n grid road network as JSON");
  gen->add_option("--grid", grid_n, "Nodes per side")->check(CLI::Range(2, 100000));
  gen->add_option("--spacing", spacing, "Node spacing (m)")->check(CLI::PositiveNumber);
  gen->add_option("--out", network_out, "Output network JSON");

  // simulate
  std::string network_path = "network.json";
  int duration = 3600;
  int interval = 10;
  double sigma = 10.0;
  std::uint64_t sim_seed = 1;
  SpeedParams speed;
  std::string truth_out = "truth.csv";
  std::string trace_out = "trace.csv";
  auto* sim = app.add_subcommand("simulate", "Simulate a ground-truth route and a noisy GPS trace");
  sim->add_option("--network", network_path, "Network JSON");
  sim->add_option("--duration", duration, "Route length (s)")->check(CLI::Range(1, 100000000));
  sim->add_option("--interval", interval, "GPS sampling interval (s)")->check(CLI::Range(1, 100000000));
  sim->add_option("--sigma", sigma, "GPS noise std. dev. (m)")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--speed-mean", speed.mean, "Mean speed (m/s)")->check(CLI::NonNegativeNumber);
  sim->add_option("--speed-std", speed.stddev, "Speed std. dev. (m/s)")->check(CLI::NonNegativeNumber);
  sim->add_option("--speed-min", speed.min, "Minimum speed (m/s)")->check(CLI::NonNegativeNumber);
  sim->add_option("--speed-max", speed.max, "Maximum speed (m/s)")->check(CLI::NonNegativeNumber);
  sim->add_option("--truth-out", truth_out, "Ground-truth CSV (t,segment_id,offset_m,e,n)");
  sim->add_option("--trace-out", trace_out, "GPS trace CSV (t,e,n)");

  // track
  FilterFlags track_flags;
  std::string trace_path = "trace.csv";
  std::string trajectory_out = "trajectory.csv";
  std::string diagnostics_out = "diagnostics.csv";
  std::string extractor = "greedy";
  auto* track = app.add_subcommand("track", "Track a GPS trace and extract the most likely path");
  track->add_option("--network", network_path, "Network JSON");
  track->add_option("--trace", trace_path, "GPS trace CSV");
  add_filter_flags(track, track_flags);
  track->add_option("--extractor", extractor, "Path extraction routine")->check(CLI::IsMember({"greedy", "viterbi"}));
  track->add_option("--out", trajectory_out, "Trajectory CSV");
  track->add_option("--diagnostics", diagnostics_out, "Per-step diagnostics CSV (t,ess,max_weight,failed)");

  // evaluate
  FilterFlags eval_flags;
  std::string eval_out = "metrics.csv";
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate a tracker on a trace (every 10th fix held out)");
  evaluate->add_option("--network", network_path, "Network JSON");
  evaluate->add_option("--trace", trace_path, "GPS trace CSV");
  add_filter_flags(evaluate, eval_flags);
  evaluate->add_option("--out", eval_out, "Results CSV (one row)");

  // sweep
  std::vector<std::string> methods{"standard", "improved"};
  std::vector<std::size_t> particle_counts{10};
  std::vector<int> intervals{1, 10, 30, 60, 70, 120};
  std::vector<double> sigmas{10.0};
  int seed_count = 5;
  std::uint64_t first_seed = 1;
  ExperimentConfig base;
  std::string sweep_network;
  unsigned jobs = 1;
  std::string results_out = "results.csv";
  std::string plot_dir;
  auto* sw = app.add_subcommand("sweep", "Run every parameter combination for several seeds");
  sw->add_option("--methods", methods, "Methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember({"standard", "improved"}));
  sw->add_option("--ms", particle_counts, "Particle counts")->delimiter(',')->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  sw->add_option("--intervals", intervals, "Sampling intervals (s)")->delimiter(',')->check(CLI::Range(1, 100000));
  sw->add_option("--sigmas", sigmas, "GPS noise levels (m)")->delimiter(',')->check(CLI::NonNegativeNumber);
  sw->add_option("--seeds", seed_count, "Seeds per configuration")->check(CLI::Range(1, 1000000));
  sw->add_option("--first-seed", first_seed, "First seed; seeds are consecutive");
  sw->add_option("--grid", base.grid_n, "Grid nodes per side when no network file is given")->check(CLI::Range(2, 100000));
  sw->add_option("--spacing", base.spacing_m, "Grid spacing (m)")->check(CLI::PositiveNumber);
  sw->add_option("--network", sweep_network, "Network JSON (overrides --grid/--spacing)");
  sw->add_option("--duration", base.duration_s, "Route length (s)")->check(CLI::Range(1, 100000000));
  sw->add_option("--sigma-floor", base.transition.sigma_floor, "Minimum transition noise (m)")->check(CLI::PositiveNumber);
  sw->add_option("--alpha", base.transition.alpha, "Transition noise per meter of control")->check(CLI::NonNegativeNumber);
  sw->add_option("--truncation-k", base.truncation_k, "Proposal truncation in sigma units")->check(CLI::Range(3.0, 1e6));
  sw->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  sw->add_option("--out", results_out, "Results CSV");
  sw->add_option("--plot-dir", plot_dir, "Write p50.svg and failure_rate.svg here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return kUsageError;
  }

  try {
    if (gen->parsed()) {
      const RoadNetwork network = make_grid_network(grid_n, spacing);
      save_network(network, network_out);
      out << "segments: " << network.segments().size() << '\n';
      return 0;
    }
    if (sim->parsed()) {
      if (speed.min > speed.max) throw ConfigError("--speed-min exceeds --speed-max");
      const RoadNetwork network = load_network(network_path);
      Rng rng = make_rng({sim_seed, 0x5157u});
      const TruePath path = generate_route(network, duration, speed, rng);
      const GpsTrace trace = observe(path, interval, sigma, rng);
      write_true_path_csv(path, truth_out);
      write_trace_csv(trace, trace_out);
      out << "positions: " << path.positions.size() << "\nfixes: " << trace.records.size() << '\n';
      return 0;
    }
    if (track->parsed()) {
      const TrackerOptions options = track_flags.options();
      const RoadNetwork network = load_network(network_path);
      const GpsTrace trace = read_trace_csv(trace_path);
      Rng rng = make_rng({track_flags.seed, 0x7EACu});
      const auto fixes = fixes_of(trace);
      const BeliefHistory history = run_tracker(network, fixes, options, rng);
      std::vector<Trajectory> fragments;
      if (extractor == "viterbi") {
        for (const auto& [first, last] : fragment_spans(history)) {
          fragments.push_back(extract_path_viterbi(history, options.transition, options.observation, first, last));
        }
      } else {
        fragments = extract_fragments(history, options.transition);
      }
      write_trajectory_csv(fragments, trajectory_out);
      write_diagnostics_csv(history, diagnostics_out);
      out << "steps: " << history.size() << "\nfailures: " << history.failure_steps.size()
          << "\nfragments: " << fragments.size() << '\n';
      return 0;
    }
    if (evaluate->parsed()) {
      const TrackerOptions options = eval_flags.options();
      const RoadNetwork network = load_network(network_path);
      const GpsTrace trace = read_trace_csv(trace_path);
      Rng rng = make_rng({eval_flags.seed, 0xE7A1u});
      const CrossValidation cv = cross_validate(network, trace, options, rng);
      MetricsRecord record;
      record.config_id = "evaluate";
      record.method = options.method;
      record.m = options.particles;
      record.interval_s = static_cast<int>(std::lround(trace.interval));
      record.sigma_m = options.observation.sigma;
      record.seed = eval_flags.seed;
      fill_metrics(record, cv);
      const std::vector<MetricsRecord> rows{record};
      write_results_csv(rows, eval_out);
      out << "p25_m: " << format_fixed(record.p25, 3) << "\np50_m: " << format_fixed(record.p50, 3)
          << "\np75_m: " << format_fixed(record.p75, 3) << "\nfailure_rate: " << format_fixed(record.failure_rate, 4)
          << "\nunscored: " << record.unscored << '\n';
      return record.ok() ? 0 : kRuntimeError;
    }
    if (sw->parsed()) {
      if (!sweep_network.empty()) base.network = std::make_shared<const RoadNetwork>(load_network(sweep_network));
      std::vector<ExperimentConfig> configs;
      for (const auto& method : methods) {
        for (const auto m : particle_counts) {
          for (const int iv : intervals) {
            for (const double sg : sigmas) {
              ExperimentConfig c = base;
              c.method = parse_method(method);
              c.m = m;
              c.interval_s = iv;
              c.sigma_m = sg;
              c.config_id = config_id_of(c);
              configs.push_back(std::move(c));
            }
          }
        }
      }
      std::vector<std::uint64_t> seeds;
      for (int k = 0; k < seed_count; ++k) seeds.push_back(first_seed + static_cast<std::uint64_t>(k));
      const auto rows = sweep(configs, seeds, jobs);
      write_results_csv(rows, results_out);
      if (!plot_dir.empty()) write_sweep_plots(rows, plot_dir);
      const auto ok = static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.ok(); }));
      out << "rows: " << rows.size() << "\nsucceeded: " << ok << '\n';
      return ok > 0 ? 0 : kRuntimeError;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace roadpf
