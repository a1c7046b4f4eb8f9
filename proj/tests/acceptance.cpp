// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria. Pass criterion numbers as arguments to run a
// subset.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracle_scenario.hpp"
#include "oracles.hpp"
#include "roadpf/evaluation.hpp"
#include "roadpf/grid_oracle.hpp"
#include "roadpf/sensor_models.hpp"
#include "roadpf/trajectory.hpp"

using namespace roadpf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 1; s <= n; ++s) out.push_back(s);
  return out;
}

// Mean p50 and failure rate of one configuration over seeds.
struct Means {
  double p50 = 0.0;
  double failure = 0.0;
  std::size_t bad = 0;
};

Means means_of(std::span<const MetricsRecord> rows) {
  Means m;
  std::size_t ok = 0;
  for (const auto& r : rows) {
    if (!r.ok()) {
      ++m.bad;
      continue;
    }
    m.p50 += r.p50;
    m.failure += r.failure_rate;
    ++ok;
  }
  if (ok > 0) {
    m.p50 /= static_cast<double>(ok);
    m.failure /= static_cast<double>(ok);
  }
  return m;
}

std::vector<Means> run_configs(const std::vector<ExperimentConfig>& configs, std::size_t seeds) {
  const auto s = seed_range(seeds);
  const auto rows = sweep(configs, s, jobs());
  std::vector<Means> out;
  for (std::size_t c = 0; c < configs.size(); ++c) out.push_back(means_of(std::span(rows).subspan(c * seeds, seeds)));
  return out;
}

ExperimentConfig config(Method method, std::size_t m, int interval, double sigma) {
  ExperimentConfig c;
  c.method = method;
  c.m = m;
  c.interval_s = interval;
  c.sigma_m = sigma;
  c.config_id = std::string(to_string(method)) + "_m" + std::to_string(m) + "_i" + std::to_string(interval) + "_s" +
                fmt(sigma);
  return c;
}

Outcome factorization() {
  Rng rng = make_rng({101});
  const auto net = make_grid_network(4, 80.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto& s = net.segments()[rng() % net.segments().size()];
    const auto x = net.position_at(s.id, uniform01(rng) * s.length);
    const Point y{uniform01(rng) * 400.0 - 50.0, uniform01(rng) * 400.0 - 50.0};
    const double sigma = 0.5 + 60.0 * uniform01(rng);
    const auto ab = ab_coordinates(net, x, y);
    const double product = oracle::normal(ab.a, 0.0, sigma) * oracle::normal(ab.b, 0.0, sigma);
    worst = std::max(worst, std::abs(observation_density({sigma, 4.0}, x, y) - product));
  }
  return {worst <= 1e-12, "max |2D - N(a)N(b)| = " + fmt(worst) + " (limit 1e-12)"};
}

Outcome proposal() {
  const auto net = make_grid_network(3, 50.0);
  const ObservationModel model{15.0, 4.0};
  const Point y{62.0, 41.0};
  const ObservationProposal q(model, net, y);
  double integral = 0.0;
  for (const auto& s : net.segments()) {
    const int steps = static_cast<int>(std::round(s.length / 0.01));
    double sum = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double f = q.density(net.position_at(s.id, s.length * k / steps));
      sum += (k == 0 || k == steps) ? 0.5 * f : f;
    }
    integral += sum * s.length / steps;
  }
  const auto w = oracle::analytic_weights(net, y, model.sigma, model.truncation_radius());
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<double> probs, counts(net.segments().size(), 0.0);
  for (double v : w) probs.push_back(v / total);
  Rng rng = make_rng({102});
  for (int k = 0; k < 100000; ++k) counts[net.segment_index(q.sample(rng).position.segment_id)] += 1.0;
  const double p = oracle::chi_square_p(counts, probs);
  const bool pass = std::abs(integral - 1.0) <= 1e-6 && p > 0.001;
  return {pass, "integral = " + fmt(integral, 10) + " (1 +- 1e-6), chi-square p = " + fmt(p) + " (> 0.001)"};
}

Outcome oracle_equivalence() {
  const auto net = make_grid_network(3, 50.0);
  const DiscreteStateSpace space(net, 0.5);
  const oracle::Scenario sc;  // 2 s interval, sigma 2 m, 20 updates
  const std::vector<std::size_t> ms{10, 100, 1000, 5000};
  const std::size_t seeds = 20;
  std::vector<oracle::ExactRun> runs(seeds);
  std::vector<std::vector<double>> tv(2 * ms.size(), std::vector<double>(seeds));
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t s = next++; s < seeds; s = next++) {
        runs[s] = oracle::exact_run(sc, space, s + 1);
        for (std::size_t k = 0; k < ms.size(); ++k) {
          tv[k][s] = oracle::mean_tv(sc, space, runs[s], Method::standard, ms[k], s + 1);
          tv[ms.size() + k][s] = oracle::mean_tv(sc, space, runs[s], Method::improved, ms[k], s + 1);
        }
      }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < jobs(); ++t) pool.emplace_back(worker);
    worker();
  }
  bool pass = true;
  std::string detail;
  for (int method = 0; method < 2; ++method) {
    detail += method == 0 ? "standard TV" : "; improved TV";
    double previous = 1.0;
    for (std::size_t k = 0; k < ms.size(); ++k) {
      double mean = 0.0;
      for (double v : tv[method * ms.size() + k]) mean += v / seeds;
      detail += " m" + std::to_string(ms[k]) + "=" + fmt(mean);
      if (mean > previous + 0.02) pass = false;
      previous = mean;
      if (ms[k] == 5000 && mean > 0.05) pass = false;
    }
  }
  return {pass, detail + " (m=5000 <= 0.05, monotone +-0.02)"};
}

Outcome error_direction() {
  std::vector<ExperimentConfig> configs;
  const std::vector<std::pair<int, double>> points{{10, 10.0}, {30, 10.0}, {60, 10.0}, {10, 5.0}, {10, 20.0}};
  for (const auto& [iv, sg] : points) {
    configs.push_back(config(Method::standard, 10, iv, sg));
    configs.push_back(config(Method::improved, 10, iv, sg));
  }
  const auto m = run_configs(configs, 20);
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& s = m[2 * k];
    const auto& i = m[2 * k + 1];
    if (!(i.p50 <= s.p50) || s.bad + i.bad > 0) pass = false;
    detail += (k ? "; " : "") + std::string("i=") + std::to_string(points[k].first) + " s=" + fmt(points[k].second) +
              ": improved " + fmt(i.p50) + " vs standard " + fmt(s.p50);
  }
  return {pass, "mean p50 (m) " + detail};
}

Outcome failure_direction() {
  std::vector<ExperimentConfig> configs{config(Method::standard, 10, 60, 10.0), config(Method::improved, 10, 60, 10.0)};
  const std::vector<double> sigmas{5.0, 10.0, 20.0, 40.0};
  for (double sg : sigmas) configs.push_back(config(Method::improved, 10, 10, sg));
  const auto m = run_configs(configs, 20);
  const double gap = m[0].failure - m[1].failure;
  bool monotone = true;
  std::string curve;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    curve += (k ? ", " : "") + fmt(m[2 + k].failure);
    if (k > 0 && m[2 + k].failure < m[1 + k].failure) monotone = false;
  }
  return {gap >= 0.3 && monotone,
          "60 s failure rate standard " + fmt(m[0].failure) + " improved " + fmt(m[1].failure) + " gap " + fmt(gap) +
              " (>= 0.3); improved failure rate vs sigma {5,10,20,40} at 10 s: " + curve + " (non-decreasing)"};
}

Outcome small_vs_large() {
  std::vector<ExperimentConfig> configs{config(Method::improved, 100, 70, 10.0),
                                        config(Method::standard, 10000, 70, 10.0)};
  const auto m = run_configs(configs, 10);
  const bool pass = m[0].p50 < m[1].p50 && m[0].failure < m[1].failure;
  return {pass, "improved m=100: p50 " + fmt(m[0].p50) + " failure " + fmt(m[0].failure) +
                    "; standard m=10000: p50 " + fmt(m[1].p50) + " failure " + fmt(m[1].failure) +
                    " (both strictly lower)"};
}

Outcome extraction() {
  const auto net = make_grid_network(3, 50.0);
  const TransitionModel trans;
  const ObservationModel obs{15.0, 4.0};
  Rng rng = make_rng({107});
  std::size_t greedy_bad = 0, viterbi_checked = 0, viterbi_bad = 0;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t T = rng() % 6;  // T in 0..5, T+1 beliefs
    const std::size_t m = 1 + rng() % 4;
    const auto h = oracle::random_history(net, T + 1, m, n % 2 == 0, rng);
    if (extract_path(h, trans).particle_index != oracle::greedy_path(h, trans)) ++greedy_bad;
    if (std::pow(static_cast<double>(m), static_cast<double>(T + 1)) <= 81.0) {
      ++viterbi_checked;
      const auto v = extract_path_viterbi(h, trans, obs);
      const auto ex = oracle::exhaustive_path(h, trans, obs.sigma);
      const double got = oracle::log_score(h, trans, obs.sigma, v.particle_index);
      const bool same = got == ex.score || std::abs(got - ex.score) <= 1e-9 * std::abs(ex.score);
      if (!same || (ex.unique && v.particle_index != ex.best)) ++viterbi_bad;
    }
  }
  return {greedy_bad == 0 && viterbi_bad == 0,
          "greedy mismatches " + std::to_string(greedy_bad) + "/10000; viterbi mismatches " +
              std::to_string(viterbi_bad) + "/" + std::to_string(viterbi_checked)};
}

Outcome cross_validation() {
  bool holdout_ok = true;
  for (std::size_t n : {1u, 9u, 10u, 20u, 99u, 100u, 361u}) {
    GpsTrace t;
    for (std::size_t k = 0; k < n; ++k) t.records.push_back({static_cast<double>(k), {0, 0}});
    const auto s = holdout_split(t);
    std::vector<std::size_t> expected;
    for (std::size_t pos = 10; pos <= n; pos += 10) expected.push_back(pos - 1);
    if (s.removed_indices != expected || s.kept.records.size() + s.removed.size() != n) holdout_ok = false;
  }
  Rng rng = make_rng({108});
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t k = 1 + rng() % 6;
    std::vector<NetworkPosition> states;
    std::vector<Point> line;
    for (std::size_t i = 0; i < k; ++i) {
      const Point q{uniform01(rng) * 100.0, uniform01(rng) * 100.0};
      states.push_back({0, 0.0, q});
      line.push_back(q);
    }
    const std::vector<Point> probe{{uniform01(rng) * 140.0 - 20.0, uniform01(rng) * 140.0 - 20.0}};
    worst = std::max(worst, std::abs(prediction_error(probe, states)[0] - oracle::dense_polyline_distance(probe[0], line)));
  }
  return {holdout_ok && worst <= 0.01, std::string("holdout positions ") + (holdout_ok ? "exact" : "WRONG") +
                                           "; max |error - dense oracle| = " + fmt(worst) + " m (<= 0.01)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "gaussian factorization", 1.0, factorization},
      {2, "proposal correctness", 30.0, proposal},
      {3, "oracle equivalence", 300.0, oracle_equivalence},
      {4, "median error, improved vs standard", 600.0, error_direction},
      {5, "lost-track rate", 600.0, failure_direction},
      {6, "improved m=100 vs standard m=10000", 1200.0, small_vs_large},
      {7, "trajectory extraction", 60.0, extraction},
      {8, "cross-validation plumbing", 10.0, cross_validation},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("criterion %d %s: %s | %s | %.2f s (limit %.0f s)\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failed;
}
