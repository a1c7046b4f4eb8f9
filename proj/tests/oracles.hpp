#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. They are written independently of the library code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "roadpf/filter.hpp"
#include "roadpf/road_network.hpp"
#include "roadpf/stats.hpp"

namespace oracle {

using namespace roadpf;

inline double normal(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double trans(const TransitionModel& m, Point a, Point b, double u) {
  return normal(std::hypot(a.e - b.e, a.n - b.n), u, std::max(m.sigma_floor, m.alpha * u));
}

inline double obs(double sigma, Point x, Point y) {
  return normal(x.e - y.e, 0.0, sigma) * normal(x.n - y.n, 0.0, sigma);
}

inline double std_phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Segment-selection weights computed from scratch: the disc |p - y| <= r
// intersected with each segment, Gaussian mass across and along.
inline std::vector<double> analytic_weights(const RoadNetwork& net, Point y, double sigma, double r) {
  std::vector<double> w;
  for (const auto& s : net.segments()) {
    const double dx = s.b.e - s.a.e, dy = s.b.n - s.a.n;
    // |a + t d - y|^2 = r^2, t in [0, 1]
    const double A = dx * dx + dy * dy;
    const double B = 2.0 * ((s.a.e - y.e) * dx + (s.a.n - y.n) * dy);
    const double C = std::pow(s.a.e - y.e, 2) + std::pow(s.a.n - y.n, 2) - r * r;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) {
      w.push_back(0.0);
      continue;
    }
    const double t0 = std::max(0.0, (-B - std::sqrt(disc)) / (2.0 * A));
    const double t1 = std::min(1.0, (-B + std::sqrt(disc)) / (2.0 * A));
    if (t1 <= t0) {
      w.push_back(0.0);
      continue;
    }
    const double len = std::sqrt(A);
    const double tf = -B / (2.0 * A);
    const double perp = std::hypot(s.a.e + tf * dx - y.e, s.a.n + tf * dy - y.n);
    w.push_back(normal(perp, 0.0, sigma) *
                (std_phi((t1 - tf) * len / sigma) - std_phi((t0 - tf) * len / sigma)));
  }
  return w;
}

inline double chi_square_p(const std::vector<double>& counts, const std::vector<double>& probs) {
  double n = 0.0;
  for (double c : counts) n += c;
  // Bins expecting fewer than 5 hits are pooled.
  double stat = 0.0, pooled_count = 0.0, pooled_expected = 0.0;
  int bins = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    if (probs[i] <= 0.0 && counts[i] > 0.0) return 0.0;
    if (e < 5.0) {
      pooled_count += counts[i];
      pooled_expected += e;
      continue;
    }
    stat += (counts[i] - e) * (counts[i] - e) / e;
    ++bins;
  }
  if (pooled_expected > 0.0) {
    stat += (pooled_count - pooled_expected) * (pooled_count - pooled_expected) / pooled_expected;
    ++bins;
  }
  if (bins < 2) return 1.0;
  boost::math::chi_squared dist(bins - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Random belief history on `network`: T+1 steps, m particles each. With
/// `coarse` set, positions and weights are drawn from small sets so ties occur.
inline BeliefHistory random_history(const RoadNetwork& network, std::size_t steps, std::size_t m, bool coarse,
                                    Rng& rng) {
  BeliefHistory h;
  for (std::size_t t = 0; t < steps; ++t) {
    Belief b;
    b.t = t;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = network.segments()[rng() % network.segments().size()];
      const double offset = coarse ? s.length * static_cast<double>(rng() % 3) / 2.0 : uniform01(rng) * s.length;
      const double w = coarse ? 1.0 + static_cast<double>(rng() % 2) : uniform01(rng) + 1e-3;
      b.particles.push_back({network.position_at(s.id, offset), w});
      total += w;
    }
    for (auto& p : b.particles) p.weight /= total;
    h.beliefs.push_back(std::move(b));
    h.times.push_back(10.0 * static_cast<double>(t));
    h.observations.push_back({uniform01(rng) * 100.0, uniform01(rng) * 100.0});
    if (t > 0) h.controls.push_back(coarse ? 50.0 * static_cast<double>(rng() % 2) : uniform01(rng) * 80.0);
  }
  return h;
}

/// The greedy backward routine re-evaluated from scratch: full score table
/// per step, first maximum wins.
inline std::vector<std::size_t> greedy_path(const BeliefHistory& h, const TransitionModel& m) {
  const std::size_t T = h.beliefs.size();
  std::vector<std::size_t> idx(T);
  std::vector<double> w;
  for (const auto& p : h.beliefs[T - 1].particles) w.push_back(p.weight);
  idx[T - 1] = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
  for (std::size_t t = T - 1; t > 0; --t) {
    const Point cur = h.beliefs[t].particles[idx[t]].state.point;
    std::vector<double> score;
    for (const auto& p : h.beliefs[t - 1].particles) score.push_back(trans(m, p.state.point, cur, h.controls[t - 1]) * p.weight);
    idx[t - 1] = static_cast<std::size_t>(std::max_element(score.begin(), score.end()) - score.begin());
  }
  return idx;
}

/// Log max-product objective of a particle-index sequence.
inline double log_score(const BeliefHistory& h, const TransitionModel& m, double sigma,
                        const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t t = 0; t < idx.size(); ++t) {
    const Point x = h.beliefs[t].particles[idx[t]].state.point;
    s += std::log(obs(sigma, x, h.observations[t]));
    if (t > 0) s += std::log(trans(m, h.beliefs[t - 1].particles[idx[t - 1]].state.point, x, h.controls[t - 1]));
  }
  return s;
}

/// Exhaustive maximisation over all m^(T+1) sequences. Returns the best
/// score and whether the maximiser is unique (margin above `tie`).
struct Exhaustive {
  std::vector<std::size_t> best;
  double score = -std::numeric_limits<double>::infinity();
  bool unique = true;
};

inline Exhaustive exhaustive_path(const BeliefHistory& h, const TransitionModel& m, double sigma, double tie = 1e-9) {
  const std::size_t T = h.beliefs.size();
  const std::size_t n = h.beliefs[0].particles.size();
  std::vector<std::size_t> idx(T, 0);
  Exhaustive out;
  while (true) {
    const double s = log_score(h, m, sigma, idx);
    if (out.best.empty()) {
      out.best = idx;
      out.score = s;
    } else if (s == out.score || std::abs(s - out.score) <= tie) {
      out.unique = false;
    } else if (s > out.score) {
      out.score = s;
      out.best = idx;
      out.unique = true;
    }
    std::size_t k = 0;
    while (k < T && ++idx[k] == n) idx[k++] = 0;
    if (k == T) break;
  }
  return out;
}

/// Distance from p to a polyline by sampling the polyline every `step` meters.
inline double dense_polyline_distance(Point p, const std::vector<Point>& line, double step = 0.01) {
  double best = std::hypot(p.e - line[0].e, p.n - line[0].n);
  for (std::size_t k = 1; k < line.size(); ++k) {
    const Point a = line[k - 1], b = line[k];
    const double len = std::hypot(b.e - a.e, b.n - a.n);
    const auto n = static_cast<std::size_t>(std::ceil(len / step));
    for (std::size_t j = 0; j <= n; ++j) {
      const double f = n == 0 ? 0.0 : static_cast<double>(j) / static_cast<double>(n);
      best = std::min(best, std::hypot(p.e - (a.e + f * (b.e - a.e)), p.n - (a.n + f * (b.n - a.n))));
    }
  }
  return best;
}

}  // namespace oracle
