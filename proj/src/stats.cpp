#include "roadpf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace roadpf {

Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  for (const auto k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double std_normal_mass(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo >= 0.0) return std_normal_cdf(-lo) - std_normal_cdf(-hi);
  return std_normal_cdf(hi) - std_normal_cdf(lo);
}

double sample_truncated_std_normal(double lo, double hi, Rng& rng) {
  if (!(hi >= lo)) throw std::invalid_argument("truncated normal with empty interval");
  // Work in the lower half so that tail probabilities keep full precision.
  if (lo > 0.0) return -sample_truncated_std_normal(-hi, -lo, rng);
  const double p_lo = std_normal_cdf(lo);
  const double p_hi = std_normal_cdf(hi);
  if (!(p_hi > p_lo)) return std::clamp(0.5 * (lo + hi), lo, hi);
  const double p = p_lo + uniform01(rng) * (p_hi - p_lo);
  if (!(p > 0.0) || !(p < 1.0)) return std::clamp(0.5 * (lo + hi), lo, hi);
  const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::clamp(z, lo, hi);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace roadpf
