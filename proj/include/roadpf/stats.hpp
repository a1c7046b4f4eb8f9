#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace roadpf {

/// All stochastic routines take this engine explicitly.
using Rng = std::mt19937_64;

/// Engine seeded from several integers through std::seed_seq.
Rng make_rng(std::initializer_list<std::uint64_t> keys);

double normal_pdf(double x, double mean, double sigma);

/// Standard normal CDF.
double std_normal_cdf(double z);

/// P(lo <= Z <= hi) for standard normal Z, accurate in both tails.
double std_normal_mass(double lo, double hi);

/// Standard normal draw restricted to [lo, hi] by inverse CDF.
double sample_truncated_std_normal(double lo, double hi, Rng& rng);

double uniform01(Rng& rng);

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::span<const double> values, double q);

}  // namespace roadpf
