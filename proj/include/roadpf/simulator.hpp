#pragma once

#include <filesystem>
#include <vector>

#include "roadpf/filter.hpp"
#include "roadpf/road_network.hpp"
#include "roadpf/stats.hpp"

namespace roadpf {

/// Per-second speed ~ N(mean, stddev) clipped to [min, max], in m/s.
struct SpeedParams {
  double mean = 10.0;
  double stddev = 3.0;
  double min = 0.0;
  double max = 20.0;
};

/// Ground-truth route sampled once per second.
struct TruePath {
  std::vector<double> times;
  std::vector<NetworkPosition> positions;
  std::vector<double> speeds;    // speed during [t, t+1), one fewer than positions
  std::vector<double> odometer;  // cumulative network distance travelled

  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

struct GpsTrace {
  std::vector<TimedFix> records;
  double interval = 1.0;
  double sigma = 0.0;
};

/// Random walk over the network. At each node the vehicle continues onto a
/// uniformly chosen incident segment other than the one it arrived on; it
/// turns back only at dead ends.
TruePath generate_route(const RoadNetwork& network, int duration_s, const SpeedParams& speed, Rng& rng);

/// True positions every `interval_s` seconds plus isotropic Gaussian noise.
GpsTrace observe(const TruePath& path, int interval_s, double sigma, Rng& rng);

/// Cartesian distances between consecutive fixes.
std::vector<double> controls_from_trace(const GpsTrace& trace);

void write_trace_csv(const GpsTrace& trace, const std::filesystem::path& path);
GpsTrace read_trace_csv(const std::filesystem::path& path);

void write_true_path_csv(const TruePath& path, const std::filesystem::path& file);
/// Reads positions back; speeds and odometer are not stored in the file.
TruePath read_true_path_csv(const RoadNetwork& network, const std::filesystem::path& file);

}  // namespace roadpf
