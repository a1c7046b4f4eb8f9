#include "roadpf/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "roadpf/csv.hpp"

namespace roadpf {

namespace {

// Position along a segment plus travel direction: +1 towards node v, -1 towards node u.
struct Cursor {
  std::size_t segment = 0;
  double offset = 0.0;
  int heading = 1;
};

void advance(const RoadNetwork& network, Cursor& cur, double distance_left, Rng& rng) {
  const auto& segments = network.segments();
  while (true) {
    const Segment& s = segments[cur.segment];
    const double room = cur.heading > 0 ? s.length - cur.offset : cur.offset;
    if (distance_left <= room) {
      cur.offset += cur.heading * distance_left;
      cur.offset = std::clamp(cur.offset, 0.0, s.length);
      return;
    }
    distance_left -= room;
    const int node = cur.heading > 0 ? s.v : s.u;
    const auto incident = network.incident(node);
    std::vector<std::size_t> options;
    for (const std::size_t i : incident) {
      if (i != cur.segment) options.push_back(i);
    }
    std::size_t next = cur.segment;  // dead end: turn back
    if (!options.empty()) {
      const auto pick = std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng);
      next = options[pick];
    }
    const Segment& n = segments[next];
    cur.segment = next;
    if (n.u == node) {
      cur.offset = 0.0;
      cur.heading = 1;
    } else {
      cur.offset = n.length;
      cur.heading = -1;
    }
  }
}

NetworkPosition to_position(const RoadNetwork& network, const Cursor& cur) {
  const Segment& s = network.segments()[cur.segment];
  return {s.id, cur.offset, s.point_at(cur.offset)};
}

}  // namespace

TruePath generate_route(const RoadNetwork& network, int duration_s, const SpeedParams& speed, Rng& rng) {
  if (duration_s < 1) throw std::invalid_argument("route duration must be at least 1 s");
  if (network.segments().empty()) throw std::invalid_argument("cannot drive on an empty network");
  if (!(speed.min <= speed.max) || speed.min < 0.0 || speed.stddev < 0.0) {
    throw std::invalid_argument("invalid speed parameters");
  }
  Cursor cur;
  cur.segment = std::uniform_int_distribution<std::size_t>(0, network.segments().size() - 1)(rng);
  cur.offset = uniform01(rng) * network.segments()[cur.segment].length;
  cur.heading = uniform01(rng) < 0.5 ? 1 : -1;

  TruePath path;
  path.times.push_back(0.0);
  path.positions.push_back(to_position(network, cur));
  path.odometer.push_back(0.0);
  std::normal_distribution<double> speed_noise(0.0, 1.0);
  for (int k = 1; k <= duration_s; ++k) {
    const double v = std::clamp(speed.mean + speed.stddev * speed_noise(rng), speed.min, speed.max);
    advance(network, cur, v, rng);
    path.speeds.push_back(v);
    path.times.push_back(static_cast<double>(k));
    path.positions.push_back(to_position(network, cur));
    path.odometer.push_back(path.odometer.back() + v);
  }
  return path;
}

GpsTrace observe(const TruePath& path, int interval_s, double sigma, Rng& rng) {
  if (interval_s < 1) throw std::invalid_argument("sampling interval must be at least 1 s");
  if (!(sigma >= 0.0)) throw std::invalid_argument("GPS sigma must be non-negative");
  GpsTrace trace;
  trace.interval = interval_s;
  trace.sigma = sigma;
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k = 0; k < path.positions.size(); k += static_cast<std::size_t>(interval_s)) {
    const Point p = path.positions[k].point;
    const double de = noise(rng);
    const double dn = noise(rng);
    trace.records.push_back({path.times[k], {p.e + sigma * de, p.n + sigma * dn}});
  }
  return trace;
}

std::vector<double> controls_from_trace(const GpsTrace& trace) {
  if (trace.records.size() < 2) throw std::invalid_argument("controls need at least two fixes");
  std::vector<double> u;
  u.reserve(trace.records.size() - 1);
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    u.push_back(distance(trace.records[k].y, trace.records[k - 1].y));
  }
  return u;
}

void write_trace_csv(const GpsTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string());
  out << "t,e,n\n";
  for (const auto& r : trace.records) {
    out << format_fixed(r.t, 3) << ',' << format_fixed(r.y.e, 9) << ',' << format_fixed(r.y.n, 9) << '\n';
  }
}

GpsTrace read_trace_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  require_header(table, {"t", "e", "n"}, path);
  GpsTrace trace;
  for (const auto& r : table.rows) {
    trace.records.push_back({parse_double(r[0]), {parse_double(r[1]), parse_double(r[2])}});
  }
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    if (!(trace.records[k].t > trace.records[k - 1].t)) {
      throw CsvError(path.string() + ": timestamps must be strictly increasing");
    }
  }
  if (trace.records.size() >= 2) trace.interval = trace.records[1].t - trace.records[0].t;
  return trace;
}

void write_true_path_csv(const TruePath& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw CsvError("cannot write " + file.string());
  out << "t,segment_id,offset_m,e,n\n";
  for (std::size_t k = 0; k < path.positions.size(); ++k) {
    const auto& p = path.positions[k];
    out << format_fixed(path.times[k], 3) << ',' << p.segment_id << ',' << format_fixed(p.offset, 9) << ','
        << format_fixed(p.point.e, 9) << ',' << format_fixed(p.point.n, 9) << '\n';
  }
}

TruePath read_true_path_csv(const RoadNetwork& network, const std::filesystem::path& file) {
  const CsvTable table = read_csv(file);
  require_header(table, {"t", "segment_id", "offset_m", "e", "n"}, file);
  TruePath path;
  for (const auto& r : table.rows) {
    const int id = static_cast<int>(parse_int(r[1]));
    const double offset = std::clamp(parse_double(r[2]), 0.0, network.segment(id).length);
    path.times.push_back(parse_double(r[0]));
    path.positions.push_back(network.position_at(id, offset));
  }
  return path;
}

}  // namespace roadpf
