#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace roadpf {

/// Planar easting/northing coordinates in meters.
struct Point {
  double e = 0.0;
  double n = 0.0;

  friend Point operator+(Point p, Point q) { return {p.e + q.e, p.n + q.n}; }
  friend Point operator-(Point p, Point q) { return {p.e - q.e, p.n - q.n}; }
  friend Point operator*(double s, Point p) { return {s * p.e, s * p.n}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point p, Point q) { return p.e * q.e + p.n * q.n; }
inline double cross(Point p, Point q) { return p.e * q.n - p.n * q.e; }
inline double norm(Point p) { return std::hypot(p.e, p.n); }
inline double distance(Point p, Point q) { return norm(p - q); }

/// Thrown for malformed networks and invalid network queries.
class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Node {
  int id = 0;
  Point p;
};

/// Undirected straight road piece between nodes `u` and `v`.
struct Segment {
  int id = 0;
  int u = 0;
  int v = 0;
  Point a;  // position of node u
  Point b;  // position of node v
  double length = 0.0;

  /// Unit vector from a to b.
  Point direction() const { return (1.0 / length) * (b - a); }
  Point point_at(double offset) const { return a + (offset / length) * (b - a); }
};

/// A vehicle state constrained to the network.
struct NetworkPosition {
  int segment_id = 0;
  double offset = 0.0;  // meters from the segment's `a` end
  Point point;

  friend bool operator==(const NetworkPosition&, const NetworkPosition&) = default;
};

struct SegmentSpec {
  int id = 0;
  int u = 0;
  int v = 0;
};

struct NearSegment {
  std::size_t index = 0;  // index into RoadNetwork::segments()
  double distance = 0.0;  // minimum point-to-segment distance
};

/// Perpendicular (a) and along-segment (b) coordinates of an observation
/// relative to a network position.
struct SegmentFrameOffset {
  double a = 0.0;
  double b = 0.0;
};

double point_segment_distance(Point p, Point a, Point b);

/// Immutable road graph with a uniform-grid spatial index over segments.
class RoadNetwork {
 public:
  RoadNetwork(std::vector<Node> nodes, const std::vector<SegmentSpec>& segments);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Segment>& segments() const { return segments_; }

  bool has_segment(int id) const { return segment_index_.contains(id); }
  std::size_t segment_index(int id) const;
  const Segment& segment(int id) const { return segments_[segment_index(id)]; }
  const Node& node(int id) const;

  /// Indices of the segments touching the node.
  std::span<const std::size_t> incident(int node_id) const;

  double max_segment_length() const { return max_length_; }
  double total_length() const;

  NetworkPosition position_at(int segment_id, double offset) const;

  /// Closest point on the given segment to `p`.
  NetworkPosition project(std::size_t segment_index, Point p) const;

  /// Closest network position to `p` over all segments.
  NetworkPosition snap(Point p) const;

  /// Segments whose minimum distance to `center` is at most `radius`,
  /// ordered by segment index.
  std::vector<NearSegment> segments_near(Point center, double radius) const;

 private:
  void build_index();
  std::size_t cell_of(double coord, double origin, std::size_t count) const;

  std::vector<Node> nodes_;
  std::vector<Segment> segments_;
  std::unordered_map<int, std::size_t> node_index_;
  std::unordered_map<int, std::size_t> segment_index_;
  std::vector<std::vector<std::size_t>> incident_;
  double max_length_ = 0.0;

  Point origin_;
  double cell_size_ = 1.0;
  std::size_t cells_e_ = 1;
  std::size_t cells_n_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

inline NetworkPosition position_at(const RoadNetwork& network, int segment_id, double offset) {
  return network.position_at(segment_id, offset);
}

SegmentFrameOffset ab_coordinates(const RoadNetwork& network, const NetworkPosition& x, Point y);

/// n x n lattice with horizontal and vertical segments between neighbors.
RoadNetwork make_grid_network(int n, double spacing);

RoadNetwork network_from_json(const std::string& text);
std::string network_to_json(const RoadNetwork& network);
RoadNetwork load_network(const std::filesystem::path& path);
void save_network(const RoadNetwork& network, const std::filesystem::path& path);

}  // namespace roadpf
