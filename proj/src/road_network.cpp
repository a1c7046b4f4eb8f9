#include "roadpf/road_network.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace roadpf {

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, const std::vector<SegmentSpec>& segments)
    : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i].id, i).second) {
      throw NetworkError("duplicate node id " + std::to_string(nodes_[i].id));
    }
  }
  incident_.resize(nodes_.size());
  segments_.reserve(segments.size());
  for (const auto& spec : segments) {
    if (segment_index_.contains(spec.id)) {
      throw NetworkError("duplicate segment id " + std::to_string(spec.id));
    }
    const auto u = node_index_.find(spec.u);
    const auto v = node_index_.find(spec.v);
    if (u == node_index_.end() || v == node_index_.end()) {
      throw NetworkError("segment " + std::to_string(spec.id) + " references an unknown node");
    }
    if (spec.u == spec.v) {
      throw NetworkError("segment " + std::to_string(spec.id) + " joins a node to itself");
    }
    Segment s;
    s.id = spec.id;
    s.u = spec.u;
    s.v = spec.v;
    s.a = nodes_[u->second].p;
    s.b = nodes_[v->second].p;
    s.length = distance(s.a, s.b);
    if (!(s.length > 0.0)) {
      throw NetworkError("segment " + std::to_string(spec.id) + " has zero length");
    }
    segment_index_.emplace(s.id, segments_.size());
    incident_[u->second].push_back(segments_.size());
    incident_[v->second].push_back(segments_.size());
    max_length_ = std::max(max_length_, s.length);
    segments_.push_back(s);
  }
  build_index();
}

std::size_t RoadNetwork::segment_index(int id) const {
  const auto it = segment_index_.find(id);
  if (it == segment_index_.end()) {
    throw NetworkError("unknown segment id " + std::to_string(id));
  }
  return it->second;
}

const Node& RoadNetwork::node(int id) const {
  const auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw NetworkError("unknown node id " + std::to_string(id));
  }
  return nodes_[it->second];
}

std::span<const std::size_t> RoadNetwork::incident(int node_id) const {
  const auto it = node_index_.find(node_id);
  if (it == node_index_.end()) {
    throw NetworkError("unknown node id " + std::to_string(node_id));
  }
  return incident_[it->second];
}

double RoadNetwork::total_length() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.length;
  return total;
}

NetworkPosition RoadNetwork::position_at(int segment_id, double offset) const {
  const Segment& s = segment(segment_id);
  if (!(offset >= 0.0 && offset <= s.length)) {
    throw NetworkError("offset " + std::to_string(offset) + " outside segment " +
                       std::to_string(segment_id) + " of length " + std::to_string(s.length));
  }
  return {s.id, offset, s.point_at(offset)};
}

NetworkPosition RoadNetwork::project(std::size_t segment_index, Point p) const {
  const Segment& s = segments_.at(segment_index);
  const double offset = std::clamp(dot(p - s.a, s.direction()), 0.0, s.length);
  return {s.id, offset, s.point_at(offset)};
}

NetworkPosition RoadNetwork::snap(Point p) const {
  if (segments_.empty()) throw NetworkError("cannot snap to an empty network");
  // Grow the query disc until something is found; the grid makes this cheap.
  double radius = cell_size_;
  std::vector<NearSegment> near;
  while ((near = segments_near(p, radius)).empty()) radius *= 2.0;
  const auto best = std::min_element(near.begin(), near.end(), [](const auto& x, const auto& y) {
    return x.distance < y.distance;
  });
  return project(best->index, p);
}

void RoadNetwork::build_index() {
  if (segments_.empty()) return;
  double min_e = std::numeric_limits<double>::infinity();
  double min_n = min_e;
  double max_e = -min_e;
  double max_n = -min_e;
  for (const auto& node : nodes_) {
    min_e = std::min(min_e, node.p.e);
    min_n = std::min(min_n, node.p.n);
    max_e = std::max(max_e, node.p.e);
    max_n = std::max(max_n, node.p.n);
  }
  origin_ = {min_e, min_n};
  cell_size_ = max_length_;
  cells_e_ = static_cast<std::size_t>(std::floor((max_e - min_e) / cell_size_)) + 1;
  cells_n_ = static_cast<std::size_t>(std::floor((max_n - min_n) / cell_size_)) + 1;
  cells_.assign(cells_e_ * cells_n_, {});
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const std::size_t e0 = cell_of(std::min(s.a.e, s.b.e), origin_.e, cells_e_);
    const std::size_t e1 = cell_of(std::max(s.a.e, s.b.e), origin_.e, cells_e_);
    const std::size_t n0 = cell_of(std::min(s.a.n, s.b.n), origin_.n, cells_n_);
    const std::size_t n1 = cell_of(std::max(s.a.n, s.b.n), origin_.n, cells_n_);
    for (std::size_t cn = n0; cn <= n1; ++cn) {
      for (std::size_t ce = e0; ce <= e1; ++ce) cells_[cn * cells_e_ + ce].push_back(i);
    }
  }
}

std::size_t RoadNetwork::cell_of(double coord, double origin, std::size_t count) const {
  const double c = std::floor((coord - origin) / cell_size_);
  if (c <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(c), count - 1);
}

std::vector<NearSegment> RoadNetwork::segments_near(Point center, double radius) const {
  std::vector<NearSegment> out;
  if (segments_.empty()) return out;
  // Cells clamp at the border, so queries outside the bounding box still
  // land in the outermost cells.
  const std::size_t e0 = cell_of(center.e - radius, origin_.e, cells_e_);
  const std::size_t e1 = cell_of(center.e + radius, origin_.e, cells_e_);
  const std::size_t n0 = cell_of(center.n - radius, origin_.n, cells_n_);
  const std::size_t n1 = cell_of(center.n + radius, origin_.n, cells_n_);
  std::vector<std::size_t> candidates;
  for (std::size_t cn = n0; cn <= n1; ++cn) {
    for (std::size_t ce = e0; ce <= e1; ++ce) {
      const auto& cell = cells_[cn * cells_e_ + ce];
      candidates.insert(candidates.end(), cell.begin(), cell.end());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const std::size_t i : candidates) {
    const Segment& s = segments_[i];
    const double d = point_segment_distance(center, s.a, s.b);
    if (d <= radius) out.push_back({i, d});
  }
  return out;
}

SegmentFrameOffset ab_coordinates(const RoadNetwork& network, const NetworkPosition& x, Point y) {
  const Point dir = network.segment(x.segment_id).direction();
  const Point d = y - x.point;
  return {cross(dir, d), dot(dir, d)};
}

RoadNetwork make_grid_network(int n, double spacing) {
  if (n < 2) throw NetworkError("grid size must be at least 2");
  if (!(spacing > 0.0)) throw NetworkError("grid spacing must be positive");
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) nodes.push_back({r * n + c, {c * spacing, r * spacing}});
  }
  std::vector<SegmentSpec> segments;
  int id = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c + 1 < n; ++c) segments.push_back({id++, r * n + c, r * n + c + 1});
  }
  for (int r = 0; r + 1 < n; ++r) {
    for (int c = 0; c < n; ++c) segments.push_back({id++, r * n + c, (r + 1) * n + c});
  }
  return RoadNetwork(std::move(nodes), segments);
}

RoadNetwork network_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError(std::string("network JSON parse error: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("segments")) {
    throw NetworkError("network JSON must be an object with \"nodes\" and \"segments\"");
  }
  std::vector<Node> nodes;
  std::vector<SegmentSpec> segments;
  try {
    for (const auto& item : doc.at("nodes")) {
      nodes.push_back({item.at("id").get<int>(), {item.at("e").get<double>(), item.at("n").get<double>()}});
    }
    for (const auto& item : doc.at("segments")) {
      segments.push_back({item.at("id").get<int>(), item.at("u").get<int>(), item.at("v").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("malformed network JSON: ") + e.what());
  }
  return RoadNetwork(std::move(nodes), segments);
}

std::string network_to_json(const RoadNetwork& network) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& node : network.nodes()) {
    doc["nodes"].push_back({{"id", node.id}, {"e", node.p.e}, {"n", node.p.n}});
  }
  doc["segments"] = nlohmann::json::array();
  for (const auto& s : network.segments()) {
    doc["segments"].push_back({{"id", s.id}, {"u", s.u}, {"v", s.v}});
  }
  return doc.dump(1);
}

RoadNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return network_from_json(buffer.str());
}

void save_network(const RoadNetwork& network, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw NetworkError("cannot write network file " + path.string());
  out << network_to_json(network) << '\n';
}

}  // namespace roadpf
