#include "roadpf/sensor_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

namespace roadpf {

void ObservationModel::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("observation sigma must be positive");
  if (!(truncation_k >= 3.0)) throw std::invalid_argument("truncation_k must be at least 3");
}

void TransitionModel::validate() const {
  if (!(sigma_floor > 0.0)) throw std::invalid_argument("transition sigma_floor must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("transition alpha must be non-negative");
}

double TransitionModel::sigma(double u) const { return std::max(sigma_floor, alpha * u); }

double observation_density(const ObservationModel& model, const NetworkPosition& x, GpsPoint y) {
  const double de = y.e - x.point.e;
  const double dn = y.n - x.point.n;
  const double var = model.sigma * model.sigma;
  return std::exp(-(de * de + dn * dn) / (2.0 * var)) / (2.0 * std::numbers::pi * var);
}

ObservationProposal::ObservationProposal(const ObservationModel& model, const RoadNetwork& network,
                                         GpsPoint y)
    : network_(&network), model_(model), y_(y) {
  model_.validate();
  const double radius = model_.truncation_radius();
  const double sigma = model_.sigma;
  for (const auto& near : network.segments_near(y, radius)) {
    const Segment& s = network.segments()[near.index];
    const Point dir = s.direction();
    Component c;
    c.segment_index = near.index;
    c.foot = dot(y - s.a, dir);
    c.perp = std::abs(cross(dir, y - s.a));
    const double half_chord = std::sqrt(std::max(0.0, radius * radius - c.perp * c.perp));
    c.lo = std::max(0.0, c.foot - half_chord);
    c.hi = std::min(s.length, c.foot + half_chord);
    if (!(c.hi > c.lo)) continue;
    c.mass = normal_pdf(c.perp, 0.0, sigma) *
             std_normal_mass((c.lo - c.foot) / sigma, (c.hi - c.foot) / sigma);
    if (!(c.mass > 0.0)) continue;
    normalizer_ += c.mass;
    components_.push_back(c);
    cumulative_.push_back(normalizer_);
  }
}

ProposalDraw ObservationProposal::sample(Rng& rng) const {
  if (empty()) {
    throw NoCandidateSegments("no road segment within " + std::to_string(model_.truncation_radius()) +
                              " m of (" + std::to_string(y_.e) + ", " + std::to_string(y_.n) + ")");
  }
  const double pick = uniform01(rng) * normalizer_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
  if (it == cumulative_.end()) --it;
  const Component& c = components_[static_cast<std::size_t>(it - cumulative_.begin())];
  const double sigma = model_.sigma;
  const double z = sample_truncated_std_normal((c.lo - c.foot) / sigma, (c.hi - c.foot) / sigma, rng);
  const double offset = std::clamp(c.foot + sigma * z, c.lo, c.hi);
  const Segment& s = network_->segments()[c.segment_index];
  ProposalDraw draw;
  draw.position = {s.id, offset, s.point_at(offset)};
  draw.proposal_density = observation_density(model_, draw.position, y_) / normalizer_;
  return draw;
}

double ObservationProposal::density(const NetworkPosition& x) const {
  if (empty() || !network_->has_segment(x.segment_id)) return 0.0;
  const std::size_t index = network_->segment_index(x.segment_id);
  constexpr double kSlack = 1e-9;
  for (const auto& c : components_) {
    if (c.segment_index != index) continue;
    if (x.offset < c.lo - kSlack || x.offset > c.hi + kSlack) return 0.0;
    return observation_density(model_, x, y_) / normalizer_;
  }
  return 0.0;
}

ProposalDraw sample_observation_proposal(const ObservationModel& model, const RoadNetwork& network,
                                         GpsPoint y, Rng& rng) {
  return ObservationProposal(model, network, y).sample(rng);
}

double proposal_density(const ObservationModel& model, const RoadNetwork& network, GpsPoint y,
                        const NetworkPosition& x) {
  return ObservationProposal(model, network, y).density(x);
}

double transition_density(const TransitionModel& model, Point prev, Point cur, double u) {
  const double sigma = model.sigma(u);
  const double z = (distance(prev, cur) - u) / sigma;
  // exp underflows to exactly zero past this point anyway.
  if (z * z > 1500.0) return 0.0;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

double transition_density(const TransitionModel& model, const NetworkPosition& x_prev,
                          const NetworkPosition& x_cur, double u) {
  return transition_density(model, x_prev.point, x_cur.point, u);
}

TransitionKernel::TransitionKernel(const TransitionModel& model, const RoadNetwork& network, Point from,
                                   double u, double k_sigma)
    : network_(&network), from_(from), u_(u), sigma_(model.sigma(u)) {
  const double r_in = std::max(0.0, u - k_sigma * sigma_);
  const double r_out = u + k_sigma * sigma_;
  // Pieces are monotone in radius and no longer than one sigma, so an
  // 8-point Gauss rule integrates each to near machine precision.
  const double max_piece = sigma_;
  using Quadrature = boost::math::quadrature::gauss<double, 8>;

  for (const auto& near : network.segments_near(from, r_out)) {
    const Segment& s = network.segments()[near.index];
    const Point dir = s.direction();
    const double foot = dot(from - s.a, dir);
    const double perp = std::abs(cross(dir, from - s.a));
    if (perp > r_out) continue;
    const double h_out = std::sqrt(r_out * r_out - perp * perp);
    const double h_in = perp < r_in ? std::sqrt(r_in * r_in - perp * perp) : 0.0;
    const double bands[2][2] = {{foot - h_out, foot - h_in}, {foot + h_in, foot + h_out}};
    for (const auto& band : bands) {
      const double lo = std::max(0.0, band[0]);
      const double hi = std::min(s.length, band[1]);
      if (!(hi > lo)) continue;
      const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / max_piece));
      const double step = (hi - lo) / static_cast<double>(count);
      for (std::size_t k = 0; k < count; ++k) {
        const double s0 = lo + step * static_cast<double>(k);
        const double s1 = k + 1 == count ? hi : s0 + step;
        const double m = Quadrature::integrate([&](double t) { return value_at(s, t); }, s0, s1);
        if (!(m > 0.0)) continue;
        mass_ += m;
        pieces_.push_back({near.index, s0, s1});
        cumulative_.push_back(mass_);
      }
    }
  }
}

double TransitionKernel::value_at(const Segment& s, double offset) const {
  const double z = (distance(s.point_at(offset), from_) - u_) / sigma_;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma_);
}

NetworkPosition TransitionKernel::sample(Rng& rng) const {
  if (empty()) throw std::logic_error("sampling from an empty transition kernel");
  const double pick = uniform01(rng) * mass_;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
  if (it == cumulative_.end()) --it;
  const Piece& piece = pieces_[static_cast<std::size_t>(it - cumulative_.begin())];
  const Segment& s = network_->segments()[piece.segment_index];

  // Radius is monotone on a piece, so its extremes sit at the ends and the
  // kernel peak on the piece is attained at the radius closest to u.
  const double r0 = distance(s.point_at(piece.s0), from_);
  const double r1 = distance(s.point_at(piece.s1), from_);
  const double r_peak = std::clamp(u_, std::min(r0, r1), std::max(r0, r1));
  const double z_peak = (r_peak - u_) / sigma_;
  const double bound = std::exp(-0.5 * z_peak * z_peak) / (std::sqrt(2.0 * std::numbers::pi) * sigma_);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double offset = piece.s0 + uniform01(rng) * (piece.s1 - piece.s0);
    if (uniform01(rng) * bound <= value_at(s, offset)) return {s.id, offset, s.point_at(offset)};
  }
  const double mid = 0.5 * (piece.s0 + piece.s1);
  return {s.id, mid, s.point_at(mid)};
}

}  // namespace roadpf
