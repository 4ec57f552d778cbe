#include "roversim/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roversim {

double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = (b - a).cross(c - a);
  const double denom = distance(a, b) * distance(b, c) * distance(a, c);
  if (denom <= 0.0) return 0.0;
  return 2.0 * area2 / denom;
}

Path::Path(std::vector<Vec2> waypoints) {
  for (const Vec2& p : waypoints) {
    if (!waypoints_.empty() && distance(waypoints_.back(), p) < 1e-9) continue;
    waypoints_.push_back(p);
  }
  arc_.reserve(waypoints_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < waypoints_.size(); ++i) {
    if (i > 0) s += distance(waypoints_[i - 1], waypoints_[i]);
    arc_.push_back(s);
  }
  if (waypoints_.size() >= 2) {
    const std::size_t segments = waypoints_.size() - 1;
    curvature_.assign(segments, 0.0);
    for (std::size_t i = 0; i + 2 < waypoints_.size(); ++i)
      curvature_[i] = menger_curvature(waypoints_[i], waypoints_[i + 1], waypoints_[i + 2]);
    if (segments >= 2) curvature_[segments - 1] = curvature_[segments - 2];
  }
}

Vec2 Path::point_at(double s) const {
  if (waypoints_.empty()) return {};
  if (s <= 0.0) return waypoints_.front();
  if (s >= length()) return waypoints_.back();
  const auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - arc_.begin());
  const double seg = arc_[i] - arc_[i - 1];
  const double t = seg > 0.0 ? (s - arc_[i - 1]) / seg : 0.0;
  return waypoints_[i - 1] + (waypoints_[i] - waypoints_[i - 1]) * t;
}

std::vector<double> Path::sample_arcs(double step) const {
  std::vector<double> out;
  if (waypoints_.empty()) return out;
  const double len = length();
  const auto n = static_cast<std::size_t>(std::floor(len / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * step);
  if (len - out.back() > 1e-9) out.push_back(len);
  return out;
}

std::vector<Vec2> Path::sample(double step) const {
  std::vector<Vec2> out;
  for (double s : sample_arcs(step)) out.push_back(point_at(s));
  return out;
}

Path::Projection Path::project(const Vec2& p) const {
  Projection best{std::numeric_limits<double>::infinity(), 0.0, 0};
  if (waypoints_.size() == 1) return {distance(p, waypoints_.front()), 0.0, 0};
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const auto proj = project_on_segment(p, waypoints_[i], waypoints_[i + 1]);
    if (proj.distance < best.distance) {
      best = {proj.distance, arc_[i] + proj.t * (arc_[i + 1] - arc_[i]), i};
    }
  }
  return best;
}

Path Path::tail_from(double s) const {
  if (waypoints_.empty()) return {};
  std::vector<Vec2> pts{point_at(s)};
  for (std::size_t i = 0; i < waypoints_.size(); ++i)
    if (arc_[i] > s) pts.push_back(waypoints_[i]);
  return Path(std::move(pts));
}

Path Path::resampled(double step) const { return Path(sample(step)); }

}  // namespace roversim
