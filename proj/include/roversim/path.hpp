#pragma once

#include <cstddef>
#include <vector>

#include "roversim/geometry.hpp"

namespace roversim {

// Polyline with consecutive distinct waypoints. curvature()[i] belongs to
// segment i: the signed curvature of the circle through waypoints i, i+1, i+2
// (the final segment repeats its predecessor, a single segment is straight).
class Path {
public:
  Path() = default;
  // Drops consecutive duplicates (closer than 1e-9 m).
  explicit Path(std::vector<Vec2> waypoints);

  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  const std::vector<double>& curvature() const { return curvature_; }
  const std::vector<double>& arc_lengths() const { return arc_; }
  bool empty() const { return waypoints_.empty(); }
  std::size_t size() const { return waypoints_.size(); }
  double length() const { return arc_.empty() ? 0.0 : arc_.back(); }

  Vec2 point_at(double s) const;
  // Points every `step` metres along the path, always including the end.
  std::vector<Vec2> sample(double step) const;
  std::vector<double> sample_arcs(double step) const;

  struct Projection {
    double distance;
    double arc;
    std::size_t segment;
  };
  Projection project(const Vec2& p) const;

  // Sub-path from arc position `s` to the end.
  Path tail_from(double s) const;
  Path resampled(double step) const;

private:
  std::vector<Vec2> waypoints_;
  std::vector<double> curvature_;
  std::vector<double> arc_;
};

// Signed curvature of the circle through three points (0 when collinear).
double menger_curvature(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace roversim
