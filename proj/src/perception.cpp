#include "roversim/perception.hpp"

#include <algorithm>
#include <cmath>

#include "roversim/errors.hpp"

namespace roversim::perception {

void DetectorConfig::validate() const {
  if (!(max_range > 0.0)) throw ValidationError("detector.max_range", "must be > 0");
  if (!(reliability >= 0.0 && reliability <= 1.0))
    throw ValidationError("detector.reliability", "must lie in [0, 1]");
  if (!(publish_hz >= 1.0 && publish_hz <= 5.0))
    throw ValidationError("detector.publish_hz", "must lie in [1, 5] Hz");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    throw ValidationError("detector.confidence_threshold", "must lie in [0, 1]");
  if (!(range_noise_frac >= 0.0)) throw ValidationError("detector.range_noise_frac", "must be >= 0");
  if (!(bearing_noise >= 0.0)) throw ValidationError("detector.bearing_noise", "must be >= 0");
  if (!(false_positive_rate >= 0.0))
    throw ValidationError("detector.false_positive_rate", "must be >= 0");
  if (!(fov > 0.0 && fov <= 360.0)) throw ValidationError("detector.fov", "must lie in (0, 360]");
  if (!(false_positive_radius > 0.0))
    throw ValidationError("detector.false_positive_radius", "must be > 0");
}

Vec2 to_world_frame(const Vec2& rel, const RoverState& rover) {
  const double c = std::cos(rover.heading);
  const double s = std::sin(rover.heading);
  return {rover.position.x + c * rel.x - s * rel.y, rover.position.y + s * rel.x + c * rel.y};
}

Vec2 to_world_frame(const Detection& det, const RoverState& rover) {
  return to_world_frame(det.relative_position, rover);
}

Vec2 to_rover_frame(const Vec2& world, const RoverState& rover) {
  const double c = std::cos(rover.heading);
  const double s = std::sin(rover.heading);
  const Vec2 d = world - rover.position;
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

std::vector<std::size_t> hazards_in_view(const RoverState& rover, const terrain::TerrainGrid& world,
                                         const DetectorConfig& cfg) {
  const double half_fov = deg2rad(cfg.fov) / 2.0;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < world.hazards.size(); ++i) {
    const auto& hz = world.hazards[i];
    if (!hz.is_obstacle()) continue;
    const Vec2 rel = to_rover_frame(hz.center, rover);
    if (rel.norm() > cfg.max_range) continue;
    if (std::abs(std::atan2(rel.y, rel.x)) > half_fov) continue;
    out.push_back(i);
  }
  return out;
}

std::vector<Detection> sense(const RoverState& rover, const terrain::TerrainGrid& world,
                             const DetectorConfig& cfg, Rng& rng) {
  if (!world.inside(rover.position)) throw BoundsError("sense: rover outside world bounds");

  const double range_cap = cfg.max_range * 1.1;
  std::vector<Detection> out;
  for (std::size_t idx : hazards_in_view(rover, world, cfg)) {
    if (!rng.bernoulli(cfg.reliability)) continue;
    const auto& hz = world.hazards[idx];
    const Vec2 rel = to_rover_frame(hz.center, rover);
    const double range = rel.norm();
    double noisy_range = rng.normal(range, range * cfg.range_noise_frac);
    noisy_range = std::clamp(noisy_range, 0.0, range_cap);
    const double bearing = rng.normal(std::atan2(rel.y, rel.x), deg2rad(cfg.bearing_noise));
    Detection d;
    d.relative_position = {noisy_range * std::cos(bearing), noisy_range * std::sin(bearing)};
    d.confidence = rng.beta(kTrueConfidenceAlpha, kTrueConfidenceBeta);
    d.timestamp = rover.time;
    d.radius = hz.radius;
    d.is_ground_truth_match = true;
    out.push_back(d);
  }

  const std::uint64_t spurious = rng.poisson(cfg.false_positive_rate);
  const double half_fov = deg2rad(cfg.fov) / 2.0;
  for (std::uint64_t i = 0; i < spurious; ++i) {
    // Uniform over the sector's area.
    const double r = cfg.max_range * std::sqrt(rng.uniform01());
    const double bearing = rng.uniform(-half_fov, half_fov);
    Detection d;
    d.relative_position = {r * std::cos(bearing), r * std::sin(bearing)};
    d.confidence = rng.beta(kFalseConfidenceAlpha, kFalseConfidenceBeta);
    d.timestamp = rover.time;
    d.radius = cfg.false_positive_radius;
    d.is_ground_truth_match = false;
    out.push_back(d);
  }
  return out;
}

std::vector<Detection> threshold_detections(const std::vector<Detection>& dets, double tau) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [tau](const Detection& d) { return d.confidence >= tau; });
  return out;
}

}  // namespace roversim::perception
