#pragma once

#include <cstddef>
#include <vector>

#include "roversim/geometry.hpp"
#include "roversim/rng.hpp"
#include "roversim/rover_state.hpp"
#include "roversim/terrain.hpp"

namespace roversim::perception {

struct DetectorConfig {
  double max_range = 20.0;            // metres
  double reliability = 0.95;          // per publish cycle, per in-view hazard
  double publish_hz = 1.0;            // [1, 5]
  double confidence_threshold = 0.5;  // detections below are discarded
  double range_noise_frac = 0.02;     // 1-sigma, fraction of range
  double bearing_noise = 1.0;         // 1-sigma, degrees
  double false_positive_rate = 0.05;  // mean spurious detections per cycle
  double fov = 90.0;                  // full width, degrees
  double false_positive_radius = 0.5; // footprint reported for spurious hits
  bool enabled = true;

  void validate() const;
  bool operator==(const DetectorConfig&) const = default;
};

// Confidence distributions: hits ~ Beta(8, 2), spurious ~ Beta(2, 5).
inline constexpr double kTrueConfidenceAlpha = 8.0;
inline constexpr double kTrueConfidenceBeta = 2.0;
inline constexpr double kFalseConfidenceAlpha = 2.0;
inline constexpr double kFalseConfidenceBeta = 5.0;

struct Detection {
  Vec2 relative_position;  // rover frame: x forward, y left
  double confidence = 0.0;
  double timestamp = 0.0;
  double radius = 0.0;     // reported hazard footprint
  bool is_ground_truth_match = false;  // telemetry only
};

// Indices of obstacle hazards (boulders, craters) inside range and field of view.
std::vector<std::size_t> hazards_in_view(const RoverState& rover, const terrain::TerrainGrid& world,
                                         const DetectorConfig& cfg);

// One publish cycle of the far obstacle detector.
std::vector<Detection> sense(const RoverState& rover, const terrain::TerrainGrid& world,
                             const DetectorConfig& cfg, Rng& rng);

std::vector<Detection> threshold_detections(const std::vector<Detection>& dets, double tau);

Vec2 to_world_frame(const Detection& det, const RoverState& rover);
Vec2 to_world_frame(const Vec2& relative, const RoverState& rover);
Vec2 to_rover_frame(const Vec2& world, const RoverState& rover);

}  // namespace roversim::perception
