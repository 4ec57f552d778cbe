#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "roversim/coord.hpp"
#include "roversim/gnc.hpp"
#include "roversim/perception.hpp"
#include "roversim/terrain.hpp"
#include "roversim/travmap.hpp"

namespace roversim::harness {

struct WindingSegment {
  double kappa_max = 0.3;   // 1/m, peak curvature
  double wavelength = 20.0; // m of arc per curvature period
  double length = 40.0;     // m of arc in this segment
  bool operator==(const WindingSegment&) const = default;
};

struct RouteSpec {
  enum class Type { Waypoints, Goal, Winding };
  Type type = Type::Goal;
  std::vector<Vec2> points;  // Waypoints
  Vec2 start;                // Goal, Winding
  Vec2 goal;                 // Goal
  double heading = 0.0;      // Winding: mean course heading, degrees
  std::vector<WindingSegment> segments;
  double spacing = 1.0;      // m between generated course waypoints
  std::optional<double> start_heading;  // degrees; default faces the course
  double goal_tolerance = 1.0;
};

struct NavSpec {
  double decay_rate = 0.02;          // log-odds per second
  double clearance = 0.5;            // m added to reported hazard radii when fusing
  double corridor_half_width = 0.25; // m
  double horizon = 20.0;             // m of course planned ahead
  double window_margin = 8.0;        // m
  bool operator==(const NavSpec&) const = default;
};

struct TeleopSpec {
  bool active = false;
  double speed = 1.2;
};

struct SimSpec {
  double dt = 0.1;
  double max_time = 600.0;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::string name = "scenario";
  terrain::TerrainParams terrain;
  perception::DetectorConfig detector;
  gnc::GncConfig gnc;
  travmap::MapConfig map;
  NavSpec nav;
  std::optional<RouteSpec> route;
  TeleopSpec teleop;
  std::optional<coord::CoordConfig> coordination;
  SimSpec sim;

  // Full document with every default filled in; load_scenario(to_json()) round-trips.
  nlohmann::json to_json() const;
};

// Validates against the scenario schema: unknown keys and constraint
// violations throw ValidationError naming the JSON path.
Scenario load_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

// Course waypoints for the route, `spacing` metres apart.
std::vector<Vec2> build_course(const RouteSpec& route);

}  // namespace roversim::harness
