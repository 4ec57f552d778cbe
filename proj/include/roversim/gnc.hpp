#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "roversim/geometry.hpp"
#include "roversim/grid.hpp"
#include "roversim/path.hpp"
#include "roversim/rover_state.hpp"
#include "roversim/travmap.hpp"

namespace roversim::gnc {

struct GncConfig {
  double v_cmd_faster = 0.7;           // m/s
  double v_rapid = 0.1;                // m/s
  double d_stop = 1.5;                 // m
  double d_slow = 10.0;                // m
  double replan_hz = 2.0;
  double min_turn_radius = 2.0;        // m
  double fod_staleness_timeout = 2.0;  // s
  double a_max = 0.5;                  // m/s^2, braking
  double point_turn_rate = 0.3;        // rad/s
  double omega_max = 0.4;              // rad/s, turn-rate limit while driving
  double teleop_speed_cap = 1.2;       // m/s

  // Throws ValidationError; includes the braking feasibility check
  // a_max >= v_cmd_faster^2 / (2 d_stop).
  void validate() const;
  bool operator==(const GncConfig&) const = default;
};

// t = d / v.
double reaction_time(double d_detection, double v_traverse);

// (new - baseline) / baseline * 100.
double improvement_ratio(double new_value, double baseline);

// v^2 / (2 a).
double stopping_distance(double v, double a_max);

bool needs_point_turn(double segment_curvature, const GncConfig& cfg);

struct ModeInputs {
  double fod_age = std::numeric_limits<double>::infinity();  // s since last publish
  std::optional<double> nearest_hazard;                        // m along the path
  bool teleop_active = false;
  bool plan_ok = true;
  double rover_speed = 0.0;
};

NavMode mode_transition(NavMode current, const ModeInputs& in, const GncConfig& cfg);

// `operator_speed` is only read in TELEOP.
double speed_command(NavMode mode, std::optional<double> nearest_hazard, const GncConfig& cfg,
                     double operator_speed = 0.0);

// ---------------------------------------------------------------------------
// Grid planning

// Per-cell edge-cost multiplier: +inf on hazard cells, 1 + 4 * p on cells
// within two cells of a hazard (p = highest hazard probability nearby), 1 elsewhere.
Grid2D<double> cost_field(const travmap::FarTraversabilityMap& map);

inline constexpr double kProximityGain = 4.0;
inline constexpr int kProximityCells = 2;

// Per-cell multiplier for leaving a hazard blob the search starts inside.
inline constexpr double kEscapeCost = 10.0;

struct SearchWindow {
  long row_min, row_max, col_min, col_max;
};

struct PlanResult {
  Path path;                              // smoothed
  Path polyline;                          // line-of-sight shortcut of the cell path
  std::vector<travmap::CellIndex> cells;  // raw A* cells, start to goal
  double cost = 0.0;                      // grid cost of `cells`
};

// 8-connected A* over non-hazard cells; diagonal moves may not cut a hazard
// corner. A start inside a hazard blob may path out of it at kEscapeCost.
// Throws UnreachableError when no route exists, BoundsError when an endpoint
// is outside the map.
PlanResult plan_path(const travmap::FarTraversabilityMap& map, const Vec2& start, const Vec2& goal,
                     const GncConfig& cfg);
PlanResult plan_path(const travmap::FarTraversabilityMap& map, const Grid2D<double>& costs,
                     const Vec2& start, const Vec2& goal, const GncConfig& cfg,
                     std::optional<SearchWindow> window = std::nullopt);

// Cost of a cell sequence under `costs` (edge length times destination multiplier).
double grid_path_cost(const std::vector<travmap::CellIndex>& cells, const Grid2D<double>& costs,
                      double cell_size);

bool line_of_sight(const travmap::FarTraversabilityMap& map, const Vec2& a, const Vec2& b);

// Length of a-b times the mean cost multiplier of the cells it crosses; +inf
// through any hazard cell other than the one holding `a`.
double segment_cost(const travmap::FarTraversabilityMap& map, const Grid2D<double>& costs,
                    const Vec2& a, const Vec2& b);

// Rounds polyline corners with circular fillets. The radius is the largest
// that fits the adjacent segments, capped at twice min_turn_radius; corners
// too tight for min_turn_radius keep the tighter fillet.
Path smooth_path(const Path& polyline, const GncConfig& cfg, double spacing = 0.25);

// Map-aware variant: a fillet shrinks (down to the bare corner) until its arc
// crosses no cell costlier than those under the two segments it replaces.
Path smooth_path(const Path& polyline, const GncConfig& cfg,
                 const travmap::FarTraversabilityMap& map, const Grid2D<double>& costs,
                 double spacing = 0.25);

struct RoutePlan {
  Path path;
  bool ok = false;
  std::size_t legs = 0;
  std::size_t skipped_waypoints = 0;
};

struct RouteOptions {
  double horizon = 20.0;        // metres of course ahead to plan through
  double window_margin = 8.0;   // metres around each leg for A*
  std::size_t max_skips = 12;   // consecutive unreachable waypoints before failing
};

// Chains grid plans from the rover through the course waypoints starting at
// `next_index`, skipping waypoints that sit in hazard cells or are unreachable.
RoutePlan plan_route(const travmap::FarTraversabilityMap& map, const Grid2D<double>& costs,
                     const Vec2& rover, const std::vector<Vec2>& course, std::size_t next_index,
                     const GncConfig& cfg, const RouteOptions& opts = {});

}  // namespace roversim::gnc
