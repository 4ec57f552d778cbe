#pragma once

#include <vector>

#include "roversim/gnc.hpp"
#include "roversim/path.hpp"
#include "roversim/rover_state.hpp"

namespace roversim::rover {

// Exact-arc unicycle update; straight line when |omega| < 1e-9.
RoverState step_kinematics(const RoverState& state, double v, double omega, double dt);

struct PursuitResult {
  double curvature = 0.0;  // 1/m, positive turns left
  bool path_complete = false;
  Vec2 target;             // lookahead point, world frame
};

// Pure pursuit: kappa = 2 * y_l / L^2, with the lookahead point taken where
// the circle of radius `lookahead` around the rover meets the path ahead of
// the rover's projection (or the path end when it is closer than that).
PursuitResult pure_pursuit(const RoverState& state, const Path& path, double lookahead);

// Speed-scaled lookahead used by the tracking loop.
inline double lookahead_for_speed(double v) { return v * 2.0 > 1.5 ? v * 2.0 : 1.5; }

inline constexpr double kPointTurnTolerance = 0.5 * std::numbers::pi / 180.0;

struct PointTurn {
  std::vector<RoverState> states;  // one per tick; speed 0, position fixed
  double duration = 0.0;           // |heading change| / point_turn_rate
};

// In-place rotation toward `target_heading` at cfg.point_turn_rate, one state
// per `dt`; the last state lands exactly on the target heading.
PointTurn execute_point_turn(const RoverState& state, double target_heading,
                             const gnc::GncConfig& cfg, double dt = 0.1);

// RMS distance from each logged position to the nearest point of the path
// resampled at 0.05 m.
double rms_cross_track(const std::vector<Vec2>& pose_log, const Path& path);

}  // namespace roversim::rover
