#include "roversim/rover.hpp"

#include <cmath>
#include <limits>

namespace roversim::rover {

RoverState step_kinematics(const RoverState& state, double v, double omega, double dt) {
  RoverState next = state;
  const double th = state.heading;
  if (std::abs(omega) < 1e-9) {
    next.position = state.position + Vec2{std::cos(th), std::sin(th)} * (v * dt);
    next.heading = normalize_angle(th);
  } else {
    const double th1 = th + omega * dt;
    const double r = v / omega;
    next.position = state.position +
                    Vec2{r * (std::sin(th1) - std::sin(th)), -r * (std::cos(th1) - std::cos(th))};
    next.heading = normalize_angle(th1);
  }
  next.speed = v;
  next.omega = omega;
  next.time = state.time + dt;
  return next;
}

PursuitResult pure_pursuit(const RoverState& state, const Path& path, double lookahead) {
  PursuitResult res;
  const auto& pts = path.waypoints();
  if (pts.empty()) {
    res.path_complete = true;
    res.target = state.position;
    return res;
  }
  const Vec2 heading_vec{std::cos(state.heading), std::sin(state.heading)};
  if (pts.size() == 1) {
    res.target = pts.front();
  } else {
    const auto proj = path.project(state.position);
    const Vec2 end = pts.back();
    const Vec2 end_dir = end - pts[pts.size() - 2];
    if (proj.arc >= path.length() - 1e-9 && (state.position - end).dot(end_dir) >= 0.0) {
      res.path_complete = true;
      res.target = end;
      return res;
    }
    // First crossing of the lookahead circle beyond the projection.
    bool found = false;
    for (std::size_t i = proj.segment; i + 1 < pts.size() && !found; ++i) {
      const Vec2 a = pts[i] - state.position;
      const Vec2 d = pts[i + 1] - pts[i];
      const double qa = d.dot(d);
      const double qb = 2.0 * a.dot(d);
      const double qc = a.dot(a) - lookahead * lookahead;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (qa <= 0.0 || disc < 0.0) continue;
      const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
      const double seg_start_arc = path.arc_lengths()[i];
      const double arc = seg_start_arc + t * std::sqrt(qa);
      if (t >= 0.0 && t <= 1.0 && arc >= proj.arc) {
        res.target = pts[i] + d * t;
        found = true;
      }
    }
    if (!found) res.target = end;
  }
  const Vec2 rel = res.target - state.position;
  const double c = heading_vec.x;
  const double s = heading_vec.y;
  const double y_l = -s * rel.x + c * rel.y;
  const double d2 = rel.dot(rel);
  res.curvature = d2 > 1e-12 ? 2.0 * y_l / d2 : 0.0;
  return res;
}

PointTurn execute_point_turn(const RoverState& state, double target_heading,
                             const gnc::GncConfig& cfg, double dt) {
  PointTurn turn;
  const double target = normalize_angle(target_heading);
  const double delta = normalize_angle(target - state.heading);
  if (std::abs(delta) < kPointTurnTolerance) return turn;

  turn.duration = std::abs(delta) / cfg.point_turn_rate;
  const double max_step = cfg.point_turn_rate * dt;
  const double dir = delta > 0.0 ? 1.0 : -1.0;
  RoverState cur = state;
  cur.speed = 0.0;
  double remaining = std::abs(delta);
  while (remaining > 0.0) {
    const double step = std::min(max_step, remaining);
    remaining -= step;
    cur.heading = remaining > 0.0 ? normalize_angle(cur.heading + dir * step) : target;
    cur.omega = dir * step / dt;
    cur.time += dt;
    turn.states.push_back(cur);
  }
  return turn;
}

double rms_cross_track(const std::vector<Vec2>& pose_log, const Path& path) {
  if (pose_log.empty() || path.empty()) return 0.0;
  const std::vector<Vec2> dense = path.sample(0.05);
  double sum = 0.0;
  for (const Vec2& p : pose_log) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : dense) {
      const double dx = p.x - q.x;
      const double dy = p.y - q.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    sum += best;
  }
  return std::sqrt(sum / static_cast<double>(pose_log.size()));
}

}  // namespace roversim::rover
