#include "roversim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include "roversim/coord.hpp"
#include "roversim/gnc.hpp"
#include "roversim/path.hpp"
#include "roversim/perception.hpp"
#include "roversim/rng.hpp"
#include "roversim/rover.hpp"
#include "roversim/terrain.hpp"
#include "roversim/travmap.hpp"

namespace roversim::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kTailRecords = 20;
constexpr double kCadenceEps = 1e-9;

json xy(const Vec2& p) { return json::array({p.x, p.y}); }

// Fires on the first tick whose start time enters a new 1/hz period.
class Cadence {
public:
  explicit Cadence(double hz) : hz_(hz) {}
  bool due(double t) {
    const auto period = static_cast<long long>(std::floor(t * hz_ + kCadenceEps));
    if (period < next_) return false;
    next_ = period + 1;
    return true;
  }

private:
  double hz_;
  long long next_ = 0;
};

class Simulation {
public:
  Simulation(const Scenario& sc, const RunOptions& opts, EventLog& log)
      : sc_(sc),
        opts_(opts),
        log_(log),
        world_(terrain::generate_terrain(sc.terrain)),
        map_(static_cast<std::size_t>(sc.terrain.size_cells),
             static_cast<std::size_t>(sc.terrain.size_cells), {0.0, 0.0}, sc.map),
        sense_rng_(Rng::derive(sc.sim.seed, "perception")),
        publish_(sc.detector.publish_hz),
        replan_(sc.gnc.replan_hz) {}

  void run() {
    const double dt = sc_.sim.dt;
    const auto max_ticks = static_cast<std::size_t>(std::ceil(sc_.sim.max_time / dt - kCadenceEps));

    if (sc_.route) {
      course_ = build_course(*sc_.route);
      course_path_ = Path(course_);
      rover_.position = course_.front();
      rover_.heading = sc_.route->start_heading
                           ? normalize_angle(deg2rad(*sc_.route->start_heading))
                           : std::atan2(course_[1].y - course_[0].y, course_[1].x - course_[0].x);
      rover_.mode = NavMode::RAPID;
    }
    log_.push_back({{"type", "header"},
                    {"format", "roversim-log"},
                    {"version", 1},
                    {"scenario", sc_.to_json()},
                    {"start",
                     {{"x", rover_.position.x},
                      {"y", rover_.position.y},
                      {"heading", rover_.heading},
                      {"mode", to_string(rover_.mode)}}}});

    if (sc_.coordination) {
      coord_ = std::make_unique<coord::CoordinationSim>(
          *sc_.coordination, sc_.sim.seed, [this](const json& rec) { log_.push_back(rec); });
    }

    std::string reason = "max_time";
    std::size_t ticks = 0;
    for (std::size_t k = 1; k <= max_ticks; ++k) {
      const double t0 = static_cast<double>(k - 1) * dt;
      if (coord_) {
        coord_->advance_to(t0);
        log_agents(t0);
      }
      if (sc_.route) {
        tick(k, t0, dt);
        ticks = k;
        if (goal_reached_) {
          reason = "goal";
          break;
        }
      } else {
        ticks = k;
        if (coord_->idle()) {
          reason = "idle";
          break;
        }
      }
      if (opts_.map_dump_every > 0 && k % opts_.map_dump_every == 0) dump_map(k);
    }
    const double t_end = static_cast<double>(ticks) * dt;
    if (coord_ && !coord_->idle()) coord_->advance_to(t_end);
    log_.push_back({{"type", "end"}, {"t", t_end}, {"ticks", ticks}, {"reason", reason}});
  }

private:
  void log_agents(double t) {
    json poses = json::array();
    const auto& agents = coord_->agents();
    for (std::size_t i = 0; i < agents.size(); ++i) poses.push_back(xy(coord_->position_of(i, t)));
    log_.push_back({{"type", "agents"}, {"t", t}, {"poses", poses}});
  }

  void tick(std::size_t k, double t0, double dt) {
    const auto& gcfg = sc_.gnc;

    if (sc_.detector.enabled && publish_.due(t0)) sense(t0);
    travmap::decay(map_, dt, sc_.nav.decay_rate);

    update_progress();
    if (replan_.due(t0)) replan(t0);

    std::optional<double> nearest = corridor_hazard();
    gnc::ModeInputs in;
    in.fod_age = last_publish_ ? t0 - *last_publish_ : std::numeric_limits<double>::infinity();
    in.nearest_hazard = nearest;
    in.teleop_active = sc_.teleop.active;
    in.plan_ok = plan_ok_;
    in.rover_speed = rover_.speed;
    const NavMode mode = gnc::mode_transition(rover_.mode, in, gcfg);
    if (mode != rover_.mode) {
      log_.push_back({{"type", "mode"},
                      {"t", t0},
                      {"from", to_string(rover_.mode)},
                      {"to", to_string(mode)}});
      rover_.mode = mode;
    }
    const double v_cmd = gnc::speed_command(mode, nearest, gcfg, sc_.teleop.speed);

    bool turning = false;
    if (!pending_turn_.empty()) {
      advance_turn();
      turning = true;
    } else if (mode == NavMode::SAFE_STOP) {
      const double v = std::max(0.0, rover_.speed - gcfg.a_max * dt);
      rover_ = rover::step_kinematics(rover_, v, 0.0, dt);
    } else {
      const Path& track = path_.empty() ? fallback_path() : path_;
      const auto pp = rover::pure_pursuit(rover_, track, rover::lookahead_for_speed(v_cmd));
      if (v_cmd > 0.0 && !pp.path_complete && gnc::needs_point_turn(pp.curvature, gcfg)) {
        const Vec2 d = pp.target - rover_.position;
        const double target = std::atan2(d.y, d.x);
        auto turn = rover::execute_point_turn(rover_, target, gcfg, dt);
        if (!turn.states.empty()) {
          log_.push_back({{"type", "point_turn"},
                          {"t", t0},
                          {"from", rover_.heading},
                          {"to", turn.states.back().heading},
                          {"curvature", pp.curvature},
                          {"duration", turn.duration}});
          pending_turn_.assign(turn.states.begin(), turn.states.end());
          advance_turn();
          turning = true;
        }
      }
      if (!turning) {
        const double omega = std::clamp(v_cmd * pp.curvature, -gcfg.omega_max, gcfg.omega_max);
        rover_ = rover::step_kinematics(rover_, v_cmd, omega, dt);
      }
    }
    rover_.mode = mode;
    rover_.time = static_cast<double>(k) * dt;

    log_.push_back({{"type", "state"},
                    {"tick", k},
                    {"t", rover_.time},
                    {"x", rover_.position.x},
                    {"y", rover_.position.y},
                    {"heading", rover_.heading},
                    {"v", rover_.speed},
                    {"omega", rover_.omega},
                    {"mode", to_string(mode)},
                    {"v_cmd", v_cmd},
                    {"turning", turning}});

    update_progress();
    const bool on_last_leg = next_index_ + 1 >= course_.size();
    if (on_last_leg && distance(rover_.position, course_.back()) <= sc_.route->goal_tolerance)
      goal_reached_ = true;
  }

  void advance_turn() {
    RoverState next = pending_turn_.front();
    pending_turn_.pop_front();
    next.mode = rover_.mode;
    rover_ = next;
  }

  void sense(double t0) {
    const auto& dcfg = sc_.detector;
    const auto dets = perception::sense(rover_, world_, dcfg, sense_rng_);
    const auto in_view = perception::hazards_in_view(rover_, world_, dcfg).size();
    json arr = json::array();
    for (const auto& d : dets) {
      const Vec2 w = perception::to_world_frame(d, rover_);
      arr.push_back({{"x", w.x},
                     {"y", w.y},
                     {"confidence", d.confidence},
                     {"radius", d.radius},
                     {"match", d.is_ground_truth_match},
                     {"kept", d.confidence >= dcfg.confidence_threshold}});
    }
    for (const auto& d : perception::threshold_detections(dets, dcfg.confidence_threshold)) {
      const double p = std::clamp(d.confidence, 0.01, 0.99);
      travmap::fuse_detection(map_, perception::to_world_frame(d, rover_), p,
                              d.radius + sc_.nav.clearance);
    }
    last_publish_ = t0;
    log_.push_back({{"type", "sense"}, {"t", t0}, {"in_view", in_view}, {"detections", arr}});
  }

  // Monotone progress along the course, searched a few metres ahead so a
  // winding course cannot snap onto a later pass.
  void update_progress() {
    const auto& wp = course_path_.waypoints();
    const auto& arc = course_path_.arc_lengths();
    if (wp.size() < 2) return;
    constexpr double kSearchAhead = 5.0;
    double best_d = std::numeric_limits<double>::infinity();
    double best_arc = progress_;
    for (std::size_t i = progress_seg_; i + 1 < wp.size(); ++i) {
      if (arc[i] > progress_ + kSearchAhead) break;
      const auto pr = project_on_segment(rover_.position, wp[i], wp[i + 1]);
      if (pr.distance < best_d) {
        best_d = pr.distance;
        best_arc = arc[i] + pr.t * (arc[i + 1] - arc[i]);
      }
    }
    if (best_arc > progress_) progress_ = best_arc;
    while (progress_seg_ + 2 < wp.size() && arc[progress_seg_ + 1] <= progress_) ++progress_seg_;

    // Next course waypoint at least a metre ahead of the rover's progress.
    constexpr double kWaypointLead = 1.0;
    const auto& ca = course_arcs();
    std::size_t j = next_index_;
    while (j + 1 < ca.size() && ca[j] < progress_ + kWaypointLead) ++j;
    next_index_ = std::max(next_index_, j);
  }

  const std::vector<double>& course_arcs() {
    if (course_arc_cache_.size() != course_.size()) {
      course_arc_cache_.assign(course_.size(), 0.0);
      for (std::size_t i = 1; i < course_.size(); ++i)
        course_arc_cache_[i] = course_arc_cache_[i - 1] + distance(course_[i - 1], course_[i]);
    }
    return course_arc_cache_;
  }

  void replan(double t0) {
    gnc::RouteOptions ro;
    ro.horizon = sc_.nav.horizon;
    ro.window_margin = sc_.nav.window_margin;
    const auto plan = gnc::plan_route(map_, costs(), rover_.position, course_, next_index_, sc_.gnc, ro);
    plan_ok_ = plan.ok;
    if (plan.ok) path_ = plan.path;
    json pts = json::array();
    if (plan.ok)
      for (const auto& p : plan.path.sample(1.0)) pts.push_back(xy(p));
    log_.push_back({{"type", "plan"},
                    {"t", t0},
                    {"ok", plan.ok},
                    {"legs", plan.legs},
                    {"skipped", plan.skipped_waypoints},
                    {"next_waypoint", next_index_},
                    {"length", plan.ok ? plan.path.length() : 0.0},
                    {"points", pts}});
  }

  // The cost field only matters once the map holds a hazard.
  const Grid2D<double>& costs() {
    const auto& cells = map_.cells().data();
    const double thr = travmap::logit(sc_.map.hazard_prob_threshold) - 1e-12;
    const bool any = std::any_of(cells.begin(), cells.end(), [&](double l) { return l >= thr; });
    if (!any) {
      if (free_costs_.rows() != map_.rows())
        free_costs_ = Grid2D<double>(map_.rows(), map_.cols(), 1.0);
      return free_costs_;
    }
    costs_ = gnc::cost_field(map_);
    return costs_;
  }

  std::optional<double> corridor_hazard() const {
    const double hw = sc_.nav.corridor_half_width;
    if (path_.empty()) {
      const Vec2 ahead = rover_.position + Vec2{std::cos(rover_.heading), std::sin(rover_.heading)} *
                                               sc_.gnc.d_slow;
      return travmap::query_corridor(map_, Path({rover_.position, ahead}), hw);
    }
    const auto proj = path_.project(rover_.position);
    const Path tail = path_.tail_from(proj.arc);
    if (!map_.is_hazard_at(rover_.position)) return travmap::query_corridor(map_, tail, hw);
    // Inside a blob the path leads out of it; only hazards beyond the exit count.
    auto near_hazard = [&](double s) {
      const Vec2 p = tail.point_at(s);
      return travmap::query_corridor(map_, Path({p, p + Vec2{1e-6, 0.0}}), hw).has_value();
    };
    double exit = 0.0;
    while (exit < tail.length() && near_hazard(exit)) exit += map_.cell_size();
    if (exit >= tail.length()) return 0.0;
    const auto ahead = travmap::query_corridor(map_, tail.tail_from(exit), hw);
    if (!ahead) return std::nullopt;
    return exit + *ahead;
  }

  const Path& fallback_path() {
    fallback_ = Path({rover_.position, course_[next_index_]});
    return fallback_;
  }

  void dump_map(std::size_t k) const {
    std::filesystem::create_directories(opts_.map_dump_dir);
    std::ofstream out(std::filesystem::path(opts_.map_dump_dir) /
                      ("ftm_" + std::to_string(k) + ".csv"));
    travmap::write_probability_csv(map_, out);
  }

  const Scenario& sc_;
  const RunOptions& opts_;
  EventLog& log_;
  terrain::TerrainGrid world_;
  travmap::FarTraversabilityMap map_;
  Rng sense_rng_;
  Cadence publish_;
  Cadence replan_;
  std::unique_ptr<coord::CoordinationSim> coord_;

  std::vector<Vec2> course_;
  Path course_path_;
  std::vector<double> course_arc_cache_;
  double progress_ = 0.0;
  std::size_t progress_seg_ = 0;
  std::size_t next_index_ = 1;

  RoverState rover_;
  Path path_;
  Path fallback_;
  bool plan_ok_ = false;
  std::optional<double> last_publish_;
  std::deque<RoverState> pending_turn_;
  Grid2D<double> costs_;
  Grid2D<double> free_costs_;
  bool goal_reached_ = false;
};

std::vector<std::string> tail_of(const EventLog& log) {
  std::vector<std::string> tail;
  const std::size_t from = log.size() > kTailRecords ? log.size() - kTailRecords : 0;
  for (std::size_t i = from; i < log.size(); ++i) tail.push_back(log[i].dump());
  return tail;
}

}  // namespace

EventLog simulate(const Scenario& scenario, const RunOptions& opts) {
  EventLog log;
  try {
    Simulation sim(scenario, opts, log);
    sim.run();
  } catch (const std::exception& e) {
    throw RunError(e.what(), tail_of(log));
  }
  return log;
}

RunResult run(const Scenario& scenario, const RunOptions& opts) {
  RunResult r;
  r.log = simulate(scenario, opts);
  r.metrics = compute_metrics(r.log, scenario);
  return r;
}

}  // namespace roversim::harness
