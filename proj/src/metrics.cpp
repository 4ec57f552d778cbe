#include "roversim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "roversim/coord.hpp"
#include "roversim/errors.hpp"
#include "roversim/path.hpp"
#include "roversim/rover.hpp"
#include "roversim/terrain.hpp"

namespace roversim::harness {

using nlohmann::json;

namespace {

double nominal_speed(NavMode mode, const Scenario& sc) {
  switch (mode) {
    case NavMode::FASTER:
      return sc.gnc.v_cmd_faster;
    case NavMode::RAPID:
      return sc.gnc.v_rapid;
    case NavMode::TELEOP:
      return std::min(sc.teleop.speed, sc.gnc.teleop_speed_cap);
    case NavMode::SAFE_STOP:
      return 0.0;
  }
  return 0.0;
}

double ratio_or_one(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Counts entries of the pose trace into any obstacle footprint, testing each
// straight step between consecutive poses.
std::size_t count_collisions(const std::vector<Vec2>& trace,
                             const std::vector<terrain::HazardSpec>& hazards) {
  std::size_t hits = 0;
  for (const auto& h : hazards) {
    if (!h.is_obstacle()) continue;
    bool inside = !trace.empty() && distance(trace.front(), h.center) < h.radius;
    if (inside) ++hits;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const bool now = project_on_segment(h.center, trace[i - 1], trace[i]).distance < h.radius;
      if (now && !inside) ++hits;
      inside = now && distance(trace[i], h.center) < h.radius;
    }
  }
  return hits;
}

void check_integrity(const EventLog& log) {
  if (log.empty() || log.front().value("type", "") != "header")
    throw LogIntegrityError("event log does not start with a header record");
  if (log.back().value("type", "") != "end")
    throw LogIntegrityError("event log is truncated: no end record");
  const auto ticks = log.back().at("ticks").get<std::size_t>();
  std::size_t states = 0;
  for (const auto& rec : log) {
    if (rec.value("type", "") != "state") continue;
    ++states;
    if (rec.at("tick").get<std::size_t>() != states)
      throw LogIntegrityError("state record out of sequence at tick " + std::to_string(states));
  }
  if (states != 0 && states != ticks)
    throw LogIntegrityError("event log has " + std::to_string(states) + " state records for " +
                            std::to_string(ticks) + " ticks");
}

}  // namespace

Scenario scenario_from_log(const EventLog& log) {
  if (log.empty() || log.front().value("type", "") != "header")
    throw LogIntegrityError("event log does not start with a header record");
  return load_scenario(log.front().at("scenario"));
}

MetricsReport compute_metrics(const EventLog& log, const Scenario& sc) {
  check_integrity(log);
  MetricsReport m;
  m.scenario = sc.name;
  m.config = sc.to_json();
  const double dt = sc.sim.dt;
  m.elapsed_time = log.back().at("t").get<double>();
  m.reached_goal = log.back().value("reason", "") == "goal";
  for (NavMode mode : kAllModes) m.mode_time[mode] = 0.0;

  const auto& start = log.front().at("start");
  std::vector<Vec2> trace{{start.at("x").get<double>(), start.at("y").get<double>()}};
  std::size_t up_ticks = 0;
  std::size_t kept = 0;
  std::size_t kept_true = 0;
  std::vector<std::vector<Vec2>> agent_poses;
  std::vector<json> msgs;

  for (const auto& rec : log) {
    const std::string type = rec.value("type", "");
    if (type == "state") {
      const Vec2 p{rec.at("x").get<double>(), rec.at("y").get<double>()};
      m.distance += distance(trace.back(), p);
      trace.push_back(p);
      const auto mode = nav_mode_from_string(rec.at("mode").get<std::string>());
      if (!mode) throw LogIntegrityError("unknown mode in state record");
      m.mode_time[*mode] += dt;
      const double v = rec.at("v").get<double>();
      const double v_cmd = rec.at("v_cmd").get<double>();
      const bool turning = rec.at("turning").get<bool>();
      if (turning) m.point_turn_time += dt;
      if (!turning && *mode != NavMode::SAFE_STOP && v_cmd > 0.0 && v >= 0.9 * v_cmd) ++up_ticks;
    } else if (type == "point_turn") {
      ++m.point_turn_count;
    } else if (type == "sense") {
      m.hazards_in_view += rec.at("in_view").get<std::size_t>();
      for (const auto& d : rec.at("detections")) {
        if (!d.at("kept").get<bool>()) continue;
        ++kept;
        if (d.at("match").get<bool>()) ++kept_true;
      }
    } else if (type == "agents") {
      const auto& poses = rec.at("poses");
      if (agent_poses.size() < poses.size()) agent_poses.resize(poses.size());
      for (std::size_t i = 0; i < poses.size(); ++i)
        agent_poses[i].push_back({poses[i][0].get<double>(), poses[i][1].get<double>()});
    } else if (type == "msg") {
      msgs.push_back(rec);
    }
  }

  if (m.elapsed_time > 0.0) {
    m.avg_speed = m.distance / m.elapsed_time;
    m.uptime_fraction = std::clamp(static_cast<double>(up_ticks) * dt / m.elapsed_time, 0.0, 1.0);
  }
  m.detections_kept = kept;
  m.detection_precision = ratio_or_one(kept_true, kept);
  m.detection_recall = std::min(1.0, ratio_or_one(kept_true, m.hazards_in_view));

  const terrain::TerrainGrid world = terrain::generate_terrain(sc.terrain);
  if (sc.route) {
    NavMode dominant = NavMode::RAPID;
    double best = -1.0;
    for (NavMode mode : kAllModes)
      if (m.mode_time[mode] > best + 1e-12) {
        best = m.mode_time[mode];
        dominant = mode;
      }
    m.commanded_speed = nominal_speed(dominant, sc);
    m.collisions = count_collisions(trace, world.hazards);
    m.rms_cross_track = rover::rms_cross_track(
        std::vector<Vec2>(trace.begin() + 1, trace.end()), Path(build_course(*sc.route)));
  }

  if (sc.coordination) {
    const auto& cc = *sc.coordination;
    CoordMetrics c;
    c.falls = cc.falls.size();
    std::vector<double> responses;
    for (const auto& rec : log) {
      const std::string type = rec.value("type", "");
      if (type == "alert") responses.push_back(rec.at("response").get<double>());
      if (type == "ack_timeout") ++c.ack_timeouts;
    }
    c.alerts = responses.size();
    c.missed_alerts = c.falls - std::min(c.falls, c.alerts);
    if (!responses.empty()) {
      double sum = 0.0;
      for (double r : responses) sum += r;
      c.mean_response = sum / static_cast<double>(responses.size());
      c.min_response = *std::min_element(responses.begin(), responses.end());
      c.max_response = *std::max_element(responses.begin(), responses.end());
    }
    double last_done = 0.0;
    for (const auto& msg : msgs) {
      ++c.messages_sent;
      if (msg.at("dropped").get<bool>()) ++c.messages_dropped;
      if (msg.at("kind") == "TaskDone" && !msg.at("dropped").get<bool>()) {
        ++c.tasks_completed;
        last_done = std::max(last_done, msg.at("deliver").get<double>());
      }
    }
    if (last_done > 0.0)
      c.task_throughput = static_cast<double>(c.tasks_completed) * 3600.0 / last_done;
    const auto timing = coord::measure_task_completion(msgs);
    c.task_durations = timing.durations;
    if (!timing.durations.empty()) {
      double sum = 0.0;
      for (const auto& [_, d] : timing.durations) sum += d;
      c.mean_task_duration = sum / static_cast<double>(timing.durations.size());
    }
    std::vector<std::vector<Vec2>> secondary;
    for (std::size_t i = 0; i < cc.agents.size() && i < agent_poses.size(); ++i)
      if (cc.agents[i].role == coord::AgentRole::Secondary) secondary.push_back(agent_poses[i]);
    if (!secondary.empty()) c.coverage = coord::coverage_metric(secondary, world, cc.sensor_radius);
    m.coordination = c;
  }
  return m;
}

std::vector<MetricRow> metric_rows(const MetricsReport& r) {
  std::vector<MetricRow> rows = {
      {"elapsed_time", "s", r.elapsed_time},
      {"distance", "m", r.distance},
      {"avg_speed", "m/s", r.avg_speed},
      {"commanded_speed", "m/s", r.commanded_speed},
      {"uptime_fraction", "1", r.uptime_fraction},
      {"point_turn_count", "count", static_cast<double>(r.point_turn_count)},
      {"point_turn_time", "s", r.point_turn_time},
      {"collisions", "count", static_cast<double>(r.collisions)},
      {"detection_precision", "1", r.detection_precision},
      {"detection_recall", "1", r.detection_recall},
      {"rms_cross_track", "m", r.rms_cross_track},
      {"reached_goal", "bool", r.reached_goal ? 1.0 : 0.0},
  };
  for (NavMode mode : kAllModes) {
    const auto it = r.mode_time.find(mode);
    rows.push_back({"mode_time_" + std::string(to_string(mode)), "s",
                    it == r.mode_time.end() ? 0.0 : it->second});
  }
  if (r.coordination) {
    const auto& c = *r.coordination;
    rows.push_back({"falls", "count", static_cast<double>(c.falls)});
    rows.push_back({"alerts", "count", static_cast<double>(c.alerts)});
    rows.push_back({"missed_alerts", "count", static_cast<double>(c.missed_alerts)});
    rows.push_back({"mean_response", "s", c.mean_response});
    rows.push_back({"min_response", "s", c.min_response});
    rows.push_back({"max_response", "s", c.max_response});
    rows.push_back({"ack_timeouts", "count", static_cast<double>(c.ack_timeouts)});
    rows.push_back({"messages_sent", "count", static_cast<double>(c.messages_sent)});
    rows.push_back({"messages_dropped", "count", static_cast<double>(c.messages_dropped)});
    rows.push_back({"tasks_completed", "count", static_cast<double>(c.tasks_completed)});
    rows.push_back({"mean_task_duration", "s", c.mean_task_duration});
    rows.push_back({"task_throughput", "tasks/h", c.task_throughput});
    rows.push_back({"coverage", "1", c.coverage});
  }
  return rows;
}

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "metric,unit,value\n";
  for (const auto& row : metric_rows(report))
    out << row.metric << ',' << row.unit << ',' << json(row.value).dump() << '\n';
}

json MetricsReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  json metrics = json::object();
  for (const auto& row : metric_rows(*this)) metrics[row.metric] = row.value;
  j["metrics"] = metrics;
  if (coordination) {
    json durations = json::object();
    for (const auto& [id, d] : coordination->task_durations) durations[id] = d;
    j["task_durations"] = durations;
  }
  j["config"] = config;
  return j;
}

double daily_traverse_projection(double avg_speed, double ops_hours_per_sol) {
  if (!(ops_hours_per_sol > 0.0))
    throw DomainError("daily_traverse_projection: ops_hours_per_sol must be > 0");
  return avg_speed * 3600.0 * ops_hours_per_sol;
}

double daily_traverse_projection(const MetricsReport& report, double ops_hours_per_sol) {
  return daily_traverse_projection(report.avg_speed, ops_hours_per_sol);
}

}  // namespace roversim::harness
