#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "roversim/event_log.hpp"
#include "roversim/rover_state.hpp"
#include "roversim/scenario.hpp"

namespace roversim::harness {

struct CoordMetrics {
  std::size_t falls = 0;
  std::size_t alerts = 0;
  std::size_t missed_alerts = 0;
  double mean_response = 0.0;  // s, fall to alert delivery
  double min_response = 0.0;
  double max_response = 0.0;
  std::size_t ack_timeouts = 0;
  std::size_t messages_sent = 0;
  std::size_t messages_dropped = 0;
  std::size_t tasks_completed = 0;
  double mean_task_duration = 0.0;  // s, assign sent to done delivered
  double task_throughput = 0.0;     // tasks per hour
  double coverage = 0.0;            // fraction of non-hazard cells seen by secondaries
  std::map<std::string, double> task_durations;
};

struct MetricsReport {
  std::string scenario;
  double elapsed_time = 0.0;
  double distance = 0.0;
  double avg_speed = 0.0;
  double commanded_speed = 0.0;  // nominal speed of the mode held longest
  double uptime_fraction = 0.0;
  std::size_t point_turn_count = 0;
  double point_turn_time = 0.0;
  std::size_t collisions = 0;
  double detection_precision = 1.0;
  double detection_recall = 1.0;
  std::size_t detections_kept = 0;
  std::size_t hazards_in_view = 0;
  double rms_cross_track = 0.0;
  bool reached_goal = false;
  std::map<NavMode, double> mode_time;
  std::optional<CoordMetrics> coordination;
  nlohmann::json config;  // scenario with defaults applied

  nlohmann::json to_json() const;
};

struct MetricRow {
  std::string metric;
  std::string unit;
  double value;
};

// Flat (metric, unit, value) rows in a fixed order.
std::vector<MetricRow> metric_rows(const MetricsReport& report);
void write_metrics_csv(const MetricsReport& report, std::ostream& out);

// Throws LogIntegrityError for a truncated or inconsistent log.
MetricsReport compute_metrics(const EventLog& log, const Scenario& scenario);

// Scenario echoed in the log header.
Scenario scenario_from_log(const EventLog& log);

inline constexpr double kDefaultOpsHoursPerSol = 0.23;

// avg_speed * 3600 * ops_hours_per_sol, in metres per sol.
double daily_traverse_projection(double avg_speed, double ops_hours_per_sol);
double daily_traverse_projection(const MetricsReport& report, double ops_hours_per_sol);

}  // namespace roversim::harness
