#include <cmath>
#include <sstream>

#include "doctest.h"

#include "roversim/errors.hpp"
#include "roversim/event_log.hpp"
#include "roversim/metrics.hpp"
#include "roversim/scenario.hpp"
#include "roversim/simulation.hpp"
#include "roversim/sweep.hpp"

using namespace roversim;
using namespace roversim::harness;
using nlohmann::json;

namespace {

std::string field_of(const json& doc) {
  try {
    load_scenario(doc);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

json short_corridor() {
  return {{"name", "short"},
          {"terrain", {{"size_cells", 96}, {"seed", 4}}},
          {"route", {{"type", "goal"}, {"start", {4.0, 24.0}}, {"goal", {34.0, 24.0}}}},
          {"sim", {{"max_time", 120}, {"seed", 3}}}};
}

// Log of `ticks` states along +x; ticks flagged in `turning` sit still.
EventLog synthetic_log(const Scenario& sc, int ticks, const std::vector<bool>& turning) {
  EventLog log;
  log.push_back({{"type", "header"},
                 {"scenario", sc.to_json()},
                 {"start", {{"x", 4.0}, {"y", 24.0}, {"heading", 0.0}, {"mode", "FASTER"}}}});
  double x = 4.0;
  const double dt = sc.sim.dt, v = sc.gnc.v_cmd_faster;
  for (int k = 1; k <= ticks; ++k) {
    const bool turn = turning[k - 1];
    if (!turn) x += v * dt;
    log.push_back({{"type", "state"}, {"tick", k}, {"t", k * dt}, {"x", x}, {"y", 24.0}, {"heading", 0.0},
                   {"v", turn ? 0.0 : v}, {"omega", turn ? 0.3 : 0.0}, {"mode", "FASTER"}, {"v_cmd", v},
                   {"turning", turn}});
  }
  log.push_back({{"type", "end"}, {"t", ticks * dt}, {"ticks", ticks}, {"reason", "max_time"}});
  return log;
}

std::size_t count_type(const EventLog& log, const std::string& type) {
  return static_cast<std::size_t>(
      std::count_if(log.begin(), log.end(), [&](const json& r) { return r.at("type") == type; }));
}

}  // namespace

TEST_CASE("minimal document gets the documented defaults") {
  const Scenario sc = load_scenario(json::object());
  CHECK(sc.sim.dt == 0.1);
  CHECK(sc.detector.publish_hz == 1.0);
  CHECK(sc.detector.max_range == 20.0);
  CHECK(sc.detector.reliability == 0.95);
  CHECK(sc.gnc.d_stop == 1.5);
  CHECK(sc.gnc.d_slow == 10.0);
  CHECK(sc.gnc.replan_hz == 2.0);
  CHECK(sc.map.hazard_prob_threshold == 0.7);
  CHECK(sc.terrain.slope_threshold == 15.0);
  CHECK_FALSE(sc.route);
  CHECK_FALSE(sc.coordination);
}

TEST_CASE("schema violations name the path and constraint") {
  CHECK_THROWS_WITH_AS(load_scenario({{"detector", {{"publish_hz", 7}}}}), doctest::Contains("[1, 5]"),
                       ValidationError);
  CHECK(field_of({{"detector", {{"publish_hz", 7}}}}) == "detector.publish_hz");
  CHECK(field_of({{"gnc", {{"d_stop", 12}}}}) == "gnc.d_stop");
  CHECK(field_of({{"gnc", {{"v_cmd_fastr", 1.0}}}}) == "gnc.v_cmd_fastr");
  CHECK(field_of({{"bogus", 1}}) == "bogus");
  CHECK(field_of({{"sim", {{"dt", 0.0}}}}) == "sim.dt");
  CHECK(field_of({{"terrain", {{"size_cells", 4}}}}) == "terrain.size_cells");
  CHECK(field_of({{"gnc", {{"v_rapid", "fast"}}}}) == "gnc.v_rapid");
  json outside = short_corridor();
  outside["route"]["goal"] = {100.0, 24.0};
  CHECK(field_of(outside) == "route");
}

TEST_CASE("scenario documents round-trip with defaults filled in") {
  for (const char* name : {"corridor_faster_0p7", "winding_faster_1p0", "coord_latency", "coverage_dual",
                           "field_mix", "teleop_straight_1p2"}) {
    const Scenario sc = load_scenario_file(std::string(ROVERSIM_SCENARIO_DIR) + "/" + name + ".json");
    const json full = sc.to_json();
    CHECK(load_scenario(full).to_json() == full);
  }
}

TEST_CASE("synthetic log at commanded speed has full uptime") {
  const Scenario sc = load_scenario(short_corridor());
  const auto m = compute_metrics(synthetic_log(sc, 100, std::vector<bool>(100, false)), sc);
  CHECK(m.uptime_fraction == doctest::Approx(1.0));
  CHECK(m.avg_speed == doctest::Approx(sc.gnc.v_cmd_faster));
  CHECK(m.commanded_speed == sc.gnc.v_cmd_faster);
  CHECK(m.point_turn_time == 0.0);
}

TEST_CASE("half the time point-turning halves uptime and speed") {
  const Scenario sc = load_scenario(short_corridor());
  std::vector<bool> turning(100, false);
  for (int k = 0; k < 100; k += 2) turning[k] = true;
  const auto m = compute_metrics(synthetic_log(sc, 100, turning), sc);
  CHECK(m.uptime_fraction == doctest::Approx(0.5));
  CHECK(m.avg_speed == doctest::Approx(0.5 * sc.gnc.v_cmd_faster));
  CHECK(m.point_turn_time == doctest::Approx(5.0));
  CHECK(std::abs(m.avg_speed - m.uptime_fraction * m.commanded_speed) <= 1e-9);
}

TEST_CASE("truncated and inconsistent logs are integrity errors") {
  const Scenario sc = load_scenario(short_corridor());
  EventLog log = synthetic_log(sc, 20, std::vector<bool>(20, false));
  EventLog truncated(log.begin(), log.end() - 1);
  CHECK_THROWS_AS(compute_metrics(truncated, sc), LogIntegrityError);
  EventLog gap = log;
  gap.erase(gap.begin() + 5);
  CHECK_THROWS_AS(compute_metrics(gap, sc), LogIntegrityError);
  EventLog headless(log.begin() + 1, log.end());
  CHECK_THROWS_AS(compute_metrics(headless, sc), LogIntegrityError);
  std::istringstream bad("{\"type\":\"header\"}\nnot json\n");
  CHECK_THROWS_AS(read_jsonl(bad), LogIntegrityError);
}

TEST_CASE("JSON-lines log round-trips") {
  const Scenario sc = load_scenario(short_corridor());
  const EventLog log = synthetic_log(sc, 10, std::vector<bool>(10, false));
  std::istringstream in(to_jsonl(log));
  CHECK(read_jsonl(in) == log);
}

TEST_CASE("runs are byte-identical for equal seeds") {
  const Scenario sc = load_scenario(short_corridor());
  const std::string a = to_jsonl(simulate(sc));
  CHECK(a == to_jsonl(simulate(sc)));
  Scenario other = sc;
  other.sim.seed = 99;
  CHECK(a != to_jsonl(simulate(other)));
}

TEST_CASE("tick loop cadence and log completeness") {
  const Scenario sc = load_scenario(short_corridor());
  const EventLog log = simulate(sc);
  const auto ticks = log.back().at("ticks").get<std::size_t>();
  CHECK(count_type(log, "state") == ticks);
  // At dt 0.1, sensing fires once per simulated second and planning once per 5 ticks.
  std::vector<double> sense_t, plan_t;
  for (const auto& r : log) {
    if (r.at("type") == "sense") sense_t.push_back(r.at("t").get<double>());
    if (r.at("type") == "plan") plan_t.push_back(r.at("t").get<double>());
  }
  REQUIRE(sense_t.size() >= 10);
  for (std::size_t i = 1; i < sense_t.size(); ++i) CHECK(sense_t[i] - sense_t[i - 1] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < plan_t.size(); ++i) CHECK(plan_t[i] - plan_t[i - 1] == doctest::Approx(0.5));
  CHECK(sense_t.size() == static_cast<std::size_t>(std::ceil(ticks * sc.sim.dt - 1e-9)));
  CHECK(plan_t.size() == (ticks + 4) / 5);

  // Every mode change appears as a mode record.
  std::string mode = log.front().at("start").at("mode");
  std::size_t changes = 0;
  for (const auto& r : log)
    if (r.at("type") == "state" && r.at("mode") != mode) {
      mode = r.at("mode");
      ++changes;
    }
  CHECK(count_type(log, "mode") == changes);
}

TEST_CASE("publish rate setting changes the sensing cadence") {
  json doc = short_corridor();
  doc["detector"] = {{"publish_hz", 5}};
  const Scenario sc = load_scenario(doc);
  const EventLog log = simulate(sc);
  const auto ticks = log.back().at("ticks").get<std::size_t>();
  CHECK(count_type(log, "sense") == (ticks + 1) / 2);
}

TEST_CASE("free corridor run keeps speed and never point-turns") {
  const RunResult res = run(load_scenario(short_corridor()));
  const auto& m = res.metrics;
  CHECK(m.reached_goal);
  CHECK(m.uptime_fraction >= 0.98);
  CHECK(std::abs(m.avg_speed - 0.7) <= 0.02 * 0.7);
  CHECK(m.point_turn_count == 0);
  CHECK(m.collisions == 0);
  CHECK(std::abs(m.avg_speed - m.uptime_fraction * m.commanded_speed) <= 0.03);
  for (const auto& row : metric_rows(m))
    if (row.unit == "1") {
      CHECK(row.value >= 0.0);
      CHECK(row.value <= 1.0);
    }
  CHECK(m.avg_speed == doctest::Approx(m.distance / m.elapsed_time));
}

TEST_CASE("rover never enters a hazard that straddles the route") {
  json doc = short_corridor();
  doc["terrain"]["hazards"] = {{{"center", {19.0, 24.1}}, {"radius", 0.7}, {"height", 0.5}, {"kind", "Boulder"}}};
  const Scenario sc = load_scenario(doc);
  const RunResult res = run(sc);
  CHECK(res.metrics.collisions == 0);
  CHECK(res.metrics.reached_goal);
  // Independent check: minimum distance of every pose-trace step to the boulder centre.
  Vec2 prev{4.0, 24.0};
  double closest = 1e9;
  for (const auto& r : res.log) {
    if (r.at("type") != "state") continue;
    const Vec2 p{r.at("x").get<double>(), r.at("y").get<double>()};
    closest = std::min(closest, project_on_segment({19.0, 24.1}, prev, p).distance);
    prev = p;
  }
  CHECK(closest >= 0.7);
}

TEST_CASE("metrics recomputed from the log header match the run") {
  const RunResult res = run(load_scenario(short_corridor()));
  const Scenario echoed = scenario_from_log(res.log);
  const auto again = compute_metrics(res.log, echoed);
  CHECK(again.to_json() == res.metrics.to_json());
  std::ostringstream csv;
  write_metrics_csv(res.metrics, csv);
  CHECK(csv.str().rfind("metric,unit,value\n", 0) == 0);
  CHECK(csv.str().find("uptime_fraction,1,") != std::string::npos);
}

TEST_CASE("sweep axis handling") {
  const Scenario base = load_scenario(short_corridor());
  CHECK(with_parameter(base, "gnc.v_cmd_faster", 0.5).gnc.v_cmd_faster == 0.5);
  CHECK_THROWS_AS(with_parameter(base, "gnc.warp_speed", 9), ValidationError);
  CHECK_THROWS_AS(with_parameter(base, "detector.publish_hz", 9), ValidationError);
  CHECK(sweep_seed(7, 0, SeedPolicy::Same) == 7);
  CHECK(sweep_seed(7, 0, SeedPolicy::PerValue) != sweep_seed(7, 1, SeedPolicy::PerValue));
}

TEST_CASE("single-value sweep equals a plain run") {
  const Scenario base = load_scenario(short_corridor());
  const SweepResult res = sweep(base, "gnc.v_cmd_faster", {0.7});
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].metrics.to_json() == run(base).metrics.to_json());
}

TEST_CASE("sweep results keep input order and the declared seed policy") {
  const Scenario base = load_scenario(short_corridor());
  const std::vector<json> values = {0.5, 0.3, 0.6};
  const SweepResult res = sweep(base, "gnc.v_cmd_faster", values, SeedPolicy::PerValue, 2);
  REQUIRE(res.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(res.rows[i].value == values[i]);
    CHECK(res.rows[i].seed == sweep_seed(base.sim.seed, i, SeedPolicy::PerValue));
    CHECK(res.rows[i].metrics.config.at("gnc").at("v_cmd_faster") == values[i]);
  }
  std::ostringstream csv;
  write_sweep_csv(res, csv);
  CHECK(csv.str().rfind("axis,value,seed_policy,seed,", 0) == 0);
  CHECK(csv.str().find("per_value") != std::string::npos);
}

TEST_CASE("latency sweep raises mean response monotonically") {
  const Scenario base = load_scenario_file(std::string(ROVERSIM_SCENARIO_DIR) + "/coord_latency.json");
  const SweepResult res = sweep(base, "coordination.bus.latency", {0.2, 0.5, 1.0, 1.5, 2.0});
  double prev = 0.0;
  for (const auto& row : res.rows) {
    CHECK(row.metrics.coordination->mean_response >= prev);
    prev = row.metrics.coordination->mean_response;
  }
}

TEST_CASE("daily traverse projection") {
  CHECK(daily_traverse_projection(0.43, 0.23) == doctest::Approx(356.04));
  CHECK(daily_traverse_projection(0.10, 0.23) == doctest::Approx(82.8));
  CHECK(daily_traverse_projection(0.0, 0.23) == 0.0);
  CHECK_THROWS_AS(daily_traverse_projection(0.4, 0.0), DomainError);
  MetricsReport m;
  m.avg_speed = 0.43;
  CHECK(daily_traverse_projection(m, kDefaultOpsHoursPerSol) == doctest::Approx(356.04));
}

TEST_CASE("winding courses follow the curvature profile") {
  RouteSpec r;
  r.type = RouteSpec::Type::Winding;
  r.start = {5.0, 50.0};
  r.segments = {{0.3, 20.0, 40.0}};
  const auto course = build_course(r);
  double length = 0.0;
  for (std::size_t i = 1; i < course.size(); ++i) length += distance(course[i - 1], course[i]);
  CHECK(length == doctest::Approx(40.0).epsilon(0.01));
  double peak = 0.0;
  for (std::size_t i = 1; i + 1 < course.size(); ++i)
    peak = std::max(peak, std::abs(menger_curvature(course[i - 1], course[i], course[i + 1])));
  CHECK(peak == doctest::Approx(0.3).epsilon(0.05));
}
