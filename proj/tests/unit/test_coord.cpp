#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"

#include "roversim/coord.hpp"
#include "roversim/errors.hpp"

using namespace roversim;
using namespace roversim::coord;
using nlohmann::json;

namespace {

Message msg(const std::string& from, const std::string& to, int seq = 0) {
  Message m;
  m.sender = from;
  m.recipient = to;
  m.payload = {{"seq", seq}};
  return m;
}

Agent agent(const std::string& id, AgentRole role, Vec2 p) { return {id, role, p, AgentStatus::Idle}; }

// Exhaustive optimum: every task-to-agent map, each agent's tasks in their best order.
double brute_force_makespan(const std::vector<Vec2>& starts, const std::vector<TaskSpec>& tasks, double speed) {
  const std::size_t na = starts.size(), nt = tasks.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < nt; ++i) combos *= na;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < combos; ++code) {
    std::vector<std::vector<std::size_t>> mine(na);
    std::size_t x = code;
    for (std::size_t t = 0; t < nt; ++t, x /= na) mine[x % na].push_back(t);
    double worst = 0.0;
    for (std::size_t a = 0; a < na && worst < best; ++a) {
      auto& order = mine[a];
      std::sort(order.begin(), order.end());
      double fastest = order.empty() ? 0.0 : std::numeric_limits<double>::infinity();
      if (!order.empty()) do {
          double t = 0.0;
          Vec2 p = starts[a];
          for (std::size_t k : order) {
            t += std::hypot(tasks[k].position.x - p.x, tasks[k].position.y - p.y) / speed + tasks[k].duration;
            p = tasks[k].position;
          }
          fastest = std::min(fastest, t);
        } while (std::next_permutation(order.begin(), order.end()));
      worst = std::max(worst, fastest);
    }
    best = std::min(best, worst);
  }
  return best;
}

CoordConfig latency_config(double latency) {
  CoordConfig cfg;
  cfg.bus.latency = latency;
  cfg.agents = {agent("leader", AgentRole::Leader, {0, 0}), agent("r2", AgentRole::Secondary, {5, 0}),
                agent("r3", AgentRole::Secondary, {0, 5}), agent("astro", AgentRole::Astronaut, {10, 0})};
  for (int i = 0; i < 12; ++i)
    cfg.tasks.push_back({"t" + std::to_string(i), {4.0 + 3.0 * (i % 4), 4.0 + 4.0 * (i / 4)}, 20.0, {}});
  for (int i = 0; i < 20; ++i) cfg.falls.push_back({"astro", 5.0 + 15.0 * i});
  return cfg;
}

CoordReport run_sim(const CoordConfig& cfg, std::uint64_t seed = 1, std::vector<json>* log = nullptr) {
  CoordinationSim sim(cfg, seed, [&](const json& rec) {
    if (log) log->push_back(rec);
  });
  sim.run_to_completion();
  return sim.report();
}

}  // namespace

TEST_CASE("bus delivers after the configured latency") {
  Rng rng(1);
  MessageBus instant(BusConfig{0.0, 0.0, 0.0}, {"a", "b"});
  const auto r0 = instant.dispatch(msg("a", "b"), 3.0, rng);
  CHECK_FALSE(r0.dropped);
  CHECK(r0.message.deliver_time == 3.0);
  MessageBus slow(BusConfig{0.5, 0.0, 0.0}, {"a", "b"});
  CHECK(dispatch(slow, msg("a", "b"), 3.0, rng).message.deliver_time == 3.5);
  CHECK_THROWS_AS(slow.dispatch(msg("a", "zz"), 0.0, rng), RoutingError);
}

TEST_CASE("bus keeps per-pair FIFO order and causality under jitter") {
  Rng rng(42);
  MessageBus bus(BusConfig{0.5, 0.1, 0.0}, {"a", "b", "c"});
  std::map<std::pair<std::string, std::string>, double> last;
  double now = 0.0;
  for (int i = 0; i < 1000; ++i) {
    now += rng.uniform(0.0, 0.05);
    const std::string from = i % 3 == 0 ? "c" : "a";
    const std::string to = i % 2 == 0 ? "b" : "c";
    const auto r = bus.dispatch(msg(from, to, i), now, rng);
    CHECK(r.message.deliver_time >= r.message.send_time);
    CHECK(r.message.deliver_time <= now + 0.6 + 1e-12);
    auto& prev = last[{from, to}];
    CHECK(r.message.deliver_time >= prev);
    prev = r.message.deliver_time;
  }
}

TEST_CASE("drop rate is realized and validated") {
  Rng rng(5);
  MessageBus bus(BusConfig{0.5, 0.0, 0.2}, {"a", "b"});
  int dropped = 0;
  for (int i = 0; i < 10000; ++i) dropped += bus.dispatch(msg("a", "b"), i, rng).dropped;
  CHECK(std::abs(dropped / 10000.0 - 0.2) < 0.015);
  CHECK_THROWS_AS(MessageBus(BusConfig{0.5, 0.0, 1.0}, {"a"}), ValidationError);
  CHECK_THROWS_AS(MessageBus(BusConfig{-0.1, 0.0, 0.0}, {"a"}), ValidationError);
}

TEST_CASE("default emergency pipeline responds in 1.2 s") {
  const auto res = detect_emergency({5.0, 30.0, 61.0}, 0.2, BusConfig{}, 1);
  REQUIRE(res.alerts.size() == 3);
  for (const auto& a : res.alerts) CHECK(a.response_time() == doctest::Approx(1.2));
  CHECK(detect_emergency({}, 0.2, BusConfig{}, 1).alerts.empty());
}

TEST_CASE("fifty falls without drops give fifty alerts") {
  std::vector<double> falls;
  for (int i = 0; i < 50; ++i) falls.push_back(5.0 + 10.0 * i);
  const auto res = detect_emergency(falls, 0.2, BusConfig{}, 7);
  CHECK(res.alerts.size() == 50);
  CHECK(res.missed == 0);
  CHECK(res.mean_response() == doctest::Approx(1.2));
}

TEST_CASE("mean response matches proc_delay plus two latencies over 1000 trials") {
  std::vector<double> falls;
  for (int i = 0; i < 1000; ++i) falls.push_back(1.0 + 5.0 * i);
  for (double latency : {0.2, 0.5, 0.8}) {
    const auto res = detect_emergency(falls, 0.3, BusConfig{latency, 0.1, 0.0}, 3);
    REQUIRE(res.alerts.size() == 1000);
    const double expected = 0.3 + 2.0 * latency;
    CHECK(std::abs(res.mean_response() - expected) <= 0.01 * expected);
  }
}

TEST_CASE("dropped messages become missed alerts unless retransmitted") {
  std::vector<double> falls;
  for (int i = 0; i < 200; ++i) falls.push_back(1.0 + 10.0 * i);
  const BusConfig lossy{0.5, 0.0, 0.2};
  const auto lost = detect_emergency(falls, 0.2, lossy, 11);
  CHECK(lost.missed > 0);
  CHECK(lost.alerts.size() + lost.missed == falls.size());
  const auto retried = detect_emergency(falls, 0.2, lossy, 11, RetransmitConfig{true, 1.5, 5});
  CHECK(retried.missed < lost.missed);
}

TEST_CASE("response time degrades with latency and acknowledgments time out past 1 s") {
  double prev = 0.0;
  for (double latency : {0.2, 0.5, 1.0, 1.5, 2.0}) {
    const auto cfg = latency_config(latency);
    const auto rep = run_sim(cfg);
    CHECK(rep.mean_response() >= prev);
    prev = rep.mean_response();
    if (latency > 1.0) {
      CHECK(rep.mean_response() > 2.2);
      CHECK(rep.ack_timeouts > 0);
    } else {
      CHECK(rep.ack_timeouts == 0);
    }
  }
}

TEST_CASE("task throughput declines with latency and steepens past 1 s") {
  std::vector<double> lat, thr;
  for (double l = 0.0; l <= 2.0 + 1e-9; l += 0.25) {
    lat.push_back(l);
    const auto rep = run_sim(latency_config(l));
    CHECK(rep.tasks_completed == 12);
    thr.push_back(rep.task_throughput());
  }
  for (std::size_t i = 1; i < thr.size(); ++i) CHECK(thr[i] <= thr[i - 1]);
  // Average slope below and above 1 s.
  const double below = (thr[0] - thr[4]) / 1.0;
  const double above = (thr[4] - thr[8]) / 1.0;
  CHECK(above > below);
}

TEST_CASE("greedy allocation basics") {
  const Agent leader = agent("L", AgentRole::Leader, {0, 0});
  const std::vector<TaskSpec> one = {{"a", {3, 4}, 1.0, {}}};
  const auto a1 = assign_tasks(leader, {leader, agent("r", AgentRole::Secondary, {0, 0})}, one, 1.0);
  CHECK(a1.agent_of_task[0] == "r");
  CHECK(a1.makespan == doctest::Approx(6.0));

  const std::vector<Agent> pair = {leader, agent("west", AgentRole::Secondary, {-5, 0}),
                                   agent("east", AgentRole::Secondary, {5, 0})};
  const std::vector<TaskSpec> two = {{"e", {8, 0}, 2.0, {}}, {"w", {-8, 0}, 2.0, {}}};
  const auto a2 = assign_tasks(leader, pair, two, 1.0);
  CHECK(a2.agent_of_task[0] == "east");
  CHECK(a2.agent_of_task[1] == "west");
  CHECK(a2.makespan == doctest::Approx(brute_force_makespan({{-5, 0}, {5, 0}}, two, 1.0)));

  CHECK_THROWS_AS(assign_tasks(leader, {leader}, one, 1.0), AllocationError);
  Agent fallen = agent("f", AgentRole::Secondary, {0, 0});
  fallen.status = AgentStatus::Fallen;
  CHECK_THROWS_AS(assign_tasks(leader, {leader, fallen}, one, 1.0), AllocationError);
}

TEST_CASE("greedy makespan within twice the exhaustive optimum") {
  Rng rng(123);
  for (int seed = 0; seed < 100; ++seed) {
    const Agent leader = agent("L", AgentRole::Leader, {0, 0});
    std::vector<Agent> agents = {leader};
    std::vector<Vec2> starts;
    for (int a = 0; a < 3; ++a) {
      starts.push_back({rng.uniform(0, 20), rng.uniform(0, 20)});
      agents.push_back(agent("r" + std::to_string(a), AgentRole::Secondary, starts.back()));
    }
    std::vector<TaskSpec> tasks;
    for (int t = 0; t < 6; ++t)
      tasks.push_back({"t" + std::to_string(t), {rng.uniform(0, 20), rng.uniform(0, 20)}, rng.uniform(1, 30), {}});
    const auto alloc = assign_tasks(leader, agents, tasks, 0.5);
    std::vector<int> count(tasks.size(), 0);
    for (const auto& [id, order] : alloc.by_agent)
      for (std::size_t k : order) ++count[k];
    for (int c : count) CHECK(c == 1);
    CHECK(alloc.makespan <= 2.0 * brute_force_makespan(starts, tasks, 0.5) + 1e-9);
  }
}

TEST_CASE("coverage metric") {
  terrain::TerrainParams p;
  p.size_cells = 8;
  p.amplitude = 0.0;
  const auto tiny = terrain::generate_terrain(p);
  std::vector<Vec2> everywhere;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) everywhere.push_back(tiny.cell_center(r, c));
  CHECK(coverage_metric({everywhere}, tiny, 0.1) == 1.0);
  CHECK(coverage_metric({}, tiny, 1.0) == 0.0);
  CHECK_THROWS_AS(coverage_metric({}, tiny, 0.0), DomainError);
}

TEST_CASE("two partitioned agents out-cover one agent over equal time") {
  terrain::TerrainParams p;
  p.size_cells = 32;
  p.amplitude = 0.0;
  p.rock_density = 2.0;
  p.seed = 3;
  const auto world = terrain::generate_terrain(p);
  const double speed = 0.5, dt = 0.5, budget = 150.0, radius = 1.0;
  auto drive = [&](const std::vector<Vec2>& route) {
    std::vector<Vec2> log{route.front()};
    Vec2 pos = route.front();
    std::size_t next = 1;
    for (double t = 0; t < budget && next < route.size(); t += dt) {
      double step = speed * dt;
      while (step > 0 && next < route.size()) {
        const double d = distance(pos, route[next]);
        if (d <= step) {
          step -= d;
          pos = route[next++];
        } else {
          pos = pos + (route[next] - pos) * (step / d);
          step = 0;
        }
      }
      log.push_back(pos);
    }
    return log;
  };
  const auto single = drive(lawnmower({0, 0}, {16, 16}, 2.0));
  const auto left = drive(lawnmower({0, 0}, {8, 16}, 2.0));
  const auto right = drive(lawnmower({8, 0}, {16, 16}, 2.0));

  // Exhaustive count over every (cell, pose) pair.
  auto oracle = [&](const std::vector<std::vector<Vec2>>& logs) {
    std::size_t total = 0, seen = 0;
    for (std::size_t r = 0; r < 32; ++r)
      for (std::size_t c = 0; c < 32; ++c) {
        const auto l = world.labels(r, c);
        if (l == terrain::Label::Boulder || l == terrain::Label::Crater) continue;
        ++total;
        bool hit = false;
        for (const auto& log : logs)
          for (const auto& q : log) hit |= distance(world.cell_center(r, c), q) <= radius;
        seen += hit;
      }
    return static_cast<double>(seen) / total;
  };
  const double one = coverage_metric({single}, world, radius);
  const double two = coverage_metric({left, right}, world, radius);
  CHECK(one == doctest::Approx(oracle({single})).epsilon(1e-12));
  CHECK(two == doctest::Approx(oracle({left, right})).epsilon(1e-12));
  CHECK(two / one > 1.0);
}

TEST_CASE("task completion timing from message records") {
  const std::vector<json> log = {
      {{"type", "msg"}, {"kind", "TaskAssign"}, {"send", 10.0}, {"deliver", 10.5}, {"dropped", false}, {"payload", {{"id", "a"}}}},
      {{"type", "msg"}, {"kind", "TaskAssign"}, {"send", 12.0}, {"deliver", 12.5}, {"dropped", false}, {"payload", {{"id", "b"}}}},
      {{"type", "msg"}, {"kind", "TaskDone"}, {"send", 39.5}, {"deliver", 40.0}, {"dropped", false}, {"payload", {{"id", "a"}}}}};
  const auto timing = measure_task_completion(log);
  CHECK(timing.durations.at("a") == 30.0);
  CHECK(timing.incomplete == std::vector<std::string>{"b"});
  CHECK(measure_task_completion({}).durations.empty());
  const std::vector<json> orphan = {log[2]};
  CHECK_THROWS_AS(measure_task_completion(orphan), LogIntegrityError);
}

TEST_CASE("tool exchange cycles finish inside three minutes") {
  CoordConfig cfg;  // default speed 0.5 m/s, latency 0.5 s
  cfg.agents = {agent("leader", AgentRole::Leader, {2, 16}), agent("rover", AgentRole::Secondary, {2, 16}),
                agent("astro", AgentRole::Astronaut, {22, 16})};
  for (int i = 0; i < 4; ++i)
    cfg.tasks.push_back({"x" + std::to_string(i), i % 2 == 0 ? Vec2{22, 16} : Vec2{2, 16}, 60.0, {}});
  std::vector<json> log;
  run_sim(cfg, 1, &log);
  const auto timing = measure_task_completion(log);
  REQUIRE(timing.durations.size() == 4);
  CHECK(timing.incomplete.empty());
  // Per cycle: assign latency + drive + exchange + done latency, at most a 20 m drive.
  const double bound = 2 * cfg.bus.latency + 20.0 / cfg.agent_speed + 60.0;
  for (const auto& [id, d] : timing.durations) {
    CHECK(d <= bound + 1e-9);
    CHECK(d < 180.0);
  }
}

TEST_CASE("coordination is deterministic and processes events in time order") {
  auto cfg = latency_config(0.7);
  cfg.bus.jitter = 0.2;
  cfg.bus.drop_rate = 0.05;
  std::vector<json> a, b;
  run_sim(cfg, 9, &a);
  run_sim(cfg, 9, &b);
  CHECK(a == b);
  double last = 0.0;
  for (const auto& rec : a) {
    CHECK(rec.at("t").get<double>() >= last);
    last = rec.at("t").get<double>();
    if (rec.at("type") == "msg" && !rec.at("dropped").get<bool>())
      CHECK(rec.at("deliver").get<double>() >= rec.at("send").get<double>());
  }
}

TEST_CASE("coordination configuration validation") {
  auto cfg = latency_config(0.5);
  cfg.agents.push_back(agent("leader", AgentRole::Secondary, {0, 0}));
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = latency_config(0.5);
  cfg.agents[1].role = AgentRole::Leader;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = latency_config(0.5);
  cfg.falls.push_back({"r2", 1.0});
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("lawnmower lanes") {
  const auto pts = lawnmower({0, 0}, {8, 4}, 2.0);
  REQUIRE(pts.size() == 8);
  CHECK(pts[0] == Vec2{1, 0});
  CHECK(pts[1] == Vec2{1, 4});
  CHECK(pts[2] == Vec2{3, 4});
  CHECK(pts.back() == Vec2{7, 0});
}
