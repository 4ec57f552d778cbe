#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "roversim/geometry.hpp"
#include "roversim/rng.hpp"
#include "roversim/terrain.hpp"

namespace roversim::coord {

enum class AgentRole { Leader, Secondary, Astronaut };
enum class AgentStatus { Nominal, Fallen, Busy, Idle };
enum class MessageKind { SensorEvent, Alert, TaskAssign, TaskDone, Heartbeat };

std::string_view to_string(AgentRole role);
std::string_view to_string(AgentStatus status);
std::string_view to_string(MessageKind kind);
std::optional<AgentRole> agent_role_from_string(std::string_view name);

struct Agent {
  std::string id;
  AgentRole role = AgentRole::Secondary;
  Vec2 position;
  AgentStatus status = AgentStatus::Idle;
};

struct Message {
  std::string sender;
  std::string recipient;
  MessageKind kind = MessageKind::Heartbeat;
  nlohmann::json payload = nlohmann::json::object();
  double send_time = 0.0;
  double deliver_time = 0.0;
};

struct BusConfig {
  double latency = 0.5;   // s, one way
  double jitter = 0.0;    // s, uniform half-width
  double drop_rate = 0.0;

  void validate() const;
  bool operator==(const BusConfig&) const = default;
};

struct DispatchResult {
  bool dropped = false;
  Message message;  // deliver_time set when not dropped
};

// Latency/jitter/drop channel with per sender-recipient FIFO delivery.
class MessageBus {
public:
  MessageBus(BusConfig cfg, std::vector<std::string> known_ids);

  // Throws RoutingError for an unknown recipient.
  DispatchResult dispatch(Message msg, double now, Rng& rng);
  const BusConfig& config() const { return cfg_; }

private:
  BusConfig cfg_;
  std::vector<std::string> ids_;
  std::map<std::pair<std::string, std::string>, double> last_delivery_;
};

DispatchResult dispatch(MessageBus& bus, Message msg, double now, Rng& rng);

struct TaskSpec {
  std::string id;
  Vec2 position;
  double duration = 0.0;     // s of work at the site
  std::vector<Vec2> sweep;   // optional route driven after arriving at `position`
};

struct Allocation {
  std::map<std::string, std::vector<std::size_t>> by_agent;  // agent id -> task indices in order
  std::vector<std::string> agent_of_task;
  double makespan = 0.0;
};

// Time for one agent to execute `order` from `start` at `speed`.
double sequence_time(const Vec2& start, const std::vector<TaskSpec>& tasks,
                     const std::vector<std::size_t>& order, double speed);

// Greedy earliest-finish allocation: repeatedly gives the (agent, task) pair
// with the smallest completion time. Secondary agents that have not fallen
// are eligible; throws AllocationError if there are none.
Allocation assign_tasks(const Agent& leader, const std::vector<Agent>& agents,
                        const std::vector<TaskSpec>& tasks, double speed);

struct FallEvent {
  std::string astronaut;
  double time = 0.0;
};

struct RetransmitConfig {
  bool enabled = false;
  double timeout = 1.5;  // s without acknowledgment before resending
  int max_retries = 3;
  bool operator==(const RetransmitConfig&) const = default;
};

struct CoordConfig {
  BusConfig bus;
  double proc_delay = 0.2;     // leader processing before alerting
  double ack_timeout = 2.0;    // acknowledgment deadline for coordination loops
  double hold_penalty = 10.0;  // resync hold after a missed deadline
  double agent_speed = 0.5;    // m/s
  RetransmitConfig retransmit;
  std::vector<Agent> agents;
  std::vector<TaskSpec> tasks;
  std::vector<FallEvent> falls;
  std::optional<std::string> alert_recipient;
  double sensor_radius = 1.0;  // for coverage accounting

  void validate() const;
};

struct AlertRecord {
  std::size_t fall_index = 0;
  double fall_time = 0.0;
  double alert_time = 0.0;
  double response_time() const { return alert_time - fall_time; }
};

struct CoordReport {
  std::vector<AlertRecord> alerts;
  std::size_t falls = 0;
  std::size_t missed_alerts = 0;
  std::size_t ack_timeouts = 0;
  std::size_t messages_sent = 0;
  std::size_t messages_dropped = 0;
  std::size_t tasks_completed = 0;
  double last_task_done = 0.0;

  double mean_response() const;
  // Completed tasks per hour of mission time up to the last completion.
  double task_throughput() const;
};

using EventSink = std::function<void(const nlohmann::json&)>;

// Single-threaded discrete-event coordination engine. Agents are data; all
// activity is message deliveries and timers on one clock.
class CoordinationSim {
public:
  CoordinationSim(CoordConfig cfg, std::uint64_t seed, EventSink sink = {});

  // Processes every event with time <= t.
  void advance_to(double t);
  void run_to_completion(double limit = 1e9);
  bool idle() const { return queue_.empty(); }
  double now() const { return now_; }

  Vec2 position_of(std::size_t agent, double t) const;
  const std::vector<Agent>& agents() const { return agents_; }
  const Allocation& allocation() const { return allocation_; }
  CoordReport report() const;

private:
  enum class EventKind { Deliver, FallOccurs, TaskFinish, AckDeadline, Retransmit, AlertReady };
  struct Event {
    double time;
    int priority;  // deliveries before timers at equal time
    std::uint64_t seq;
    EventKind kind;
    Message message;
    std::size_t agent = 0;
    std::size_t ref = 0;        // fall or task index
    std::uint64_t token = 0;    // ack-wait generation
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (priority != o.priority) return priority > o.priority;
      return seq > o.seq;
    }
  };
  struct Leg {
    double t0, t1;
    Vec2 p0, p1;
  };
  struct AgentRuntime {
    std::vector<Leg> legs;
    double hold_until = 0.0;
    std::optional<double> awaiting_since;
    std::uint64_t wait_token = 0;
    std::optional<std::size_t> active_task;
  };

  void schedule(Event e);
  void send(std::size_t from, std::size_t to, MessageKind kind, nlohmann::json payload);
  void handle(const Event& e);
  void on_deliver(const Message& m);
  void start_task(std::size_t agent, std::size_t task, double at);
  void begin_wait(std::size_t agent);
  void acknowledge(std::size_t agent);
  std::size_t index_of(const std::string& id) const;
  void emit(nlohmann::json rec);

  CoordConfig cfg_;
  std::vector<Agent> agents_;
  std::vector<AgentRuntime> runtime_;
  MessageBus bus_;
  Rng rng_;
  EventSink sink_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::size_t leader_ = 0;
  Allocation allocation_;
  std::map<std::string, std::size_t> next_in_queue_;
  std::vector<bool> fall_seen_by_leader_;
  std::vector<bool> fall_acked_;
  std::vector<int> fall_retries_;
  std::vector<std::optional<double>> alert_time_;
  std::size_t ack_timeouts_ = 0;
  std::size_t sent_ = 0;
  std::size_t dropped_ = 0;
  std::size_t tasks_done_ = 0;
  double last_task_done_ = 0.0;
};

struct EmergencyResult {
  std::vector<AlertRecord> alerts;
  std::size_t missed = 0;
  double mean_response() const;
};

// Runs the fall -> leader -> alert pipeline for the given fall times with a
// leader, one astronaut and one secondary alert recipient.
EmergencyResult detect_emergency(const std::vector<double>& fall_times, double proc_delay,
                                 const BusConfig& bus, std::uint64_t seed,
                                 RetransmitConfig retransmit = {});

// Fraction of non-hazard cells whose centre lies within `sensor_radius` of any logged pose.
double coverage_metric(const std::vector<std::vector<Vec2>>& pose_logs,
                       const terrain::TerrainGrid& world, double sensor_radius);

struct TaskTiming {
  std::map<std::string, double> durations;
  std::vector<std::string> incomplete;
};

// Pairs TaskAssign sends with TaskDone deliveries from "msg" log records.
// Throws LogIntegrityError for a TaskDone without a preceding TaskAssign.
TaskTiming measure_task_completion(const std::vector<nlohmann::json>& records);

// Lawnmower route over an axis-aligned rectangle with lanes along y.
std::vector<Vec2> lawnmower(const Vec2& lo, const Vec2& hi, double lane_spacing);

}  // namespace roversim::coord
