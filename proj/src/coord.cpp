#include "roversim/coord.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "roversim/errors.hpp"

namespace roversim::coord {

using nlohmann::json;

std::string_view to_string(AgentRole role) {
  switch (role) {
    case AgentRole::Leader: return "Leader";
    case AgentRole::Secondary: return "Secondary";
    case AgentRole::Astronaut: return "Astronaut";
  }
  return "?";
}

std::string_view to_string(AgentStatus status) {
  switch (status) {
    case AgentStatus::Nominal: return "Nominal";
    case AgentStatus::Fallen: return "Fallen";
    case AgentStatus::Busy: return "Busy";
    case AgentStatus::Idle: return "Idle";
  }
  return "?";
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::SensorEvent: return "SensorEvent";
    case MessageKind::Alert: return "Alert";
    case MessageKind::TaskAssign: return "TaskAssign";
    case MessageKind::TaskDone: return "TaskDone";
    case MessageKind::Heartbeat: return "Heartbeat";
  }
  return "?";
}

std::optional<AgentRole> agent_role_from_string(std::string_view name) {
  for (AgentRole r : {AgentRole::Leader, AgentRole::Secondary, AgentRole::Astronaut})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

void BusConfig::validate() const {
  if (!(latency >= 0.0)) throw ValidationError("bus.latency", "must be >= 0");
  if (!(jitter >= 0.0)) throw ValidationError("bus.jitter", "must be >= 0");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0))
    throw ValidationError("bus.drop_rate", "must lie in [0, 1)");
}

MessageBus::MessageBus(BusConfig cfg, std::vector<std::string> known_ids)
    : cfg_(cfg), ids_(std::move(known_ids)) {
  cfg_.validate();
}

DispatchResult MessageBus::dispatch(Message msg, double now, Rng& rng) {
  if (std::find(ids_.begin(), ids_.end(), msg.recipient) == ids_.end())
    throw RoutingError("dispatch: unknown recipient '" + msg.recipient + "'");
  msg.send_time = now;
  DispatchResult out;
  // Draw order is fixed (drop, then jitter) so streams stay aligned.
  out.dropped = cfg_.drop_rate > 0.0 && rng.bernoulli(cfg_.drop_rate);
  const double jitter = cfg_.jitter > 0.0 ? rng.uniform(-cfg_.jitter, cfg_.jitter) : 0.0;
  if (!out.dropped) {
    auto& last = last_delivery_[{msg.sender, msg.recipient}];
    msg.deliver_time = std::max({now, now + cfg_.latency + jitter, last});
    last = msg.deliver_time;
  }
  out.message = std::move(msg);
  return out;
}

DispatchResult dispatch(MessageBus& bus, Message msg, double now, Rng& rng) {
  return bus.dispatch(std::move(msg), now, rng);
}

// ---------------------------------------------------------------------------

namespace {

double task_work_time(const TaskSpec& t, double speed) {
  double sweep_len = 0.0;
  Vec2 p = t.position;
  for (const Vec2& q : t.sweep) {
    sweep_len += distance(p, q);
    p = q;
  }
  return t.duration + sweep_len / speed;
}

Vec2 task_end(const TaskSpec& t) { return t.sweep.empty() ? t.position : t.sweep.back(); }

}  // namespace

double sequence_time(const Vec2& start, const std::vector<TaskSpec>& tasks,
                     const std::vector<std::size_t>& order, double speed) {
  double t = 0.0;
  Vec2 p = start;
  for (std::size_t idx : order) {
    t += distance(p, tasks[idx].position) / speed + task_work_time(tasks[idx], speed);
    p = task_end(tasks[idx]);
  }
  return t;
}

Allocation assign_tasks(const Agent& leader, const std::vector<Agent>& agents,
                        const std::vector<TaskSpec>& tasks, double speed) {
  if (!(speed > 0.0)) throw DomainError("assign_tasks: speed must be > 0");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == leader.id) continue;
    if (agents[i].role != AgentRole::Secondary || agents[i].status == AgentStatus::Fallen) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) throw AllocationError("assign_tasks: no eligible agents");

  Allocation alloc;
  alloc.agent_of_task.assign(tasks.size(), {});
  std::vector<double> avail(agents.size(), 0.0);
  std::vector<Vec2> pos(agents.size());
  for (std::size_t i : eligible) {
    pos[i] = agents[i].position;
    alloc.by_agent[agents[i].id];
  }
  std::vector<bool> done(tasks.size(), false);
  for (std::size_t round = 0; round < tasks.size(); ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_agent = 0;
    std::size_t best_task = 0;
    for (std::size_t i : eligible) {
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (done[t]) continue;
        const double finish =
            avail[i] + distance(pos[i], tasks[t].position) / speed + task_work_time(tasks[t], speed);
        if (finish < best) {
          best = finish;
          best_agent = i;
          best_task = t;
        }
      }
    }
    done[best_task] = true;
    avail[best_agent] = best;
    pos[best_agent] = task_end(tasks[best_task]);
    alloc.by_agent[agents[best_agent].id].push_back(best_task);
    alloc.agent_of_task[best_task] = agents[best_agent].id;
    alloc.makespan = std::max(alloc.makespan, best);
  }
  return alloc;
}

// ---------------------------------------------------------------------------

void CoordConfig::validate() const {
  bus.validate();
  if (!(proc_delay >= 0.0)) throw ValidationError("coordination.proc_delay", "must be >= 0");
  if (!(ack_timeout > 0.0)) throw ValidationError("coordination.ack_timeout", "must be > 0");
  if (!(hold_penalty >= 0.0)) throw ValidationError("coordination.hold_penalty", "must be >= 0");
  if (!(agent_speed > 0.0)) throw ValidationError("coordination.agent_speed", "must be > 0");
  if (!(sensor_radius > 0.0)) throw ValidationError("coordination.sensor_radius", "must be > 0");
  if (retransmit.enabled && !(retransmit.timeout > 0.0))
    throw ValidationError("coordination.retransmit.timeout", "must be > 0");
  std::set<std::string> ids;
  std::size_t leaders = 0;
  for (const auto& a : agents) {
    if (!ids.insert(a.id).second)
      throw ValidationError("coordination.agents", "duplicate agent id '" + a.id + "'");
    if (a.role == AgentRole::Leader) ++leaders;
  }
  if (leaders != 1) throw ValidationError("coordination.agents", "exactly one Leader required");
  for (const auto& f : falls) {
    const auto it = std::find_if(agents.begin(), agents.end(),
                                 [&](const Agent& a) { return a.id == f.astronaut; });
    if (it == agents.end() || it->role != AgentRole::Astronaut)
      throw ValidationError("coordination.falls.astronaut", "'" + f.astronaut + "' is not an astronaut");
    if (!(f.time >= 0.0)) throw ValidationError("coordination.falls.time", "must be >= 0");
  }
  if (alert_recipient && !ids.count(*alert_recipient))
    throw ValidationError("coordination.alert_recipient", "unknown agent '" + *alert_recipient + "'");
  for (const auto& t : tasks)
    if (!(t.duration >= 0.0)) throw ValidationError("coordination.tasks.duration", "must be >= 0");
}

double CoordReport::mean_response() const {
  if (alerts.empty()) return 0.0;
  double s = 0.0;
  for (const auto& a : alerts) s += a.response_time();
  return s / static_cast<double>(alerts.size());
}

double CoordReport::task_throughput() const {
  if (tasks_completed == 0 || last_task_done <= 0.0) return 0.0;
  return static_cast<double>(tasks_completed) / last_task_done * 3600.0;
}

double EmergencyResult::mean_response() const {
  if (alerts.empty()) return 0.0;
  double s = 0.0;
  for (const auto& a : alerts) s += a.response_time();
  return s / static_cast<double>(alerts.size());
}

namespace {
constexpr int kDeliverPriority = 0;
constexpr int kTimerPriority = 1;
}  // namespace

CoordinationSim::CoordinationSim(CoordConfig cfg, std::uint64_t seed, EventSink sink)
    : cfg_(std::move(cfg)),
      agents_(cfg_.agents),
      runtime_(agents_.size()),
      bus_(cfg_.bus,
           [&] {
             std::vector<std::string> ids;
             for (const auto& a : cfg_.agents) ids.push_back(a.id);
             return ids;
           }()),
      rng_(Rng::derive(seed, "coord.bus")),
      sink_(std::move(sink)) {
  cfg_.validate();
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i].role == AgentRole::Leader) leader_ = i;

  const std::size_t nf = cfg_.falls.size();
  fall_seen_by_leader_.assign(nf, false);
  fall_acked_.assign(nf, false);
  fall_retries_.assign(nf, 0);
  alert_time_.assign(nf, std::nullopt);
  for (std::size_t f = 0; f < nf; ++f) {
    Event e{cfg_.falls[f].time, kTimerPriority, 0, EventKind::FallOccurs, {}};
    e.agent = index_of(cfg_.falls[f].astronaut);
    e.ref = f;
    schedule(std::move(e));
  }

  if (!cfg_.tasks.empty()) {
    allocation_ = assign_tasks(agents_[leader_], agents_, cfg_.tasks, cfg_.agent_speed);
    for (const auto& [id, order] : allocation_.by_agent) {
      next_in_queue_[id] = 0;
      if (order.empty()) continue;
      next_in_queue_[id] = 1;
      send(leader_, index_of(id), MessageKind::TaskAssign,
           {{"task", order.front()}, {"id", cfg_.tasks[order.front()].id}});
    }
  }
}

std::size_t CoordinationSim::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i].id == id) return i;
  throw RoutingError("unknown agent '" + id + "'");
}

void CoordinationSim::emit(json rec) {
  if (sink_) sink_(rec);
}

void CoordinationSim::schedule(Event e) {
  e.seq = seq_++;
  queue_.push(std::move(e));
}

void CoordinationSim::send(std::size_t from, std::size_t to, MessageKind kind, json payload) {
  Message m;
  m.sender = agents_[from].id;
  m.recipient = agents_[to].id;
  m.kind = kind;
  m.payload = std::move(payload);
  DispatchResult res = bus_.dispatch(std::move(m), now_, rng_);
  ++sent_;
  json rec = {{"type", "msg"},
              {"t", now_},
              {"kind", to_string(kind)},
              {"from", res.message.sender},
              {"to", res.message.recipient},
              {"send", res.message.send_time},
              {"dropped", res.dropped},
              {"payload", res.message.payload}};
  rec["deliver"] = res.dropped ? json(nullptr) : json(res.message.deliver_time);
  emit(std::move(rec));
  if (res.dropped) {
    ++dropped_;
    return;
  }
  Event e{res.message.deliver_time, kDeliverPriority, 0, EventKind::Deliver, std::move(res.message)};
  schedule(std::move(e));
}

void CoordinationSim::begin_wait(std::size_t agent) {
  auto& rt = runtime_[agent];
  rt.awaiting_since = now_;
  ++rt.wait_token;
  Event e{now_ + cfg_.ack_timeout, kTimerPriority, 0, EventKind::AckDeadline, {}};
  e.agent = agent;
  e.token = rt.wait_token;
  schedule(std::move(e));
}

void CoordinationSim::acknowledge(std::size_t agent) {
  auto& rt = runtime_[agent];
  rt.awaiting_since.reset();
  ++rt.wait_token;
}

Vec2 CoordinationSim::position_of(std::size_t agent, double t) const {
  const auto& legs = runtime_[agent].legs;
  if (legs.empty() || t <= legs.front().t0) return legs.empty() ? agents_[agent].position : legs.front().p0;
  for (const Leg& leg : legs) {
    if (t <= leg.t1) {
      const double span = leg.t1 - leg.t0;
      const double u = span > 0.0 ? (t - leg.t0) / span : 1.0;
      return leg.p0 + (leg.p1 - leg.p0) * std::clamp(u, 0.0, 1.0);
    }
  }
  return legs.back().p1;
}

void CoordinationSim::start_task(std::size_t agent, std::size_t task, double at) {
  const TaskSpec& spec = cfg_.tasks[task];
  auto& rt = runtime_[agent];
  Vec2 p = position_of(agent, at);
  double t = at;
  auto drive = [&](const Vec2& q) {
    const double dt = distance(p, q) / cfg_.agent_speed;
    rt.legs.push_back({t, t + dt, p, q});
    t += dt;
    p = q;
  };
  drive(spec.position);
  for (const Vec2& q : spec.sweep) drive(q);
  rt.legs.push_back({t, t + spec.duration, p, p});
  t += spec.duration;

  agents_[agent].status = AgentStatus::Busy;
  rt.active_task = task;
  emit({{"type", "task_start"}, {"t", at}, {"agent", agents_[agent].id}, {"task", spec.id}});
  Event e{t, kTimerPriority, 0, EventKind::TaskFinish, {}};
  e.agent = agent;
  e.ref = task;
  schedule(std::move(e));
}

void CoordinationSim::on_deliver(const Message& m) {
  const std::size_t to = index_of(m.recipient);
  const std::size_t from = index_of(m.sender);
  switch (m.kind) {
    case MessageKind::SensorEvent: {
      const auto fall = m.payload.at("fall").get<std::size_t>();
      send(to, from, MessageKind::Heartbeat, {{"ack", "fall"}, {"fall", fall}});
      if (!fall_seen_by_leader_[fall]) {
        fall_seen_by_leader_[fall] = true;
        Event e{now_ + cfg_.proc_delay, kTimerPriority, 0, EventKind::AlertReady, {}};
        e.ref = fall;
        schedule(std::move(e));
      }
      break;
    }
    case MessageKind::Heartbeat: {
      if (m.payload.value("ack", "") == "fall") {
        const auto fall = m.payload.at("fall").get<std::size_t>();
        if (!fall_acked_[fall]) {
          fall_acked_[fall] = true;
          acknowledge(to);
        }
      } else {
        acknowledge(to);
      }
      break;
    }
    case MessageKind::Alert: {
      const auto fall = m.payload.at("fall").get<std::size_t>();
      if (!alert_time_[fall]) {
        alert_time_[fall] = now_;
        emit({{"type", "alert"},
              {"t", now_},
              {"fall", fall},
              {"fall_time", cfg_.falls[fall].time},
              {"response", now_ - cfg_.falls[fall].time}});
      }
      break;
    }
    case MessageKind::TaskAssign: {
      acknowledge(to);
      const auto task = m.payload.at("task").get<std::size_t>();
      start_task(to, task, std::max(now_, runtime_[to].hold_until));
      break;
    }
    case MessageKind::TaskDone: {
      ++tasks_done_;
      last_task_done_ = now_;
      emit({{"type", "task_done"}, {"t", now_}, {"agent", m.sender},
            {"task", cfg_.tasks[m.payload.at("task").get<std::size_t>()].id}});
      const auto& order = allocation_.by_agent[m.sender];
      std::size_t& next = next_in_queue_[m.sender];
      if (next < order.size()) {
        send(to, from, MessageKind::TaskAssign, {{"task", order[next]}, {"id", cfg_.tasks[order[next]].id}});
        ++next;
      } else {
        send(to, from, MessageKind::Heartbeat, {{"ack", "task"}});
      }
      break;
    }
  }
}

void CoordinationSim::handle(const Event& e) {
  switch (e.kind) {
    case EventKind::Deliver:
      on_deliver(e.message);
      break;
    case EventKind::FallOccurs: {
      agents_[e.agent].status = AgentStatus::Fallen;
      emit({{"type", "fall"}, {"t", now_}, {"agent", agents_[e.agent].id}, {"fall", e.ref}});
      send(e.agent, leader_, MessageKind::SensorEvent, {{"fall", e.ref}});
      begin_wait(e.agent);
      if (cfg_.retransmit.enabled) {
        Event r{now_ + cfg_.retransmit.timeout, kTimerPriority, 0, EventKind::Retransmit, {}};
        r.agent = e.agent;
        r.ref = e.ref;
        schedule(std::move(r));
      }
      break;
    }
    case EventKind::Retransmit: {
      if (fall_acked_[e.ref] || fall_retries_[e.ref] >= cfg_.retransmit.max_retries) break;
      ++fall_retries_[e.ref];
      send(e.agent, leader_, MessageKind::SensorEvent, {{"fall", e.ref}, {"retry", fall_retries_[e.ref]}});
      Event r{now_ + cfg_.retransmit.timeout, kTimerPriority, 0, EventKind::Retransmit, {}};
      r.agent = e.agent;
      r.ref = e.ref;
      schedule(std::move(r));
      break;
    }
    case EventKind::AlertReady: {
      std::size_t recipient = 0;
      if (cfg_.alert_recipient) {
        recipient = index_of(*cfg_.alert_recipient);
      } else {
        const auto it = std::find_if(agents_.begin(), agents_.end(),
                                     [](const Agent& a) { return a.role == AgentRole::Secondary; });
        recipient = it != agents_.end() ? static_cast<std::size_t>(it - agents_.begin())
                                        : index_of(cfg_.falls[e.ref].astronaut);
      }
      send(leader_, recipient, MessageKind::Alert, {{"fall", e.ref}});
      break;
    }
    case EventKind::TaskFinish: {
      auto& rt = runtime_[e.agent];
      agents_[e.agent].status = AgentStatus::Idle;
      rt.active_task.reset();
      send(e.agent, leader_, MessageKind::TaskDone, {{"task", e.ref}, {"id", cfg_.tasks[e.ref].id}});
      begin_wait(e.agent);
      break;
    }
    case EventKind::AckDeadline: {
      auto& rt = runtime_[e.agent];
      if (e.token != rt.wait_token || !rt.awaiting_since) break;
      ++ack_timeouts_;
      rt.awaiting_since.reset();
      rt.hold_until = now_ + cfg_.hold_penalty;
      emit({{"type", "ack_timeout"}, {"t", now_}, {"agent", agents_[e.agent].id},
            {"hold_until", rt.hold_until}});
      break;
    }
  }
}

void CoordinationSim::advance_to(double t) {
  while (!queue_.empty() && queue_.top().time <= t) {
    Event e = queue_.top();
    queue_.pop();
    now_ = std::max(now_, e.time);
    handle(e);
  }
  now_ = std::max(now_, t);
}

void CoordinationSim::run_to_completion(double limit) {
  while (!queue_.empty() && queue_.top().time <= limit) {
    Event e = queue_.top();
    queue_.pop();
    now_ = std::max(now_, e.time);
    handle(e);
  }
}

CoordReport CoordinationSim::report() const {
  CoordReport r;
  r.falls = cfg_.falls.size();
  for (std::size_t f = 0; f < alert_time_.size(); ++f) {
    if (!alert_time_[f]) continue;
    r.alerts.push_back({f, cfg_.falls[f].time, *alert_time_[f]});
  }
  r.missed_alerts = r.falls - r.alerts.size();
  r.ack_timeouts = ack_timeouts_;
  r.messages_sent = sent_;
  r.messages_dropped = dropped_;
  r.tasks_completed = tasks_done_;
  r.last_task_done = last_task_done_;
  return r;
}

EmergencyResult detect_emergency(const std::vector<double>& fall_times, double proc_delay,
                                 const BusConfig& bus, std::uint64_t seed,
                                 RetransmitConfig retransmit) {
  if (!(proc_delay >= 0.0)) throw DomainError("detect_emergency: proc_delay must be >= 0");
  CoordConfig cfg;
  cfg.bus = bus;
  cfg.proc_delay = proc_delay;
  cfg.retransmit = retransmit;
  cfg.agents = {{"leader", AgentRole::Leader, {0.0, 0.0}, AgentStatus::Nominal},
                {"secondary", AgentRole::Secondary, {5.0, 0.0}, AgentStatus::Idle},
                {"astronaut", AgentRole::Astronaut, {10.0, 0.0}, AgentStatus::Nominal}};
  for (double t : fall_times) cfg.falls.push_back({"astronaut", t});
  CoordinationSim sim(cfg, seed);
  sim.run_to_completion();
  const CoordReport rep = sim.report();
  return {rep.alerts, rep.missed_alerts};
}

double coverage_metric(const std::vector<std::vector<Vec2>>& pose_logs,
                       const terrain::TerrainGrid& world, double sensor_radius) {
  if (!(sensor_radius > 0.0)) throw DomainError("coverage_metric: sensor_radius must be > 0");
  const auto& labels = world.labels;
  auto is_hazard = [&](std::size_t r, std::size_t c) {
    return labels(r, c) == terrain::Label::Boulder || labels(r, c) == terrain::Label::Crater;
  };
  Grid2D<bool> seen(labels.rows(), labels.cols(), false);
  const double cs = world.cell_size();
  const long reach = static_cast<long>(std::ceil(sensor_radius / cs)) + 1;
  for (const auto& log : pose_logs) {
    for (const Vec2& p : log) {
      const long pc = static_cast<long>(std::floor(p.x / cs));
      const long pr = static_cast<long>(std::floor(p.y / cs));
      for (long r = pr - reach; r <= pr + reach; ++r) {
        for (long c = pc - reach; c <= pc + reach; ++c) {
          if (!seen.contains(r, c) || seen(r, c)) continue;
          if (distance(world.cell_center(r, c), p) <= sensor_radius) seen(r, c) = true;
        }
      }
    }
  }
  std::size_t total = 0;
  std::size_t covered = 0;
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    for (std::size_t c = 0; c < labels.cols(); ++c) {
      if (is_hazard(r, c)) continue;
      ++total;
      if (seen(r, c)) ++covered;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

TaskTiming measure_task_completion(const std::vector<json>& records) {
  TaskTiming out;
  std::map<std::string, double> assigned;
  std::vector<std::string> assign_order;
  for (const auto& rec : records) {
    if (rec.value("type", "") != "msg") continue;
    const std::string kind = rec.value("kind", "");
    if (kind != "TaskAssign" && kind != "TaskDone") continue;
    const auto& payload = rec.at("payload");
    const std::string task =
        payload.contains("id") ? payload.at("id").get<std::string>() : payload.at("task").dump();
    if (kind == "TaskAssign") {
      if (!assigned.count(task)) assign_order.push_back(task);
      if (!rec.at("dropped").get<bool>() && !assigned.count(task))
        assigned[task] = rec.at("send").get<double>();
      continue;
    }
    if (!assigned.count(task))
      throw LogIntegrityError("measure_task_completion: TaskDone for unassigned task " + task);
    if (rec.at("dropped").get<bool>()) continue;
    out.durations[task] = rec.at("deliver").get<double>() - assigned[task];
  }
  for (const auto& task : assign_order)
    if (!out.durations.count(task)) out.incomplete.push_back(task);
  return out;
}

std::vector<Vec2> lawnmower(const Vec2& lo, const Vec2& hi, double lane_spacing) {
  std::vector<Vec2> pts;
  bool up = true;
  for (double x = lo.x + lane_spacing / 2.0; x <= hi.x + 1e-9; x += lane_spacing) {
    if (up) {
      pts.push_back({x, lo.y});
      pts.push_back({x, hi.y});
    } else {
      pts.push_back({x, hi.y});
      pts.push_back({x, lo.y});
    }
    up = !up;
  }
  return pts;
}

}  // namespace roversim::coord
