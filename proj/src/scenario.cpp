#include "roversim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "roversim/errors.hpp"

namespace roversim::harness {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads keys from one JSON object and rejects any it was never asked about.
class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  double number(const std::string& key, double fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError(join(path_, key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) throw ValidationError(join(path_, key), "must be finite");
    return d;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      throw ValidationError(join(path_, key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  int integer(const std::string& key, int fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ValidationError(join(path_, key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ValidationError(join(path_, key), "expected a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = take(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(join(path_, key), "expected a string");
    return v->get<std::string>();
  }

  const json* optional(const std::string& key) { return take(key); }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) throw ValidationError(join(path_, key), "unknown key");
  }

private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vec2 parse_vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(path, "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<Vec2> parse_points(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, "expected an array of [x, y]");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(parse_vec2(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json vec2_json(const Vec2& p) { return json::array({p.x, p.y}); }

json points_json(const std::vector<Vec2>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(vec2_json(p));
  return a;
}

template <typename Fn>
void rethrow_prefixed(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    const std::string& f = e.field();
    if (f.rfind(prefix + ".", 0) == 0) throw;
    std::string what = e.what();
    what = what.substr(f.size() + 2);
    throw ValidationError(prefix + "." + f, what);
  }
}

terrain::TerrainParams parse_terrain(const json& j) {
  ObjectReader r(j, "terrain");
  terrain::TerrainParams p;
  p.size_cells = r.integer("size_cells", p.size_cells);
  p.cell_size = r.number("cell_size", p.cell_size);
  p.roughness = r.number("roughness", p.roughness);
  p.amplitude = r.number("amplitude", p.amplitude);
  p.rock_density = r.number("rock_density", p.rock_density);
  p.crater_density = r.number("crater_density", p.crater_density);
  p.sun_azimuth = r.number("sun_azimuth", p.sun_azimuth);
  p.sun_elevation = r.number("sun_elevation", p.sun_elevation);
  p.slope_threshold = r.number("slope_threshold", p.slope_threshold);
  p.seed = r.uint("seed", p.seed);
  if (const json* ko = r.optional("keep_out")) {
    if (!ko->is_array()) throw ValidationError("terrain.keep_out", "expected an array");
    for (std::size_t i = 0; i < ko->size(); ++i) {
      const std::string path = "terrain.keep_out[" + std::to_string(i) + "]";
      ObjectReader zr((*ko)[i], path);
      terrain::KeepOutZone z;
      const json* c = zr.optional("center");
      if (!c) throw ValidationError(path + ".center", "required");
      z.center = parse_vec2(*c, path + ".center");
      z.radius = zr.number("radius", 0.0);
      zr.finish();
      p.keep_out.push_back(z);
    }
  }
  if (const json* hz = r.optional("hazards")) {
    if (!hz->is_array()) throw ValidationError("terrain.hazards", "expected an array");
    for (std::size_t i = 0; i < hz->size(); ++i) {
      const std::string path = "terrain.hazards[" + std::to_string(i) + "]";
      ObjectReader hr((*hz)[i], path);
      terrain::HazardSpec h;
      const json* c = hr.optional("center");
      if (!c) throw ValidationError(path + ".center", "required");
      h.center = parse_vec2(*c, path + ".center");
      h.radius = hr.number("radius", h.radius);
      const auto kind = terrain::hazard_kind_from_string(hr.string("kind", "Boulder"));
      if (!kind) throw ValidationError(path + ".kind", "expected Boulder, Crater or Dune");
      h.kind = *kind;
      h.height = hr.number("height", h.kind == terrain::HazardKind::Crater ? -0.4 : 0.5);
      hr.finish();
      p.extra_hazards.push_back(h);
    }
  }
  r.finish();
  rethrow_prefixed("terrain", [&] { p.validate(); });
  return p;
}

perception::DetectorConfig parse_detector(const json& j) {
  ObjectReader r(j, "detector");
  perception::DetectorConfig d;
  d.enabled = r.boolean("enabled", d.enabled);
  d.max_range = r.number("max_range", d.max_range);
  d.reliability = r.number("reliability", d.reliability);
  d.publish_hz = r.number("publish_hz", d.publish_hz);
  d.confidence_threshold = r.number("confidence_threshold", d.confidence_threshold);
  d.range_noise_frac = r.number("range_noise_frac", d.range_noise_frac);
  d.bearing_noise = r.number("bearing_noise", d.bearing_noise);
  d.false_positive_rate = r.number("false_positive_rate", d.false_positive_rate);
  d.fov = r.number("fov", d.fov);
  d.false_positive_radius = r.number("false_positive_radius", d.false_positive_radius);
  r.finish();
  d.validate();
  return d;
}

gnc::GncConfig parse_gnc(const json& j) {
  ObjectReader r(j, "gnc");
  gnc::GncConfig g;
  g.v_cmd_faster = r.number("v_cmd_faster", g.v_cmd_faster);
  g.v_rapid = r.number("v_rapid", g.v_rapid);
  g.d_stop = r.number("d_stop", g.d_stop);
  g.d_slow = r.number("d_slow", g.d_slow);
  g.replan_hz = r.number("replan_hz", g.replan_hz);
  g.min_turn_radius = r.number("min_turn_radius", g.min_turn_radius);
  g.fod_staleness_timeout = r.number("fod_staleness_timeout", g.fod_staleness_timeout);
  g.a_max = r.number("a_max", g.a_max);
  g.point_turn_rate = r.number("point_turn_rate", g.point_turn_rate);
  g.omega_max = r.number("omega_max", g.omega_max);
  g.teleop_speed_cap = r.number("teleop_speed_cap", g.teleop_speed_cap);
  r.finish();
  g.validate();
  return g;
}

void parse_map(const json& j, travmap::MapConfig& m, NavSpec& nav) {
  ObjectReader r(j, "map");
  m.hazard_prob_threshold = r.number("hazard_prob_threshold", m.hazard_prob_threshold);
  m.l_min = r.number("l_min", m.l_min);
  m.l_max = r.number("l_max", m.l_max);
  nav.decay_rate = r.number("decay_rate", nav.decay_rate);
  nav.clearance = r.number("clearance", nav.clearance);
  nav.corridor_half_width = r.number("corridor_half_width", nav.corridor_half_width);
  nav.horizon = r.number("horizon", nav.horizon);
  nav.window_margin = r.number("window_margin", nav.window_margin);
  r.finish();
  m.validate();
  if (!(nav.decay_rate >= 0.0)) throw ValidationError("map.decay_rate", "must be >= 0");
  if (!(nav.clearance >= 0.0)) throw ValidationError("map.clearance", "must be >= 0");
  if (!(nav.corridor_half_width >= 0.0))
    throw ValidationError("map.corridor_half_width", "must be >= 0");
  if (!(nav.horizon > 0.0)) throw ValidationError("map.horizon", "must be > 0");
  if (!(nav.window_margin >= 0.0)) throw ValidationError("map.window_margin", "must be >= 0");
}

RouteSpec parse_route(const json& j) {
  ObjectReader r(j, "route");
  RouteSpec route;
  const std::string type = r.string("type", "goal");
  route.spacing = r.number("spacing", route.spacing);
  route.goal_tolerance = r.number("goal_tolerance", route.goal_tolerance);
  if (const json* h = r.optional("start_heading")) {
    if (!h->is_number()) throw ValidationError("route.start_heading", "expected a number");
    route.start_heading = h->get<double>();
  }
  if (!(route.spacing > 0.0)) throw ValidationError("route.spacing", "must be > 0");
  if (!(route.goal_tolerance > 0.0)) throw ValidationError("route.goal_tolerance", "must be > 0");

  auto required_vec = [&](const std::string& key) {
    const json* v = r.optional(key);
    if (!v) throw ValidationError(r.path(key), "required");
    return parse_vec2(*v, r.path(key));
  };
  if (type == "waypoints") {
    route.type = RouteSpec::Type::Waypoints;
    const json* pts = r.optional("points");
    if (!pts) throw ValidationError("route.points", "required");
    route.points = parse_points(*pts, "route.points");
    if (route.points.size() < 2) throw ValidationError("route.points", "need at least two points");
  } else if (type == "goal") {
    route.type = RouteSpec::Type::Goal;
    route.start = required_vec("start");
    route.goal = required_vec("goal");
    if (distance(route.start, route.goal) < 1e-9)
      throw ValidationError("route.goal", "must differ from start");
  } else if (type == "winding") {
    route.type = RouteSpec::Type::Winding;
    route.start = required_vec("start");
    route.heading = r.number("heading", 0.0);
    const json* segs = r.optional("segments");
    if (!segs || !segs->is_array() || segs->empty())
      throw ValidationError("route.segments", "required non-empty array");
    for (std::size_t i = 0; i < segs->size(); ++i) {
      const std::string path = "route.segments[" + std::to_string(i) + "]";
      ObjectReader sr((*segs)[i], path);
      WindingSegment s;
      s.kappa_max = sr.number("kappa_max", s.kappa_max);
      s.wavelength = sr.number("wavelength", s.wavelength);
      s.length = sr.number("length", s.length);
      sr.finish();
      if (!(s.kappa_max >= 0.0)) throw ValidationError(path + ".kappa_max", "must be >= 0");
      if (!(s.wavelength > 0.0)) throw ValidationError(path + ".wavelength", "must be > 0");
      if (!(s.length > 0.0)) throw ValidationError(path + ".length", "must be > 0");
      route.segments.push_back(s);
    }
  } else {
    throw ValidationError("route.type", "expected waypoints, goal or winding");
  }
  r.finish();
  return route;
}

coord::CoordConfig parse_coordination(const json& j) {
  ObjectReader r(j, "coordination");
  coord::CoordConfig c;
  if (const json* b = r.optional("bus")) {
    ObjectReader br(*b, "coordination.bus");
    c.bus.latency = br.number("latency", c.bus.latency);
    c.bus.jitter = br.number("jitter", c.bus.jitter);
    c.bus.drop_rate = br.number("drop_rate", c.bus.drop_rate);
    br.finish();
  }
  c.proc_delay = r.number("proc_delay", c.proc_delay);
  c.ack_timeout = r.number("ack_timeout", c.ack_timeout);
  c.hold_penalty = r.number("hold_penalty", c.hold_penalty);
  c.agent_speed = r.number("agent_speed", c.agent_speed);
  c.sensor_radius = r.number("sensor_radius", c.sensor_radius);
  if (const json* rt = r.optional("retransmit")) {
    ObjectReader rr(*rt, "coordination.retransmit");
    c.retransmit.enabled = rr.boolean("enabled", c.retransmit.enabled);
    c.retransmit.timeout = rr.number("timeout", c.retransmit.timeout);
    c.retransmit.max_retries = rr.integer("max_retries", c.retransmit.max_retries);
    rr.finish();
  }
  if (const json* ar = r.optional("alert_recipient")) {
    if (!ar->is_string()) throw ValidationError("coordination.alert_recipient", "expected a string");
    c.alert_recipient = ar->get<std::string>();
  }
  if (const json* agents = r.optional("agents")) {
    if (!agents->is_array()) throw ValidationError("coordination.agents", "expected an array");
    for (std::size_t i = 0; i < agents->size(); ++i) {
      const std::string path = "coordination.agents[" + std::to_string(i) + "]";
      ObjectReader ar((*agents)[i], path);
      coord::Agent a;
      a.id = ar.string("id", "");
      if (a.id.empty()) throw ValidationError(path + ".id", "required");
      const auto role = coord::agent_role_from_string(ar.string("role", "Secondary"));
      if (!role) throw ValidationError(path + ".role", "expected Leader, Secondary or Astronaut");
      a.role = *role;
      if (const json* p = ar.optional("position")) a.position = parse_vec2(*p, path + ".position");
      a.status = a.role == coord::AgentRole::Secondary ? coord::AgentStatus::Idle
                                                       : coord::AgentStatus::Nominal;
      ar.finish();
      c.agents.push_back(a);
    }
  }
  if (const json* tasks = r.optional("tasks")) {
    if (!tasks->is_array()) throw ValidationError("coordination.tasks", "expected an array");
    for (std::size_t i = 0; i < tasks->size(); ++i) {
      const std::string path = "coordination.tasks[" + std::to_string(i) + "]";
      ObjectReader tr((*tasks)[i], path);
      coord::TaskSpec t;
      t.id = tr.string("id", "task" + std::to_string(i));
      const json* p = tr.optional("position");
      if (!p) throw ValidationError(path + ".position", "required");
      t.position = parse_vec2(*p, path + ".position");
      t.duration = tr.number("duration", 0.0);
      if (const json* s = tr.optional("sweep")) t.sweep = parse_points(*s, path + ".sweep");
      if (const json* reg = tr.optional("sweep_region")) {
        ObjectReader rr(*reg, path + ".sweep_region");
        const json* lo = rr.optional("lo");
        const json* hi = rr.optional("hi");
        if (!lo || !hi) throw ValidationError(path + ".sweep_region", "needs lo and hi");
        const double spacing = rr.number("spacing", 2.0);
        rr.finish();
        if (!(spacing > 0.0)) throw ValidationError(path + ".sweep_region.spacing", "must be > 0");
        const auto pts = coord::lawnmower(parse_vec2(*lo, path + ".sweep_region.lo"),
                                          parse_vec2(*hi, path + ".sweep_region.hi"), spacing);
        t.sweep.insert(t.sweep.end(), pts.begin(), pts.end());
      }
      tr.finish();
      c.tasks.push_back(t);
    }
  }
  if (const json* falls = r.optional("falls")) {
    if (!falls->is_array()) throw ValidationError("coordination.falls", "expected an array");
    for (std::size_t i = 0; i < falls->size(); ++i) {
      const std::string path = "coordination.falls[" + std::to_string(i) + "]";
      ObjectReader fr((*falls)[i], path);
      coord::FallEvent f;
      f.astronaut = fr.string("astronaut", "");
      f.time = fr.number("time", 0.0);
      fr.finish();
      c.falls.push_back(f);
    }
  }
  if (const json* sched = r.optional("fall_schedule")) {
    ObjectReader sr(*sched, "coordination.fall_schedule");
    const std::string who = sr.string("astronaut", "");
    const int count = sr.integer("count", 0);
    const double start = sr.number("start", 0.0);
    const double interval = sr.number("interval", 10.0);
    sr.finish();
    if (count < 0) throw ValidationError("coordination.fall_schedule.count", "must be >= 0");
    if (!(interval > 0.0)) throw ValidationError("coordination.fall_schedule.interval", "must be > 0");
    for (int k = 0; k < count; ++k) c.falls.push_back({who, start + interval * k});
  }
  r.finish();
  c.validate();
  return c;
}

}  // namespace

std::vector<Vec2> build_course(const RouteSpec& route) {
  std::vector<Vec2> out;
  auto densify = [&](const std::vector<Vec2>& pts) {
    out.push_back(pts.front());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double len = distance(pts[i - 1], pts[i]);
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / route.spacing - 1e-9)));
      for (std::size_t k = 1; k <= n; ++k)
        out.push_back(pts[i - 1] + (pts[i] - pts[i - 1]) * (static_cast<double>(k) / n));
    }
  };
  switch (route.type) {
    case RouteSpec::Type::Waypoints:
      densify(route.points);
      break;
    case RouteSpec::Type::Goal:
      densify({route.start, route.goal});
      break;
    case RouteSpec::Type::Winding: {
      // Curvature follows kappa_max * cos(2 pi s / wavelength) per segment, so
      // the heading oscillates about the mean course heading.
      const double ds = route.spacing;
      constexpr int kSub = 20;
      const double h = ds / kSub;
      Vec2 p = route.start;
      double theta = deg2rad(route.heading);
      out.push_back(p);
      for (const auto& seg : route.segments) {
        const auto steps = static_cast<std::size_t>(std::llround(seg.length / ds));
        for (std::size_t k = 0; k < steps; ++k) {
          for (int sub = 0; sub < kSub; ++sub) {
            const double s_mid = static_cast<double>(k) * ds + (sub + 0.5) * h;
            const double kappa = seg.kappa_max * std::cos(2.0 * std::numbers::pi * s_mid / seg.wavelength);
            const double th_mid = theta + kappa * h / 2.0;
            p = p + Vec2{std::cos(th_mid), std::sin(th_mid)} * h;
            theta += kappa * h;
          }
          out.push_back(p);
        }
      }
      break;
    }
  }
  return out;
}

Scenario load_scenario(const json& doc) {
  ObjectReader r(doc, "");
  Scenario sc;
  sc.name = r.string("name", sc.name);
  if (const json* t = r.optional("terrain")) sc.terrain = parse_terrain(*t);
  if (const json* d = r.optional("detector")) sc.detector = parse_detector(*d);
  if (const json* g = r.optional("gnc")) sc.gnc = parse_gnc(*g);
  if (const json* m = r.optional("map")) parse_map(*m, sc.map, sc.nav);
  sc.map.cell_size = sc.terrain.cell_size;
  if (const json* rt = r.optional("route")) sc.route = parse_route(*rt);
  if (const json* tp = r.optional("teleop")) {
    ObjectReader tr(*tp, "teleop");
    sc.teleop.active = tr.boolean("active", sc.teleop.active);
    sc.teleop.speed = tr.number("speed", sc.teleop.speed);
    tr.finish();
    if (!(sc.teleop.speed >= 0.0)) throw ValidationError("teleop.speed", "must be >= 0");
  }
  if (const json* c = r.optional("coordination")) sc.coordination = parse_coordination(*c);
  if (const json* s = r.optional("sim")) {
    ObjectReader sr(*s, "sim");
    sc.sim.dt = sr.number("dt", sc.sim.dt);
    sc.sim.max_time = sr.number("max_time", sc.sim.max_time);
    sc.sim.seed = sr.uint("seed", sc.sim.seed);
    sr.finish();
  }
  r.finish();

  if (!(sc.sim.dt > 0.0)) throw ValidationError("sim.dt", "must be > 0");
  if (!(sc.sim.max_time > 0.0)) throw ValidationError("sim.max_time", "must be > 0");
  if (sc.route) {
    const double extent = sc.terrain.extent();
    const auto course = build_course(*sc.route);
    for (std::size_t i = 0; i < course.size(); ++i) {
      const Vec2& p = course[i];
      if (p.x < 0.0 || p.y < 0.0 || p.x > extent || p.y > extent)
        throw ValidationError("route", "course point " + std::to_string(i) +
                                           " lies outside the terrain bounds");
    }
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("<file>", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return load_scenario(doc);
}

json Scenario::to_json() const {
  json j;
  j["name"] = name;
  json t = {{"size_cells", terrain.size_cells},
            {"cell_size", terrain.cell_size},
            {"roughness", terrain.roughness},
            {"amplitude", terrain.amplitude},
            {"rock_density", terrain.rock_density},
            {"crater_density", terrain.crater_density},
            {"sun_azimuth", terrain.sun_azimuth},
            {"sun_elevation", terrain.sun_elevation},
            {"slope_threshold", terrain.slope_threshold},
            {"seed", terrain.seed}};
  t["keep_out"] = json::array();
  for (const auto& z : terrain.keep_out)
    t["keep_out"].push_back({{"center", vec2_json(z.center)}, {"radius", z.radius}});
  t["hazards"] = json::array();
  for (const auto& h : terrain.extra_hazards)
    t["hazards"].push_back({{"center", vec2_json(h.center)},
                            {"radius", h.radius},
                            {"height", h.height},
                            {"kind", terrain::to_string(h.kind)}});
  j["terrain"] = t;
  j["detector"] = {{"enabled", detector.enabled},
                   {"max_range", detector.max_range},
                   {"reliability", detector.reliability},
                   {"publish_hz", detector.publish_hz},
                   {"confidence_threshold", detector.confidence_threshold},
                   {"range_noise_frac", detector.range_noise_frac},
                   {"bearing_noise", detector.bearing_noise},
                   {"false_positive_rate", detector.false_positive_rate},
                   {"fov", detector.fov},
                   {"false_positive_radius", detector.false_positive_radius}};
  j["gnc"] = {{"v_cmd_faster", gnc.v_cmd_faster},
              {"v_rapid", gnc.v_rapid},
              {"d_stop", gnc.d_stop},
              {"d_slow", gnc.d_slow},
              {"replan_hz", gnc.replan_hz},
              {"min_turn_radius", gnc.min_turn_radius},
              {"fod_staleness_timeout", gnc.fod_staleness_timeout},
              {"a_max", gnc.a_max},
              {"point_turn_rate", gnc.point_turn_rate},
              {"omega_max", gnc.omega_max},
              {"teleop_speed_cap", gnc.teleop_speed_cap}};
  j["map"] = {{"hazard_prob_threshold", map.hazard_prob_threshold},
              {"l_min", map.l_min},
              {"l_max", map.l_max},
              {"decay_rate", nav.decay_rate},
              {"clearance", nav.clearance},
              {"corridor_half_width", nav.corridor_half_width},
              {"horizon", nav.horizon},
              {"window_margin", nav.window_margin}};
  if (route) {
    json r = {{"spacing", route->spacing}, {"goal_tolerance", route->goal_tolerance}};
    if (route->start_heading) r["start_heading"] = *route->start_heading;
    switch (route->type) {
      case RouteSpec::Type::Waypoints:
        r["type"] = "waypoints";
        r["points"] = points_json(route->points);
        break;
      case RouteSpec::Type::Goal:
        r["type"] = "goal";
        r["start"] = vec2_json(route->start);
        r["goal"] = vec2_json(route->goal);
        break;
      case RouteSpec::Type::Winding:
        r["type"] = "winding";
        r["start"] = vec2_json(route->start);
        r["heading"] = route->heading;
        r["segments"] = json::array();
        for (const auto& s : route->segments)
          r["segments"].push_back(
              {{"kappa_max", s.kappa_max}, {"wavelength", s.wavelength}, {"length", s.length}});
        break;
    }
    j["route"] = r;
  }
  j["teleop"] = {{"active", teleop.active}, {"speed", teleop.speed}};
  if (coordination) {
    const auto& c = *coordination;
    json cj = {{"bus", {{"latency", c.bus.latency}, {"jitter", c.bus.jitter}, {"drop_rate", c.bus.drop_rate}}},
               {"proc_delay", c.proc_delay},
               {"ack_timeout", c.ack_timeout},
               {"hold_penalty", c.hold_penalty},
               {"agent_speed", c.agent_speed},
               {"sensor_radius", c.sensor_radius},
               {"retransmit",
                {{"enabled", c.retransmit.enabled},
                 {"timeout", c.retransmit.timeout},
                 {"max_retries", c.retransmit.max_retries}}}};
    if (c.alert_recipient) cj["alert_recipient"] = *c.alert_recipient;
    cj["agents"] = json::array();
    for (const auto& a : c.agents)
      cj["agents"].push_back(
          {{"id", a.id}, {"role", coord::to_string(a.role)}, {"position", vec2_json(a.position)}});
    cj["tasks"] = json::array();
    for (const auto& t2 : c.tasks) {
      json tj = {{"id", t2.id}, {"position", vec2_json(t2.position)}, {"duration", t2.duration}};
      if (!t2.sweep.empty()) tj["sweep"] = points_json(t2.sweep);
      cj["tasks"].push_back(tj);
    }
    cj["falls"] = json::array();
    for (const auto& f : c.falls) cj["falls"].push_back({{"astronaut", f.astronaut}, {"time", f.time}});
    j["coordination"] = cj;
  }
  j["sim"] = {{"dt", sim.dt}, {"max_time", sim.max_time}, {"seed", sim.seed}};
  return j;
}

}  // namespace roversim::harness
