#include "roversim/gnc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <tuple>

#include "roversim/errors.hpp"

namespace roversim::gnc {

using travmap::CellIndex;
using travmap::FarTraversabilityMap;

void GncConfig::validate() const {
  if (!(v_cmd_faster > 0.0)) throw ValidationError("gnc.v_cmd_faster", "must be > 0");
  if (!(v_rapid > 0.0)) throw ValidationError("gnc.v_rapid", "must be > 0");
  if (!(v_rapid < v_cmd_faster))
    throw ValidationError("gnc.v_rapid", "must be below v_cmd_faster");
  if (!(d_stop > 0.0)) throw ValidationError("gnc.d_stop", "must be > 0");
  if (!(d_stop < d_slow)) throw ValidationError("gnc.d_stop", "must be below d_slow");
  if (!(replan_hz > 0.0)) throw ValidationError("gnc.replan_hz", "must be > 0");
  if (!(min_turn_radius > 0.0)) throw ValidationError("gnc.min_turn_radius", "must be > 0");
  if (!(fod_staleness_timeout > 0.0))
    throw ValidationError("gnc.fod_staleness_timeout", "must be > 0");
  if (!(a_max > 0.0)) throw ValidationError("gnc.a_max", "must be > 0");
  if (a_max < v_cmd_faster * v_cmd_faster / (2.0 * d_stop))
    throw ValidationError("gnc.a_max", "cannot stop from v_cmd_faster within d_stop");
  if (!(point_turn_rate > 0.0)) throw ValidationError("gnc.point_turn_rate", "must be > 0");
  if (!(omega_max > 0.0)) throw ValidationError("gnc.omega_max", "must be > 0");
  if (!(teleop_speed_cap > 0.0)) throw ValidationError("gnc.teleop_speed_cap", "must be > 0");
}

double reaction_time(double d_detection, double v_traverse) {
  if (!(v_traverse > 0.0)) throw DomainError("reaction_time: v_traverse must be > 0");
  if (d_detection < 0.0) throw DomainError("reaction_time: d_detection must be >= 0");
  return d_detection / v_traverse;
}

double improvement_ratio(double new_value, double baseline) {
  if (!(baseline > 0.0)) throw DomainError("improvement_ratio: baseline must be > 0");
  return (new_value - baseline) / baseline * 100.0;
}

double stopping_distance(double v, double a_max) {
  if (!(a_max > 0.0)) throw DomainError("stopping_distance: a_max must be > 0");
  if (v < 0.0) throw DomainError("stopping_distance: v must be >= 0");
  return v * v / (2.0 * a_max);
}

bool needs_point_turn(double segment_curvature, const GncConfig& cfg) {
  return std::abs(segment_curvature) > 1.0 / cfg.min_turn_radius;
}

NavMode mode_transition(NavMode current, const ModeInputs& in, const GncConfig& cfg) {
  const bool hazard_close = in.nearest_hazard && *in.nearest_hazard <= cfg.d_stop;
  if (hazard_close) return NavMode::SAFE_STOP;
  if (current == NavMode::SAFE_STOP) {
    // Recovery always passes through RAPID once the rover has stopped.
    return in.rover_speed > 1e-9 ? NavMode::SAFE_STOP : NavMode::RAPID;
  }
  if (in.teleop_active) return NavMode::TELEOP;
  if (in.fod_age > cfg.fod_staleness_timeout || !in.plan_ok) return NavMode::RAPID;
  return NavMode::FASTER;
}

double speed_command(NavMode mode, std::optional<double> nearest_hazard, const GncConfig& cfg,
                     double operator_speed) {
  switch (mode) {
    case NavMode::FASTER: {
      if (!nearest_hazard) return cfg.v_cmd_faster;
      const double ramp = (*nearest_hazard - cfg.d_stop) / (cfg.d_slow - cfg.d_stop);
      return cfg.v_cmd_faster * std::clamp(ramp, 0.0, 1.0);
    }
    case NavMode::RAPID: return cfg.v_rapid;
    case NavMode::TELEOP: return std::clamp(operator_speed, 0.0, cfg.teleop_speed_cap);
    case NavMode::SAFE_STOP: return 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

Grid2D<double> cost_field(const FarTraversabilityMap& map) {
  const auto rows = static_cast<long>(map.rows());
  const auto cols = static_cast<long>(map.cols());
  Grid2D<double> near_p(map.rows(), map.cols(), -1.0);
  Grid2D<double> costs(map.rows(), map.cols(), 1.0);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (!map.is_hazard(r, c)) continue;
      const double p = map.probability(r, c);
      for (long dr = -kProximityCells; dr <= kProximityCells; ++dr) {
        for (long dc = -kProximityCells; dc <= kProximityCells; ++dc) {
          if (!near_p.contains(r + dr, c + dc)) continue;
          near_p(r + dr, c + dc) = std::max(near_p(r + dr, c + dc), p);
        }
      }
    }
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      if (map.is_hazard(r, c)) costs(r, c) = std::numeric_limits<double>::infinity();
      else if (near_p(r, c) >= 0.0) costs(r, c) = 1.0 + kProximityGain * near_p(r, c);
    }
  }
  return costs;
}

double grid_path_cost(const std::vector<CellIndex>& cells, const Grid2D<double>& costs,
                      double cell_size) {
  double total = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const bool diagonal = cells[i].row != cells[i - 1].row && cells[i].col != cells[i - 1].col;
    total += (diagonal ? std::sqrt(2.0) : 1.0) * cell_size * costs(cells[i].row, cells[i].col);
  }
  return total;
}

bool line_of_sight(const FarTraversabilityMap& map, const Vec2& a, const Vec2& b) {
  const double len = distance(a, b);
  const double step = map.cell_size() / 4.0;
  const auto n = static_cast<std::size_t>(std::ceil(len / step));
  const auto start_cell = map.cell_of(a);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
    const Vec2 p = a + (b - a) * t;
    const auto cell = map.cell_of(p);
    if (!cell) return false;
    if (start_cell && cell->row == start_cell->row && cell->col == start_cell->col) continue;
    if (map.is_hazard(cell->row, cell->col)) return false;
  }
  return true;
}

double segment_cost(const FarTraversabilityMap& map, const Grid2D<double>& costs, const Vec2& a,
                    const Vec2& b) {
  const double len = distance(a, b);
  const double step = map.cell_size() / 4.0;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
  const auto start_cell = map.cell_of(a);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 p = a + (b - a) * ((static_cast<double>(k) + 0.5) / static_cast<double>(n));
    const auto cell = map.cell_of(p);
    if (!cell) return std::numeric_limits<double>::infinity();
    const bool own = start_cell && cell->row == start_cell->row && cell->col == start_cell->col;
    double m = costs(cell->row, cell->col);
    if (map.is_hazard(cell->row, cell->col)) {
      if (!own) return std::numeric_limits<double>::infinity();
      m = kEscapeCost;
    }
    sum += m;
  }
  return len * sum / static_cast<double>(n);
}

namespace {

// String pulling: extend each straight run while it costs no more than the
// stretch of polyline it replaces.
Path shortcut(const FarTraversabilityMap& map, const Grid2D<double>& costs,
              const std::vector<Vec2>& pts) {
  if (pts.size() <= 2) return Path(pts);
  std::vector<double> prefix(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k)
    prefix[k] = prefix[k - 1] + segment_cost(map, costs, pts[k - 1], pts[k]);
  auto ok = [&](std::size_t i, std::size_t j) {
    const double direct = segment_cost(map, costs, pts[i], pts[j]);
    if (!std::isfinite(direct)) return false;
    const double via = prefix[j] - prefix[i];
    return !std::isfinite(via) || direct <= via * (1.0 + 1e-9) + 1e-9;
  };
  std::vector<Vec2> out{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = i + 1;
    while (j + 1 < pts.size() && ok(i, j + 1)) ++j;
    out.push_back(pts[j]);
    i = j;
  }
  return Path(std::move(out));
}

double max_multiplier(const FarTraversabilityMap& map, const Grid2D<double>& costs,
                      const std::vector<Vec2>& pts) {
  double worst = 1.0;
  for (const Vec2& p : pts) {
    const auto cell = map.cell_of(p);
    if (!cell || map.is_hazard(cell->row, cell->col)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, costs(cell->row, cell->col));
  }
  return worst;
}

std::vector<Vec2> densify(const Vec2& a, const Vec2& b, double step) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(distance(a, b) / step)));
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k <= n; ++k)
    pts.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(n)));
  return pts;
}

using FilletCheck = std::function<bool(const std::vector<Vec2>& arc, const Vec2& prev,
                                       const Vec2& corner, const Vec2& next)>;

Path smooth_impl(const Path& polyline, const GncConfig& cfg, double spacing,
                 const FilletCheck& accept) {
  const auto& v = polyline.waypoints();
  if (v.size() <= 2) return polyline.resampled(spacing);

  const double r_cap = 2.0 * cfg.min_turn_radius;
  constexpr int kShrinkSteps = 6;
  std::vector<Vec2> out{v.front()};
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const Vec2 in_vec = v[i] - v[i - 1];
    const Vec2 out_vec = v[i + 1] - v[i];
    const double len_in = in_vec.norm();
    const double len_out = out_vec.norm();
    const Vec2 u1 = in_vec * (1.0 / len_in);
    const Vec2 u2 = out_vec * (1.0 / len_out);
    const double turn = std::atan2(u1.cross(u2), u1.dot(u2));
    const double abs_turn = std::abs(turn);
    if (abs_turn < 1e-6 || abs_turn > std::numbers::pi - 1e-6) {
      out.push_back(v[i]);
      continue;
    }
    // Each interior segment is shared between two corners.
    const double avail_in = (i == 1) ? len_in : len_in / 2.0;
    const double avail_out = (i + 2 == v.size()) ? len_out : len_out / 2.0;
    const double half_tan = std::tan(abs_turn / 2.0);
    double radius = std::min(std::min(avail_in, avail_out) / half_tan, r_cap);
    const double side = turn > 0.0 ? 1.0 : -1.0;

    std::vector<Vec2> arc;
    for (int attempt = 0; attempt <= kShrinkSteps; ++attempt, radius *= 0.5) {
      const double tangent = radius * half_tan;
      const Vec2 t1 = v[i] - u1 * tangent;
      const Vec2 normal{-u1.y * side, u1.x * side};
      const Vec2 center = t1 + normal * radius;
      const Vec2 r0 = t1 - center;
      const auto steps = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(radius * abs_turn / spacing)));
      arc.clear();
      for (std::size_t k = 0; k <= steps; ++k) {
        const double phi = side * abs_turn * static_cast<double>(k) / static_cast<double>(steps);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        arc.push_back(center + Vec2{c * r0.x - s * r0.y, s * r0.x + c * r0.y});
      }
      if (!accept || accept(arc, v[i - 1], v[i], v[i + 1])) break;
      if (attempt == kShrinkSteps) arc = {v[i]};
    }
    out.insert(out.end(), arc.begin(), arc.end());
  }
  out.push_back(v.back());

  // Densify straight stretches; arc points are already at `spacing`.
  std::vector<Vec2> dense{out.front()};
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double len = distance(out[i - 1], out[i]);
    const auto n = static_cast<std::size_t>(std::ceil(len / spacing - 1e-9));
    for (std::size_t k = 1; k <= n; ++k)
      dense.push_back(out[i - 1] + (out[i] - out[i - 1]) * (static_cast<double>(k) / n));
  }
  return Path(std::move(dense));
}

}  // namespace

PlanResult plan_path(const FarTraversabilityMap& map, const Vec2& start, const Vec2& goal,
                     const GncConfig& cfg) {
  return plan_path(map, cost_field(map), start, goal, cfg);
}

PlanResult plan_path(const FarTraversabilityMap& map, const Grid2D<double>& costs,
                     const Vec2& start, const Vec2& goal, const GncConfig& cfg,
                     std::optional<SearchWindow> window) {
  const auto s = map.cell_of(start);
  const auto g = map.cell_of(goal);
  if (!s || !g) throw BoundsError("plan_path: start or goal outside the map");
  if (map.is_hazard(g->row, g->col)) throw UnreachableError("plan_path: goal cell is hazardous");

  const long rows = static_cast<long>(map.rows());
  const long cols = static_cast<long>(map.cols());
  SearchWindow win = window.value_or(SearchWindow{0, rows - 1, 0, cols - 1});
  win.row_min = std::max(0L, std::min(win.row_min, std::min(s->row, g->row)));
  win.col_min = std::max(0L, std::min(win.col_min, std::min(s->col, g->col)));
  win.row_max = std::min(rows - 1, std::max(win.row_max, std::max(s->row, g->row)));
  win.col_max = std::min(cols - 1, std::max(win.col_max, std::max(s->col, g->col)));
  const long wr = win.row_max - win.row_min + 1;
  const long wc = win.col_max - win.col_min + 1;
  auto local = [&](long r, long c) { return (r - win.row_min) * wc + (c - win.col_min); };

  const double cs = map.cell_size();
  const double diag = std::sqrt(2.0) * cs;
  auto heuristic = [&](long r, long c) {
    const double dr = std::abs(static_cast<double>(r - g->row));
    const double dc = std::abs(static_cast<double>(c - g->col));
    return cs * (std::max(dr, dc) - std::min(dr, dc)) + diag * std::min(dr, dc);
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(wr * wc), inf);
  std::vector<long> parent(static_cast<std::size_t>(wr * wc), -1);
  std::vector<char> closed(static_cast<std::size_t>(wr * wc), 0);
  using Entry = std::tuple<double, long, long>;  // f, row, col
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  dist[local(s->row, s->col)] = 0.0;
  open.emplace(heuristic(s->row, s->col), s->row, s->col);
  bool found = false;
  while (!open.empty()) {
    const auto [f, r, c] = open.top();
    open.pop();
    const long li = local(r, c);
    if (closed[li]) continue;
    closed[li] = 1;
    if (r == g->row && c == g->col) {
      found = true;
      break;
    }
    for (long dr = -1; dr <= 1; ++dr) {
      for (long dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const long nr = r + dr;
        const long nc = c + dc;
        if (nr < win.row_min || nr > win.row_max || nc < win.col_min || nc > win.col_max) continue;
        // A start inside a hazard blob may leave it at kEscapeCost per cell.
        const bool escaping = map.is_hazard(r, c);
        const bool blocked = map.is_hazard(nr, nc);
        if (blocked && !escaping) continue;
        if (!escaping && dr != 0 && dc != 0 && (map.is_hazard(r, nc) || map.is_hazard(nr, c))) continue;
        const double step = (dr != 0 && dc != 0) ? diag : cs;
        const double nd = dist[li] + step * (blocked ? kEscapeCost : costs(nr, nc));
        const long ni = local(nr, nc);
        if (nd < dist[ni]) {
          dist[ni] = nd;
          parent[ni] = li;
          open.emplace(nd + heuristic(nr, nc), nr, nc);
        }
      }
    }
  }
  if (!found) throw UnreachableError("plan_path: no traversable route");

  PlanResult result;
  for (long li = local(g->row, g->col); li >= 0; li = parent[li])
    result.cells.push_back({li / wc + win.row_min, li % wc + win.col_min});
  std::reverse(result.cells.begin(), result.cells.end());
  result.cost = dist[local(g->row, g->col)];

  std::vector<Vec2> pts{start};
  for (std::size_t i = 1; i + 1 < result.cells.size(); ++i)
    pts.push_back(map.cell_center(result.cells[i].row, result.cells[i].col));
  pts.push_back(goal);
  result.polyline = shortcut(map, costs, pts);
  result.path = smooth_path(result.polyline, cfg, map, costs);
  return result;
}

Path smooth_path(const Path& polyline, const GncConfig& cfg, double spacing) {
  return smooth_impl(polyline, cfg, spacing, {});
}

Path smooth_path(const Path& polyline, const GncConfig& cfg, const FarTraversabilityMap& map,
                 const Grid2D<double>& costs, double spacing) {
  const double step = map.cell_size() / 4.0;
  return smooth_impl(polyline, cfg, spacing,
                     [&](const std::vector<Vec2>& arc, const Vec2& prev, const Vec2& corner,
                         const Vec2& next) {
                       auto around = densify(prev, corner, step);
                       const auto tail = densify(corner, next, step);
                       around.insert(around.end(), tail.begin() + 1, tail.end());
                       // Escape legs start inside a hazard; judge them only by cells ahead.
                       if (map.is_hazard_at(prev)) return max_multiplier(map, costs, arc) < kEscapeCost;
                       return max_multiplier(map, costs, arc) <= max_multiplier(map, costs, around) + 1e-9;
                     });
}

RoutePlan plan_route(const FarTraversabilityMap& map, const Grid2D<double>& costs,
                     const Vec2& rover, const std::vector<Vec2>& course, std::size_t next_index,
                     const GncConfig& cfg, const RouteOptions& opts) {
  RoutePlan plan;
  std::vector<Vec2> chain{rover};
  Vec2 current = rover;
  double travelled = 0.0;
  std::size_t skips = 0;
  const double cs = map.cell_size();
  const long margin = static_cast<long>(std::ceil(opts.window_margin / cs));

  for (std::size_t j = next_index; j < course.size(); ++j) {
    if (travelled >= opts.horizon) break;
    const Vec2& goal = course[j];
    const auto goal_cell = map.cell_of(goal);
    if (!goal_cell || map.is_hazard(goal_cell->row, goal_cell->col)) {
      ++plan.skipped_waypoints;
      if (++skips > opts.max_skips) break;
      continue;
    }
    std::vector<Vec2> leg;
    const double straight = distance(current, goal);
    if (segment_cost(map, costs, current, goal) <= straight * (1.0 + 1e-9) + 1e-12) {
      leg = {current, goal};
    } else {
      const auto a = map.cell_of(current);
      SearchWindow win{std::min(a->row, goal_cell->row) - margin,
                       std::max(a->row, goal_cell->row) + margin,
                       std::min(a->col, goal_cell->col) - margin,
                       std::max(a->col, goal_cell->col) + margin};
      try {
        leg = plan_path(map, costs, current, goal, cfg, win).polyline.waypoints();
      } catch (const UnreachableError&) {
        ++plan.skipped_waypoints;
        if (++skips > opts.max_skips) break;
        continue;
      }
    }
    skips = 0;
    ++plan.legs;
    for (std::size_t k = 1; k < leg.size(); ++k) {
      travelled += distance(leg[k - 1], leg[k]);
      chain.push_back(leg[k]);
    }
    current = goal;
  }

  plan.ok = plan.legs > 0;
  if (plan.ok) plan.path = smooth_path(Path(std::move(chain)), cfg, map, costs);
  return plan;
}

}  // namespace roversim::gnc
