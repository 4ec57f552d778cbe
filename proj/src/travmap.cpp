#include "roversim/travmap.hpp"

#include <algorithm>
#include <ostream>

#include "roversim/errors.hpp"

namespace roversim::travmap {

void MapConfig::validate() const {
  if (!(cell_size > 0.0)) throw ValidationError("map.cell_size", "must be > 0");
  if (!(hazard_prob_threshold > 0.0 && hazard_prob_threshold < 1.0))
    throw ValidationError("map.hazard_prob_threshold", "must lie in (0, 1)");
  if (!(l_min < 0.0 && l_max > 0.0)) throw ValidationError("map.l_min", "need l_min < 0 < l_max");
}

FarTraversabilityMap::FarTraversabilityMap(std::size_t rows, std::size_t cols, Vec2 origin,
                                           MapConfig cfg)
    : cells_(rows, cols, 0.0),
      origin_(origin),
      cfg_(cfg),
      hazard_log_odds_(logit(cfg.hazard_prob_threshold)) {
  cfg_.validate();
}

void FarTraversabilityMap::set_log_odds(std::size_t row, std::size_t col, double l) {
  cells_(row, col) = std::clamp(l, cfg_.l_min, cfg_.l_max);
}

bool FarTraversabilityMap::is_hazard(std::size_t row, std::size_t col) const {
  return cells_(row, col) >= hazard_log_odds_ - 1e-12;
}

bool FarTraversabilityMap::is_hazard_at(const Vec2& world) const {
  const auto idx = cell_of(world);
  return idx && is_hazard(idx->row, idx->col);
}

std::optional<CellIndex> FarTraversabilityMap::cell_of(const Vec2& world) const {
  const Vec2 local = world - origin_;
  const long col = static_cast<long>(std::floor(local.x / cfg_.cell_size));
  const long row = static_cast<long>(std::floor(local.y / cfg_.cell_size));
  // The far edge belongs to the last cell.
  const long c = (col == static_cast<long>(cols()) && local.x <= cols() * cfg_.cell_size) ? col - 1 : col;
  const long r = (row == static_cast<long>(rows()) && local.y <= rows() * cfg_.cell_size) ? row - 1 : row;
  if (!cells_.contains(r, c)) return std::nullopt;
  return CellIndex{r, c};
}

Vec2 FarTraversabilityMap::cell_center(std::size_t row, std::size_t col) const {
  return origin_ + Vec2{(static_cast<double>(col) + 0.5) * cfg_.cell_size,
                        (static_cast<double>(row) + 0.5) * cfg_.cell_size};
}

bool fuse_detection(FarTraversabilityMap& map, const Vec2& world_position, double p_hit,
                    double radius) {
  if (!(p_hit > 0.0 && p_hit < 1.0)) throw DomainError("fuse_detection: p_hit must lie in (0, 1)");
  const auto home = map.cell_of(world_position);
  if (!home) return false;

  const double delta = logit(p_hit);
  const double cs = map.cell_size();
  const long reach = static_cast<long>(std::ceil(radius / cs)) + 1;
  for (long r = home->row - reach; r <= home->row + reach; ++r) {
    for (long c = home->col - reach; c <= home->col + reach; ++c) {
      if (!map.cells().contains(r, c)) continue;
      const bool own = (r == home->row && c == home->col);
      if (!own && distance(map.cell_center(r, c), world_position) > radius) continue;
      map.set_log_odds(r, c, map.log_odds(r, c) + delta);
    }
  }
  return true;
}

std::optional<double> query_corridor(const FarTraversabilityMap& map, const Path& path,
                                     double half_width) {
  if (path.empty()) return std::nullopt;
  const double cs = map.cell_size();
  const long reach = static_cast<long>(std::ceil(half_width / cs)) + 1;
  for (double s : path.sample_arcs(cs)) {
    const Vec2 p = path.point_at(s);
    const auto home = map.cell_of(p);
    if (home && map.is_hazard(home->row, home->col)) return s;
    const Vec2 local = p - map.origin();
    const long hr = static_cast<long>(std::floor(local.y / cs));
    const long hc = static_cast<long>(std::floor(local.x / cs));
    for (long r = hr - reach; r <= hr + reach; ++r) {
      for (long c = hc - reach; c <= hc + reach; ++c) {
        if (!map.cells().contains(r, c) || !map.is_hazard(r, c)) continue;
        if (distance(map.cell_center(r, c), p) <= half_width) return s;
      }
    }
  }
  return std::nullopt;
}

void decay(FarTraversabilityMap& map, double dt, double rate) {
  if (rate < 0.0 || dt < 0.0) throw DomainError("decay: rate and dt must be >= 0");
  const double step = rate * dt;
  if (step == 0.0) return;
  for (double& l : map.mutable_cells().data()) {
    if (l > 0.0) l = std::max(0.0, l - step);
    else if (l < 0.0) l = std::min(0.0, l + step);
  }
}

void write_probability_csv(const FarTraversabilityMap& map, std::ostream& out) {
  out.precision(6);
  for (std::size_t r = 0; r < map.rows(); ++r) {
    for (std::size_t c = 0; c < map.cols(); ++c) {
      if (c) out << ',';
      out << map.probability(r, c);
    }
    out << '\n';
  }
}

}  // namespace roversim::travmap
