#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>

#include "roversim/geometry.hpp"
#include "roversim/grid.hpp"
#include "roversim/path.hpp"

namespace roversim::travmap {

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double l) { return 1.0 / (1.0 + std::exp(-l)); }

struct MapConfig {
  double cell_size = 0.5;
  double hazard_prob_threshold = 0.7;
  double l_min = -4.0;
  double l_max = 4.0;

  void validate() const;
  bool operator==(const MapConfig&) const = default;
};

struct CellIndex {
  long row;
  long col;
};

// Far traversability map: world-anchored grid of log-odds hazard belief.
class FarTraversabilityMap {
public:
  FarTraversabilityMap(std::size_t rows, std::size_t cols, Vec2 origin, MapConfig cfg);

  std::size_t rows() const { return cells_.rows(); }
  std::size_t cols() const { return cells_.cols(); }
  const Vec2& origin() const { return origin_; }
  const MapConfig& config() const { return cfg_; }
  double cell_size() const { return cfg_.cell_size; }

  double log_odds(std::size_t row, std::size_t col) const { return cells_(row, col); }
  void set_log_odds(std::size_t row, std::size_t col, double l);
  double probability(std::size_t row, std::size_t col) const { return expit(cells_(row, col)); }
  bool is_hazard(std::size_t row, std::size_t col) const;
  bool is_hazard_at(const Vec2& world) const;

  std::optional<CellIndex> cell_of(const Vec2& world) const;
  Vec2 cell_center(std::size_t row, std::size_t col) const;
  bool contains(const Vec2& world) const { return cell_of(world).has_value(); }

  const Grid2D<double>& cells() const { return cells_; }
  Grid2D<double>& mutable_cells() { return cells_; }

private:
  Grid2D<double> cells_;
  Vec2 origin_;
  MapConfig cfg_;
  double hazard_log_odds_;
};

// Adds logit(p_hit) to the cell holding `world_position` and every cell whose
// centre lies within `radius`, clamped to [l_min, l_max]. Returns false (and
// leaves the map untouched) when the position is outside the map.
bool fuse_detection(FarTraversabilityMap& map, const Vec2& world_position, double p_hit,
                    double radius = 0.0);

// Arc length along `path` to the first sample point within `half_width` of a
// hazard cell, sampling every cell_size metres.
std::optional<double> query_corridor(const FarTraversabilityMap& map, const Path& path,
                                     double half_width);

// Moves every cell toward zero by rate * dt without crossing it.
void decay(FarTraversabilityMap& map, double dt, double rate);

void write_probability_csv(const FarTraversabilityMap& map, std::ostream& out);

}  // namespace roversim::travmap
