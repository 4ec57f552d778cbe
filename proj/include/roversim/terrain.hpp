#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "roversim/geometry.hpp"
#include "roversim/grid.hpp"

namespace roversim::terrain {

enum class HazardKind { Boulder, Crater, Dune };

// Ground classes. The sky class of the image ontology has no ground cell.
enum class Label : std::uint8_t { Safe, Crater, Boulder, Shadow, Slope };

std::string_view to_string(HazardKind kind);
std::string_view to_string(Label label);
std::optional<HazardKind> hazard_kind_from_string(std::string_view name);

struct HazardSpec {
  Vec2 center;
  double radius = 0.5;  // metres
  double height = 0.5;  // metres, negative for craters
  HazardKind kind = HazardKind::Boulder;

  bool is_obstacle() const { return kind != HazardKind::Dune; }
  bool operator==(const HazardSpec&) const = default;
};

struct KeepOutZone {
  Vec2 center;
  double radius = 0.0;
  bool operator==(const KeepOutZone&) const = default;
};

struct TerrainParams {
  int size_cells = 64;
  double cell_size = 0.5;
  double roughness = 0.5;       // fractal persistence
  double amplitude = 1.0;       // peak-to-peak height, metres
  double rock_density = 0.0;    // per 100 m^2
  double crater_density = 0.0;  // per 100 m^2
  double sun_azimuth = 135.0;   // degrees, counter-clockwise from +x, pointing at the sun
  double sun_elevation = 45.0;  // degrees
  double slope_threshold = 15.0;
  std::uint64_t seed = 1;
  // Random hazards are never centred inside these discs.
  std::vector<KeepOutZone> keep_out;
  // Placed in addition to the sampled hazards.
  std::vector<HazardSpec> extra_hazards;

  // Throws ValidationError naming the first invalid field.
  void validate() const;
  double extent() const { return size_cells * cell_size; }
  bool operator==(const TerrainParams&) const = default;
};

struct TerrainGrid {
  Grid2D<double> heights;
  Grid2D<Label> labels;
  std::vector<HazardSpec> hazards;
  TerrainParams params;

  double cell_size() const { return params.cell_size; }
  double extent() const { return params.extent(); }
  Vec2 cell_center(std::size_t row, std::size_t col) const {
    return {(static_cast<double>(col) + 0.5) * cell_size(),
            (static_cast<double>(row) + 0.5) * cell_size()};
  }
  bool inside(const Vec2& p) const {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= extent() && p.y <= extent();
  }
};

TerrainGrid generate_terrain(const TerrainParams& params);

// Label priority: Boulder > Crater > Shadow > Slope > Safe.
Grid2D<Label> classify_cells(const Grid2D<double>& heights, const std::vector<HazardSpec>& hazards,
                             const TerrainParams& params);

// Terrain slope in degrees at a world position; throws BoundsError outside the grid.
double slope_at(const TerrainGrid& grid, const Vec2& position);

// Per-cell central-difference gradient (one-sided on the border).
Vec2 cell_gradient(const Grid2D<double>& heights, double cell_size, std::size_t row,
                   std::size_t col);

// Midpoint-displacement heightmap scaled to [0, amplitude]; no hazards.
Grid2D<double> fractal_heightmap(const TerrainParams& params);

// Radially smooth bump (boulder, dune) or pit (crater) height at distance r.
double hazard_profile(const HazardSpec& hazard, double r);

// Cells occluded from the sun by the heightmap.
Grid2D<bool> shadow_mask(const Grid2D<double>& heights, const TerrainParams& params);

void write_heights_csv(const TerrainGrid& grid, std::ostream& out);
void write_labels_csv(const TerrainGrid& grid, std::ostream& out);

}  // namespace roversim::terrain
