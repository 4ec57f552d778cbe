#include "roversim/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "roversim/errors.hpp"
#include "roversim/rng.hpp"

namespace roversim::terrain {

namespace {

constexpr int kMaxKeepOutRedraws = 64;

double bilinear(const Grid2D<double>& g, double cell_size, const Vec2& p) {
  // Sample positions sit on cell centres; clamp to the outermost centres.
  const double fx = std::clamp(p.x / cell_size - 0.5, 0.0, static_cast<double>(g.cols() - 1));
  const double fy = std::clamp(p.y / cell_size - 0.5, 0.0, static_cast<double>(g.rows() - 1));
  const auto c0 = static_cast<std::size_t>(std::floor(fx));
  const auto r0 = static_cast<std::size_t>(std::floor(fy));
  const std::size_t c1 = std::min(c0 + 1, g.cols() - 1);
  const std::size_t r1 = std::min(r0 + 1, g.rows() - 1);
  const double tx = fx - static_cast<double>(c0);
  const double ty = fy - static_cast<double>(r0);
  const double top = g(r0, c0) * (1.0 - tx) + g(r0, c1) * tx;
  const double bottom = g(r1, c0) * (1.0 - tx) + g(r1, c1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

HazardSpec sample_hazard(HazardKind kind, const TerrainParams& params, Rng& rng) {
  HazardSpec h;
  h.kind = kind;
  const double extent = params.extent();
  for (int attempt = 0; attempt <= kMaxKeepOutRedraws; ++attempt) {
    h.center = {rng.uniform(0.0, extent), rng.uniform(0.0, extent)};
    const bool blocked = std::any_of(params.keep_out.begin(), params.keep_out.end(),
                                     [&](const KeepOutZone& z) {
                                       return distance(z.center, h.center) < z.radius;
                                     });
    if (!blocked) break;
  }
  if (kind == HazardKind::Boulder) {
    h.radius = rng.uniform(0.25, 0.75);
    h.height = rng.uniform(0.3, 0.8);
  } else {
    h.radius = rng.uniform(0.75, 2.0);
    h.height = -rng.uniform(0.2, 0.6);
  }
  return h;
}

}  // namespace

std::string_view to_string(HazardKind kind) {
  switch (kind) {
    case HazardKind::Boulder: return "Boulder";
    case HazardKind::Crater: return "Crater";
    case HazardKind::Dune: return "Dune";
  }
  return "?";
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Safe: return "Safe";
    case Label::Crater: return "Crater";
    case Label::Boulder: return "Boulder";
    case Label::Shadow: return "Shadow";
    case Label::Slope: return "Slope";
  }
  return "?";
}

std::optional<HazardKind> hazard_kind_from_string(std::string_view name) {
  if (name == "Boulder") return HazardKind::Boulder;
  if (name == "Crater") return HazardKind::Crater;
  if (name == "Dune") return HazardKind::Dune;
  return std::nullopt;
}

void TerrainParams::validate() const {
  if (size_cells < 8) throw ValidationError("size_cells", "must be >= 8");
  if (!(cell_size > 0.0)) throw ValidationError("cell_size", "must be > 0");
  if (!(roughness >= 0.0 && roughness <= 1.0))
    throw ValidationError("roughness", "must lie in [0, 1]");
  if (!(amplitude >= 0.0)) throw ValidationError("amplitude", "must be >= 0");
  if (!(rock_density >= 0.0)) throw ValidationError("rock_density", "must be >= 0");
  if (!(crater_density >= 0.0)) throw ValidationError("crater_density", "must be >= 0");
  if (!(sun_elevation >= 0.0 && sun_elevation <= 90.0))
    throw ValidationError("sun_elevation", "must lie in [0, 90]");
  if (!std::isfinite(sun_azimuth)) throw ValidationError("sun_azimuth", "must be finite");
  if (!(slope_threshold > 0.0)) throw ValidationError("slope_threshold", "must be > 0");
  for (const auto& z : keep_out)
    if (!(z.radius >= 0.0)) throw ValidationError("keep_out.radius", "must be >= 0");
  for (const auto& h : extra_hazards) {
    if (!(h.radius > 0.0)) throw ValidationError("extra_hazards.radius", "must be > 0");
    if (h.kind == HazardKind::Boulder && !(h.height > 0.0))
      throw ValidationError("extra_hazards.height", "boulder height must be > 0");
    if (h.kind == HazardKind::Crater && !(h.height < 0.0))
      throw ValidationError("extra_hazards.height", "crater height must be < 0");
  }
}

Grid2D<double> fractal_heightmap(const TerrainParams& params) {
  const auto n = static_cast<std::size_t>(params.size_cells);
  std::size_t side = 1;
  while (side + 1 < n) side *= 2;
  const std::size_t dim = side + 1;

  Rng rng = Rng::derive(params.seed, "terrain.heights");
  Grid2D<double> h(dim, dim, 0.0);
  h(0, 0) = rng.uniform(-1.0, 1.0);
  h(0, side) = rng.uniform(-1.0, 1.0);
  h(side, 0) = rng.uniform(-1.0, 1.0);
  h(side, side) = rng.uniform(-1.0, 1.0);

  double scale = params.roughness;
  for (std::size_t step = side; step > 1; step /= 2) {
    const std::size_t half = step / 2;
    // Diamond: square centres.
    for (std::size_t r = half; r < dim; r += step) {
      for (std::size_t c = half; c < dim; c += step) {
        const double avg =
            (h(r - half, c - half) + h(r - half, c + half) + h(r + half, c - half) +
             h(r + half, c + half)) / 4.0;
        h(r, c) = avg + rng.uniform(-scale, scale);
      }
    }
    // Square: edge midpoints.
    for (std::size_t r = 0; r < dim; r += half) {
      const std::size_t c_start = ((r / half) % 2 == 0) ? half : 0;
      for (std::size_t c = c_start; c < dim; c += step) {
        double sum = 0.0;
        int count = 0;
        if (r >= half) { sum += h(r - half, c); ++count; }
        if (r + half < dim) { sum += h(r + half, c); ++count; }
        if (c >= half) { sum += h(r, c - half); ++count; }
        if (c + half < dim) { sum += h(r, c + half); ++count; }
        h(r, c) = sum / count + rng.uniform(-scale, scale);
      }
    }
    scale *= params.roughness;
  }

  Grid2D<double> out(n, n, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      out(r, c) = h(r, c);
      lo = std::min(lo, h(r, c));
      hi = std::max(hi, h(r, c));
    }
  }
  const double range = hi - lo;
  for (double& v : out.data())
    v = (range > 0.0 && params.amplitude > 0.0) ? (v - lo) / range * params.amplitude : 0.0;
  return out;
}

double hazard_profile(const HazardSpec& hazard, double r) {
  if (r >= hazard.radius) return 0.0;
  const double u = r / hazard.radius;
  const double w = 1.0 - u * u;
  return hazard.height * w * w;
}

Vec2 cell_gradient(const Grid2D<double>& heights, double cell_size, std::size_t row,
                   std::size_t col) {
  const std::size_t rows = heights.rows();
  const std::size_t cols = heights.cols();
  const std::size_t c_lo = col > 0 ? col - 1 : col;
  const std::size_t c_hi = col + 1 < cols ? col + 1 : col;
  const std::size_t r_lo = row > 0 ? row - 1 : row;
  const std::size_t r_hi = row + 1 < rows ? row + 1 : row;
  const double gx = c_hi > c_lo ? (heights(row, c_hi) - heights(row, c_lo)) /
                                      (static_cast<double>(c_hi - c_lo) * cell_size)
                                : 0.0;
  const double gy = r_hi > r_lo ? (heights(r_hi, col) - heights(r_lo, col)) /
                                      (static_cast<double>(r_hi - r_lo) * cell_size)
                                : 0.0;
  return {gx, gy};
}

Grid2D<bool> shadow_mask(const Grid2D<double>& heights, const TerrainParams& params) {
  Grid2D<bool> mask(heights.rows(), heights.cols(), false);
  if (params.sun_elevation >= 90.0) return mask;

  const double cs = params.cell_size;
  const double az = deg2rad(params.sun_azimuth);
  const Vec2 dir{std::cos(az), std::sin(az)};
  const double rise = std::tan(deg2rad(params.sun_elevation));
  const double step = cs * 0.5;
  const double extent = static_cast<double>(heights.cols()) * cs;
  const double max_h = *std::max_element(heights.data().begin(), heights.data().end());

  for (std::size_t r = 0; r < heights.rows(); ++r) {
    for (std::size_t c = 0; c < heights.cols(); ++c) {
      const Vec2 origin{(static_cast<double>(c) + 0.5) * cs, (static_cast<double>(r) + 0.5) * cs};
      const double h0 = heights(r, c);
      for (double s = step;; s += step) {
        const Vec2 p = origin + dir * s;
        if (p.x < 0.0 || p.y < 0.0 || p.x > extent ||
            p.y > static_cast<double>(heights.rows()) * cs)
          break;
        const double ray_h = h0 + s * rise;
        if (ray_h > max_h) break;
        if (bilinear(heights, cs, p) > ray_h + 1e-9) {
          mask(r, c) = true;
          break;
        }
      }
    }
  }
  return mask;
}

Grid2D<Label> classify_cells(const Grid2D<double>& heights, const std::vector<HazardSpec>& hazards,
                             const TerrainParams& params) {
  const double cs = params.cell_size;
  Grid2D<Label> labels(heights.rows(), heights.cols(), Label::Safe);

  const Grid2D<bool> shadow = shadow_mask(heights, params);
  const double slope_limit = std::tan(deg2rad(params.slope_threshold));
  for (std::size_t r = 0; r < heights.rows(); ++r) {
    for (std::size_t c = 0; c < heights.cols(); ++c) {
      if (shadow(r, c)) {
        labels(r, c) = Label::Shadow;
      } else if (cell_gradient(heights, cs, r, c).norm() > slope_limit) {
        labels(r, c) = Label::Slope;
      }
    }
  }

  // Craters first so boulders overwrite them where footprints overlap.
  for (HazardKind kind : {HazardKind::Crater, HazardKind::Boulder}) {
    const Label label = kind == HazardKind::Boulder ? Label::Boulder : Label::Crater;
    for (const auto& hz : hazards) {
      if (hz.kind != kind) continue;
      const long c_lo = std::max(0L, static_cast<long>(std::floor((hz.center.x - hz.radius) / cs)));
      const long c_hi = std::min(static_cast<long>(heights.cols()) - 1,
                                 static_cast<long>(std::floor((hz.center.x + hz.radius) / cs)));
      const long r_lo = std::max(0L, static_cast<long>(std::floor((hz.center.y - hz.radius) / cs)));
      const long r_hi = std::min(static_cast<long>(heights.rows()) - 1,
                                 static_cast<long>(std::floor((hz.center.y + hz.radius) / cs)));
      for (long r = r_lo; r <= r_hi; ++r) {
        for (long c = c_lo; c <= c_hi; ++c) {
          const Vec2 p{(static_cast<double>(c) + 0.5) * cs, (static_cast<double>(r) + 0.5) * cs};
          if (distance(p, hz.center) < hz.radius) labels(r, c) = label;
        }
      }
    }
  }
  return labels;
}

TerrainGrid generate_terrain(const TerrainParams& params) {
  params.validate();
  TerrainGrid grid;
  grid.params = params;
  grid.heights = fractal_heightmap(params);

  Rng rng = Rng::derive(params.seed, "terrain.hazards");
  const double area_units = params.extent() * params.extent() / 100.0;
  const std::uint64_t rocks = rng.poisson(params.rock_density * area_units);
  const std::uint64_t craters = rng.poisson(params.crater_density * area_units);
  for (std::uint64_t i = 0; i < craters; ++i)
    grid.hazards.push_back(sample_hazard(HazardKind::Crater, params, rng));
  for (std::uint64_t i = 0; i < rocks; ++i)
    grid.hazards.push_back(sample_hazard(HazardKind::Boulder, params, rng));
  grid.hazards.insert(grid.hazards.end(), params.extra_hazards.begin(), params.extra_hazards.end());

  const double cs = params.cell_size;
  for (const auto& hz : grid.hazards) {
    const long c_lo = std::max(0L, static_cast<long>(std::floor((hz.center.x - hz.radius) / cs)));
    const long c_hi = std::min(static_cast<long>(params.size_cells) - 1,
                               static_cast<long>(std::floor((hz.center.x + hz.radius) / cs)));
    const long r_lo = std::max(0L, static_cast<long>(std::floor((hz.center.y - hz.radius) / cs)));
    const long r_hi = std::min(static_cast<long>(params.size_cells) - 1,
                               static_cast<long>(std::floor((hz.center.y + hz.radius) / cs)));
    for (long r = r_lo; r <= r_hi; ++r) {
      for (long c = c_lo; c <= c_hi; ++c) {
        grid.heights(r, c) += hazard_profile(hz, distance(grid.cell_center(r, c), hz.center));
      }
    }
  }

  grid.labels = classify_cells(grid.heights, grid.hazards, params);
  return grid;
}

double slope_at(const TerrainGrid& grid, const Vec2& position) {
  if (!grid.inside(position)) throw BoundsError("slope_at: position outside terrain");
  const double cs = grid.cell_size();
  const auto& h = grid.heights;
  const double fx = std::clamp(position.x / cs - 0.5, 0.0, static_cast<double>(h.cols() - 1));
  const double fy = std::clamp(position.y / cs - 0.5, 0.0, static_cast<double>(h.rows() - 1));
  const auto c0 = static_cast<std::size_t>(std::floor(fx));
  const auto r0 = static_cast<std::size_t>(std::floor(fy));
  const std::size_t c1 = std::min(c0 + 1, h.cols() - 1);
  const std::size_t r1 = std::min(r0 + 1, h.rows() - 1);
  const double tx = fx - static_cast<double>(c0);
  const double ty = fy - static_cast<double>(r0);

  const Vec2 g00 = cell_gradient(h, cs, r0, c0);
  const Vec2 g01 = cell_gradient(h, cs, r0, c1);
  const Vec2 g10 = cell_gradient(h, cs, r1, c0);
  const Vec2 g11 = cell_gradient(h, cs, r1, c1);
  const Vec2 g = (g00 * (1.0 - tx) + g01 * tx) * (1.0 - ty) + (g10 * (1.0 - tx) + g11 * tx) * ty;
  return rad2deg(std::atan(g.norm()));
}

void write_heights_csv(const TerrainGrid& grid, std::ostream& out) {
  const auto& h = grid.heights;
  out.precision(17);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    for (std::size_t c = 0; c < h.cols(); ++c) {
      if (c) out << ',';
      out << h(r, c);
    }
    out << '\n';
  }
}

void write_labels_csv(const TerrainGrid& grid, std::ostream& out) {
  const auto& l = grid.labels;
  for (std::size_t r = 0; r < l.rows(); ++r) {
    for (std::size_t c = 0; c < l.cols(); ++c) {
      if (c) out << ',';
      out << to_string(l(r, c));
    }
    out << '\n';
  }
}

}  // namespace roversim::terrain
