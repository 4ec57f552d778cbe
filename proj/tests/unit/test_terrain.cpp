#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "doctest.h"

#include "roversim/errors.hpp"
#include "roversim/terrain.hpp"

using namespace roversim;
using namespace roversim::terrain;

namespace {

TerrainParams flat_params() {
  TerrainParams p;
  p.size_cells = 32;
  p.amplitude = 0.0;
  return p;
}

// Mean central-difference gradient magnitude over interior cells, computed
// directly from the height array.
double mean_gradient(const Grid2D<double>& h, double cs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 1; r + 1 < h.rows(); ++r)
    for (std::size_t c = 1; c + 1 < h.cols(); ++c) {
      const double gx = (h(r, c + 1) - h(r, c - 1)) / (2.0 * cs);
      const double gy = (h(r + 1, c) - h(r - 1, c)) / (2.0 * cs);
      sum += std::sqrt(gx * gx + gy * gy);
      ++n;
    }
  return sum / static_cast<double>(n);
}

// Bilinear surface through the cell-centre samples, clamped at the border.
double surface(const Grid2D<double>& h, double cs, double x, double y) {
  const double fx = std::clamp(x / cs - 0.5, 0.0, h.cols() - 1.0);
  const double fy = std::clamp(y / cs - 0.5, 0.0, h.rows() - 1.0);
  const std::size_t c0 = static_cast<std::size_t>(fx), r0 = static_cast<std::size_t>(fy);
  const std::size_t c1 = std::min(c0 + 1, h.cols() - 1), r1 = std::min(r0 + 1, h.rows() - 1);
  const double tx = fx - c0, ty = fy - r0;
  return (1 - ty) * ((1 - tx) * h(r0, c0) + tx * h(r0, c1)) + ty * ((1 - tx) * h(r1, c0) + tx * h(r1, c1));
}

// Marches from each cell centre toward the sun in 1 cm steps across the whole
// grid and reports whether the surface ever rises above the ray.
Grid2D<bool> marched_shadow(const Grid2D<double>& h, const TerrainParams& p) {
  Grid2D<bool> out(h.rows(), h.cols(), false);
  const double az = p.sun_azimuth * M_PI / 180.0;
  const double rise = std::tan(p.sun_elevation * M_PI / 180.0);
  const double extent = h.cols() * p.cell_size;
  for (std::size_t r = 0; r < h.rows(); ++r)
    for (std::size_t c = 0; c < h.cols(); ++c) {
      const double x0 = (c + 0.5) * p.cell_size;
      const double y0 = (r + 0.5) * p.cell_size;
      const double h0 = h(r, c);
      for (double s = 0.01;; s += 0.01) {
        const double x = x0 + s * std::cos(az), y = y0 + s * std::sin(az);
        if (x < 0 || y < 0 || x > extent || y > extent) break;
        if (surface(h, p.cell_size, x, y) > h0 + s * rise + 1e-9) {
          out(r, c) = true;
          break;
        }
      }
    }
  return out;
}

}  // namespace

TEST_CASE("zero amplitude terrain without hazards is flat and safe") {
  const auto g = generate_terrain(flat_params());
  for (double v : g.heights.data()) CHECK(v == 0.0);
  for (Label l : g.labels.data()) CHECK(l == Label::Safe);
  for (double x = 0.0; x <= g.extent(); x += 0.37)
    for (double y = 0.0; y <= g.extent(); y += 0.41) CHECK(slope_at(g, {x, y}) == 0.0);
}

TEST_CASE("generation is deterministic for a fixed seed") {
  TerrainParams p;
  p.size_cells = 48;
  p.rock_density = 2.0;
  p.crater_density = 0.5;
  p.seed = 77;
  const auto a = generate_terrain(p);
  const auto b = generate_terrain(p);
  CHECK(a.heights == b.heights);
  CHECK(a.labels == b.labels);
  CHECK(a.hazards == b.hazards);
  p.seed = 78;
  CHECK_FALSE(generate_terrain(p).heights == a.heights);
}

TEST_CASE("rougher terrain has a larger mean gradient") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TerrainParams p;
    p.size_cells = 64;
    p.amplitude = 2.0;
    p.seed = seed;
    p.roughness = 0.8;
    const double rough = mean_gradient(generate_terrain(p).heights, p.cell_size);
    p.roughness = 0.3;
    const double smooth = mean_gradient(generate_terrain(p).heights, p.cell_size);
    CHECK(rough > smooth);
  }
}

TEST_CASE("heightmap spans the configured amplitude") {
  TerrainParams p;
  p.amplitude = 3.0;
  const auto h = fractal_heightmap(p);
  CHECK(*std::min_element(h.data().begin(), h.data().end()) == doctest::Approx(0.0));
  CHECK(*std::max_element(h.data().begin(), h.data().end()) == doctest::Approx(3.0));
}

TEST_CASE("analytic ramp steeper than the threshold is all Slope") {
  TerrainParams p = flat_params();
  p.sun_elevation = 90.0;
  const double rise = std::tan(20.0 * M_PI / 180.0);
  Grid2D<double> h(32, 32, 0.0);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t c = 0; c < 32; ++c) h(r, c) = (c + 0.5) * p.cell_size * rise;
  const auto labels = classify_cells(h, {}, p);
  for (Label l : labels.data()) CHECK(l == Label::Slope);
  for (std::size_t c = 0; c < 32; ++c)
    CHECK(std::atan(cell_gradient(h, p.cell_size, 5, c).norm()) * 180.0 / M_PI ==
          doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("flat grid classifies as Safe even under a low sun") {
  TerrainParams p = flat_params();
  p.sun_elevation = 1.0;
  const auto labels = classify_cells(Grid2D<double>(32, 32, 0.0), {}, p);
  for (Label l : labels.data()) CHECK(l == Label::Safe);
}

TEST_CASE("slope_at on a 1-in-2 ramp is atan(0.5)") {
  TerrainGrid g = generate_terrain(flat_params());
  for (std::size_t r = 0; r < g.heights.rows(); ++r)
    for (std::size_t c = 0; c < g.heights.cols(); ++c) g.heights(r, c) = (r + 0.5) * g.cell_size() * 0.5;
  const double expected = std::atan(0.5) * 180.0 / M_PI;
  CHECK(expected == doctest::Approx(26.57).epsilon(0.001));
  for (double x = 0.3; x < g.extent(); x += 1.3)
    for (double y = 0.3; y < g.extent(); y += 1.7) CHECK(std::abs(slope_at(g, {x, y}) - expected) < 0.1);
}

TEST_CASE("slope_at at a cell centre equals the brute-force finite difference") {
  TerrainParams p;
  p.size_cells = 32;
  p.amplitude = 2.5;
  p.rock_density = 3.0;
  p.seed = 5;
  const auto g = generate_terrain(p);
  const auto& h = g.heights;
  const double cs = g.cell_size();
  for (std::size_t r = 1; r + 1 < h.rows(); r += 3)
    for (std::size_t c = 1; c + 1 < h.cols(); c += 3) {
      const double gx = (h(r, c + 1) - h(r, c - 1)) / (2.0 * cs);
      const double gy = (h(r + 1, c) - h(r - 1, c)) / (2.0 * cs);
      const double oracle = std::atan(std::hypot(gx, gy)) * 180.0 / M_PI;
      CHECK(std::abs(slope_at(g, g.cell_center(r, c)) - oracle) < 1e-9);
    }
}

TEST_CASE("slope_at outside the grid is a bounds error") {
  const auto g = generate_terrain(flat_params());
  CHECK_THROWS_AS(slope_at(g, {-0.1, 1.0}), BoundsError);
  CHECK_THROWS_AS(slope_at(g, {1.0, g.extent() + 0.1}), BoundsError);
}

TEST_CASE("single boulder under a low sun casts a contiguous anti-sun shadow") {
  TerrainParams p = flat_params();
  p.size_cells = 64;
  p.sun_elevation = 10.0;
  p.sun_azimuth = 30.0;
  HazardSpec b{{16.0, 16.0}, 0.75, 0.8, HazardKind::Boulder};
  p.extra_hazards = {b};
  const auto g = generate_terrain(p);
  const auto oracle = marched_shadow(g.heights, p);

  std::size_t agree = 0, either = 0;
  std::vector<std::pair<long, long>> shadow;
  const Vec2 sun{std::cos(p.sun_azimuth * M_PI / 180.0), std::sin(p.sun_azimuth * M_PI / 180.0)};
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c) {
      if (distance(g.cell_center(r, c), b.center) < b.radius) {
        CHECK(g.labels(r, c) == Label::Boulder);
        continue;
      }
      const bool got = g.labels(r, c) == Label::Shadow;
      if (got || oracle(r, c)) {
        ++either;
        if (got == oracle(r, c)) ++agree;
      }
      if (got) {
        shadow.push_back({static_cast<long>(r), static_cast<long>(c)});
        CHECK((g.cell_center(r, c) - b.center).dot(sun) < 0.0);
      }
    }
  REQUIRE(shadow.size() > 5);
  CHECK(static_cast<double>(agree) / static_cast<double>(either) >= 0.95);

  // Shadow plus boulder footprint forms one 8-connected region.
  Grid2D<bool> seen(64, 64, false);
  auto occupied = [&](long r, long c) {
    return g.labels.contains(r, c) &&
           (g.labels(r, c) == Label::Shadow || g.labels(r, c) == Label::Boulder);
  };
  std::queue<std::pair<long, long>> q;
  q.push(shadow.front());
  seen(shadow.front().first, shadow.front().second) = true;
  while (!q.empty()) {
    const auto [r, c] = q.front();
    q.pop();
    for (long dr = -1; dr <= 1; ++dr)
      for (long dc = -1; dc <= 1; ++dc)
        if (occupied(r + dr, c + dc) && !seen(r + dr, c + dc)) {
          seen(r + dr, c + dc) = true;
          q.push({r + dr, c + dc});
        }
  }
  for (const auto& [r, c] : shadow) CHECK(seen(r, c));
}

TEST_CASE("label invariants hold on random terrain") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    TerrainParams p;
    p.size_cells = 48;
    p.amplitude = 4.0;
    p.roughness = 0.6;
    p.rock_density = 4.0;
    p.crater_density = 1.0;
    p.seed = seed;
    const auto g = generate_terrain(p);
    REQUIRE(g.labels.rows() == g.heights.rows());
    REQUIRE(g.labels.cols() == g.heights.cols());
    const auto shadow = shadow_mask(g.heights, p);
    const double limit = std::tan(p.slope_threshold * M_PI / 180.0);
    for (std::size_t r = 0; r < g.labels.rows(); ++r)
      for (std::size_t c = 0; c < g.labels.cols(); ++c) {
        const Vec2 ctr = g.cell_center(r, c);
        bool in_boulder = false, in_crater = false;
        for (const auto& hz : g.hazards) {
          if (distance(ctr, hz.center) >= hz.radius) continue;
          in_boulder |= hz.kind == HazardKind::Boulder;
          in_crater |= hz.kind == HazardKind::Crater;
        }
        Label expected = Label::Safe;
        if (in_boulder) expected = Label::Boulder;
        else if (in_crater) expected = Label::Crater;
        else if (shadow(r, c)) expected = Label::Shadow;
        else if (cell_gradient(g.heights, p.cell_size, r, c).norm() > limit) expected = Label::Slope;
        CHECK(g.labels(r, c) == expected);
      }
  }
}

TEST_CASE("hazard counts realize the configured Poisson density") {
  TerrainParams p;
  p.size_cells = 64;  // 32 m square
  p.rock_density = 1.5;
  p.crater_density = 0.4;
  const double area_units = p.extent() * p.extent() / 100.0;
  const int seeds = 25;
  std::size_t rocks = 0, craters = 0;
  for (int s = 1; s <= seeds; ++s) {
    p.seed = static_cast<std::uint64_t>(s) * 7919;
    for (const auto& h : generate_terrain(p).hazards) {
      rocks += h.kind == HazardKind::Boulder;
      craters += h.kind == HazardKind::Crater;
    }
  }
  const double mean_rocks = p.rock_density * area_units * seeds;
  const double mean_craters = p.crater_density * area_units * seeds;
  CHECK(std::abs(rocks - mean_rocks) <= 3.0 * std::sqrt(mean_rocks));
  CHECK(std::abs(craters - mean_craters) <= 3.0 * std::sqrt(mean_craters));
}

TEST_CASE("random hazards avoid keep-out zones") {
  TerrainParams p;
  p.rock_density = 10.0;
  p.keep_out = {{{8.0, 8.0}, 4.0}};
  for (const auto& h : generate_terrain(p).hazards) CHECK(distance(h.center, {8.0, 8.0}) >= 4.0);
}

TEST_CASE("hazard profile peaks at the centre and vanishes at the rim") {
  const HazardSpec b{{0, 0}, 1.0, 0.6, HazardKind::Boulder};
  const HazardSpec c{{0, 0}, 2.0, -0.4, HazardKind::Crater};
  CHECK(hazard_profile(b, 0.0) == doctest::Approx(0.6));
  CHECK(hazard_profile(b, 1.0) == 0.0);
  CHECK(hazard_profile(c, 0.0) == doctest::Approx(-0.4));
  CHECK(hazard_profile(c, 1.0) < 0.0);
  for (double r = 0.0; r < 0.99; r += 0.1) CHECK(hazard_profile(b, r) >= hazard_profile(b, r + 0.01));
}

TEST_CASE("invalid terrain parameters name the field") {
  auto field_of = [](TerrainParams p) -> std::string {
    try {
      p.validate();
    } catch (const ValidationError& e) {
      return e.field();
    }
    return "";
  };
  TerrainParams p;
  p.size_cells = 4;
  CHECK(field_of(p) == "size_cells");
  p = {};
  p.cell_size = 0.0;
  CHECK(field_of(p) == "cell_size");
  p = {};
  p.rock_density = -1.0;
  CHECK(field_of(p) == "rock_density");
  p = {};
  p.sun_elevation = 95.0;
  CHECK(field_of(p) == "sun_elevation");
  p = {};
  p.slope_threshold = 0.0;
  CHECK(field_of(p) == "slope_threshold");
  p = {};
  p.extra_hazards = {{{1, 1}, 0.5, -0.2, HazardKind::Boulder}};
  CHECK(field_of(p) == "extra_hazards.height");
  p = {};
  CHECK(field_of(p).empty());
  p.size_cells = 4;
  CHECK_THROWS_AS(generate_terrain(p), ValidationError);
}

TEST_CASE("CSV export has one row per grid row") {
  TerrainParams p = flat_params();
  p.size_cells = 10;
  const auto g = generate_terrain(p);
  std::ostringstream h, l;
  write_heights_csv(g, h);
  write_labels_csv(g, l);
  const std::string heights = h.str();
  CHECK(std::count(heights.begin(), heights.end(), '\n') == 10);
  CHECK(l.str().substr(0, 5) == "Safe,");
}
