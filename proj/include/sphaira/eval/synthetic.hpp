// sphaira - multiscale spherical neighborhoods for 3D point cloud classification
// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sphaira/core/error.hpp"
#include "sphaira/core/rng.hpp"
#include "sphaira/core/types.hpp"

namespace sphaira {

// Primitive shapes for synthetic labeled scenes. Densities are points per
// square meter for surfaces and points per cubic meter for volumes; counts
// are fixed by the recipe, only the sampled positions depend on the seed.

struct GroundPlane {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  double z = 0;
  double density = 100;  // pts / m^2
};

// Vertical rectangle over the segment (x0,y0)-(x1,y1), spanning [z0, z1].
struct WallPlane {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 0;
  double z0 = 0, z1 = 1;
  double density = 100;  // pts / m^2
};

// Axis-aligned box sampled on its surface (bottom face optional).
struct BoxPrim {
  Point3 center{};
  double sx = 1, sy = 1, sz = 1;
  double density = 100;  // pts / m^2
  bool include_bottom = false;
};

// Solid ball sampled uniformly by volume.
struct BallPrim {
  Point3 center{};
  double radius = 1;
  double density = 100;  // pts / m^3
};

// Upright cylinder sampled on its lateral surface.
struct PolePrim {
  Point3 base{};
  double height = 1;
  double radius = 0.05;
  double density = 100;  // pts / m^2
};

// Fixed count of uniform points in an axis-aligned box (clutter).
struct ScatterPrim {
  Point3 lo{};
  Point3 hi{};
  std::size_t count = 0;
};

struct ScenePrimitive {
  Label label = 0;
  double noise_sigma = 0.0;  // per-axis Gaussian jitter, truncated at 3 sigma
  Point3 placement_jitter{};  // uniform rigid offset bound per axis
  std::variant<GroundPlane, WallPlane, BoxPrim, BallPrim, PolePrim, ScatterPrim> shape;
};

struct SceneRecipe {
  std::string name;
  std::vector<ScenePrimitive> primitives;
  ClassCatalog catalog;
};

namespace detail {

inline std::size_t primitive_count(const ScenePrimitive& prim) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GroundPlane>) {
          return static_cast<std::size_t>(
              std::llround(std::fabs((s.x1 - s.x0) * (s.y1 - s.y0)) * s.density));
        } else if constexpr (std::is_same_v<T, WallPlane>) {
          const double len = std::hypot(s.x1 - s.x0, s.y1 - s.y0);
          return static_cast<std::size_t>(std::llround(len * (s.z1 - s.z0) * s.density));
        } else if constexpr (std::is_same_v<T, BoxPrim>) {
          double area = 2.0 * (s.sx * s.sz + s.sy * s.sz) + s.sx * s.sy;
          if (s.include_bottom) area += s.sx * s.sy;
          return static_cast<std::size_t>(std::llround(area * s.density));
        } else if constexpr (std::is_same_v<T, BallPrim>) {
          const double volume = 4.0 / 3.0 * 3.14159265358979323846 * s.radius * s.radius * s.radius;
          return static_cast<std::size_t>(std::llround(volume * s.density));
        } else if constexpr (std::is_same_v<T, PolePrim>) {
          const double area = 2.0 * 3.14159265358979323846 * s.radius * s.height;
          return static_cast<std::size_t>(std::llround(area * s.density));
        } else {
          return s.count;
        }
      },
      prim.shape);
}

inline Point3 sample_on_primitive(const ScenePrimitive& prim, Rng& rng) {
  return std::visit(
      [&](const auto& s) -> Point3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GroundPlane>) {
          return {rng.uniform(s.x0, s.x1), rng.uniform(s.y0, s.y1), s.z};
        } else if constexpr (std::is_same_v<T, WallPlane>) {
          const double t = rng.uniform01();
          return {s.x0 + t * (s.x1 - s.x0), s.y0 + t * (s.y1 - s.y0), rng.uniform(s.z0, s.z1)};
        } else if constexpr (std::is_same_v<T, BoxPrim>) {
          const double top = s.sx * s.sy;
          const double bottom = s.include_bottom ? s.sx * s.sy : 0.0;
          const double side_x = s.sy * s.sz;  // faces at +x / -x
          const double side_y = s.sx * s.sz;  // faces at +y / -y
          const double total = top + bottom + 2.0 * side_x + 2.0 * side_y;
          double pick = rng.uniform01() * total;
          const double hx = 0.5 * s.sx, hy = 0.5 * s.sy, hz = 0.5 * s.sz;
          double u = rng.uniform01(), v = rng.uniform01();
          Point3 p;
          if (pick < top) {
            p = {(u - 0.5) * s.sx, (v - 0.5) * s.sy, hz};
          } else if (pick < top + bottom) {
            p = {(u - 0.5) * s.sx, (v - 0.5) * s.sy, -hz};
          } else if (pick < top + bottom + side_x) {
            p = {hx, (u - 0.5) * s.sy, (v - 0.5) * s.sz};
          } else if (pick < top + bottom + 2 * side_x) {
            p = {-hx, (u - 0.5) * s.sy, (v - 0.5) * s.sz};
          } else if (pick < top + bottom + 2 * side_x + side_y) {
            p = {(u - 0.5) * s.sx, hy, (v - 0.5) * s.sz};
          } else {
            p = {(u - 0.5) * s.sx, -hy, (v - 0.5) * s.sz};
          }
          return p + s.center;
        } else if constexpr (std::is_same_v<T, BallPrim>) {
          while (true) {
            const double x = rng.uniform(-s.radius, s.radius);
            const double y = rng.uniform(-s.radius, s.radius);
            const double z = rng.uniform(-s.radius, s.radius);
            if (x * x + y * y + z * z <= s.radius * s.radius)
              return Point3{x, y, z} + s.center;
          }
        } else if constexpr (std::is_same_v<T, PolePrim>) {
          const double ang = rng.uniform(0.0, 6.283185307179586476925286766559);
          const double h = rng.uniform(0.0, s.height);
          return {s.base.x + s.radius * std::cos(ang), s.base.y + s.radius * std::sin(ang),
                  s.base.z + h};
        } else {
          return {rng.uniform(s.lo.x, s.hi.x), rng.uniform(s.lo.y, s.hi.y),
                  rng.uniform(s.lo.z, s.hi.z)};
        }
      },
      prim.shape);
}

}  // namespace detail

/**
 * Samples a labeled point cloud from a recipe. Deterministic given the seed:
 * each primitive draws from its own derived stream, so reordering or adding
 * primitives does not perturb the others. Noise is per-axis Gaussian
 * truncated at 3 sigma, so every point stays within 3 sigma of its surface.
 */
inline PointCloud generate_synthetic_scene(const SceneRecipe& recipe, std::uint64_t seed) {
  if (recipe.primitives.empty()) throw ParameterError("scene recipe lists no primitives");
  PointCloud cloud;
  for (std::size_t pi = 0; pi < recipe.primitives.size(); ++pi) {
    const ScenePrimitive& prim = recipe.primitives[pi];
    Rng rng(derive_seed(seed, pi));
    const Point3 offset{rng.uniform(-prim.placement_jitter.x, prim.placement_jitter.x),
                        rng.uniform(-prim.placement_jitter.y, prim.placement_jitter.y),
                        rng.uniform(-prim.placement_jitter.z, prim.placement_jitter.z)};
    const std::size_t count = detail::primitive_count(prim);
    for (std::size_t i = 0; i < count; ++i) {
      Point3 p = detail::sample_on_primitive(prim, rng) + offset;
      if (prim.noise_sigma > 0.0) {
        p.x += prim.noise_sigma * rng.truncated_gaussian(3.0);
        p.y += prim.noise_sigma * rng.truncated_gaussian(3.0);
        p.z += prim.noise_sigma * rng.truncated_gaussian(3.0);
      }
      cloud.positions.push_back(p);
      cloud.labels.push_back(prim.label);
    }
  }
  return cloud;
}

/**
 * The frozen desk-scale benchmark: a 40 x 20 m street block with six scored
 * classes (ground, facade, car, pole, foliage, pedestrian) plus ~1% ignored
 * clutter, about 1.8e5 points in total. Acceptance numbers are pinned to
 * this recipe; changing it invalidates them.
 */
inline SceneRecipe street_v1_recipe() {
  SceneRecipe recipe;
  recipe.name = "street-v1";
  recipe.catalog = ClassCatalog({{1, "ground"},
                                 {2, "facade"},
                                 {3, "car"},
                                 {4, "pole"},
                                 {5, "foliage"},
                                 {6, "pedestrian"}},
                                0);
  const double sigma = 0.01;

  recipe.primitives.push_back(
      {1, sigma, {}, GroundPlane{0.0, 0.0, 40.0, 20.0, 0.0, 120.0}});
  recipe.primitives.push_back(
      {2, sigma, {}, WallPlane{0.0, 0.0, 40.0, 0.0, 0.0, 8.0, 45.0}});
  recipe.primitives.push_back(
      {2, sigma, {}, WallPlane{0.0, 20.0, 40.0, 20.0, 0.0, 8.0, 45.0}});

  for (int i = 0; i < 6; ++i) {
    const double cx = 5.0 + 6.0 * i;
    const double cy = (i % 2 == 0) ? 5.5 : 14.5;
    recipe.primitives.push_back({3, sigma, Point3{1.0, 0.3, 0.0},
                                 BoxPrim{{cx, cy, 0.75}, 4.2, 1.8, 1.5, 140.0, false}});
  }
  for (int i = 0; i < 8; ++i) {
    const double bx = 4.5 + 4.8 * i;
    const double by = (i % 2 == 0) ? 2.5 : 17.5;
    recipe.primitives.push_back(
        {4, sigma, Point3{0.5, 0.2, 0.0}, PolePrim{{bx, by, 0.0}, 4.5, 0.07, 650.0}});
  }
  for (int i = 0; i < 8; ++i) {
    const double cx = 6.5 + 4.4 * i;
    const double cy = (i % 2 == 0) ? 17.2 : 2.8;
    recipe.primitives.push_back(
        {5, sigma, Point3{0.8, 0.4, 0.2}, BallPrim{{cx, cy, 5.2}, 1.4, 140.0}});
  }
  for (int i = 0; i < 10; ++i) {
    const double bx = 3.0 + 3.7 * i;
    const double by = 7.0 + (i % 5);
    recipe.primitives.push_back(
        {6, sigma, Point3{1.0, 0.8, 0.0}, PolePrim{{bx, by, 0.0}, 1.75, 0.24, 260.0}});
  }
  recipe.primitives.push_back(
      {0, 0.0, {}, ScatterPrim{{0.0, 0.0, 0.0}, {40.0, 20.0, 8.0}, 1500}});
  return recipe;
}

inline const std::vector<std::string>& synthetic_recipe_names() {
  static const std::vector<std::string> names = {"street-v1"};
  return names;
}

inline SceneRecipe recipe_by_name(const std::string& name) {
  if (name == "street-v1") return street_v1_recipe();
  throw ParameterError("unknown scene recipe: " + name);
}

}  // namespace sphaira
