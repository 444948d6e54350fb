#pragma once

// Parametric plane traversal shared by the Siddon kernels and the serial
// reference. Every plane crossing is evaluated by plane_alpha(), so the
// ray-driven traversal and the voxel-driven clip produce identical lengths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "xtomo/geometry.hpp"

namespace xtomo::detail {

struct Grid {
  double min[3];
  double step[3];
  int count[3];

  explicit Grid(const VolumeSpec& v)
      : min{v.x_min(), v.y_min(), v.z_min()},
        step{v.voxelWidth, v.voxelWidth, v.voxelHeight},
        count{v.numX, v.numY, v.numZ} {}
};

struct RayAxes {
  double origin[3];
  double dir[3];

  explicit RayAxes(const Ray& r)
      : origin{r.origin.x, r.origin.y, r.origin.z}, dir{r.direction.x, r.direction.y, r.direction.z} {}
};

inline double plane_alpha(const Grid& g, const RayAxes& r, int axis, int plane) {
  return (g.min[axis] + plane * g.step[axis] - r.origin[axis]) / r.dir[axis];
}

/// Voxel index along an axis the ray does not move in; out of [0, count) when
/// the ray lies outside the slab. Half-open cells decide boundary rays.
inline int fixed_cell(const Grid& g, const RayAxes& r, int axis) {
  const double cell = std::floor((r.origin[axis] - g.min[axis]) / g.step[axis]);
  if (!(cell >= 0.0) || cell >= g.count[axis]) return -1;
  return int(cell);
}

/// Calls visit(flatIndex, length) for every voxel interval of the ray, in
/// order of increasing ray parameter. Zero-length intervals are skipped.
template <class Visit>
void traverse(const Ray& ray, const Grid& g, Visit&& visit) {
  const RayAxes r(ray);
  constexpr double inf = std::numeric_limits<double>::infinity();

  double alphaMin = 0.0;
  double alphaMax = inf;
  int fixed[3] = {-1, -1, -1};
  for (int a = 0; a < 3; ++a) {
    if (r.dir[a] == 0.0) {
      fixed[a] = fixed_cell(g, r, a);
      if (fixed[a] < 0) return;
      continue;
    }
    const double a0 = plane_alpha(g, r, a, 0);
    const double aN = plane_alpha(g, r, a, g.count[a]);
    alphaMin = std::max(alphaMin, std::min(a0, aN));
    alphaMax = std::min(alphaMax, std::max(a0, aN));
  }
  if (!(alphaMin < alphaMax)) return;

  // Next plane crossed on each moving axis, strictly after alphaMin.
  int next[3] = {0, 0, 0};
  int stepDir[3] = {0, 0, 0};
  double alphaNext[3] = {inf, inf, inf};
  for (int a = 0; a < 3; ++a) {
    if (r.dir[a] == 0.0) continue;
    const int n = g.count[a];
    const double pos = (r.origin[a] + alphaMin * r.dir[a] - g.min[a]) / g.step[a];
    if (r.dir[a] > 0.0) {
      stepDir[a] = 1;
      int p = std::clamp(int(std::floor(pos)) + 1, 1, n);
      while (p > 1 && plane_alpha(g, r, a, p - 1) > alphaMin) --p;
      while (p < n && plane_alpha(g, r, a, p) <= alphaMin) ++p;
      next[a] = p;
    } else {
      stepDir[a] = -1;
      int p = std::clamp(int(std::ceil(pos)) - 1, 0, n - 1);
      while (p < n - 1 && plane_alpha(g, r, a, p + 1) > alphaMin) ++p;
      while (p > 0 && plane_alpha(g, r, a, p) <= alphaMin) --p;
      next[a] = p;
    }
    alphaNext[a] = plane_alpha(g, r, a, next[a]);
  }

  const std::size_t strideY = std::size_t(g.count[0]);
  const std::size_t strideZ = strideY * std::size_t(g.count[1]);
  double current = alphaMin;
  while (current < alphaMax) {
    const double upcoming = std::min({alphaMax, alphaNext[0], alphaNext[1], alphaNext[2]});
    if (upcoming > current) {
      const double mid = 0.5 * (current + upcoming);
      int cell[3];
      for (int a = 0; a < 3; ++a) {
        if (r.dir[a] == 0.0) {
          cell[a] = fixed[a];
        } else {
          const double c = std::floor((r.origin[a] + mid * r.dir[a] - g.min[a]) / g.step[a]);
          cell[a] = std::clamp(int(c), 0, g.count[a] - 1);
        }
      }
      visit(std::size_t(cell[2]) * strideZ + std::size_t(cell[1]) * strideY + std::size_t(cell[0]),
            upcoming - current);
    }
    for (int a = 0; a < 3; ++a) {
      if (alphaNext[a] <= upcoming) {
        next[a] += stepDir[a];
        alphaNext[a] = (next[a] >= 0 && next[a] <= g.count[a]) ? plane_alpha(g, r, a, next[a]) : inf;
      }
    }
    current = upcoming;
  }
}

/// Length of the ray inside voxel (i,j,k), clipped to alpha >= 0.
inline double voxel_length(const Ray& ray, const Grid& g, const int cell[3]) {
  const RayAxes r(ray);
  double entry = 0.0;
  double exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (r.dir[a] == 0.0) {
      if (fixed_cell(g, r, a) != cell[a]) return 0.0;
      continue;
    }
    const double lo = plane_alpha(g, r, a, cell[a]);
    const double hi = plane_alpha(g, r, a, cell[a] + 1);
    entry = std::max(entry, std::min(lo, hi));
    exit = std::min(exit, std::max(lo, hi));
  }
  return exit > entry ? exit - entry : 0.0;
}

}  // namespace xtomo::detail
