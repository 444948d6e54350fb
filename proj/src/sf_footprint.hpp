#pragma once

// Per-view separable-footprint coefficient generator shared by the OpenMP
// kernels and the serial reference.

#include <algorithm>
#include <cmath>
#include <vector>

#include "xtomo/error.hpp"
#include "xtomo/geometry.hpp"
#include "xtomo/sf.hpp"

namespace xtomo::detail {

/// Transverse part of one (sub)voxel: detector columns and T_s weights.
struct TransversePart {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  int colBegin = 0;
  std::vector<double> weights;  // T_s for columns colBegin, colBegin+1, ...
};

/// Axial part at one slice: amplitude and T_t weights.
struct AxialPart {
  double amplitude = 0.0;
  int rowBegin = 0;
  std::vector<double> weights;
};

class SfView {
 public:
  SfView(const ViewFrame& frame, const VolumeSpec& vol) : f_(frame), vol_(vol) {
    if (f_.kind == GeometryKind::Modular)
      throw Error(ErrorCode::Unsupported, "separable-footprint projector does not support modular geometry");
    if (f_.kind == GeometryKind::Parallel) {
      const double c = std::abs(f_.ray.x);
      const double s = std::abs(f_.ray.y);
      parallelAmplitudeScale_ = 1.0 / std::max(c, s);
    }
  }

  /// Transverse footprint(s) of voxel column (i, j). Returns the number of
  /// parts written (0 when the voxel is not in front of the source).
  int transverse(int i, int j, TransversePart parts[4]) const {
    const Vec3 center = vol_.voxel_center(i, j, 0);
    double tau[4];
    if (!breakpoints(center.x, center.y, vol_.voxelWidth, tau)) return 0;
    if ((tau[3] - tau[0]) / f_.detector.pixelWidth <= sf::kSubdivideColumns) {
      fill_columns(center.x, center.y, vol_.voxelWidth, tau, parts[0]);
      return 1;
    }
    const double half = 0.5 * vol_.voxelWidth;
    int n = 0;
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        const double x = center.x + (di - 0.5) * half;
        const double y = center.y + (dj - 0.5) * half;
        if (!breakpoints(x, y, half, tau)) continue;
        fill_columns(x, y, half, tau, parts[n++]);
      }
    }
    return n;
  }

  /// Axial footprint of a transverse part at slice k.
  bool axial(const TransversePart& part, int k, AxialPart& out) const {
    const double zc = vol_.voxel_center(0, 0, k).z;
    const double halfHeight = 0.5 * vol_.voxelHeight;
    double t0 = 0.0;
    double t1 = 0.0;
    if (f_.kind == GeometryKind::Parallel) {
      out.amplitude = part.width * parallelAmplitudeScale_;
      t0 = zc - halfHeight;
      t1 = zc + halfHeight;
    } else {
      const Vec3 q = Vec3{part.x, part.y, zc} - f_.source;
      const double horizontal = std::max(std::abs(q.x), std::abs(q.y));
      if (!(horizontal > 0.0)) return false;
      out.amplitude = part.width * norm(q) / horizontal;
      const double distance = f_.kind == GeometryKind::ConeFlat ? -dot(q, f_.ray) : std::hypot(q.x, q.y);
      if (!(distance > 0.0)) return false;
      const double mag = f_.sdd / distance;
      t0 = (zc - halfHeight) * mag;
      t1 = (zc + halfHeight) * mag;
    }
    const auto& d = f_.detector;
    const int first = std::max(0, int(std::floor(t0 / d.pixelHeight + d.centerRow + 0.5)));
    const int last = std::min(d.numRows - 1, int(std::floor(t1 / d.pixelHeight + d.centerRow + 0.5)));
    out.rowBegin = first;
    out.weights.clear();
    for (int r = first; r <= last; ++r) {
      const double lo = (r - d.centerRow - 0.5) * d.pixelHeight;
      const double hi = (r - d.centerRow + 0.5) * d.pixelHeight;
      out.weights.push_back(std::max(0.0, std::min(hi, t1) - std::max(lo, t0)) / d.pixelHeight);
    }
    return !out.weights.empty();
  }

 private:
  // Sorted detector s-coordinates of the four vertical edges of a square of
  // width w centered at (x, y).
  bool breakpoints(double x, double y, double w, double tau[4]) const {
    if (f_.kind == GeometryKind::Parallel) {
      const double sCenter = x * f_.colAxis.x + y * f_.colAxis.y;
      const double c = std::abs(f_.ray.x);
      const double s = std::abs(f_.ray.y);
      const double outer = 0.5 * w * (c + s);
      const double inner = 0.5 * w * std::abs(c - s);
      tau[0] = sCenter - outer;
      tau[1] = sCenter - inner;
      tau[2] = sCenter + inner;
      tau[3] = sCenter + outer;
      return true;
    }
    const double h = 0.5 * w;
    const double xs[4] = {x - h, x + h, x - h, x + h};
    const double ys[4] = {y - h, y - h, y + h, y + h};
    for (int e = 0; e < 4; ++e) {
      const double qx = xs[e] - f_.source.x;
      const double qy = ys[e] - f_.source.y;
      const double depth = -(qx * f_.ray.x + qy * f_.ray.y);
      if (!(depth > 0.0)) return false;
      const double lateral = qx * f_.colAxis.x + qy * f_.colAxis.y;
      tau[e] = f_.kind == GeometryKind::ConeFlat ? f_.sdd * lateral / depth : f_.sdd * std::atan2(lateral, depth);
    }
    std::sort(tau, tau + 4);
    return true;
  }

  void fill_columns(double x, double y, double w, const double tau[4], TransversePart& part) const {
    const auto& d = f_.detector;
    sf::Trapezoid trap;
    std::copy(tau, tau + 4, trap.tau);
    trap.height = 1.0;
    part.x = x;
    part.y = y;
    part.width = w;
    part.weights.clear();
    const double firstEdge = std::floor(tau[0] / d.pixelWidth + d.centerCol + 0.5);
    const double lastEdge = std::floor(tau[3] / d.pixelWidth + d.centerCol + 0.5);
    if (lastEdge < 0.0 || firstEdge > d.numCols - 1) {
      part.colBegin = 0;
      return;
    }
    const int first = std::max(0, int(firstEdge));
    const int last = std::min(d.numCols - 1, int(lastEdge));
    part.colBegin = first;
    for (int c = first; c <= last; ++c) {
      const double lo = (c - d.centerCol - 0.5) * d.pixelWidth;
      const double hi = (c - d.centerCol + 0.5) * d.pixelWidth;
      part.weights.push_back(trap.unit_integral(lo, hi) / d.pixelWidth);
    }
  }

  const ViewFrame& f_;
  const VolumeSpec& vol_;
  double parallelAmplitudeScale_ = 1.0;
};

}  // namespace xtomo::detail
