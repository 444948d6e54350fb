#pragma once

#include <doctest.h>

#include <random>
#include <span>
#include <string>
#include <vector>

#include "xtomo/error.hpp"
#include "xtomo/geometry.hpp"
#include "xtomo/operator.hpp"

namespace testutil {

using namespace xtomo;

inline VolumeSpec cube(int n, double width) {
  VolumeSpec v;
  v.numX = v.numY = v.numZ = n;
  v.voxelWidth = v.voxelHeight = width / n;
  return v;
}

inline DetectorSpec detector(int rows, int cols, double pixel) {
  return {rows, cols, pixel, pixel, 0.5 * (rows - 1), 0.5 * (cols - 1)};
}

inline std::vector<double> even_angles(int n, double range) {
  std::vector<double> a;
  for (int i = 0; i < n; ++i) a.push_back(range * i / n);
  return a;
}

inline Geometry parallel(int views, DetectorSpec det, double range = 180.0) {
  Geometry g;
  g.kind = GeometryKind::Parallel;
  g.angles = even_angles(views, range);
  g.detector = det;
  return g;
}

inline Geometry cone(int views, DetectorSpec det, double sod, double sdd, bool curved = false) {
  Geometry g;
  g.kind = curved ? GeometryKind::ConeCurved : GeometryKind::ConeFlat;
  g.angles = even_angles(views, 360.0);
  g.detector = det;
  g.sod = sod;
  g.sdd = sdd;
  return g;
}

/// One small geometry of each kind, sized for a volume of width ~16 mm.
inline Geometry small_geometry(GeometryKind kind, int views = 7) {
  switch (kind) {
    case GeometryKind::Parallel: return parallel(views, detector(9, 13, 1.5));
    case GeometryKind::ConeFlat: return cone(views, detector(9, 13, 3.0), 40.0, 80.0);
    case GeometryKind::ConeCurved: return cone(views, detector(9, 13, 3.0), 40.0, 80.0, true);
    case GeometryKind::Modular: return to_modular(cone(views, detector(9, 13, 3.0), 40.0, 80.0));
  }
  return {};
}

inline const std::vector<GeometryKind>& all_kinds() {
  static const std::vector<GeometryKind> kinds = {GeometryKind::Parallel, GeometryKind::ConeFlat,
                                                  GeometryKind::ConeCurved, GeometryKind::Modular};
  return kinds;
}

inline bool supports(ProjectorModel m, GeometryKind k) { return !(m == ProjectorModel::SF && k == GeometryKind::Modular); }

inline void fill_uniform(std::span<float> out, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  for (auto& v : out) v = u(rng);
}

inline double rel_diff(std::span<const float> a, std::span<const float> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    num += d * d;
    den += double(b[i]) * double(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an xtomo::Error");
  return ErrorCode::InvalidValue;
}

}  // namespace testutil
