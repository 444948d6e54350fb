#include "xtomo/abel.hpp"

#include <algorithm>
#include <cmath>

#include "xtomo/error.hpp"

namespace xtomo::abel {

RadialProfile::RadialProfile(int z, int r, double h) : numZ(z), numR(r), radialSpacing(h) {
  validate();
  values.assign(std::size_t(numZ) * std::size_t(numR), 0.0f);
}

void RadialProfile::validate() const {
  if (numZ < 1 || numR < 1) throw Error(ErrorCode::InvalidValue, "profile dimensions must be >= 1");
  if (!(radialSpacing > 0.0) || !std::isfinite(radialSpacing))
    throw Error(ErrorCode::InvalidValue, "radialSpacing must be positive");
}

double annulus_chord(double rIn, double rOut, double s) {
  const double s2 = s * s;
  return 2.0 * (std::sqrt(std::max(rOut * rOut - s2, 0.0)) - std::sqrt(std::max(rIn * rIn - s2, 0.0)));
}

Geometry abel_geometry(const DetectorSpec& det) {
  Geometry g;
  g.kind = GeometryKind::Parallel;
  g.angles = {0.0};
  g.detector = det;
  return g;
}

namespace {

void check_coverage(const DetectorSpec& det, double outerRadius) {
  const double left = det.s(0) - 0.5 * det.pixelWidth;
  const double right = det.s(det.numCols - 1) + 0.5 * det.pixelWidth;
  if (left > -outerRadius || right < outerRadius)
    throw Error(ErrorCode::SpecMismatch, "detector columns do not cover the profile's radius");
}

}  // namespace

ProjectionSet abel_forward(const RadialProfile& f, const DetectorSpec& det) {
  f.validate();
  det.validate();
  if (f.values.size() != std::size_t(f.numZ) * std::size_t(f.numR))
    throw Error(ErrorCode::SpecMismatch, "profile data length mismatch");
  if (det.numRows != f.numZ) throw Error(ErrorCode::SpecMismatch, "detector rows must equal profile slices");
  check_coverage(det, f.numR * f.radialSpacing);
  ProjectionSet out(abel_geometry(det));
  const double h = f.radialSpacing;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < det.numCols; ++c) {
    const double s = det.s(c);
    for (int z = 0; z < f.numZ; ++z) {
      double sum = 0.0;
      for (int i = 0; i < f.numR; ++i) {
        const double rOut = (i + 1) * h;
        if (rOut <= std::abs(s)) continue;
        sum += double(f.at(z, i)) * annulus_chord(i * h, rOut, s);
      }
      out.at(0, z, c) = float(sum);
    }
  }
  return out;
}

RadialProfile abel_backproject(const ProjectionSet& p, int numR, double radialSpacing) {
  const Geometry& g = p.geometry();
  if (g.kind != GeometryKind::Parallel || g.num_views() != 1)
    throw Error(ErrorCode::SpecMismatch, "Abel data must be a single parallel view");
  RadialProfile f(g.detector.numRows, numR, radialSpacing);
  const auto& det = g.detector;
  check_coverage(det, numR * radialSpacing);
  const double h = radialSpacing;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < numR; ++i) {
    for (int z = 0; z < f.numZ; ++z) {
      double sum = 0.0;
      for (int c = 0; c < det.numCols; ++c) {
        const double s = det.s(c);
        const double rOut = (i + 1) * h;
        if (rOut <= std::abs(s)) continue;
        sum += annulus_chord(i * h, rOut, s) * double(p.at(0, z, c));
      }
      f.at(z, i) = float(sum);
    }
  }
  return f;
}

Volume to_volume(const RadialProfile& f) {
  VolumeSpec spec;
  spec.numX = f.numR;
  spec.numY = 1;
  spec.numZ = f.numZ;
  spec.voxelWidth = f.radialSpacing;
  spec.voxelHeight = f.radialSpacing;
  return Volume(spec, f.values);
}

RadialProfile from_volume(const Volume& v) {
  const auto& s = v.spec();
  if (s.numY != 1) throw Error(ErrorCode::SpecMismatch, "radial profile volumes have shape [numZ, 1, numR]");
  RadialProfile f(s.numZ, s.numX, s.voxelWidth);
  std::copy(v.values().begin(), v.values().end(), f.values.begin());
  return f;
}

Volume revolve(const RadialProfile& f, const VolumeSpec& spec) {
  if (spec.numZ != f.numZ) throw Error(ErrorCode::SpecMismatch, "volume slices must equal profile slices");
  Volume out(spec);
  for (int k = 0; k < spec.numZ; ++k) {
    for (int j = 0; j < spec.numY; ++j) {
      for (int i = 0; i < spec.numX; ++i) {
        const Vec3 c = spec.voxel_center(i, j, k);
        const int bin = int(std::floor(std::hypot(c.x, c.y) / f.radialSpacing));
        if (bin < f.numR) out.at(i, j, k) = f.at(k, bin);
      }
    }
  }
  return out;
}

}  // namespace xtomo::abel
