#pragma once

#include <span>
#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/geometry.hpp"

// Separable-footprint projector (trapezoid transverse, rectangle axial) and
// its matched transpose for parallel and axial cone geometries.
namespace xtomo::sf {

/// Voxels whose transverse footprint is wider than this many detector
/// columns are split into 2x2 transverse sub-voxels.
inline constexpr double kSubdivideColumns = 8.0;

/// Piecewise-linear transverse footprint with breakpoints tau[0..3] in
/// detector s-coordinates (mm) and peak value `height` (mm of chord).
struct Trapezoid {
  double tau[4] = {0.0, 0.0, 0.0, 0.0};
  double height = 0.0;

  /// Integral of the unit-height profile from -inf to s.
  double cumulative(double s) const;
  /// Integral of the unit-height profile over [a, b].
  double unit_integral(double a, double b) const { return cumulative(b) - cumulative(a); }
  double area() const { return height * ((tau[3] - tau[0]) + (tau[2] - tau[1])) / 2.0; }
};

/// Footprint of a square voxel of width `voxelWidth` whose center projects to
/// `sCenter`, under a parallel view at angle `phi` (radians).
Trapezoid parallel_footprint(double sCenter, double phi, double voxelWidth);

/// One nonzero coefficient of the system matrix.
struct Coefficient {
  int view = 0;
  int row = 0;
  int col = 0;
  double weight = 0.0;
};

/// All coefficients of voxel (i,j,k), i.e. one column of the system matrix.
/// Rebuilt with the kernels' arithmetic; intended for tests and tools.
std::vector<Coefficient> voxel_coefficients(const Geometry& g, const VolumeSpec& vol, int i, int j, int k);

/// Parallel over views; each view is owned by one worker. `proj` is overwritten.
void forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj);
/// Voxel-driven gather, parallel over transverse voxel columns. `volume` is overwritten.
void backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume);

ProjectionSet forward(const Volume& x, const Geometry& g);
Volume backproject(const ProjectionSet& y, const VolumeSpec& vol);

}  // namespace xtomo::sf
