#pragma once

#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/geometry.hpp"

// Matched projector pair for cylindrically symmetric objects under a
// parallel beam (discrete Abel transform). Each radial bin is an annulus of
// constant density, and the weights are its exact chord lengths.
namespace xtomo::abel {

/// f(r) per axial slice; bin i covers [i*h, (i+1)*h] and is centered at (i+0.5)*h.
struct RadialProfile {
  int numZ = 1;
  int numR = 1;
  double radialSpacing = 1.0;
  std::vector<float> values;  // [z][r]

  RadialProfile(int numZ, int numR, double radialSpacing);
  void validate() const;
  double radius(int i) const { return (i + 0.5) * radialSpacing; }
  float& at(int z, int i) { return values[std::size_t(z) * std::size_t(numR) + std::size_t(i)]; }
  float at(int z, int i) const { return values[std::size_t(z) * std::size_t(numR) + std::size_t(i)]; }
};

/// Chord of the annulus rIn <= r <= rOut along the line at signed offset s.
double annulus_chord(double rIn, double rOut, double s);

/// Single-view projection; detector rows are the profile's axial slices.
ProjectionSet abel_forward(const RadialProfile& f, const DetectorSpec& det);
RadialProfile abel_backproject(const ProjectionSet& p, int numR, double radialSpacing);

/// Raw+header storage: a volume of shape [numZ, 1, numR].
Volume to_volume(const RadialProfile& f);
RadialProfile from_volume(const Volume& v);

/// Rotationally symmetric 3D volume sampled from the profile at voxel centers
/// (nearest radial bin, zero outside).
Volume revolve(const RadialProfile& f, const VolumeSpec& spec);

/// The one-view parallel geometry abel_forward produces.
Geometry abel_geometry(const DetectorSpec& det);

}  // namespace xtomo::abel
