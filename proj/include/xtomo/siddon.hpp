#pragma once

#include <span>
#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/geometry.hpp"

// Ray-driven exact intersection-length projector and its matched transpose.
// One ray per detector pixel center.
namespace xtomo::siddon {

struct RayVoxelHit {
  int i = 0;
  int j = 0;
  int k = 0;
  double length = 0.0;  // mm
};

/// Voxel intersections of a single ray, in traversal order.
std::vector<RayVoxelHit> trace(const Ray& ray, const VolumeSpec& vol);

/// Intersection length of a ray with one voxel, computed by clipping against
/// the voxel's own planes.
double voxel_length(const Ray& ray, const VolumeSpec& vol, int i, int j, int k);

/// Parallel over detector samples. `proj` is overwritten.
void forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj);
/// Voxel-driven gather, parallel over voxels. `volume` is overwritten.
void backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume);

ProjectionSet forward(const Volume& x, const Geometry& g);
Volume backproject(const ProjectionSet& y, const VolumeSpec& vol);

}  // namespace xtomo::siddon
