#pragma once

#include <span>

#include "xtomo/geometry.hpp"

// Serial reference projectors. They share the coefficient definitions of the
// OpenMP kernels but traverse the system matrix in the transposed order
// (ray-driven scatter for the Siddon adjoint, voxel-driven scatter for the SF
// forward), which makes them an independent check of the parallel loop
// structure and of the Siddon shadow-window enumeration.
namespace xtomo::reference {

void siddon_forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj);
void siddon_backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol,
                        std::span<float> volume);

void sf_forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj);
void sf_backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume);

}  // namespace xtomo::reference
