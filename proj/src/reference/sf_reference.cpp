#include <vector>

#include "../kernel_common.hpp"
#include "../sf_footprint.hpp"
#include "xtomo/reference.hpp"

namespace xtomo::reference {

namespace {

// Visits every (voxel, view) coefficient block in voxel-major order.
template <class Visit>
void for_each_block(const Geometry& g, const VolumeSpec& vol, Visit&& visit) {
  if (g.kind == GeometryKind::Modular)
    throw Error(ErrorCode::Unsupported, "separable-footprint projector does not support modular geometry");
  const std::vector<ViewFrame> frames = make_frames(g, vol);
  detail::TransversePart parts[4];
  detail::AxialPart axial;
  for (int k = 0; k < vol.numZ; ++k) {
    for (int j = 0; j < vol.numY; ++j) {
      for (int i = 0; i < vol.numX; ++i) {
        for (std::size_t v = 0; v < frames.size(); ++v) {
          const detail::SfView sfv(frames[v], vol);
          const int n = sfv.transverse(i, j, parts);
          for (int p = 0; p < n; ++p) {
            if (parts[p].weights.empty() || !sfv.axial(parts[p], k, axial)) continue;
            visit(vol.index(i, j, k), v, parts[p], axial);
          }
        }
      }
    }
  }
}

}  // namespace

void sf_forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj) {
  check_forward_args(volume, vol, g, proj);
  const std::size_t cols = std::size_t(g.detector.numCols);
  const std::size_t viewSize = g.view_size();
  std::vector<double> acc(g.size(), 0.0);
  for_each_block(g, vol, [&](std::size_t voxel, std::size_t v, const detail::TransversePart& part,
                             const detail::AxialPart& axial) {
    const double x = volume[voxel];
    for (std::size_t r = 0; r < axial.weights.size(); ++r)
      for (std::size_t c = 0; c < part.weights.size(); ++c)
        acc[v * viewSize + std::size_t(axial.rowBegin + int(r)) * cols + std::size_t(part.colBegin) + c] +=
            axial.amplitude * axial.weights[r] * part.weights[c] * x;
  });
  for (std::size_t n = 0; n < acc.size(); ++n) proj[n] = float(acc[n]);
}

void sf_backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume) {
  check_backproject_args(proj, g, vol, volume);
  const std::size_t cols = std::size_t(g.detector.numCols);
  const std::size_t viewSize = g.view_size();
  std::vector<double> acc(vol.size(), 0.0);
  for_each_block(g, vol, [&](std::size_t voxel, std::size_t v, const detail::TransversePart& part,
                             const detail::AxialPart& axial) {
    for (std::size_t r = 0; r < axial.weights.size(); ++r)
      for (std::size_t c = 0; c < part.weights.size(); ++c)
        acc[voxel] += axial.amplitude * axial.weights[r] * part.weights[c] *
                      double(proj[v * viewSize + std::size_t(axial.rowBegin + int(r)) * cols +
                                  std::size_t(part.colBegin) + c]);
  });
  for (std::size_t n = 0; n < acc.size(); ++n) volume[n] = float(acc[n]);
}

}  // namespace xtomo::reference
