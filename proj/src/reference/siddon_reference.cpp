#include <vector>

#include "../kernel_common.hpp"
#include "../siddon_traversal.hpp"
#include "xtomo/reference.hpp"

namespace xtomo::reference {

void siddon_forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj) {
  check_forward_args(volume, vol, g, proj);
  const detail::Grid grid(vol);
  std::size_t n = 0;
  for (int v = 0; v < g.num_views(); ++v) {
    for (int r = 0; r < g.detector.numRows; ++r) {
      for (int c = 0; c < g.detector.numCols; ++c) {
        double sum = 0.0;
        detail::traverse(ray_for_sample(g, vol, v, r, c), grid,
                         [&](std::size_t index, double length) { sum += length * double(volume[index]); });
        proj[n++] = float(sum);
      }
    }
  }
}

void siddon_backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol,
                        std::span<float> volume) {
  check_backproject_args(proj, g, vol, volume);
  const detail::Grid grid(vol);
  std::vector<double> acc(vol.size(), 0.0);
  std::size_t n = 0;
  for (int v = 0; v < g.num_views(); ++v) {
    for (int r = 0; r < g.detector.numRows; ++r) {
      for (int c = 0; c < g.detector.numCols; ++c) {
        const double y = proj[n++];
        if (y == 0.0) continue;
        detail::traverse(ray_for_sample(g, vol, v, r, c), grid,
                         [&](std::size_t index, double length) { acc[index] += length * y; });
      }
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) volume[i] = float(acc[i]);
}

}  // namespace xtomo::reference
