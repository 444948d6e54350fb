#include "xtomo/siddon.hpp"

#include <omp.h>

#include "siddon_traversal.hpp"
#include "xtomo/error.hpp"
#include "kernel_common.hpp"

namespace xtomo::siddon {

std::vector<RayVoxelHit> trace(const Ray& ray, const VolumeSpec& vol) {
  const detail::Grid grid(vol);
  std::vector<RayVoxelHit> hits;
  detail::traverse(ray, grid, [&](std::size_t index, double length) {
    const int i = int(index % std::size_t(vol.numX));
    const int j = int((index / std::size_t(vol.numX)) % std::size_t(vol.numY));
    const int k = int(index / (std::size_t(vol.numX) * std::size_t(vol.numY)));
    hits.push_back({i, j, k, length});
  });
  return hits;
}

double voxel_length(const Ray& ray, const VolumeSpec& vol, int i, int j, int k) {
  const int cell[3] = {i, j, k};
  return detail::voxel_length(ray, detail::Grid(vol), cell);
}

void forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj) {
  check_forward_args(volume, vol, g, proj);
  const detail::Grid grid(vol);
  const std::vector<ViewFrame> frames = make_frames(g, vol);
  const long long rows = g.detector.numRows;
  const long long cols = g.detector.numCols;
  const long long samples = (long long)(frames.size()) * rows * cols;

#pragma omp parallel for schedule(dynamic, 64)
  for (long long n = 0; n < samples; ++n) {
    const long long view = n / (rows * cols);
    const int row = int((n / cols) % rows);
    const int col = int(n % cols);
    const Ray ray = frames[std::size_t(view)].ray_at(row, col);
    double sum = 0.0;
    detail::traverse(ray, grid, [&](std::size_t index, double length) { sum += length * double(volume[index]); });
    proj[std::size_t(n)] = float(sum);
  }
}

void backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume) {
  check_backproject_args(proj, g, vol, volume);
  const detail::Grid grid(vol);
  const std::vector<ViewFrame> frames = make_frames(g, vol);
  const std::size_t cols = std::size_t(g.detector.numCols);
  const std::size_t viewSize = g.view_size();
  const long long voxels = (long long)(vol.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (long long n = 0; n < voxels; ++n) {
    const int cell[3] = {int(n % vol.numX), int((n / vol.numX) % vol.numY), int(n / (vol.numX * (long long)vol.numY))};
    const Vec3 lo{grid.min[0] + cell[0] * grid.step[0], grid.min[1] + cell[1] * grid.step[1],
                  grid.min[2] + cell[2] * grid.step[2]};
    const Vec3 hi{grid.min[0] + (cell[0] + 1) * grid.step[0], grid.min[1] + (cell[1] + 1) * grid.step[1],
                  grid.min[2] + (cell[2] + 1) * grid.step[2]};
    double sum = 0.0;
    for (std::size_t v = 0; v < frames.size(); ++v) {
      const PixelWindow w = shadow_window(frames[v], lo, hi);
      const float* viewData = proj.data() + v * viewSize;
      for (int r = w.rowBegin; r <= w.rowEnd; ++r) {
        for (int c = w.colBegin; c <= w.colEnd; ++c) {
          const float y = viewData[std::size_t(r) * cols + std::size_t(c)];
          if (y == 0.0f) continue;
          const double length = detail::voxel_length(frames[v].ray_at(r, c), grid, cell);
          sum += length * double(y);
        }
      }
    }
    volume[std::size_t(n)] = float(sum);
  }
}

ProjectionSet forward(const Volume& x, const Geometry& g) {
  ProjectionSet y(g);
  forward(x.values(), x.spec(), g, y.values());
  return y;
}

Volume backproject(const ProjectionSet& y, const VolumeSpec& vol) {
  Volume x(vol);
  backproject(y.values(), y.geometry(), vol, x.values());
  return x;
}

}  // namespace xtomo::siddon
