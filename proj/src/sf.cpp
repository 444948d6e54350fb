#include "xtomo/sf.hpp"

#include <omp.h>

#include "kernel_common.hpp"
#include "sf_footprint.hpp"

namespace xtomo::sf {

double Trapezoid::cumulative(double s) const {
  const double rise = tau[1] - tau[0];
  const double flat = tau[2] - tau[1];
  const double fall = tau[3] - tau[2];
  if (s <= tau[0]) return 0.0;
  if (s < tau[1]) return (s - tau[0]) * (s - tau[0]) / (2.0 * rise);
  if (s <= tau[2]) return 0.5 * rise + (s - tau[1]);
  if (s < tau[3]) return 0.5 * rise + flat + 0.5 * fall - (tau[3] - s) * (tau[3] - s) / (2.0 * fall);
  return 0.5 * rise + flat + 0.5 * fall;
}

Trapezoid parallel_footprint(double sCenter, double phi, double voxelWidth) {
  const double c = std::abs(std::cos(phi));
  const double s = std::abs(std::sin(phi));
  const double outer = 0.5 * voxelWidth * (c + s);
  const double inner = 0.5 * voxelWidth * std::abs(c - s);
  Trapezoid t;
  t.tau[0] = sCenter - outer;
  t.tau[1] = sCenter - inner;
  t.tau[2] = sCenter + inner;
  t.tau[3] = sCenter + outer;
  t.height = voxelWidth / std::max(c, s);
  return t;
}

namespace {

void require_supported(const Geometry& g) {
  if (g.kind == GeometryKind::Modular)
    throw Error(ErrorCode::Unsupported, "separable-footprint projector does not support modular geometry");
}

}  // namespace

std::vector<Coefficient> voxel_coefficients(const Geometry& g, const VolumeSpec& vol, int i, int j, int k) {
  require_supported(g);
  std::vector<Coefficient> out;
  detail::TransversePart parts[4];
  detail::AxialPart axial;
  for (int v = 0; v < g.num_views(); ++v) {
    const ViewFrame frame(g, vol, v);
    const detail::SfView sfv(frame, vol);
    const int n = sfv.transverse(i, j, parts);
    for (int p = 0; p < n; ++p) {
      if (parts[p].weights.empty() || !sfv.axial(parts[p], k, axial)) continue;
      for (std::size_t r = 0; r < axial.weights.size(); ++r)
        for (std::size_t c = 0; c < parts[p].weights.size(); ++c)
          out.push_back({v, axial.rowBegin + int(r), parts[p].colBegin + int(c),
                         axial.amplitude * parts[p].weights[c] * axial.weights[r]});
    }
  }
  return out;
}

void forward(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g, std::span<float> proj) {
  require_supported(g);
  check_forward_args(volume, vol, g, proj);
  const std::vector<ViewFrame> frames = make_frames(g, vol);
  const std::size_t cols = std::size_t(g.detector.numCols);
  const std::size_t viewSize = g.view_size();
  const int numViews = int(frames.size());

#pragma omp parallel
  {
    memory::tracked_vector<double> acc(viewSize);
    detail::TransversePart parts[4];
    detail::AxialPart axial;
#pragma omp for schedule(dynamic, 1)
    for (int v = 0; v < numViews; ++v) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const detail::SfView sfv(frames[std::size_t(v)], vol);
      for (int j = 0; j < vol.numY; ++j) {
        for (int i = 0; i < vol.numX; ++i) {
          int n = -1;
          for (int k = 0; k < vol.numZ; ++k) {
            const double x = volume[vol.index(i, j, k)];
            if (x == 0.0) continue;
            if (n < 0) n = sfv.transverse(i, j, parts);
            for (int p = 0; p < n; ++p) {
              const auto& part = parts[p];
              if (part.weights.empty() || !sfv.axial(part, k, axial)) continue;
              const double scaled = x * axial.amplitude;
              for (std::size_t r = 0; r < axial.weights.size(); ++r) {
                double* line = acc.data() + std::size_t(axial.rowBegin + int(r)) * cols + std::size_t(part.colBegin);
                const double rowScale = scaled * axial.weights[r];
                for (std::size_t c = 0; c < part.weights.size(); ++c) line[c] += rowScale * part.weights[c];
              }
            }
          }
        }
      }
      float* out = proj.data() + std::size_t(v) * viewSize;
      for (std::size_t n = 0; n < viewSize; ++n) out[n] = float(acc[n]);
    }
  }
}

void backproject(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol, std::span<float> volume) {
  require_supported(g);
  check_backproject_args(proj, g, vol, volume);
  const std::vector<ViewFrame> frames = make_frames(g, vol);
  std::vector<detail::SfView> views;
  views.reserve(frames.size());
  for (const auto& f : frames) views.emplace_back(f, vol);
  const std::size_t cols = std::size_t(g.detector.numCols);
  const std::size_t viewSize = g.view_size();
  const int columns = vol.numX * vol.numY;

#pragma omp parallel
  {
    std::vector<double> acc(std::size_t(vol.numZ));
    detail::TransversePart parts[4];
    detail::AxialPart axial;
#pragma omp for schedule(dynamic, 4)
    for (int n = 0; n < columns; ++n) {
      const int i = n % vol.numX;
      const int j = n / vol.numX;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t v = 0; v < views.size(); ++v) {
        const float* viewData = proj.data() + v * viewSize;
        const int count = views[v].transverse(i, j, parts);
        for (int p = 0; p < count; ++p) {
          const auto& part = parts[p];
          if (part.weights.empty()) continue;
          for (int k = 0; k < vol.numZ; ++k) {
            if (!views[v].axial(part, k, axial)) continue;
            double sum = 0.0;
            for (std::size_t r = 0; r < axial.weights.size(); ++r) {
              const float* line = viewData + std::size_t(axial.rowBegin + int(r)) * cols + std::size_t(part.colBegin);
              double rowSum = 0.0;
              for (std::size_t c = 0; c < part.weights.size(); ++c) rowSum += part.weights[c] * double(line[c]);
              sum += axial.weights[r] * rowSum;
            }
            acc[std::size_t(k)] += axial.amplitude * sum;
          }
        }
      }
      for (int k = 0; k < vol.numZ; ++k) volume[vol.index(i, j, k)] = float(acc[std::size_t(k)]);
    }
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

}  // namespace xtomo::sf
