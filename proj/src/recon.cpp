#include "xtomo/recon.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xtomo/error.hpp"
#include "xtomo/metrics.hpp"

namespace xtomo {

void LsConfig::validate() const {
  if (maxIters < 1) throw Error(ErrorCode::InvalidValue, "maxIters must be >= 1");
  if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidValue, "tol must be >= 0");
  if (step && !(*step > 0.0)) throw Error(ErrorCode::InvalidValue, "step must be positive");
}

void ramp_filter_rows(std::span<float> values, int rows, int cols, double pixelWidth) {
  if (values.size() != std::size_t(rows) * std::size_t(cols))
    throw Error(ErrorCode::SpecMismatch, "filter buffer does not match rows x cols");
  // Spatial Ram-Lak kernel, already multiplied by the sample spacing:
  // h[0] = 1/(4 tau), h[odd n] = -1/(n^2 pi^2 tau), h[even n] = 0.
  std::vector<double> kernel(std::size_t(cols), 0.0);
  kernel[0] = 1.0 / (4.0 * pixelWidth);
  for (int n = 1; n < cols; n += 2) kernel[std::size_t(n)] = -1.0 / (double(n) * n * kPi * kPi * pixelWidth);

  std::vector<double> row(static_cast<std::size_t>(cols));
#pragma omp parallel for firstprivate(row) schedule(static)
  for (int r = 0; r < rows; ++r) {
    float* line = values.data() + std::size_t(r) * std::size_t(cols);
    for (int c = 0; c < cols; ++c) row[std::size_t(c)] = line[c];
    for (int c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (int m = 0; m < cols; ++m) sum += kernel[std::size_t(std::abs(c - m))] * row[std::size_t(m)];
      line[c] = float(sum);
    }
  }
}

namespace {

// Angular weight per view: the typical spacing between sorted view angles.
double angular_step(const std::vector<double>& anglesDeg) {
  if (anglesDeg.size() < 2) return kPi;
  std::vector<double> sorted = anglesDeg;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) gaps.push_back(sorted[i] - sorted[i - 1]);
  std::nth_element(gaps.begin(), gaps.begin() + std::ptrdiff_t(gaps.size() / 2), gaps.end());
  return deg_to_rad(gaps[gaps.size() / 2]);
}

}  // namespace

Volume fbp_parallel(const ProjectionSet& y, const VolumeSpec& spec, const ProjectorPair& P) {
  const Geometry& g = y.geometry();
  if (g.kind != GeometryKind::Parallel) throw Error(ErrorCode::Unsupported, "FBP is implemented for parallel beams only");
  if (!(g == P.geometry()) || !(spec == P.volume_spec()))
    throw Error(ErrorCode::SpecMismatch, "projector pair does not match the data");
  ProjectionSet filtered = y;
  ramp_filter_rows(filtered.values(), g.num_views() * g.detector.numRows, g.detector.numCols, g.detector.pixelWidth);
  Volume x = P.adjoint(filtered);
  // A^T of one view spreads each voxel over pixel-area / voxel-volume worth
  // of coefficients; undo that so the result is in mm^-1.
  const auto& d = g.detector;
  const double scale = kFbpCalibration * angular_step(g.angles) * d.pixelWidth * d.pixelHeight /
                       (spec.voxelWidth * spec.voxelWidth * spec.voxelHeight);
  for (auto& v : x.values()) v = float(double(v) * scale);
  return x;
}

namespace {

double half_squared_norm(std::span<const float> r) {
  double s = 0.0;
  for (float v : r) s += double(v) * double(v);
  return 0.5 * s;
}

}  // namespace

LsResult reconstruct_ls(const ProjectionSet& y, const ProjectorPair& P, const LsConfig& cfg,
                        const std::optional<Volume>& x0) {
  cfg.validate();
  if (!(y.geometry() == P.geometry())) throw Error(ErrorCode::SpecMismatch, "projector geometry differs from the data");
  if (x0 && !(x0->spec() == P.volume_spec()))
    throw Error(ErrorCode::SpecMismatch, "initial volume spec differs from the projector's");

  LsResult result{x0 ? *x0 : Volume(P.volume_spec()), {}, 0, 0.0};
  if (cfg.step) {
    result.step = *cfg.step;
  } else {
    const double sigma = estimate_opnorm(P, kAutoStepPowerIters, 0);
    result.step = sigma > 0.0 ? kAutoStepSafety / (sigma * sigma) : 0.0;
  }

  Volume& x = result.x;
  Volume gradient(P.volume_spec());
  ProjectionSet residual(P.geometry());

  P.adjoint(y.values(), gradient.values());
  const double reference = metrics::norm2(gradient.values());
  const double threshold = cfg.tol * (reference > 0.0 ? reference : 1.0);

  auto update_residual = [&] {
    P.forward(x.values(), residual.values());
    auto r = residual.values();
    auto yv = y.values();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= yv[i];
    return half_squared_norm(r);
  };

  double cost = update_residual();
  result.costTrace.push_back(cost);
  int increases = 0;
  for (int it = 0; it < cfg.maxIters; ++it) {
    P.adjoint(residual.values(), gradient.values());
    if (metrics::norm2(gradient.values()) <= threshold) break;
    auto xv = x.values();
    auto gv = gradient.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
      float v = float(double(xv[i]) - result.step * double(gv[i]));
      if (cfg.nonneg && v < 0.0f) v = 0.0f;
      xv[i] = v;
    }
    const double next = update_residual();
    result.costTrace.push_back(next);
    result.iterations = it + 1;
    if (cfg.step && next > cost) {
      if (++increases >= 3)
        throw Error(ErrorCode::DivergenceDetected, "cost increased for 3 consecutive iterations; reduce the step");
    } else {
      increases = 0;
    }
    cost = next;
  }
  return result;
}

LsResult refine_data_consistency(const Volume& x0, const ProjectionSet& yMasked, const AngleMask& mask,
                                 const ProjectorPair& P, const LsConfig& cfg) {
  const ProjectorPair kept = P.restricted(mask);
  if (!(yMasked.geometry() == kept.geometry()))
    throw Error(ErrorCode::SpecMismatch, "masked data does not match the masked geometry");
  return reconstruct_ls(yMasked, kept, cfg, x0);
}

ProjectionSet complete_sinogram(const Volume& x, const ProjectionSet& yMeasured, const AngleMask& mask,
                                const ProjectorPair& P) {
  if (!(yMeasured.geometry() == P.geometry()))
    throw Error(ErrorCode::SpecMismatch, "measured data does not match the projector geometry");
  if (!(x.spec() == P.volume_spec())) throw Error(ErrorCode::SpecMismatch, "volume spec differs from the projector's");
  if (mask.size() != P.geometry().num_views())
    throw Error(ErrorCode::LengthMismatch, "mask length differs from view count");

  ProjectionSet out = yMeasured;
  if (mask.count() == mask.size()) return out;

  std::vector<bool> missing(mask.keep.size());
  for (std::size_t v = 0; v < missing.size(); ++v) missing[v] = !mask.keep[v];
  const AngleMask missingMask(std::move(missing));
  const ProjectionSet predicted = P.restricted(missingMask).forward(x);
  int src = 0;
  for (int v : missingMask.kept_views()) {
    auto from = predicted.view(src++);
    std::copy(from.begin(), from.end(), out.view(v).begin());
  }
  return out;
}

}  // namespace xtomo
