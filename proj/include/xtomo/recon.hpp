#pragma once

#include <optional>
#include <span>
#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/operator.hpp"

namespace xtomo {

/// Discrete FBP scale factor, calibrated once on a uniform disk (interior
/// mean equal to the true density) and frozen.
inline constexpr double kFbpCalibration = 1.0;

struct LsConfig {
  int maxIters = 500;
  /// Stop when ||A^T(Ax-y)|| <= tol * ||A^T y||.
  double tol = 1e-6;
  /// Explicit step; empty selects 0.95 / sigma^2 with sigma from 50 power iterations.
  std::optional<double> step;
  bool nonneg = false;

  void validate() const;
};

struct LsResult {
  Volume x;
  /// 0.5 ||Ax - y||^2 at the start and after every update.
  std::vector<double> costTrace;
  int iterations = 0;
  double step = 0.0;
};

inline constexpr double kAutoStepSafety = 0.95;
inline constexpr int kAutoStepPowerIters = 50;

/// In-place Ram-Lak filtering of every detector row; rows are zero-padded to
/// twice their length (linear, not circular, convolution).
void ramp_filter_rows(std::span<float> values, int rows, int cols, double pixelWidth);

/// Parallel-beam filtered backprojection using the pair's transpose.
Volume fbp_parallel(const ProjectionSet& y, const VolumeSpec& spec, const ProjectorPair& P);

/// Gradient descent on 0.5 ||Ax - y||^2, optionally projected onto x >= 0.
LsResult reconstruct_ls(const ProjectionSet& y, const ProjectorPair& P, const LsConfig& cfg,
                        const std::optional<Volume>& x0 = std::nullopt);

/// Least-squares refinement on the kept views, starting from x0.
/// P describes the full (unmasked) geometry.
LsResult refine_data_consistency(const Volume& x0, const ProjectionSet& yMasked, const AngleMask& mask,
                                 const ProjectorPair& P, const LsConfig& cfg);

/// Measured data on kept views, forward projection of x on the others.
ProjectionSet complete_sinogram(const Volume& x, const ProjectionSet& yMeasured, const AngleMask& mask,
                                const ProjectorPair& P);

}  // namespace xtomo
