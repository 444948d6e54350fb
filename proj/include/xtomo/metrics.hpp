#pragma once

#include <cmath>
#include <span>

namespace xtomo::metrics {

inline double inner(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline double norm2(std::span<const float> a) { return std::sqrt(inner(a, a)); }

/// ||a - b|| / ||b||
inline double relative_rmse(std::span<const float> a, std::span<const float> b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    num += d * d;
    den += double(b[i]) * double(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// Peak signal-to-noise ratio in dB, peak = max |truth|.
inline double psnr(std::span<const float> estimate, std::span<const float> truth) {
  double peak = 0.0;
  double mse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    peak = std::max(peak, std::abs(double(truth[i])));
    const double d = double(estimate[i]) - double(truth[i]);
    mse += d * d;
  }
  mse /= double(truth.size());
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace xtomo::metrics
