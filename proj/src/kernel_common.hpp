#pragma once

#include <span>
#include <string>
#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/error.hpp"
#include "xtomo/geometry.hpp"

namespace xtomo {

inline void check_input(std::span<const float> values, std::size_t expected, const char* what) {
  if (values.size() != expected)
    throw Error(ErrorCode::SpecMismatch, std::string(what) + " length does not match its spec");
  for (float v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::SpecMismatch, std::string(what) + " contains non-finite values");
}

inline void check_forward_args(std::span<const float> volume, const VolumeSpec& vol, const Geometry& g,
                               std::span<float> proj) {
  vol.validate();
  g.validate();
  check_input(volume, vol.size(), "volume");
  if (proj.size() != g.size()) throw Error(ErrorCode::SpecMismatch, "projection buffer does not match geometry");
}

inline void check_backproject_args(std::span<const float> proj, const Geometry& g, const VolumeSpec& vol,
                                   std::span<float> volume) {
  vol.validate();
  g.validate();
  check_input(proj, g.size(), "projections");
  if (volume.size() != vol.size()) throw Error(ErrorCode::SpecMismatch, "volume buffer does not match spec");
}

inline std::vector<ViewFrame> make_frames(const Geometry& g, const VolumeSpec& vol) {
  std::vector<ViewFrame> frames;
  frames.reserve(std::size_t(g.num_views()));
  for (int v = 0; v < g.num_views(); ++v) frames.emplace_back(g, vol, v);
  return frames;
}

}  // namespace xtomo
