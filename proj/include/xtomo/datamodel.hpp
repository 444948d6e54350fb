#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xtomo/geometry.hpp"
#include "xtomo/memory.hpp"

namespace xtomo {

using FloatBuffer = memory::tracked_vector<float>;

/// Attenuation volume in mm^-1, stored [z][y][x] row-major as 32-bit floats.
class Volume {
 public:
  explicit Volume(const VolumeSpec& spec);
  Volume(const VolumeSpec& spec, std::span<const float> values);

  const VolumeSpec& spec() const { return spec_; }
  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  float& at(int i, int j, int k) { return values_[spec_.index(i, j, k)]; }
  float at(int i, int j, int k) const { return values_[spec_.index(i, j, k)]; }

 private:
  VolumeSpec spec_;
  FloatBuffer values_;
};

/// Line-integral data stored [view][row][col] row-major as 32-bit floats.
class ProjectionSet {
 public:
  explicit ProjectionSet(const Geometry& geometry);
  ProjectionSet(const Geometry& geometry, std::span<const float> values);

  const Geometry& geometry() const { return geometry_; }
  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  std::span<float> view(int v) { return std::span<float>(values_).subspan(std::size_t(v) * geometry_.view_size(), geometry_.view_size()); }
  std::span<const float> view(int v) const {
    return std::span<const float>(values_).subspan(std::size_t(v) * geometry_.view_size(), geometry_.view_size());
  }
  float& at(int v, int r, int c) { return values_[index(v, r, c)]; }
  float at(int v, int r, int c) const { return values_[index(v, r, c)]; }

 private:
  std::size_t index(int v, int r, int c) const {
    return (std::size_t(v) * std::size_t(geometry_.detector.numRows) + std::size_t(r)) *
               std::size_t(geometry_.detector.numCols) +
           std::size_t(c);
  }

  Geometry geometry_;
  FloatBuffer values_;
};

/// Per-view keep flags; at least one view must be kept.
struct AngleMask {
  std::vector<bool> keep;

  explicit AngleMask(std::vector<bool> flags);
  static AngleMask all(int numViews);
  /// Keeps views in [begin, end).
  static AngleMask range(int numViews, int begin, int end);
  static AngleMask from_json(const nlohmann::json& doc);
  static AngleMask load(const std::string& path);

  int size() const { return int(keep.size()); }
  int count() const;
  std::vector<int> kept_views() const;
};

/// Throws NonFiniteData when any value is NaN or infinite.
void require_finite(std::span<const float> values, const char* what);

using ArrayFile = std::variant<Volume, ProjectionSet>;

/// Reads a JSON header and its raw little-endian float payload.
ArrayFile read_array(const std::filesystem::path& headerPath);
Volume read_volume(const std::filesystem::path& headerPath);
ProjectionSet read_projections(const std::filesystem::path& headerPath);

/// Writes `<stem>.raw` next to the header, both via temp file + rename.
void write_array(const Volume& v, const std::filesystem::path& headerPath);
void write_array(const ProjectionSet& p, const std::filesystem::path& headerPath);

/// Projection set restricted to the kept views, geometry filtered to match.
ProjectionSet apply_mask(const ProjectionSet& y, const AngleMask& mask);
Geometry apply_mask(const Geometry& g, const AngleMask& mask);

}  // namespace xtomo
