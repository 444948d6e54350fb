#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xtomo/vec3.hpp"

namespace xtomo {

/// Voxel grid sampling. Voxel (i,j,k) is centered at
/// offset + ((i-(numX-1)/2)*voxelWidth, (j-(numY-1)/2)*voxelWidth, (k-(numZ-1)/2)*voxelHeight).
/// Lengths are in mm.
struct VolumeSpec {
  int numX = 1;
  int numY = 1;
  int numZ = 1;
  double voxelWidth = 1.0;
  double voxelHeight = 1.0;
  double offsetX = 0.0;
  double offsetY = 0.0;
  double offsetZ = 0.0;

  void validate() const;
  std::size_t size() const { return std::size_t(numX) * std::size_t(numY) * std::size_t(numZ); }
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(k) * std::size_t(numY) + std::size_t(j)) * std::size_t(numX) + std::size_t(i);
  }

  double x_min() const { return offsetX - 0.5 * numX * voxelWidth; }
  double y_min() const { return offsetY - 0.5 * numY * voxelWidth; }
  double z_min() const { return offsetZ - 0.5 * numZ * voxelHeight; }
  Vec3 voxel_center(int i, int j, int k) const;
  /// Radius about the world origin of a sphere containing the whole grid.
  double circumscribed_radius() const;

  friend bool operator==(const VolumeSpec&, const VolumeSpec&) = default;
};

/// Flat or curved detector sampling. centerRow/centerCol is the fractional
/// pixel index hit by the reference ray, so it encodes detector shifts.
struct DetectorSpec {
  int numRows = 1;
  int numCols = 1;
  double pixelHeight = 1.0;
  double pixelWidth = 1.0;
  double centerRow = 0.0;
  double centerCol = 0.0;

  void validate() const;
  /// Transverse coordinate of a column center (arc length on curved detectors).
  double s(int col) const { return (col - centerCol) * pixelWidth; }
  /// Axial coordinate of a row center.
  double t(int row) const { return (row - centerRow) * pixelHeight; }

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

enum class GeometryKind { Parallel, ConeFlat, ConeCurved, Modular };

const char* to_string(GeometryKind kind);

/// One source/detector pose. rowDir is the direction of increasing row index,
/// colDir the direction of increasing column index.
struct ModularView {
  Vec3 sourcePos;
  Vec3 detectorCenter;
  Vec3 rowDir{0.0, 0.0, 1.0};
  Vec3 colDir{0.0, 1.0, 0.0};

  friend bool operator==(const ModularView&, const ModularView&) = default;
};

struct Geometry {
  GeometryKind kind = GeometryKind::Parallel;
  std::vector<double> angles;  // degrees; Parallel and cone kinds
  double sod = 0.0;
  double sdd = 0.0;
  std::vector<ModularView> modularViews;
  DetectorSpec detector;

  void validate() const;
  int num_views() const {
    return kind == GeometryKind::Modular ? int(modularViews.size()) : int(angles.size());
  }
  std::size_t view_size() const { return std::size_t(detector.numRows) * std::size_t(detector.numCols); }
  std::size_t size() const { return std::size_t(num_views()) * view_size(); }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct CtConfig {
  Geometry geometry;
  VolumeSpec volume;
};

/// Parses the JSON configuration document. Unknown keys are rejected.
CtConfig parse_config(std::string_view text);
CtConfig config_from_json(const nlohmann::json& doc);
CtConfig load_config(const std::string& path);

/// Geometry-only and volume-only halves of the config format. Each rejects
/// keys that belong to neither half.
Geometry parse_geometry(const nlohmann::json& doc);
VolumeSpec parse_volume(const nlohmann::json& doc);
nlohmann::json to_json(const Geometry& g);
nlohmann::json to_json(const VolumeSpec& v);
nlohmann::json to_json(const CtConfig& c);

/// Per-view quantities shared by every sample of a view. Kernels build one
/// frame per view and derive all rays from it, so forward and adjoint see
/// bitwise identical rays.
struct ViewFrame {
  GeometryKind kind = GeometryKind::Parallel;
  DetectorSpec detector;
  Vec3 source;          // cone/modular
  Vec3 detectorCenter;  // point hit at (centerRow, centerCol)
  Vec3 ray;             // parallel ray direction r(phi); cone: unit vector from isocenter to source
  Vec3 colAxis;         // u(phi) or modular colDir
  Vec3 rowAxis;         // (0,0,1) or modular rowDir
  Vec3 normal;          // modular only: unit detector normal facing away from the source
  double sod = 0.0;
  double sdd = 0.0;
  double backoff = 0.0;  // parallel: distance of ray origins behind the detector plane

  ViewFrame(const Geometry& g, const VolumeSpec& vol, int view);

  Ray ray_at(int row, int col) const;
};

/// The ray through the center of detector pixel (row, col) of a view. The
/// volume is needed only to place parallel-beam origins outside the grid.
Ray ray_for_sample(const Geometry& g, const VolumeSpec& vol, int view, int row, int col);

/// Rewrites a flat-panel cone geometry as explicit per-view poses.
Geometry to_modular(const Geometry& g);

/// Inclusive pixel index window; empty when rowEnd < rowBegin or colEnd < colBegin.
struct PixelWindow {
  int rowBegin = 0;
  int rowEnd = -1;
  int colBegin = 0;
  int colEnd = -1;
  bool empty() const { return rowEnd < rowBegin || colEnd < colBegin; }
};

/// Pixels whose center rays may intersect the axis-aligned box [lo, hi].
/// Conservative: never omits a pixel with a nonzero intersection.
PixelWindow shadow_window(const ViewFrame& frame, Vec3 lo, Vec3 hi);

constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

}  // namespace xtomo
