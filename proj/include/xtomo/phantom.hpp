#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xtomo/datamodel.hpp"
#include "xtomo/geometry.hpp"

namespace xtomo {

/// Additive ellipsoid: density (mm^-1) inside, rotated about z by rotationZ degrees.
struct Ellipsoid {
  Vec3 center;
  Vec3 semiAxes{1.0, 1.0, 1.0};
  double rotationZ = 0.0;
  double density = 0.0;
};

struct EllipsoidPhantom {
  std::vector<Ellipsoid> ellipsoids;

  void validate() const;
  static EllipsoidPhantom from_json(const nlohmann::json& doc);
  static EllipsoidPhantom load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Three-ellipsoid test object that fits inside a 64 mm cube centered on the
/// origin; `scale` multiplies every length.
EllipsoidPhantom desk_phantom(double scale = 1.0);

/// Length of the part of the ray (alpha >= 0) inside the ellipsoid.
double chord_length(const Ellipsoid& e, const Ray& ray);
/// Same, for the full line through the ray (both directions).
double line_chord_length(const Ellipsoid& e, const Ray& ray);

/// Voxel value = sum of densities times the fraction of supersample^3
/// sub-points inside each ellipsoid.
Volume rasterize(const EllipsoidPhantom& ph, const VolumeSpec& spec, int supersample);

/// Exact line integrals along the center ray of every detector sample.
/// Parallel rays are full lines; cone and modular rays start at the source.
ProjectionSet analytic_project(const EllipsoidPhantom& ph, const Geometry& g);

}  // namespace xtomo
