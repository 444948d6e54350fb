#include "xtomo/phantom.hpp"

#include <cmath>
#include <fstream>

#include "xtomo/error.hpp"

namespace xtomo {

using nlohmann::json;

void EllipsoidPhantom::validate() const {
  for (const auto& e : ellipsoids) {
    for (double v : {e.center.x, e.center.y, e.center.z, e.rotationZ, e.density})
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidValue, "ellipsoid parameters must be finite");
    for (double a : {e.semiAxes.x, e.semiAxes.y, e.semiAxes.z})
      if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidValue, "semi-axes must be positive");
  }
}

EllipsoidPhantom EllipsoidPhantom::from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::InvalidValue, "phantom must be a JSON array of ellipsoids");
  auto vec = [](const json& o, const char* key) {
    if (!o.contains(key)) throw Error(ErrorCode::MissingKey, std::string("ellipsoid lacks '") + key + "'");
    const json& v = o[key];
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
      throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' must be a 3-element array");
    return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  };
  auto num = [](const json& o, const char* key, double fallback, bool required) {
    if (!o.contains(key)) {
      if (required) throw Error(ErrorCode::MissingKey, std::string("ellipsoid lacks '") + key + "'");
      return fallback;
    }
    if (!o[key].is_number()) throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' must be a number");
    return o[key].get<double>();
  };
  EllipsoidPhantom ph;
  for (const auto& o : doc) {
    if (!o.is_object()) throw Error(ErrorCode::InvalidValue, "ellipsoid must be an object");
    for (const auto& [key, value] : o.items())
      if (key != "center" && key != "semiAxes" && key != "rotationZ" && key != "density")
        throw Error(ErrorCode::UnknownKey, "unknown ellipsoid key '" + key + "'");
    ph.ellipsoids.push_back({vec(o, "center"), vec(o, "semiAxes"), num(o, "rotationZ", 0.0, false),
                             num(o, "density", 0.0, true)});
  }
  ph.validate();
  return ph;
}

EllipsoidPhantom EllipsoidPhantom::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open phantom '" + path + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidValue, std::string("phantom is not valid JSON: ") + e.what());
  }
}

json EllipsoidPhantom::to_json() const {
  json doc = json::array();
  for (const auto& e : ellipsoids)
    doc.push_back({{"center", {e.center.x, e.center.y, e.center.z}},
                   {"semiAxes", {e.semiAxes.x, e.semiAxes.y, e.semiAxes.z}},
                   {"rotationZ", e.rotationZ},
                   {"density", e.density}});
  return doc;
}

EllipsoidPhantom desk_phantom(double scale) {
  EllipsoidPhantom ph;
  ph.ellipsoids = {
      {Vec3{0.0, 0.0, 0.0} * scale, Vec3{26.0, 20.0, 22.0} * scale, 0.0, 0.02},
      {Vec3{-7.0, 3.0, 2.0} * scale, Vec3{9.0, 13.0, 11.0} * scale, 30.0, 0.01},
      {Vec3{10.0, -5.0, -4.0} * scale, Vec3{5.0, 6.0, 7.0} * scale, -20.0, 0.015},
  };
  return ph;
}

namespace {

// Ray in the ellipsoid's normalized frame, where the ellipsoid is the unit ball.
struct LocalRay {
  Vec3 p;
  Vec3 d;
};

LocalRay to_local(const Ellipsoid& e, const Ray& ray) {
  const double th = deg_to_rad(e.rotationZ);
  const double c = std::cos(th);
  const double s = std::sin(th);
  auto rotate = [&](Vec3 v) { return Vec3{c * v.x + s * v.y, -s * v.x + c * v.y, v.z}; };
  const Vec3 p = rotate(ray.origin - e.center);
  const Vec3 d = rotate(ray.direction);
  return {{p.x / e.semiAxes.x, p.y / e.semiAxes.y, p.z / e.semiAxes.z},
          {d.x / e.semiAxes.x, d.y / e.semiAxes.y, d.z / e.semiAxes.z}};
}

double chord(const Ellipsoid& e, const Ray& ray, bool clipAtOrigin) {
  const LocalRay r = to_local(e, ray);
  const double a = dot(r.d, r.d);
  const double b = 2.0 * dot(r.p, r.d);
  const double c = dot(r.p, r.p) - 1.0;
  const double disc = b * b - 4.0 * a * c;
  if (!(disc > 0.0)) return 0.0;
  const double root = std::sqrt(disc);
  double lo = (-b - root) / (2.0 * a);
  const double hi = (-b + root) / (2.0 * a);
  if (clipAtOrigin) lo = std::max(lo, 0.0);
  return std::max(0.0, hi - lo) * norm(ray.direction);
}

}  // namespace

double chord_length(const Ellipsoid& e, const Ray& ray) { return chord(e, ray, true); }
double line_chord_length(const Ellipsoid& e, const Ray& ray) { return chord(e, ray, false); }

Volume rasterize(const EllipsoidPhantom& ph, const VolumeSpec& spec, int supersample) {
  if (supersample < 1) throw Error(ErrorCode::InvalidValue, "supersample must be >= 1");
  ph.validate();
  Volume vol(spec);
  const int n = supersample;
  const double weight = 1.0 / (double(n) * n * n);
  struct Local {
    Vec3 center, inv;
    double c, s, density;
  };
  std::vector<Local> locals;
  for (const auto& e : ph.ellipsoids) {
    const double th = deg_to_rad(e.rotationZ);
    locals.push_back({e.center, {1.0 / e.semiAxes.x, 1.0 / e.semiAxes.y, 1.0 / e.semiAxes.z}, std::cos(th),
                      std::sin(th), e.density});
  }
  auto values = vol.values();
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < spec.numZ; ++k) {
    for (int j = 0; j < spec.numY; ++j) {
      for (int i = 0; i < spec.numX; ++i) {
        const Vec3 center = spec.voxel_center(i, j, k);
        double sum = 0.0;
        for (int sz = 0; sz < n; ++sz) {
          for (int sy = 0; sy < n; ++sy) {
            for (int sx = 0; sx < n; ++sx) {
              const Vec3 p{center.x + ((sx + 0.5) / n - 0.5) * spec.voxelWidth,
                           center.y + ((sy + 0.5) / n - 0.5) * spec.voxelWidth,
                           center.z + ((sz + 0.5) / n - 0.5) * spec.voxelHeight};
              for (const auto& e : locals) {
                const Vec3 q = p - e.center;
                const double u = (e.c * q.x + e.s * q.y) * e.inv.x;
                const double v = (-e.s * q.x + e.c * q.y) * e.inv.y;
                const double w = q.z * e.inv.z;
                if (u * u + v * v + w * w <= 1.0) sum += e.density;
              }
            }
          }
        }
        values[spec.index(i, j, k)] = float(sum * weight);
      }
    }
  }
  return vol;
}

ProjectionSet analytic_project(const EllipsoidPhantom& ph, const Geometry& g) {
  ph.validate();
  ProjectionSet out(g);
  const VolumeSpec unit;
  const bool parallel = g.kind == GeometryKind::Parallel;
  const int views = g.num_views();
  const int rows = g.detector.numRows;
  const int cols = g.detector.numCols;
#pragma omp parallel for schedule(dynamic, 1)
  for (int v = 0; v < views; ++v) {
    const ViewFrame frame(g, unit, v);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const Ray ray = frame.ray_at(r, c);
        double sum = 0.0;
        for (const auto& e : ph.ellipsoids) sum += e.density * chord(e, ray, !parallel);
        out.at(v, r, c) = float(sum);
      }
    }
  }
  return out;
}

}  // namespace xtomo
