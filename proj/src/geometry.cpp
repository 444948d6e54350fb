#include "xtomo/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "xtomo/error.hpp"

namespace xtomo {

using nlohmann::json;

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::ConflictingKeys: return "ConflictingKeys";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
  }
  return "Error";
}

const char* to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Parallel: return "parallel";
    case GeometryKind::ConeFlat: return "cone";
    case GeometryKind::ConeCurved: return "cone-curved";
    case GeometryKind::Modular: return "modular";
  }
  return "?";
}

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::InvalidValue, std::string(name) + " must be positive and finite");
}

void require_positive(int value, const char* name) {
  if (value < 1) throw Error(ErrorCode::InvalidValue, std::string(name) + " must be >= 1");
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidValue, std::string(name) + " must be finite");
}

void require_finite(Vec3 v, const char* name) {
  require_finite(v.x, name);
  require_finite(v.y, name);
  require_finite(v.z, name);
}

// cos/sin with exact zeros at multiples of 90 degrees, so axis-aligned views
// produce rays with exactly zero direction components.
double snap(double value) { return std::abs(value) < 1e-15 ? 0.0 : value; }

}  // namespace

Vec3 VolumeSpec::voxel_center(int i, int j, int k) const {
  return {offsetX + (i - 0.5 * (numX - 1)) * voxelWidth, offsetY + (j - 0.5 * (numY - 1)) * voxelWidth,
          offsetZ + (k - 0.5 * (numZ - 1)) * voxelHeight};
}

double VolumeSpec::circumscribed_radius() const {
  const double hx = 0.5 * numX * voxelWidth;
  const double hy = 0.5 * numY * voxelWidth;
  const double hz = 0.5 * numZ * voxelHeight;
  return std::sqrt(offsetX * offsetX + offsetY * offsetY + offsetZ * offsetZ) +
         std::sqrt(hx * hx + hy * hy + hz * hz);
}

void VolumeSpec::validate() const {
  require_positive(numX, "numX");
  require_positive(numY, "numY");
  require_positive(numZ, "numZ");
  require_positive(voxelWidth, "voxelWidth");
  require_positive(voxelHeight, "voxelHeight");
  require_finite(offsetX, "offsetX");
  require_finite(offsetY, "offsetY");
  require_finite(offsetZ, "offsetZ");
}

void DetectorSpec::validate() const {
  require_positive(numRows, "numRows");
  require_positive(numCols, "numCols");
  require_positive(pixelHeight, "pixelHeight");
  require_positive(pixelWidth, "pixelWidth");
  require_finite(centerRow, "centerRow");
  require_finite(centerCol, "centerCol");
}

void Geometry::validate() const {
  detector.validate();
  if (kind == GeometryKind::Modular) {
    if (modularViews.empty()) throw Error(ErrorCode::InvalidValue, "modular geometry needs at least one view");
    for (const auto& v : modularViews) {
      require_finite(v.sourcePos, "sourcePos");
      require_finite(v.detectorCenter, "detectorCenter");
      require_finite(v.rowDir, "rowDir");
      require_finite(v.colDir, "colDir");
      if (std::abs(norm(v.rowDir) - 1.0) > 1e-6 || std::abs(norm(v.colDir) - 1.0) > 1e-6)
        throw Error(ErrorCode::InvalidValue, "rowDir and colDir must be unit vectors");
      if (std::abs(dot(v.rowDir, v.colDir)) > 1e-6)
        throw Error(ErrorCode::InvalidValue, "rowDir and colDir must be orthogonal");
      if (norm(v.detectorCenter - v.sourcePos) == 0.0)
        throw Error(ErrorCode::InvalidValue, "detectorCenter coincides with sourcePos");
    }
    return;
  }
  if (angles.empty()) throw Error(ErrorCode::InvalidValue, "angle list is empty");
  for (double a : angles) require_finite(a, "angles");
  if (kind == GeometryKind::ConeFlat || kind == GeometryKind::ConeCurved) {
    require_positive(sod, "sod");
    require_positive(sdd, "sdd");
    if (sod > sdd) throw Error(ErrorCode::InvalidValue, "sod must not exceed sdd");
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const std::set<std::string> kGeometryKeys = {
    "geometry", "numAngles", "angularRange", "angles", "numRows", "numCols", "pixelHeight",
    "pixelWidth", "centerRow", "centerCol", "sod", "sdd", "views"};
const std::set<std::string> kVolumeKeys = {"numX",       "numY",        "numZ",    "voxelWidth",
                                           "voxelHeight", "offsetX",    "offsetY", "offsetZ"};

void reject_unknown(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidValue, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kGeometryKeys.contains(key) && !kVolumeKeys.contains(key))
      throw Error(ErrorCode::UnknownKey, "unknown config key '" + key + "'");
  }
}

const json& need(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorCode::MissingKey, std::string("missing key '") + key + "'");
  return *it;
}

int get_int(const json& value, const char* key) {
  if (!value.is_number_integer())
    throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' must be an integer");
  const auto v = value.get<long long>();
  if (v > std::numeric_limits<int>::max() || v < std::numeric_limits<int>::min())
    throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' out of range");
  return int(v);
}

double get_double(const json& value, const char* key) {
  if (!value.is_number()) throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' must be a number");
  return value.get<double>();
}

double optional_double(const json& doc, const char* key, double fallback) {
  auto it = doc.find(key);
  return it == doc.end() ? fallback : get_double(*it, key);
}

Vec3 get_vec3(const json& value, const char* key) {
  if (!value.is_array() || value.size() != 3)
    throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' must be a 3-element array");
  return {get_double(value[0], key), get_double(value[1], key), get_double(value[2], key)};
}

json vec3_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

Geometry parse_geometry(const json& doc) {
  reject_unknown(doc);
  Geometry g;
  const json& kindValue = need(doc, "geometry");
  if (!kindValue.is_string()) throw Error(ErrorCode::InvalidValue, "'geometry' must be a string");
  const auto kind = kindValue.get<std::string>();
  if (kind == "parallel") g.kind = GeometryKind::Parallel;
  else if (kind == "cone") g.kind = GeometryKind::ConeFlat;
  else if (kind == "cone-curved") g.kind = GeometryKind::ConeCurved;
  else if (kind == "modular") g.kind = GeometryKind::Modular;
  else throw Error(ErrorCode::InvalidValue, "unknown geometry '" + kind + "'");

  auto& det = g.detector;
  det.numRows = get_int(need(doc, "numRows"), "numRows");
  det.numCols = get_int(need(doc, "numCols"), "numCols");
  det.pixelHeight = get_double(need(doc, "pixelHeight"), "pixelHeight");
  det.pixelWidth = get_double(need(doc, "pixelWidth"), "pixelWidth");
  det.centerRow = optional_double(doc, "centerRow", 0.5 * (det.numRows - 1));
  det.centerCol = optional_double(doc, "centerCol", 0.5 * (det.numCols - 1));

  const bool hasRange = doc.contains("angularRange");
  const bool hasList = doc.contains("angles");
  const bool isCone = g.kind == GeometryKind::ConeFlat || g.kind == GeometryKind::ConeCurved;

  if (g.kind == GeometryKind::Modular) {
    for (const char* key : {"angularRange", "angles", "sod", "sdd"})
      if (doc.contains(key))
        throw Error(ErrorCode::InvalidValue, std::string("'") + key + "' does not apply to modular geometry");
    const json& views = need(doc, "views");
    if (!views.is_array()) throw Error(ErrorCode::InvalidValue, "'views' must be an array");
    for (const auto& v : views) {
      if (!v.is_object()) throw Error(ErrorCode::InvalidValue, "each view must be an object");
      for (const auto& [key, value] : v.items()) {
        if (key != "sourcePos" && key != "detectorCenter" && key != "rowDir" && key != "colDir")
          throw Error(ErrorCode::UnknownKey, "unknown view key '" + key + "'");
      }
      g.modularViews.push_back({get_vec3(need(v, "sourcePos"), "sourcePos"),
                                get_vec3(need(v, "detectorCenter"), "detectorCenter"),
                                get_vec3(need(v, "rowDir"), "rowDir"), get_vec3(need(v, "colDir"), "colDir")});
    }
    if (doc.contains("numAngles") && get_int(doc["numAngles"], "numAngles") != int(g.modularViews.size()))
      throw Error(ErrorCode::InvalidValue, "numAngles does not match the number of views");
  } else {
    if (doc.contains("views")) throw Error(ErrorCode::InvalidValue, "'views' applies to modular geometry only");
    if (hasRange && hasList) throw Error(ErrorCode::ConflictingKeys, "give either 'angularRange' or 'angles'");
    if (hasList) {
      const json& list = doc["angles"];
      if (!list.is_array()) throw Error(ErrorCode::InvalidValue, "'angles' must be an array");
      for (const auto& a : list) g.angles.push_back(get_double(a, "angles"));
      if (doc.contains("numAngles") && get_int(doc["numAngles"], "numAngles") != int(g.angles.size()))
        throw Error(ErrorCode::InvalidValue, "numAngles does not match the angle list");
    } else if (hasRange) {
      const int n = get_int(need(doc, "numAngles"), "numAngles");
      require_positive(n, "numAngles");
      const double range = get_double(doc["angularRange"], "angularRange");
      require_positive(range, "angularRange");
      g.angles.resize(std::size_t(n));
      for (int i = 0; i < n; ++i) g.angles[std::size_t(i)] = range * i / n;
    } else {
      throw Error(ErrorCode::MissingKey, "missing key 'angularRange' or 'angles'");
    }
    if (isCone) {
      g.sod = get_double(need(doc, "sod"), "sod");
      g.sdd = get_double(need(doc, "sdd"), "sdd");
    } else if (doc.contains("sod") || doc.contains("sdd")) {
      throw Error(ErrorCode::InvalidValue, "'sod'/'sdd' apply to cone geometries only");
    }
  }
  g.validate();
  return g;
}

VolumeSpec parse_volume(const json& doc) {
  reject_unknown(doc);
  VolumeSpec v;
  v.numX = get_int(need(doc, "numX"), "numX");
  v.numY = get_int(need(doc, "numY"), "numY");
  v.numZ = get_int(need(doc, "numZ"), "numZ");
  v.voxelWidth = get_double(need(doc, "voxelWidth"), "voxelWidth");
  v.voxelHeight = get_double(need(doc, "voxelHeight"), "voxelHeight");
  v.offsetX = optional_double(doc, "offsetX", 0.0);
  v.offsetY = optional_double(doc, "offsetY", 0.0);
  v.offsetZ = optional_double(doc, "offsetZ", 0.0);
  v.validate();
  return v;
}

CtConfig config_from_json(const json& doc) { return {parse_geometry(doc), parse_volume(doc)}; }

CtConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidValue, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

CtConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

json to_json(const Geometry& g) {
  json doc;
  doc["geometry"] = to_string(g.kind);
  doc["numAngles"] = g.num_views();
  doc["numRows"] = g.detector.numRows;
  doc["numCols"] = g.detector.numCols;
  doc["pixelHeight"] = g.detector.pixelHeight;
  doc["pixelWidth"] = g.detector.pixelWidth;
  doc["centerRow"] = g.detector.centerRow;
  doc["centerCol"] = g.detector.centerCol;
  if (g.kind == GeometryKind::Modular) {
    json views = json::array();
    for (const auto& v : g.modularViews)
      views.push_back({{"sourcePos", vec3_json(v.sourcePos)},
                       {"detectorCenter", vec3_json(v.detectorCenter)},
                       {"rowDir", vec3_json(v.rowDir)},
                       {"colDir", vec3_json(v.colDir)}});
    doc["views"] = views;
  } else {
    doc["angles"] = g.angles;
    if (g.kind != GeometryKind::Parallel) {
      doc["sod"] = g.sod;
      doc["sdd"] = g.sdd;
    }
  }
  return doc;
}

json to_json(const VolumeSpec& v) {
  return {{"numX", v.numX},
          {"numY", v.numY},
          {"numZ", v.numZ},
          {"voxelWidth", v.voxelWidth},
          {"voxelHeight", v.voxelHeight},
          {"offsetX", v.offsetX},
          {"offsetY", v.offsetY},
          {"offsetZ", v.offsetZ}};
}

json to_json(const CtConfig& c) {
  json doc = to_json(c.geometry);
  doc.update(to_json(c.volume));
  return doc;
}

// ---------------------------------------------------------------------------
// Rays

ViewFrame::ViewFrame(const Geometry& g, const VolumeSpec& vol, int view)
    : kind(g.kind), detector(g.detector), sod(g.sod), sdd(g.sdd) {
  if (view < 0 || view >= g.num_views()) throw Error(ErrorCode::IndexOutOfRange, "view index out of range");
  if (kind == GeometryKind::Modular) {
    const auto& m = g.modularViews[std::size_t(view)];
    source = m.sourcePos;
    detectorCenter = m.detectorCenter;
    colAxis = m.colDir;
    rowAxis = m.rowDir;
    normal = normalized(cross(colAxis, rowAxis));
    if (dot(detectorCenter - source, normal) < 0.0) normal = -normal;
    return;
  }
  const double phi = deg_to_rad(g.angles[std::size_t(view)]);
  const double c = snap(std::cos(phi));
  const double s = snap(std::sin(phi));
  ray = {c, s, 0.0};
  colAxis = {-s, c, 0.0};
  rowAxis = {0.0, 0.0, 1.0};
  if (kind == GeometryKind::Parallel) {
    backoff = vol.circumscribed_radius() + std::max(vol.voxelWidth, vol.voxelHeight);
  } else {
    source = sod * ray;
    detectorCenter = -(sdd - sod) * ray;
  }
}

Ray ViewFrame::ray_at(int row, int col) const {
  const double s = detector.s(col);
  const double t = detector.t(row);
  switch (kind) {
    case GeometryKind::Parallel: {
      const Vec3 pixel = s * colAxis + t * rowAxis;
      return {pixel - backoff * ray, ray};
    }
    case GeometryKind::ConeFlat:
    case GeometryKind::Modular: {
      const Vec3 pixel = detectorCenter + s * colAxis + t * rowAxis;
      return {source, normalized(pixel - source)};
    }
    case GeometryKind::ConeCurved: {
      const double gamma = s / sdd;
      const Vec3 toPixel = (sdd * std::cos(gamma)) * (-ray) + (sdd * std::sin(gamma)) * colAxis + t * rowAxis;
      return {source, normalized(toPixel)};
    }
  }
  return {};
}

Ray ray_for_sample(const Geometry& g, const VolumeSpec& vol, int view, int row, int col) {
  if (row < 0 || row >= g.detector.numRows || col < 0 || col >= g.detector.numCols)
    throw Error(ErrorCode::IndexOutOfRange, "detector index out of range");
  return ViewFrame(g, vol, view).ray_at(row, col);
}

Geometry to_modular(const Geometry& g) {
  if (g.kind != GeometryKind::ConeFlat)
    throw Error(ErrorCode::Unsupported, std::string("no modular equivalent for ") + to_string(g.kind) + " geometry");
  Geometry out;
  out.kind = GeometryKind::Modular;
  out.detector = g.detector;
  const VolumeSpec unused;
  for (int v = 0; v < g.num_views(); ++v) {
    const ViewFrame f(g, unused, v);
    out.modularViews.push_back({f.source, f.detectorCenter, f.rowAxis, f.colAxis});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shadow windows

namespace {

PixelWindow full_window(const DetectorSpec& d) { return {0, d.numRows - 1, 0, d.numCols - 1}; }

PixelWindow window_from_ranges(const DetectorSpec& d, double sMin, double sMax, double tMin, double tMax) {
  if (!std::isfinite(sMin) || !std::isfinite(sMax) || !std::isfinite(tMin) || !std::isfinite(tMax))
    return full_window(d);
  // Pixel centers inside the projected range, widened by a small tolerance so
  // rays grazing a voxel face are not lost to rounding.
  constexpr double slack = 1e-6;
  auto clampIndex = [](double v, int n) { return int(std::clamp(v, -1.0, double(n))); };
  PixelWindow w;
  w.colBegin = std::max(0, clampIndex(std::ceil(sMin / d.pixelWidth + d.centerCol - slack), d.numCols));
  w.colEnd = std::min(d.numCols - 1, clampIndex(std::floor(sMax / d.pixelWidth + d.centerCol + slack), d.numCols));
  w.rowBegin = std::max(0, clampIndex(std::ceil(tMin / d.pixelHeight + d.centerRow - slack), d.numRows));
  w.rowEnd = std::min(d.numRows - 1, clampIndex(std::floor(tMax / d.pixelHeight + d.centerRow + slack), d.numRows));
  return w;
}

std::array<Vec3, 8> corners(Vec3 lo, Vec3 hi) {
  return {Vec3{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {lo.x, hi.y, lo.z}, {hi.x, hi.y, lo.z},
          {lo.x, lo.y, hi.z},     {hi.x, lo.y, hi.z}, {lo.x, hi.y, hi.z}, {hi.x, hi.y, hi.z}};
}

}  // namespace

PixelWindow shadow_window(const ViewFrame& f, Vec3 lo, Vec3 hi) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double sMin = inf, sMax = -inf, tMin = inf, tMax = -inf;
  auto extend = [&](double s, double t) {
    sMin = std::min(sMin, s);
    sMax = std::max(sMax, s);
    tMin = std::min(tMin, t);
    tMax = std::max(tMax, t);
  };

  switch (f.kind) {
    case GeometryKind::Parallel:
      for (const Vec3& p : corners(lo, hi)) extend(dot(p, f.colAxis), p.z);
      break;
    case GeometryKind::ConeFlat:
      for (const Vec3& p : corners(lo, hi)) {
        const Vec3 q = p - f.source;
        const double depth = -dot(q, f.ray);
        if (!(depth > 0.0)) return full_window(f.detector);
        extend(f.sdd * dot(q, f.colAxis) / depth, f.sdd * q.z / depth);
      }
      break;
    case GeometryKind::Modular: {
      const double planeDepth = dot(f.detectorCenter - f.source, f.normal);
      for (const Vec3& p : corners(lo, hi)) {
        const Vec3 q = p - f.source;
        const double depth = dot(q, f.normal);
        if (!(depth > 0.0)) return full_window(f.detector);
        const Vec3 onPlane = f.source + (planeDepth / depth) * q - f.detectorCenter;
        extend(dot(onPlane, f.colAxis), dot(onPlane, f.rowAxis));
      }
      break;
    }
    case GeometryKind::ConeCurved: {
      // Horizontal footprint: azimuth extremes are at the square's corners.
      for (const Vec3& p : corners(lo, hi)) {
        const Vec3 q = p - f.source;
        const double depth = -dot(q, f.ray);
        if (!(depth > 0.0)) return full_window(f.detector);
        const double s = f.sdd * std::atan2(dot(q, f.colAxis), depth);
        sMin = std::min(sMin, s);
        sMax = std::max(sMax, s);
      }
      // Axial: t = sdd * z / rho, rho the horizontal source distance.
      const double dx = std::max({lo.x - f.source.x, 0.0, f.source.x - hi.x});
      const double dy = std::max({lo.y - f.source.y, 0.0, f.source.y - hi.y});
      const double rhoMin = std::hypot(dx, dy);
      if (!(rhoMin > 0.0)) return full_window(f.detector);
      double rhoMax = 0.0;
      for (const Vec3& p : corners(lo, hi)) rhoMax = std::max(rhoMax, std::hypot(p.x - f.source.x, p.y - f.source.y));
      for (double z : {lo.z, hi.z}) {
        for (double rho : {rhoMin, rhoMax}) {
          const double t = f.sdd * z / rho;
          tMin = std::min(tMin, t);
          tMax = std::max(tMax, t);
        }
      }
      break;
    }
  }
  return window_from_ranges(f.detector, sMin, sMax, tMin, tMax);
}

}  // namespace xtomo
