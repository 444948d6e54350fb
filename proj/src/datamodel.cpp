#include "xtomo/datamodel.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "xtomo/error.hpp"

namespace xtomo {

namespace fs = std::filesystem;
using nlohmann::json;

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteData, std::string(what) + " contains non-finite values");
}

Volume::Volume(const VolumeSpec& spec) : spec_(spec) {
  spec_.validate();
  values_.assign(spec_.size(), 0.0f);
}

Volume::Volume(const VolumeSpec& spec, std::span<const float> values) : spec_(spec) {
  spec_.validate();
  if (values.size() != spec_.size())
    throw Error(ErrorCode::SizeMismatch, "volume data length does not match its spec");
  require_finite(values, "volume");
  values_.assign(values.begin(), values.end());
}

ProjectionSet::ProjectionSet(const Geometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  values_.assign(geometry_.size(), 0.0f);
}

ProjectionSet::ProjectionSet(const Geometry& geometry, std::span<const float> values) : geometry_(geometry) {
  geometry_.validate();
  if (values.size() != geometry_.size())
    throw Error(ErrorCode::SizeMismatch, "projection data length does not match its geometry");
  require_finite(values, "projections");
  values_.assign(values.begin(), values.end());
}

// ---------------------------------------------------------------------------

AngleMask::AngleMask(std::vector<bool> flags) : keep(std::move(flags)) {
  if (count() == 0) throw Error(ErrorCode::InvalidValue, "angle mask must keep at least one view");
}

AngleMask AngleMask::all(int numViews) { return AngleMask(std::vector<bool>(std::size_t(numViews), true)); }

AngleMask AngleMask::range(int numViews, int begin, int end) {
  std::vector<bool> flags(std::size_t(numViews), false);
  for (int v = std::max(begin, 0); v < std::min(end, numViews); ++v) flags[std::size_t(v)] = true;
  return AngleMask(std::move(flags));
}

AngleMask AngleMask::from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::InvalidValue, "mask must be a JSON array of 0/1");
  std::vector<bool> flags;
  for (const auto& v : doc) {
    if (v.is_boolean()) flags.push_back(v.get<bool>());
    else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) flags.push_back(v.get<int>() == 1);
    else throw Error(ErrorCode::InvalidValue, "mask entries must be 0 or 1");
  }
  return AngleMask(std::move(flags));
}

AngleMask AngleMask::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open mask '" + path + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidValue, std::string("mask is not valid JSON: ") + e.what());
  }
}

int AngleMask::count() const {
  int n = 0;
  for (bool k : keep) n += k ? 1 : 0;
  return n;
}

std::vector<int> AngleMask::kept_views() const {
  std::vector<int> out;
  for (std::size_t v = 0; v < keep.size(); ++v)
    if (keep[v]) out.push_back(int(v));
  return out;
}

Geometry apply_mask(const Geometry& g, const AngleMask& mask) {
  if (mask.size() != g.num_views()) throw Error(ErrorCode::LengthMismatch, "mask length differs from view count");
  Geometry out = g;
  out.angles.clear();
  out.modularViews.clear();
  for (int v : mask.kept_views()) {
    if (g.kind == GeometryKind::Modular) out.modularViews.push_back(g.modularViews[std::size_t(v)]);
    else out.angles.push_back(g.angles[std::size_t(v)]);
  }
  return out;
}

ProjectionSet apply_mask(const ProjectionSet& y, const AngleMask& mask) {
  ProjectionSet out(apply_mask(y.geometry(), mask));
  int dst = 0;
  for (int v : mask.kept_views()) {
    auto src = y.view(v);
    std::copy(src.begin(), src.end(), out.view(dst++).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Raw + header I/O

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void to_little_endian(std::span<std::uint32_t> words) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& w : words)
      w = ((w & 0xffu) << 24) | ((w & 0xff00u) << 8) | ((w & 0xff0000u) >> 8) | (w >> 24);
  }
}

void atomic_write(const fs::path& path, const char* data, std::size_t bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out.write(data, std::streamsize(bytes));
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename '" + tmp.string() + "': " + ec.message());
}

void write_payload(std::span<const float> values, const std::vector<int>& shape, json header,
                   const fs::path& headerPath) {
  fs::path rawPath = headerPath;
  rawPath.replace_extension(".raw");
  std::vector<std::uint32_t> words(values.size());
  std::memcpy(words.data(), values.data(), values.size() * sizeof(float));
  to_little_endian(words);
  atomic_write(rawPath, reinterpret_cast<const char*>(words.data()), words.size() * sizeof(std::uint32_t));

  header["shape"] = shape;
  header["dtype"] = "f32le";
  header["raw"] = rawPath.filename().string();
  const std::string text = header.dump(2) + "\n";
  atomic_write(headerPath, text.data(), text.size());
}

std::vector<float> read_payload(const fs::path& headerPath, const json& header, std::size_t expected) {
  if (!header.contains("raw") || !header["raw"].is_string())
    throw Error(ErrorCode::MalformedHeader, "header lacks a 'raw' path");
  if (header.value("dtype", std::string()) != "f32le")
    throw Error(ErrorCode::MalformedHeader, "dtype must be \"f32le\"");
  const fs::path rawPath = headerPath.parent_path() / header["raw"].get<std::string>();
  std::error_code ec;
  const auto bytes = fs::file_size(rawPath, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot stat raw file '" + rawPath.string() + "'");
  if (bytes != expected * sizeof(float))
    throw Error(ErrorCode::SizeMismatch, "raw file has " + std::to_string(bytes) + " bytes, expected " +
                                             std::to_string(expected * sizeof(float)));
  std::vector<std::uint32_t> words(expected);
  std::ifstream in(rawPath, std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()), std::streamsize(bytes));
  if (!in) throw Error(ErrorCode::IoError, "cannot read raw file '" + rawPath.string() + "'");
  to_little_endian(words);
  std::vector<float> values(expected);
  std::memcpy(values.data(), words.data(), bytes);
  return values;
}

std::vector<int> read_shape(const json& header) {
  if (!header.contains("shape") || !header["shape"].is_array() || header["shape"].size() != 3)
    throw Error(ErrorCode::MalformedHeader, "'shape' must be a 3-element array");
  std::vector<int> shape;
  for (const auto& s : header["shape"]) {
    if (!s.is_number_integer() || s.get<long long>() < 1)
      throw Error(ErrorCode::MalformedHeader, "'shape' entries must be positive integers");
    shape.push_back(s.get<int>());
  }
  return shape;
}

}  // namespace

void write_array(const Volume& v, const fs::path& headerPath) {
  const auto& s = v.spec();
  json header;
  header["kind"] = "volume";
  header["volume"] = to_json(s);
  write_payload(v.values(), {s.numZ, s.numY, s.numX}, header, headerPath);
}

void write_array(const ProjectionSet& p, const fs::path& headerPath) {
  const auto& g = p.geometry();
  json header;
  header["kind"] = "projections";
  header["geometry"] = to_json(g);
  write_payload(p.values(), {g.num_views(), g.detector.numRows, g.detector.numCols}, header, headerPath);
}

ArrayFile read_array(const fs::path& headerPath) {
  std::ifstream in(headerPath);
  if (!in) throw Error(ErrorCode::IoError, "cannot open header '" + headerPath.string() + "'");
  json header;
  try {
    header = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("kind") || !header["kind"].is_string())
    throw Error(ErrorCode::MalformedHeader, "header lacks 'kind'");
  const auto shape = read_shape(header);
  const auto kind = header["kind"].get<std::string>();

  auto parse_embedded = [&](const char* key, auto parser) {
    if (!header.contains(key)) throw Error(ErrorCode::MalformedHeader, std::string("header lacks '") + key + "'");
    try {
      return parser(header[key]);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedHeader, std::string("embedded ") + key + " invalid: " + e.what());
    }
  };

  if (kind == "volume") {
    const VolumeSpec spec = parse_embedded("volume", [](const json& j) { return parse_volume(j); });
    if (shape != std::vector<int>{spec.numZ, spec.numY, spec.numX})
      throw Error(ErrorCode::MalformedHeader, "shape disagrees with the embedded volume spec");
    const auto values = read_payload(headerPath, header, spec.size());
    return Volume(spec, values);
  }
  if (kind == "projections") {
    const Geometry g = parse_embedded("geometry", [](const json& j) { return parse_geometry(j); });
    if (shape != std::vector<int>{g.num_views(), g.detector.numRows, g.detector.numCols})
      throw Error(ErrorCode::MalformedHeader, "shape disagrees with the embedded geometry");
    const auto values = read_payload(headerPath, header, g.size());
    return ProjectionSet(g, values);
  }
  throw Error(ErrorCode::MalformedHeader, "unknown kind '" + kind + "'");
}

Volume read_volume(const fs::path& headerPath) {
  auto file = read_array(headerPath);
  if (auto* v = std::get_if<Volume>(&file)) return std::move(*v);
  throw Error(ErrorCode::MalformedHeader, "'" + headerPath.string() + "' is not a volume");
}

ProjectionSet read_projections(const fs::path& headerPath) {
  auto file = read_array(headerPath);
  if (auto* p = std::get_if<ProjectionSet>(&file)) return std::move(*p);
  throw Error(ErrorCode::MalformedHeader, "'" + headerPath.string() + "' is not a projection set");
}

}  // namespace xtomo
