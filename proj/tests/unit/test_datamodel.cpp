#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "helpers.hpp"
#include "xtomo/datamodel.hpp"
#include "xtomo/memory.hpp"

using namespace xtomo;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("xtomo_dm_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool bitwise_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("arrays validate length and finiteness") {
  const VolumeSpec spec = cube(2, 2.0);
  std::vector<float> v(8, 1.0f);
  CHECK(Volume(spec, v).at(1, 1, 1) == 1.0f);
  v.push_back(0.0f);
  CHECK(code_of([&] { Volume(spec, v); }) == ErrorCode::SizeMismatch);
  v.pop_back();
  v[3] = std::numeric_limits<float>::quiet_NaN();
  CHECK(code_of([&] { Volume(spec, v); }) == ErrorCode::NonFiniteData);

  const Geometry g = small_geometry(GeometryKind::Parallel, 2);
  std::vector<float> p(g.size(), 0.0f);
  p[0] = std::numeric_limits<float>::infinity();
  CHECK(code_of([&] { ProjectionSet(g, p); }) == ErrorCode::NonFiniteData);
  p.resize(3);
  CHECK(code_of([&] { ProjectionSet(g, p); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("projection indexing is view, row, col") {
  const Geometry g = small_geometry(GeometryKind::Parallel, 3);
  ProjectionSet y(g);
  y.at(2, 1, 4) = 7.0f;
  const std::size_t flat = (2 * std::size_t(g.detector.numRows) + 1) * std::size_t(g.detector.numCols) + 4;
  CHECK(y.values()[flat] == 7.0f);
  CHECK(y.view(2)[std::size_t(g.detector.numCols) + 4] == 7.0f);
}

TEST_CASE("I/O round trip is bit exact") {
  TempDir dir;
  SUBCASE("volume") {
    VolumeSpec spec = cube(3, 4.5);
    spec.numY = 5;
    spec.offsetZ = -0.125;
    Volume x(spec);
    fill_uniform(x.values(), 1, -1.0f, 1.0f);
    x.values()[0] = -0.0f;
    x.values()[1] = std::numeric_limits<float>::denorm_min();
    const auto path = dir.path / "vol.json";
    write_array(x, path);
    CHECK(fs::exists(dir.path / "vol.raw"));
    CHECK(fs::file_size(dir.path / "vol.raw") == x.size() * 4);
    const Volume back = read_volume(path);
    CHECK(back.spec() == spec);
    CHECK(bitwise_equal(back.values(), x.values()));
  }
  SUBCASE("projections of every geometry kind") {
    for (GeometryKind kind : all_kinds()) {
      Geometry g = small_geometry(kind, 3);
      if (kind != GeometryKind::Modular) g.angles[1] = 1.0 / 3.0;
      ProjectionSet y(g);
      fill_uniform(y.values(), 2);
      const auto path = dir.path / "proj.json";
      write_array(y, path);
      const ProjectionSet back = read_projections(path);
      CHECK(back.geometry() == g);
      CHECK(bitwise_equal(back.values(), y.values()));
    }
  }
  SUBCASE("payload is little-endian f32") {
    Volume x(cube(1, 1.0));
    x.values()[0] = 1.0f;
    write_array(x, dir.path / "one.json");
    std::ifstream in(dir.path / "one.raw", std::ios::binary);
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    CHECK(b[0] == 0x00);
    CHECK(b[1] == 0x00);
    CHECK(b[2] == 0x80);
    CHECK(b[3] == 0x3f);
    const auto header = nlohmann::json::parse(std::ifstream(dir.path / "one.json"));
    CHECK(header["dtype"] == "f32le");
    CHECK(header["shape"] == nlohmann::json::array({1, 1, 1}));
    CHECK(header["raw"] == "one.raw");
    CHECK(header["kind"] == "volume");
  }
  SUBCASE("no temporary files are left behind") {
    write_array(Volume(cube(2, 2.0)), dir.path / "v.json");
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
      CHECK(e.path().extension() != ".tmp");
      ++files;
    }
    CHECK(files == 2);
  }
}

TEST_CASE("I/O rejects malformed input") {
  TempDir dir;
  const auto path = dir.path / "v.json";
  write_array(Volume(cube(2, 2.0)), path);
  const auto good = nlohmann::json::parse(std::ifstream(path));
  auto rewrite = [&](const nlohmann::json& h) { std::ofstream(path) << h.dump(); };

  CHECK(code_of([&] { read_array(dir.path / "missing.json"); }) == ErrorCode::IoError);

  std::ofstream(path) << "{ not json";
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::MalformedHeader);

  auto h = good;
  h["dtype"] = "f64le";
  rewrite(h);
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::MalformedHeader);

  h = good;
  h["shape"] = {2, 2};
  rewrite(h);
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::MalformedHeader);

  h = good;
  h["shape"] = {2, 2, 3};
  rewrite(h);
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::MalformedHeader);

  h = good;
  h["kind"] = "mesh";
  rewrite(h);
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::MalformedHeader);

  rewrite(good);
  CHECK(code_of([&] { read_projections(path); }) == ErrorCode::MalformedHeader);

  fs::resize_file(dir.path / "v.raw", 12);
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::SizeMismatch);

  fs::remove(dir.path / "v.raw");
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::IoError);
}

TEST_CASE("non-finite payloads are rejected on read") {
  TempDir dir;
  const auto path = dir.path / "v.json";
  write_array(Volume(cube(2, 2.0)), path);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::fstream raw(dir.path / "v.raw", std::ios::binary | std::ios::in | std::ios::out);
  raw.seekp(8);
  raw.write(reinterpret_cast<const char*>(&nan), 4);
  raw.close();
  CHECK(code_of([&] { read_array(path); }) == ErrorCode::NonFiniteData);
}

TEST_CASE("angle masks") {
  const AngleMask m = AngleMask::from_json(nlohmann::json::parse("[1, 0, true, false, 1]"));
  CHECK(m.count() == 3);
  CHECK(m.kept_views() == std::vector<int>{0, 2, 4});
  CHECK(AngleMask::range(6, 2, 4).kept_views() == std::vector<int>{2, 3});
  CHECK(AngleMask::all(3).count() == 3);
  CHECK(code_of([] { AngleMask::from_json(nlohmann::json::parse("[0, 0]")); }) == ErrorCode::InvalidValue);
  CHECK(code_of([] { AngleMask::from_json(nlohmann::json::parse("[0, 2]")); }) == ErrorCode::InvalidValue);
  CHECK(code_of([] { AngleMask::from_json(nlohmann::json::parse("{}")); }) == ErrorCode::InvalidValue);
  CHECK(code_of([] { AngleMask::load("/nonexistent/mask.json"); }) == ErrorCode::IoError);
}

TEST_CASE("apply_mask selects views and is idempotent") {
  for (GeometryKind kind : all_kinds()) {
    const Geometry g = small_geometry(kind, 5);
    ProjectionSet y(g);
    fill_uniform(y.values(), 3);
    const AngleMask m = AngleMask::from_json(nlohmann::json::parse("[0, 1, 1, 0, 1]"));
    const ProjectionSet once = apply_mask(y, m);
    CHECK(once.geometry().num_views() == 3);
    CHECK(bitwise_equal(once.view(1), y.view(2)));
    CHECK(bitwise_equal(once.view(2), y.view(4)));
    const ProjectionSet twice = apply_mask(once, AngleMask::all(3));
    CHECK(twice.geometry() == once.geometry());
    CHECK(bitwise_equal(twice.values(), once.values()));
    CHECK(code_of([&] { apply_mask(y, AngleMask::all(4)); }) == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("tracked allocations") {
  const std::size_t before = memory::current_bytes();
  memory::reset_peak();
  {
    Volume x(cube(8, 8.0));
    CHECK(memory::current_bytes() - before == 512 * sizeof(float));
  }
  CHECK(memory::current_bytes() == before);
  CHECK(memory::peak_bytes() - before == 512 * sizeof(float));
}
