#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "xtomo/cli.hpp"
#include "xtomo/datamodel.hpp"
#include "xtomo/phantom.hpp"
#include "xtomo/recon.hpp"

using namespace xtomo;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  std::string config;

  Workspace() {
    dir = fs::temp_directory_path() / ("xtomo_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    config = file("config.json");
    std::ofstream(config) << R"({
      "geometry": "parallel", "numAngles": 6, "angularRange": 180,
      "numRows": 8, "numCols": 12, "pixelHeight": 2.0, "pixelWidth": 2.0,
      "numX": 8, "numY": 8, "numZ": 8, "voxelWidth": 2.0, "voxelHeight": 2.0
    })";
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string file(const std::string& name) const { return (dir / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "xtomo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

bool same_bytes(const std::string& a, const std::string& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  return !sa.empty() && sa == sb;
}

}  // namespace

TEST_CASE("cli: phantom, project and backproject pipeline") {
  Workspace ws;
  const auto vol = ws.file("vol.json");
  auto r = run({"phantom", "--config", ws.config, "--out", vol, "--supersample", "2", "--analytic", ws.file("exact.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find(vol) != std::string::npos);
  CHECK(fs::exists(ws.file("exact.raw")));

  const auto sino = ws.file("sino.json");
  r = run({"project", "--config", ws.config, "--model", "sf", "--in", vol, "--out", sino});
  REQUIRE(r.code == 0);
  CHECK(r.out == sino + "\n");

  const CtConfig cfg = load_config(ws.config);
  const ProjectionSet expected = ProjectorPair(ProjectorModel::SF, cfg.geometry, cfg.volume).forward(read_volume(vol));
  const ProjectionSet got = read_projections(sino);
  CHECK(std::memcmp(got.values().data(), expected.values().data(), got.size() * 4) == 0);

  REQUIRE(run({"backproject", "--config", ws.config, "--in", sino, "--out", ws.file("bp.json")}).code == 0);
  CHECK(read_volume(ws.file("bp.json")).spec() == cfg.volume);
  REQUIRE(run({"fbp", "--config", ws.config, "--in", sino, "--out", ws.file("fbp.json")}).code == 0);

  SUBCASE("identical invocations give identical files") {
    REQUIRE(run({"project", "--config", ws.config, "--model", "sf", "--in", vol, "--out", ws.file("again.json"), "--threads", "1"}).code == 0);
    CHECK(same_bytes(ws.file("again.raw"), ws.file("sino.raw")));
  }
}

TEST_CASE("cli: iterative verbs") {
  Workspace ws;
  const auto vol = ws.file("vol.json");
  const auto sino = ws.file("sino.json");
  REQUIRE(run({"phantom", "--config", ws.config, "--out", vol, "--supersample", "1"}).code == 0);
  REQUIRE(run({"project", "--config", ws.config, "--in", vol, "--out", sino}).code == 0);

  auto r = run({"recon-ls", "--config", ws.config, "--in", sino, "--out", ws.file("ls.json"), "--iters", "5", "--trace",
                ws.file("trace.csv"), "--nonneg"});
  REQUIRE(r.code == 0);
  std::ifstream trace(ws.file("trace.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(trace, line)) ++lines;
  CHECK(lines == 1 + 6);

  std::ofstream(ws.file("mask.json")) << "[1, 1, 0, 0, 0, 1]";
  r = run({"refine", "--config", ws.config, "--in", sino, "--init", ws.file("ls.json"), "--mask", ws.file("mask.json"),
           "--out", ws.file("refined.json"), "--iters", "3"});
  CHECK(r.code == 0);
  r = run({"complete", "--config", ws.config, "--in", sino, "--init", ws.file("refined.json"), "--mask",
           ws.file("mask.json"), "--out", ws.file("completed.json")});
  CHECK(r.code == 0);
  CHECK(read_projections(ws.file("completed.json")).geometry().num_views() == 6);
}

TEST_CASE("cli: adjoint-check and bench") {
  Workspace ws;
  auto r = run({"adjoint-check", "--config", ws.config, "--model", "siddon", "--trials", "3", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("maxRelErr: ") != std::string::npos);
  CHECK(r.out.find("seed: 1") != std::string::npos);

  r = run({"bench", "--config", ws.config, "--model", "sf", "--repeat", "2"});
  CHECK(r.code == 0);
  for (const char* key : {"forward_median_s: ", "backproject_median_s: ", "volume_bytes: 2048", "projection_bytes: 2304",
                          "peak_ratio: "})
    CHECK(r.out.find(key) != std::string::npos);
}

TEST_CASE("cli: usage and runtime errors") {
  Workspace ws;
  CHECK(run({}).code == 2);
  CHECK(run({"explode"}).code == 2);
  auto r = run({"project", "--config", ws.config, "--in", ws.config});
  CHECK(r.code == 2);
  CHECK(r.err.find("--out") != std::string::npos);
  CHECK(run({"project", "--config", ws.config, "--model", "joseph", "--in", ws.config, "--out", ws.file("x.json")}).code == 2);
  CHECK(run({"project", "--config", ws.file("missing.json"), "--in", ws.config, "--out", ws.file("x.json")}).code == 2);

  // A config file is not an array header: runtime error, no output written.
  r = run({"project", "--config", ws.config, "--in", ws.config, "--out", ws.file("x.json")});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
  CHECK(!fs::exists(ws.file("x.json")));

  std::ofstream(ws.file("cone.json")) << R"({
    "geometry": "cone", "numAngles": 4, "angularRange": 360, "sod": 50, "sdd": 100,
    "numRows": 8, "numCols": 12, "pixelHeight": 2.0, "pixelWidth": 2.0,
    "numX": 8, "numY": 8, "numZ": 8, "voxelWidth": 2.0, "voxelHeight": 2.0
  })";
  REQUIRE(run({"phantom", "--config", ws.file("cone.json"), "--out", ws.file("v.json"), "--supersample", "1"}).code == 0);
  REQUIRE(run({"project", "--config", ws.file("cone.json"), "--in", ws.file("v.json"), "--out", ws.file("s.json")}).code == 0);
  r = run({"fbp", "--config", ws.file("cone.json"), "--in", ws.file("s.json"), "--out", ws.file("f.json")});
  CHECK(r.code == 1);
  CHECK(r.err.find("parallel") != std::string::npos);

  // Data whose geometry differs from --config.
  r = run({"backproject", "--config", ws.config, "--in", ws.file("s.json"), "--out", ws.file("b.json")});
  CHECK(r.code == 1);
}
