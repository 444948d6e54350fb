#include <cmath>
#include <cstring>

#include "helpers.hpp"
#include "xtomo/datamodel.hpp"
#include "xtomo/metrics.hpp"
#include "xtomo/phantom.hpp"
#include "xtomo/recon.hpp"

using namespace xtomo;
using namespace testutil;

namespace {

// Solves the normal equations of the dense system by Gaussian elimination.
std::vector<double> dense_least_squares(const ProjectorPair& P, std::span<const float> y) {
  const std::size_t n = P.volume_spec().size();
  std::vector<std::vector<double>> cols;
  Volume e(P.volume_spec());
  ProjectionSet col(P.geometry());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(e.values().begin(), e.values().end(), 0.0f);
    e.values()[i] = 1.0f;
    P.forward(e.values(), col.values());
    cols.emplace_back(col.values().begin(), col.values().end());
  }
  std::vector<double> a(n * (n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t p = 0; p < y.size(); ++p) s += cols[r][p] * cols[c][p];
      a[r * (n + 1) + c] = s;
    }
    double s = 0.0;
    for (std::size_t p = 0; p < y.size(); ++p) s += cols[r][p] * y[p];
    a[r * (n + 1) + n] = s;
  }
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < n; ++r)
      if (std::abs(a[r * (n + 1) + p]) > std::abs(a[best * (n + 1) + p])) best = r;
    for (std::size_t c = 0; c <= n; ++c) std::swap(a[p * (n + 1) + c], a[best * (n + 1) + c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == p) continue;
      const double f = a[r * (n + 1) + p] / a[p * (n + 1) + p];
      for (std::size_t c = p; c <= n; ++c) a[r * (n + 1) + c] -= f * a[p * (n + 1) + c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = a[r * (n + 1) + n] / a[r * (n + 1) + r];
  return x;
}

}  // namespace

TEST_CASE("ramp filter: impulse response is the linear Ram-Lak kernel") {
  const int cols = 9;
  const double tau = 0.5;
  std::vector<float> row(cols, 0.0f);
  row[0] = 1.0f;
  ramp_filter_rows(row, 1, cols, tau);
  CHECK(row[0] == doctest::Approx(1.0 / (4.0 * tau)));
  for (int n = 1; n < cols; ++n) {
    const double expected = n % 2 == 0 ? 0.0 : -1.0 / (n * n * kPi * kPi * tau);
    CHECK(row[std::size_t(n)] == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("ramp filter: frequency response is |f|") {
  const int cols = 4096;
  const double tau = 0.8;
  for (double cyclesPerSample : {0.05, 0.13, 0.31}) {
    const double f = cyclesPerSample / tau;
    std::vector<float> row(cols);
    for (int n = 0; n < cols; ++n) row[std::size_t(n)] = float(std::cos(2.0 * kPi * f * n * tau));
    ramp_filter_rows(row, 1, cols, tau);
    for (int n = cols / 2 - 5; n < cols / 2 + 5; ++n)
      CHECK(row[std::size_t(n)] == doctest::Approx(f * std::cos(2.0 * kPi * f * n * tau)).epsilon(0.01).scale(f));
  }
}

TEST_CASE("ramp filter: rows are filtered independently") {
  std::vector<float> two(20, 0.0f);
  two[3] = 1.0f;
  std::vector<float> one(two.begin(), two.begin() + 10);
  ramp_filter_rows(two, 2, 10, 1.0);
  ramp_filter_rows(one, 1, 10, 1.0);
  for (int i = 0; i < 10; ++i) {
    CHECK(two[std::size_t(i)] == one[std::size_t(i)]);
    CHECK(two[std::size_t(10 + i)] == 0.0f);
  }
  CHECK(code_of([&] { ramp_filter_rows(two, 3, 10, 1.0); }) == ErrorCode::SpecMismatch);
}

TEST_CASE("FBP recovers a centered sphere slice") {
  VolumeSpec vol;
  vol.numX = vol.numY = 64;
  vol.numZ = 1;
  EllipsoidPhantom ph;
  ph.ellipsoids.push_back({{0.0, 0.0, 0.0}, {20.0, 20.0, 1e4}, 0.0, 0.03});
  const Geometry g = parallel(120, detector(1, 80, 1.0));
  const ProjectionSet y = analytic_project(ph, g);
  for (auto m : {ProjectorModel::Siddon, ProjectorModel::SF}) {
    const Volume x = fbp_parallel(y, vol, ProjectorPair(m, g, vol));
    CHECK(x.at(32, 32, 0) == doctest::Approx(0.03).epsilon(0.03));
    CHECK(x.at(20, 40, 0) == doctest::Approx(0.03).epsilon(0.03));
    CHECK(std::abs(x.at(2, 2, 0)) < 0.003);
  }
}

TEST_CASE("FBP argument checks") {
  const VolumeSpec vol = cube(4, 8.0);
  const Geometry gc = small_geometry(GeometryKind::ConeFlat);
  CHECK(code_of([&] { fbp_parallel(ProjectionSet(gc), vol, ProjectorPair(ProjectorModel::Siddon, gc, vol)); }) ==
        ErrorCode::Unsupported);
  const Geometry gp = small_geometry(GeometryKind::Parallel);
  CHECK(code_of([&] { fbp_parallel(ProjectionSet(gp), cube(5, 8.0), ProjectorPair(ProjectorModel::Siddon, gp, vol)); }) ==
        ErrorCode::SpecMismatch);
}

TEST_CASE("gradient descent converges to the dense least-squares solution") {
  VolumeSpec vol;
  vol.numX = vol.numY = 4;
  vol.numZ = 1;
  const Geometry g = parallel(12, detector(1, 8, 0.6));
  const ProjectorPair P(ProjectorModel::SF, g, vol);
  ProjectionSet y(g);
  fill_uniform(y.values(), 21);
  const std::vector<double> exact = dense_least_squares(P, y.values());

  LsConfig cfg;
  cfg.maxIters = 20000;
  cfg.tol = 1e-7;
  const LsResult r = reconstruct_ls(y, P, cfg);
  CHECK(r.iterations < cfg.maxIters);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (r.x.values()[i] - exact[i]) * (r.x.values()[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  CHECK(std::sqrt(num / den) < 1e-3);
}

TEST_CASE("gradient descent bookkeeping") {
  const VolumeSpec vol = cube(4, 8.0);
  const Geometry g = small_geometry(GeometryKind::Parallel, 6);
  const ProjectorPair P(ProjectorModel::Siddon, g, vol);
  Volume truth(vol);
  fill_uniform(truth.values(), 22);
  const ProjectionSet y = P.forward(truth);

  SUBCASE("cost trace starts at the initial cost and decreases") {
    LsConfig cfg;
    cfg.maxIters = 30;
    cfg.tol = 0.0;
    const LsResult r = reconstruct_ls(y, P, cfg);
    REQUIRE(r.costTrace.size() == 31);
    CHECK(r.costTrace[0] == doctest::Approx(0.5 * std::pow(metrics::norm2(y.values()), 2)));
    for (std::size_t i = 1; i < r.costTrace.size(); ++i) CHECK(r.costTrace[i] <= r.costTrace[i - 1]);
    CHECK(r.step > 0.0);
    CHECK(r.iterations == 30);
  }
  SUBCASE("starting at the solution stops immediately") {
    LsConfig cfg;
    cfg.tol = 1e-3;
    const LsResult r = reconstruct_ls(y, P, cfg, truth);
    CHECK(r.iterations == 0);
    CHECK(r.costTrace.size() == 1);
  }
  SUBCASE("nonnegativity") {
    ProjectionSet neg = y;
    for (auto& v : neg.values()) v = -v;
    LsConfig cfg;
    cfg.maxIters = 20;
    cfg.nonneg = true;
    const LsResult r = reconstruct_ls(neg, P, cfg);
    for (float v : r.x.values()) CHECK(v >= 0.0f);
  }
  SUBCASE("a step far beyond 2/sigma^2 diverges") {
    LsConfig cfg;
    cfg.maxIters = 100;
    cfg.step = 100.0 / std::pow(estimate_opnorm(P, 50, 0), 2);
    CHECK(code_of([&] { reconstruct_ls(y, P, cfg); }) == ErrorCode::DivergenceDetected);
  }
  SUBCASE("invalid settings") {
    LsConfig cfg;
    cfg.maxIters = 0;
    CHECK(code_of([&] { reconstruct_ls(y, P, cfg); }) == ErrorCode::InvalidValue);
    cfg = LsConfig{};
    cfg.step = -1.0;
    CHECK(code_of([&] { reconstruct_ls(y, P, cfg); }) == ErrorCode::InvalidValue);
    CHECK(code_of([&] { reconstruct_ls(y, P, LsConfig{}, Volume(cube(3, 8.0))); }) == ErrorCode::SpecMismatch);
  }
}

TEST_CASE("refinement and sinogram completion") {
  const VolumeSpec vol = cube(6, 12.0);
  const Geometry g = parallel(8, detector(6, 9, 2.0));
  const ProjectorPair P(ProjectorModel::Siddon, g, vol);
  Volume truth(vol);
  fill_uniform(truth.values(), 23);
  const ProjectionSet y = P.forward(truth);
  const AngleMask mask = AngleMask::range(8, 0, 3);
  const ProjectionSet yMasked = apply_mask(y, mask);

  LsConfig cfg;
  cfg.maxIters = 40;
  cfg.tol = 0.0;
  const Volume x0(vol);
  const LsResult refined = refine_data_consistency(x0, yMasked, mask, P, cfg);
  const LsResult direct = reconstruct_ls(yMasked, P.restricted(mask), cfg, x0);
  CHECK(std::memcmp(refined.x.values().data(), direct.x.values().data(), vol.size() * 4) == 0);
  CHECK(refined.costTrace.back() < 0.01 * refined.costTrace.front());

  const ProjectionSet completed = complete_sinogram(refined.x, y, mask, P);
  const ProjectionSet predicted = P.forward(refined.x);
  for (int v = 0; v < 8; ++v) {
    const auto want = mask.keep[std::size_t(v)] ? y.view(v) : predicted.view(v);
    CHECK(std::memcmp(completed.view(v).data(), want.data(), want.size() * 4) == 0);
  }

  CHECK(code_of([&] { refine_data_consistency(x0, y, mask, P, cfg); }) == ErrorCode::SpecMismatch);
  CHECK(code_of([&] { complete_sinogram(refined.x, y, AngleMask::all(7), P); }) == ErrorCode::LengthMismatch);
}
