// Serial reference vs OpenMP kernels on the same problem.
//   ./bench_projectors --benchmark_filter=Siddon

#include <benchmark/benchmark.h>

#include <random>

#include "xtomo/operator.hpp"
#include "xtomo/parallel.hpp"

namespace {

using namespace xtomo;

VolumeSpec bench_volume(int n) {
  VolumeSpec v;
  v.numX = v.numY = v.numZ = n;
  v.voxelWidth = v.voxelHeight = 64.0 / n;
  return v;
}

Geometry bench_geometry(GeometryKind kind, int n) {
  Geometry g;
  g.kind = kind;
  for (int i = 0; i < 48; ++i) g.angles.push_back(360.0 * i / 48);
  g.detector = {n, n, 64.0 / n, 64.0 / n, 0.5 * (n - 1), 0.5 * (n - 1)};
  if (kind != GeometryKind::Parallel) {
    g.sod = 150.0;
    g.sdd = 300.0;
    g.detector.pixelWidth *= 2.0;
    g.detector.pixelHeight *= 2.0;
  }
  return g;
}

template <bool Adjoint>
void run(benchmark::State& state, ProjectorModel model, GeometryKind kind, Execution exec) {
  const int n = int(state.range(0));
  const ProjectorPair P(model, bench_geometry(kind, n), bench_volume(n), exec);
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Volume x(P.volume_spec());
  ProjectionSet y(P.geometry());
  for (auto& v : x.values()) v = u(rng);
  for (auto& v : y.values()) v = u(rng);
  for (auto _ : state) {
    if constexpr (Adjoint) P.adjoint(y.values(), x.values());
    else P.forward(x.values(), y.values());
    benchmark::ClobberMemory();
  }
  state.counters["threads"] = exec == Execution::Parallel ? max_threads() : 1;
}

void forward(benchmark::State& state, ProjectorModel model, GeometryKind kind, Execution exec) {
  run<false>(state, model, kind, exec);
}

void adjoint(benchmark::State& state, ProjectorModel model, GeometryKind kind, Execution exec) {
  run<true>(state, model, kind, exec);
}

#define XTOMO_BENCH(name, adjoint_fn, model, kind)                                                               \
  BENCHMARK_CAPTURE(adjoint_fn, name##_reference, model, kind, Execution::Reference)->Arg(32)->Arg(64)       \
      ->Unit(benchmark::kMillisecond);                                                                        \
  BENCHMARK_CAPTURE(adjoint_fn, name##_parallel, model, kind, Execution::Parallel)->Arg(32)->Arg(64)         \
      ->Unit(benchmark::kMillisecond)

XTOMO_BENCH(SiddonForwardParallelBeam, forward, ProjectorModel::Siddon, GeometryKind::Parallel);
XTOMO_BENCH(SiddonAdjointParallelBeam, adjoint, ProjectorModel::Siddon, GeometryKind::Parallel);
XTOMO_BENCH(SiddonForwardCone, forward, ProjectorModel::Siddon, GeometryKind::ConeFlat);
XTOMO_BENCH(SiddonAdjointCone, adjoint, ProjectorModel::Siddon, GeometryKind::ConeFlat);
XTOMO_BENCH(SfForwardParallelBeam, forward, ProjectorModel::SF, GeometryKind::Parallel);
XTOMO_BENCH(SfAdjointParallelBeam, adjoint, ProjectorModel::SF, GeometryKind::Parallel);
XTOMO_BENCH(SfForwardCone, forward, ProjectorModel::SF, GeometryKind::ConeFlat);
XTOMO_BENCH(SfAdjointCone, adjoint, ProjectorModel::SF, GeometryKind::ConeFlat);

}  // namespace

BENCHMARK_MAIN();
