#include "xtomo/operator.hpp"

#include <cmath>
#include <random>

#include "xtomo/error.hpp"
#include "xtomo/reference.hpp"
#include "xtomo/sf.hpp"
#include "xtomo/siddon.hpp"

namespace xtomo {

const char* to_string(ProjectorModel model) { return model == ProjectorModel::Siddon ? "siddon" : "sf"; }

ProjectorModel parse_model(std::string_view name) {
  if (name == "siddon") return ProjectorModel::Siddon;
  if (name == "sf") return ProjectorModel::SF;
  throw Error(ErrorCode::InvalidValue, "unknown projector model '" + std::string(name) + "'");
}

template <class Spec>
void Batch<Spec>::throw_invalid_count() {
  throw Error(ErrorCode::InvalidValue, "batch count must be >= 1");
}

template class Batch<VolumeSpec>;
template class Batch<Geometry>;

ProjectorPair::ProjectorPair(ProjectorModel model, Geometry geometry, VolumeSpec volume, Execution execution)
    : model_(model), geometry_(std::move(geometry)), volume_(volume), execution_(execution) {
  geometry_.validate();
  volume_.validate();
  if (model_ == ProjectorModel::SF && geometry_.kind == GeometryKind::Modular)
    throw Error(ErrorCode::Unsupported, "separable-footprint projector does not support modular geometry");
}

void ProjectorPair::forward(std::span<const float> x, std::span<float> y) const {
  const bool ref = execution_ == Execution::Reference;
  if (model_ == ProjectorModel::Siddon) {
    ref ? reference::siddon_forward(x, volume_, geometry_, y) : siddon::forward(x, volume_, geometry_, y);
  } else {
    ref ? reference::sf_forward(x, volume_, geometry_, y) : sf::forward(x, volume_, geometry_, y);
  }
}

void ProjectorPair::adjoint(std::span<const float> y, std::span<float> x) const {
  const bool ref = execution_ == Execution::Reference;
  if (model_ == ProjectorModel::Siddon) {
    ref ? reference::siddon_backproject(y, geometry_, volume_, x) : siddon::backproject(y, geometry_, volume_, x);
  } else {
    ref ? reference::sf_backproject(y, geometry_, volume_, x) : sf::backproject(y, geometry_, volume_, x);
  }
}

ProjectionSet ProjectorPair::forward(const Volume& x) const {
  if (!(x.spec() == volume_)) throw Error(ErrorCode::SpecMismatch, "volume spec differs from the projector's");
  ProjectionSet y(geometry_);
  forward(x.values(), y.values());
  return y;
}

Volume ProjectorPair::adjoint(const ProjectionSet& y) const {
  if (!(y.geometry() == geometry_)) throw Error(ErrorCode::SpecMismatch, "geometry differs from the projector's");
  Volume x(volume_);
  adjoint(y.values(), x.values());
  return x;
}

ProjectorPair ProjectorPair::restricted(const AngleMask& mask) const {
  return ProjectorPair(model_, apply_mask(geometry_, mask), volume_, execution_);
}

ProjectionBatch forward(const ProjectorPair& P, const VolumeBatch& xb) {
  if (!(xb.spec() == P.volume_spec())) throw Error(ErrorCode::SpecMismatch, "batch volume spec differs from the projector's");
  ProjectionBatch yb(P.geometry(), xb.count());
  for (int b = 0; b < xb.count(); ++b) P.forward(xb.element(b), yb.element(b));
  return yb;
}

VolumeBatch adjoint(const ProjectorPair& P, const ProjectionBatch& yb) {
  if (!(yb.spec() == P.geometry())) throw Error(ErrorCode::SpecMismatch, "batch geometry differs from the projector's");
  VolumeBatch xb(P.volume_spec(), yb.count());
  for (int b = 0; b < yb.count(); ++b) P.adjoint(yb.element(b), xb.element(b));
  return xb;
}

Volume vjp_forward(const ProjectorPair& P, const Volume& x, const ProjectionSet& cotangent) {
  if (!(x.spec() == P.volume_spec())) throw Error(ErrorCode::SpecMismatch, "primal volume spec differs from the projector's");
  return P.adjoint(cotangent);
}

ProjectionSet vjp_adjoint(const ProjectorPair& P, const ProjectionSet& y, const Volume& cotangent) {
  if (!(y.geometry() == P.geometry())) throw Error(ErrorCode::SpecMismatch, "primal geometry differs from the projector's");
  return P.forward(cotangent);
}

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

void fill_normal(std::span<float> out, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out) v = float(normal(rng));
}

}  // namespace

AdjointReport adjoint_check(const ProjectorPair& P, int trials, std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidValue, "trials must be >= 1");
  AdjointReport report;
  report.seed = seed;
  report.generator = kGeneratorName;
  std::mt19937_64 rng(seed);
  Volume x(P.volume_spec());
  Volume aty(P.volume_spec());
  ProjectionSet y(P.geometry());
  ProjectionSet ax(P.geometry());
  for (int t = 0; t < trials; ++t) {
    fill_normal(x.values(), rng);
    fill_normal(y.values(), rng);
    P.forward(x.values(), ax.values());
    P.adjoint(y.values(), aty.values());
    const double lhs = dot(ax.values(), y.values());
    const double rhs = dot(x.values(), aty.values());
    const double scale = std::sqrt(dot(ax.values(), ax.values()) * dot(y.values(), y.values()));
    const double rel = scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
    report.relErrs.push_back(rel);
    report.maxRelErr = std::max(report.maxRelErr, rel);
  }
  return report;
}

double estimate_opnorm(const ProjectorPair& P, int iters, std::uint64_t seed) {
  if (iters < 1) throw Error(ErrorCode::InvalidValue, "iters must be >= 1");
  std::mt19937_64 rng(seed);
  Volume x(P.volume_spec());
  ProjectionSet y(P.geometry());
  fill_normal(x.values(), rng);
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double xNorm = std::sqrt(dot(x.values(), x.values()));
    if (xNorm == 0.0) return 0.0;
    for (auto& v : x.values()) v = float(double(v) / xNorm);
    P.forward(x.values(), y.values());
    const double yNorm = std::sqrt(dot(y.values(), y.values()));
    const double unitNorm = std::sqrt(dot(x.values(), x.values()));
    sigma = yNorm / unitNorm;
    if (it + 1 < iters) P.adjoint(y.values(), x.values());
  }
  return sigma;
}

}  // namespace xtomo
