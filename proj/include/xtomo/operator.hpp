#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xtomo/datamodel.hpp"
#include "xtomo/geometry.hpp"
#include "xtomo/parallel.hpp"

namespace xtomo {

enum class ProjectorModel { Siddon, SF };

const char* to_string(ProjectorModel model);
ProjectorModel parse_model(std::string_view name);

/// A linear operator A for one (geometry, volume grid) together with its
/// exact transpose. Immutable after construction.
class ProjectorPair {
 public:
  ProjectorPair(ProjectorModel model, Geometry geometry, VolumeSpec volume,
                Execution execution = Execution::Parallel);

  ProjectorModel model() const { return model_; }
  const Geometry& geometry() const { return geometry_; }
  const VolumeSpec& volume_spec() const { return volume_; }
  Execution execution() const { return execution_; }

  /// y = A x
  void forward(std::span<const float> x, std::span<float> y) const;
  /// x = A^T y
  void adjoint(std::span<const float> y, std::span<float> x) const;

  ProjectionSet forward(const Volume& x) const;
  Volume adjoint(const ProjectionSet& y) const;

  /// The same operator restricted to the kept views.
  ProjectorPair restricted(const AngleMask& mask) const;

 private:
  ProjectorModel model_;
  Geometry geometry_;
  VolumeSpec volume_;
  Execution execution_;
};

/// B arrays sharing one spec, stored back to back in one contiguous buffer.
template <class Spec>
class Batch {
 public:
  Batch(const Spec& spec, int count) : spec_(spec), count_(count) {
    if (count < 1) throw_invalid_count();
    values_.assign(spec_.size() * std::size_t(count), 0.0f);
  }

  const Spec& spec() const { return spec_; }
  int count() const { return count_; }
  std::size_t element_size() const { return spec_.size(); }
  std::span<float> element(int b) { return std::span<float>(values_).subspan(std::size_t(b) * element_size(), element_size()); }
  std::span<const float> element(int b) const {
    return std::span<const float>(values_).subspan(std::size_t(b) * element_size(), element_size());
  }
  std::span<float> values() { return values_; }
  std::span<const float> values() const { return values_; }

 private:
  [[noreturn]] static void throw_invalid_count();

  Spec spec_;
  int count_;
  FloatBuffer values_;
};

using VolumeBatch = Batch<VolumeSpec>;
using ProjectionBatch = Batch<Geometry>;

/// Element-wise forward projection; elements are processed one after another.
ProjectionBatch forward(const ProjectorPair& P, const VolumeBatch& xb);
VolumeBatch adjoint(const ProjectorPair& P, const ProjectionBatch& yb);

/// Backward-pass contract for a host autodiff framework. A is linear, so the
/// VJP of the forward map is A^T applied to the cotangent (independent of x)
/// and the VJP of the adjoint map is A applied to the cotangent.
Volume vjp_forward(const ProjectorPair& P, const Volume& x, const ProjectionSet& cotangent);
ProjectionSet vjp_adjoint(const ProjectorPair& P, const ProjectionSet& y, const Volume& cotangent);

struct AdjointReport {
  double maxRelErr = 0.0;
  std::vector<double> relErrs;
  std::uint64_t seed = 0;
  std::string generator;
};

/// Relative inner-product mismatch |<Ax,y> - <x,A^T y>| / (|Ax| |y|) over
/// `trials` pairs of standard-normal draws.
AdjointReport adjoint_check(const ProjectorPair& P, int trials, std::uint64_t seed);

/// Largest singular value of A by power iteration on A^T A.
double estimate_opnorm(const ProjectorPair& P, int iters, std::uint64_t seed);

/// Name of the pseudo-random generator used by adjoint_check/estimate_opnorm.
inline constexpr const char* kGeneratorName = "std::mt19937_64 + std::normal_distribution<double>";

}  // namespace xtomo
