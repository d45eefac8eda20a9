#pragma once

#include <limits>
#include <vector>

#include "robkf/kalman.hpp"

namespace robkf {

inline constexpr double kNoClipping = std::numeric_limits<double>::infinity();

class SingularZError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Norm used to measure the correction that gets clipped: Euclidean, or
/// Mahalanobis-type sqrt(vᵀ W v) with an SPD weight W.
class ClipNorm {
 public:
  ClipNorm() = default;
  static ClipNorm euclidean() { return {}; }
  static ClipNorm mahalanobis(Matrix weight);

  bool is_euclidean() const { return weight_.size() == 0; }
  const Matrix& weight() const { return weight_; }
  /// Symmetric square root of the weight; identity-equivalent when Euclidean.
  const Matrix& weight_root() const { return weight_root_; }

  double operator()(const Vector& v) const;

 private:
  Matrix weight_;
  Matrix weight_root_;
};

/// Clipping height b_t for each step, either one constant or a per-step
/// sequence (index 0 holds b_1). Heights are positive; infinity disables
/// clipping.
class ClippingPolicy {
 public:
  ClippingPolicy() = default;

  static ClippingPolicy fixed(double b, ClipNorm norm = {});
  static ClippingPolicy per_step(std::vector<double> heights, ClipNorm norm = {});
  static ClippingPolicy unclipped() { return fixed(kNoClipping); }

  /// b_t; a per-step policy repeats its last value past the end of the
  /// sequence.
  double height(int t) const;
  const ClipNorm& norm() const { return norm_; }
  bool is_per_step() const { return !heights_.empty(); }
  const std::vector<double>& heights() const { return heights_; }

 private:
  double constant_ = kNoClipping;
  std::vector<double> heights_;
  ClipNorm norm_;
};

/// H_b(v) = v min{1, b/|v|}, with weight 1 at v = 0. Throws DomainError for
/// b <= 0.
Vector huberize(const Vector& v, double b, const ClipNorm& norm = {});

/// rLS.AO: x_filt = x_pred + H_b(M⁰ ΔY).
FilterState correct_rls_ao(const FilterState& predicted, const Vector& y, const ClippingPolicy& policy,
                           const ModelSpec& model);

/// rLS.IO: x_filt = x_pred + Z⁻¹[ΔY - H_b((I - Z M⁰) ΔY)]. Requires a square
/// Z_t with condition number below 1e12, otherwise throws SingularZError.
FilterState correct_rls_io(const FilterState& predicted, const Vector& y, const ClippingPolicy& policy,
                           const ModelSpec& model);

Corrector rls_ao_corrector(const ModelSpec& model, ClippingPolicy policy);
Corrector rls_io_corrector(const ModelSpec& model, ClippingPolicy policy);

}  // namespace robkf
