#include "robkf/robust.hpp"

#include <cmath>
#include <string>

namespace robkf {

ClipNorm ClipNorm::mahalanobis(Matrix weight) {
  if (!is_pd(weight)) throw NotSpdError("Mahalanobis clipping weight must be SPD");
  ClipNorm n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(weight));
  n.weight_root_ = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  n.weight_ = std::move(weight);
  return n;
}

double ClipNorm::operator()(const Vector& v) const {
  if (is_euclidean()) return v.norm();
  if (weight_.rows() != v.size()) throw NonConformalError("clip norm weight does not match vector dimension");
  return std::sqrt(std::max(0.0, v.dot(weight_ * v)));
}

ClippingPolicy ClippingPolicy::fixed(double b, ClipNorm norm) {
  if (!(b > 0.0)) throw DomainError("clipping height must be positive");
  ClippingPolicy p;
  p.constant_ = b;
  p.norm_ = std::move(norm);
  return p;
}

ClippingPolicy ClippingPolicy::per_step(std::vector<double> heights, ClipNorm norm) {
  if (heights.empty()) throw DomainError("per-step clipping policy needs at least one height");
  for (double b : heights)
    if (!(b > 0.0)) throw DomainError("clipping height must be positive");
  ClippingPolicy p;
  p.heights_ = std::move(heights);
  p.norm_ = std::move(norm);
  return p;
}

double ClippingPolicy::height(int t) const {
  if (heights_.empty()) return constant_;
  const auto idx = static_cast<std::size_t>(std::max(t, 1) - 1);
  return idx < heights_.size() ? heights_[idx] : heights_.back();
}

Vector huberize(const Vector& v, double b, const ClipNorm& norm) {
  if (!(b > 0.0)) throw DomainError("huberize: clipping height must be positive");
  if (std::isinf(b)) return v;
  const double n = norm(v);
  if (n <= b) return v;
  return v * (b / n);
}

FilterState correct_rls_ao(const FilterState& predicted, const Vector& y, const ClippingPolicy& policy,
                           const ModelSpec& model) {
  FilterState s = predicted;
  s.innovation = innovation(predicted, y, model);
  s.x_filt = s.x_pred + huberize(s.gain * s.innovation, policy.height(s.t), policy.norm());
  s.sigma_filt = filtered_covariance(predicted, model);
  return s;
}

FilterState correct_rls_io(const FilterState& predicted, const Vector& y, const ClippingPolicy& policy,
                           const ModelSpec& model) {
  const Matrix Z = model.Z(predicted.t);
  if (Z.rows() != Z.cols())
    throw SingularZError("rLS.IO requires a square observation matrix (t=" + std::to_string(predicted.t) + ")");
  if (!(condition_number(Z) < 1e12))
    throw SingularZError("rLS.IO requires an invertible observation matrix (t=" + std::to_string(predicted.t) + ")");
  FilterState s = predicted;
  s.innovation = innovation(predicted, y, model);
  const auto q = Z.rows();
  const Vector residual = (Matrix::Identity(q, q) - Z * s.gain) * s.innovation;
  const Vector step = s.innovation - huberize(residual, policy.height(s.t), policy.norm());
  s.x_filt = s.x_pred + Z.partialPivLu().solve(step);
  s.sigma_filt = filtered_covariance(predicted, model);
  return s;
}

Corrector rls_ao_corrector(const ModelSpec& model, ClippingPolicy policy) {
  return [&model, policy = std::move(policy)](const FilterState& predicted, const Vector& y) {
    return correct_rls_ao(predicted, y, policy, model);
  };
}

Corrector rls_io_corrector(const ModelSpec& model, ClippingPolicy policy) {
  return [&model, policy = std::move(policy)](const FilterState& predicted, const Vector& y) {
    return correct_rls_io(predicted, y, policy, model);
  };
}

}  // namespace robkf
