#include "robkf/kalman.hpp"

#include <string>

namespace robkf {

FilterState init(const ModelSpec& model) {
  FilterState s;
  s.t = 0;
  s.x_filt = model.a0;
  s.sigma_filt = model.Q0;
  s.x_pred = model.a0;
  s.sigma_pred = model.Q0;
  return s;
}

FilterState predict(const FilterState& state, const ModelSpec& model) {
  FilterState s;
  s.t = state.t + 1;
  const Matrix F = model.F(s.t);
  const Matrix Z = model.Z(s.t);
  s.x_pred = F * state.x_filt;
  s.sigma_pred = symmetrize(F * state.sigma_filt * F.transpose() + model.Q(s.t));
  s.innovation_cov = symmetrize(Z * s.sigma_pred * Z.transpose() + model.V(s.t));
  // M⁰ = Σ Zᵀ Δ⁻¹  <=>  M⁰ᵀ = Δ⁻¹ Z Σ
  try {
    s.gain = solve_spd(s.innovation_cov, Z * s.sigma_pred).transpose();
  } catch (const NotSpdError&) {
    throw NotSpdError("predict: innovation covariance not PD at t=" + std::to_string(s.t));
  }
  return s;
}

Vector innovation(const FilterState& predicted, const Vector& y, const ModelSpec& model) {
  const Matrix Z = model.Z(predicted.t);
  if (y.size() != Z.rows())
    throw NonConformalError("observation has dimension " + std::to_string(y.size()) + ", expected " +
                            std::to_string(Z.rows()));
  return y - Z * predicted.x_pred;
}

Matrix filtered_covariance(const FilterState& predicted, const ModelSpec& model) {
  const Matrix Z = model.Z(predicted.t);
  const auto p = predicted.sigma_pred.rows();
  return symmetrize((Matrix::Identity(p, p) - predicted.gain * Z) * predicted.sigma_pred);
}

FilterState correct_classic(const FilterState& predicted, const Vector& y, const ModelSpec& model) {
  FilterState s = predicted;
  s.innovation = innovation(predicted, y, model);
  s.x_filt = s.x_pred + s.gain * s.innovation;
  s.sigma_filt = filtered_covariance(predicted, model);
  return s;
}

Corrector classic_corrector(const ModelSpec& model) {
  return [&model](const FilterState& predicted, const Vector& y) { return correct_classic(predicted, y, model); };
}

std::vector<FilterState> filter_run(const ModelSpec& model, std::span<const Vector> observations,
                                    const Corrector& corrector) {
  std::vector<FilterState> out;
  out.reserve(observations.size());
  FilterState state = init(model);
  for (const Vector& y : observations) {
    state = corrector(predict(state, model), y);
    out.push_back(state);
  }
  return out;
}

FilterState riccati_limit(const ModelSpec& model, double tol, int max_steps) {
  FilterState state = init(model);
  FilterState pred = predict(state, model);
  for (int k = 1; k < max_steps; ++k) {
    state = pred;
    state.sigma_filt = filtered_covariance(pred, model);
    state.x_filt = Vector::Zero(model.p);
    FilterState next = predict(state, model);
    const double change = (next.sigma_pred - pred.sigma_pred).cwiseAbs().maxCoeff();
    pred = next;
    if (change < tol) break;
  }
  return pred;
}

}  // namespace robkf
