#pragma once

#include <functional>
#include <span>
#include <vector>

#include "robkf/ssm.hpp"

namespace robkf {

/// Snapshot of the filter at time t.
///
/// After `predict` the prediction fields, `gain` (M⁰_t = Σ_{t|t-1} Z_tᵀ Δ_t⁻¹)
/// and `innovation_cov` (Δ_t) are populated; a corrector then fills
/// `innovation`, `x_filt` and `sigma_filt`. The covariance recursions are the
/// classical ones for every corrector, so `sigma_*`, `gain` and
/// `innovation_cov` never depend on the observations.
struct FilterState {
  int t = 0;
  Vector x_pred;
  Vector x_filt;
  Matrix sigma_pred;
  Matrix sigma_filt;
  Matrix gain;
  Matrix innovation_cov;
  Vector innovation;
};

/// Maps a predicted state and the observation at the same time to a corrected
/// state.
using Corrector = std::function<FilterState(const FilterState& predicted, const Vector& y)>;

FilterState init(const ModelSpec& model);

/// Advances t and applies the prediction step; throws NotSpdError when Δ_t is
/// not positive definite.
FilterState predict(const FilterState& state, const ModelSpec& model);

/// Y_t - Z_t x_pred
Vector innovation(const FilterState& predicted, const Vector& y, const ModelSpec& model);

/// Classical covariance update Σ_{t|t} = (I - M⁰ Z) Σ_{t|t-1}, symmetrized.
Matrix filtered_covariance(const FilterState& predicted, const ModelSpec& model);

FilterState correct_classic(const FilterState& predicted, const Vector& y, const ModelSpec& model);

Corrector classic_corrector(const ModelSpec& model);

/// init, then predict + `corrector` for each observation. Returns the states
/// for t = 1..T.
std::vector<FilterState> filter_run(const ModelSpec& model, std::span<const Vector> observations,
                                    const Corrector& corrector);

/// Iterates the (data independent) covariance recursion until Σ_{t|t-1}
/// changes by less than `tol` in max norm, returning the predicted state at
/// the last step. Used for steady-state calibration shortcuts.
FilterState riccati_limit(const ModelSpec& model, double tol = 1e-13, int max_steps = 100000);

}  // namespace robkf
