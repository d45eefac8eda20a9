#pragma once

#include <functional>
#include <string>
#include <vector>

#include "robkf/calibration.hpp"

namespace robkf {

class EnvelopeTooTightError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// One-step substitutive-outlier model Y = X + ε with Gaussian X and ε,
/// where with probability r the observation is replaced by an independent
/// draw from an arbitrary law.
struct SoModel {
  Vector mean_x;
  Matrix cov_x;
  Matrix cov_eps;
  Matrix gain;  // Cov(X,Y) Var(Y)⁻
  double radius = 0.0;
  double rho = kNoClipping;

  /// Fills `gain` (pseudo-inverse of Var Y); `rho` stays unsolved.
  static SoModel gaussian(Vector mean_x, Matrix cov_x, Matrix cov_eps, double radius);

  int dim() const { return static_cast<int>(mean_x.size()); }
  const Vector& mean_y() const { return mean_x; }
  Matrix cov_y() const { return cov_x + cov_eps; }
  /// Var D(Y) = M⁰ Var(Y) M⁰ᵀ
  Matrix cov_d() const;
  /// Var(X | Y) = Var X - M⁰ Var(Y) M⁰ᵀ
  Matrix posterior_cov() const;
};

/// D(y) = E[X | Y = y] - E X
Vector d_value(const SoModel& m, const Vector& y);

/// f₀(y) = E X + D(y) min{1, ρ/|D(y)|}
Vector f0_apply(const SoModel& m, const Vector& y);

/// ρ with E(|D(Y)|/ρ - 1)_+ = r/(1-r); infinite for r = 0. Throws
/// DegenerateGeometryError when D vanishes identically.
double rho_solve(const SoModel& m, const MonteCarloOptions& mc = {});

/// Copy of `m` with rho solved.
SoModel solve_rho(SoModel m, const MonteCarloOptions& mc = {});

struct LeastFavorableSample {
  std::vector<Vector> draws;
  double acceptance_rate = 0.0;
  int envelope_doublings = 0;
};

/// Rejection sampler for the least favorable contamination
/// P₀(dy) = (1-r)/r (|D(y)|/ρ - 1)_+ P^Y(dy). Proposals are drawn from the
/// ideal Y law widened by a factor κ; the envelope constant is the radial
/// supremum of the density ratio.
LeastFavorableSample sample_least_favorable(const SoModel& m, RngStream& stream, int n);

/// (1-r)/r (|D(y)|/ρ - 1)_+, the density of P₀ relative to the ideal Y law.
double least_favorable_density_ratio(const SoModel& m, const Vector& y);

struct MseEstimate {
  std::string label;
  double mse = 0.0;
  double se = 0.0;
  /// SE of the paired difference against the reference estimate of the report
  double diff_se = 0.0;
};

struct SaddleReport {
  double radius = 0.0;
  double rho = 0.0;
  int samples = 0;
  double normalization = 0.0;
  double normalization_se = 0.0;
  double acceptance_rate = 0.0;
  double ideal_mse = 0.0;            // MSE of f₀ in the ideal model
  double posterior_trace = 0.0;      // tr Var(X|Y), the ideal optimum
  MseEstimate least_favorable;       // f₀ under (1-r) ideal + r P₀
  std::vector<MseEstimate> alternatives;  // f₀ under other contaminations
  std::vector<MseEstimate> competitors;   // other reconstructions under P₀
  bool alternatives_ok = false;  // every alternative <= least_favorable + 3 SE
  bool competitors_ok = false;   // every competitor >= least_favorable - 3 SE
};

using Reconstruction = std::function<Vector(const Vector&)>;

/// MSE of `f` under (1-r) ideal + r δ_{y_c}, by Monte Carlo over n ideal draws.
MseEstimate point_contamination_mse(const SoModel& m, const Reconstruction& f, const Vector& y_c, int n,
                                    RngStream& stream);

/// Monte Carlo demonstration of the saddle point (f₀, P₀). Alternatives are
/// point masses at distance ρ 2^k (k = 0..10) from E Y in sampled directions
/// plus a Cauchy-tailed contamination; competitors are the classical
/// conditional mean and hard rejection at |D| > ρ.
SaddleReport saddle_check(const SoModel& m, int n, RngStream& stream);

}  // namespace robkf
