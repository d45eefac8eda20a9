#pragma once

#include <cstdint>
#include <limits>

#include "robkf/robust.hpp"

namespace robkf {

class DegenerateGeometryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InfeasibleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

enum class Track { ao, io };

/// Monte Carlo settings for multivariate moments. The default stream is fixed
/// so repeated calibrations of the same geometry agree exactly.
struct MonteCarloOptions {
  int samples = 100000;
  std::uint64_t seed = 0x6b616c6d616eULL;
  std::uint64_t stream = 0;
};

/// Ideal-model second moments at one time step, under the assumption that
/// E[ΔX | ΔY] is linear.
///
/// `s_corr` is the covariance of the clipped quantity: M⁰ Δ M⁰ᵀ for the AO
/// track, (I - Z M⁰) Δ (I - Z M⁰)ᵀ for the IO track. `error_map` carries the
/// clipping loss u - H_b(u) into state space (identity for AO, Z⁻¹ for IO), so
/// that E|ΔX - correction|² = trace_cond + E|error_map (u - H_b(u))|².
struct StepGeometry {
  Track track = Track::ao;
  int t = 0;
  Matrix s_corr;
  Matrix s_joint;  // Cov(ΔX, ΔY), (p+q) x (p+q)
  double trace_cond = 0.0;
  Matrix gain;
  Matrix error_map;
  ClipNorm norm;

  /// Covariance of the clipped quantity in the coordinates where the clip norm
  /// is Euclidean.
  Matrix s_norm() const;
  /// E|M⁰ΔY|² in the clip norm.
  double correction_second_moment() const { return s_norm().trace(); }
};

StepGeometry step_geometry(const FilterState& predicted, const ModelSpec& model, Track track,
                           const ClipNorm& norm = {});

/// AO geometry of a 1-d model with Var(M⁰ΔY) = s_corr and tr Cov[ΔX|ΔY] = trace_cond.
StepGeometry scalar_geometry(double s_corr, double trace_cond);

struct ClippedMoments {
  double m1 = 0.0;  // E(|U| - b)_+
  double m2 = 0.0;  // E(|U| - b)_+^2
  double se1 = 0.0;
  double se2 = 0.0;
};

/// Moments of (|U| - b)_+ for U ~ N(0, S). 1x1 covariances use the closed
/// forms; larger ones are estimated by Monte Carlo with standard errors.
ClippedMoments clipped_moments(const Matrix& s, double b, const MonteCarloOptions& mc = {});
ClippedMoments clipped_moments_1d(double variance, double b);
ClippedMoments clipped_moments_mc(const Matrix& s, double b, RngStream& stream, int samples);

/// Unique b > 0 with (1 - r) E(|U| - b)_+ = r b for U ~ N(0, S). Returns 0 for
/// S = 0.
double solve_radius_equation(const Matrix& s, double r, const MonteCarloOptions& mc = {});

/// b(r) from the radius criterion; this is the minimax height for SO
/// neighbourhoods of radius r.
double calibrate_b_radius(const StepGeometry& geom, double r, const MonteCarloOptions& mc = {});

/// E|ΔX - correction_b|² / E|ΔX - M⁰ΔY|² for the geometry's track.
double efficiency_ratio(const StepGeometry& geom, double b, const MonteCarloOptions& mc = {});

/// b(δ) from the efficiency-loss criterion: the ideal-model MSE inflates by
/// exactly (1 + δ). Infinite when trace_cond is zero.
double calibrate_b_efficiency(const StepGeometry& geom, double delta, const MonteCarloOptions& mc = {});

struct RadiusTerms {
  double b = 0.0;
  double a = 0.0;  // trace_cond + E(|M⁰ΔY| - b)_+^2
  double bias = 0.0;  // E|M⁰ΔY|² - E(|M⁰ΔY| - b)_+^2 + b²
};

RadiusTerms radius_terms(const StepGeometry& geom, double r, const MonteCarloOptions& mc = {});

/// Bisection for A_{r0}/A_{r_l} = B_{r0}/B_{r_u}; radii are clamped to
/// [1e-6, 1 - 1e-6].
double least_favorable_radius(const StepGeometry& geom, double r_l, double r_u, const MonteCarloOptions& mc = {});

/// How a track's clipping heights are obtained from the model.
struct Calibration {
  enum class Criterion { radius, efficiency };
  Criterion criterion = Criterion::radius;
  double value = 0.1;  // r or δ
  bool steady_state = false;
  ClipNorm norm;
  MonteCarloOptions mc;

  static Calibration radius(double r) {
    Calibration c;
    c.value = r;
    return c;
  }
  static Calibration efficiency(double delta) {
    Calibration c;
    c.criterion = Criterion::efficiency;
    c.value = delta;
    return c;
  }
};

/// Per-step heights b_1..b_T from the data independent covariance recursion,
/// or a single height at the Riccati limit when `steady_state` is set.
ClippingPolicy calibrate_policy(const ModelSpec& model, int horizon, Track track, const Calibration& cal);

}  // namespace robkf
