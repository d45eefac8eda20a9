#include "robkf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace robkf {

namespace {

constexpr double kRadiusClampLo = 1e-6;
constexpr double kRadiusClampHi = 1.0 - 1e-6;

/// Root of a continuous decreasing f with f(lo) >= 0 >= f(hi).
template <class F>
double solve_decreasing(F f, double lo, double hi) {
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  boost::uintmax_t max_iter = 300;
  const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                         boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (bracket.first + bracket.second);
}

/// Grows `hi` geometrically until f(hi) < 0.
template <class F>
double expand_upper(F f, double hi) {
  for (int i = 0; i < 200 && f(hi) >= 0.0; ++i) hi *= 2.0;
  return hi;
}

bool is_zero(const Matrix& s) { return s.size() == 0 || s.cwiseAbs().maxCoeff() == 0.0; }

/// Monte Carlo sample of U ~ N(0, S) reduced to what the clipping functionals
/// need: the clip norm |U|, and |A U|² for an error map A. Sorted by norm with
/// suffix sums so every functional is O(log n) in b.
class ClipSample {
 public:
  ClipSample(const Matrix& s, const Matrix& weight_root, const Matrix& error_map, const MonteCarloOptions& mc) {
    const int n = std::max(mc.samples, 2);
    RngStream stream(mc.seed, mc.stream);
    const GaussianSampler sampler(Vector::Zero(s.rows()), s);
    struct Item {
      double norm;
      double mapped;
    };
    std::vector<Item> items(static_cast<std::size_t>(n));
    for (auto& item : items) {
      const Vector u = sampler(stream);
      item.norm = weight_root.size() == 0 ? u.norm() : (weight_root * u).norm();
      item.mapped = error_map.size() == 0 ? u.squaredNorm() : (error_map * u).squaredNorm();
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.norm < b.norm; });
    norms_.resize(items.size());
    const std::size_t m = items.size();
    suf_n_.assign(m + 1, 0.0);
    suf_n2_.assign(m + 1, 0.0);
    suf_a_.assign(m + 1, 0.0);
    suf_a_n_.assign(m + 1, 0.0);
    suf_a_n2_.assign(m + 1, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      const double x = items[i].norm, a = items[i].mapped;
      norms_[i] = x;
      suf_n_[i] = suf_n_[i + 1] + x;
      suf_n2_[i] = suf_n2_[i + 1] + x * x;
      suf_a_[i] = suf_a_[i + 1] + a;
      suf_a_n_[i] = suf_a_n_[i + 1] + (x > 0.0 ? a / x : 0.0);
      suf_a_n2_[i] = suf_a_n2_[i + 1] + (x > 0.0 ? a / (x * x) : 0.0);
    }
  }

  double size() const { return static_cast<double>(norms_.size()); }
  double max_norm() const { return norms_.empty() ? 0.0 : norms_.back(); }

  /// mean (|U| - b)_+
  double m1(double b) const {
    const std::size_t k = first_above(b);
    return (suf_n_[k] - (size() - static_cast<double>(k)) * b) / size();
  }
  /// mean (|U| - b)_+^2
  double m2(double b) const {
    const std::size_t k = first_above(b);
    const double cnt = size() - static_cast<double>(k);
    return std::max(0.0, (suf_n2_[k] - 2.0 * b * suf_n_[k] + cnt * b * b) / size());
  }
  /// mean |A (U - H_b(U))|² = mean |AU|² (1 - b/|U|)_+^2
  double mapped_loss(double b) const {
    const std::size_t k = first_above(b);
    return std::max(0.0, (suf_a_[k] - 2.0 * b * suf_a_n_[k] + b * b * suf_a_n2_[k]) / size());
  }

 private:
  std::size_t first_above(double b) const {
    return static_cast<std::size_t>(std::upper_bound(norms_.begin(), norms_.end(), b) - norms_.begin());
  }

  std::vector<double> norms_;
  std::vector<double> suf_n_, suf_n2_, suf_a_, suf_a_n_, suf_a_n2_;
};

void check_radius(double r) {
  if (!(r > 0.0 && r < 1.0)) throw DomainError("radius must lie in (0,1)");
}

}  // namespace

Matrix StepGeometry::s_norm() const {
  if (norm.is_euclidean()) return s_corr;
  const Matrix& root = norm.weight_root();
  return symmetrize(root * s_corr * root);
}

StepGeometry step_geometry(const FilterState& predicted, const ModelSpec& model, Track track, const ClipNorm& norm) {
  const Matrix Z = model.Z(predicted.t);
  const Matrix& sigma = predicted.sigma_pred;
  const Matrix& delta = predicted.innovation_cov;
  const Matrix& gain = predicted.gain;
  const auto p = sigma.rows(), q = delta.rows();

  StepGeometry g;
  g.track = track;
  g.t = predicted.t;
  g.gain = gain;
  g.norm = norm;
  g.s_joint.resize(p + q, p + q);
  g.s_joint.topLeftCorner(p, p) = sigma;
  g.s_joint.topRightCorner(p, q) = sigma * Z.transpose();
  g.s_joint.bottomLeftCorner(q, p) = Z * sigma;
  g.s_joint.bottomRightCorner(q, q) = delta;
  g.trace_cond = std::max(0.0, ((Matrix::Identity(p, p) - gain * Z) * sigma).trace());

  if (track == Track::ao) {
    g.s_corr = symmetrize(gain * delta * gain.transpose());
    g.error_map = Matrix::Identity(p, p);
  } else {
    if (Z.rows() != Z.cols() || !(condition_number(Z) < 1e12))
      throw SingularZError("IO geometry requires an invertible observation matrix");
    const Matrix resid = Matrix::Identity(q, q) - Z * gain;
    g.s_corr = symmetrize(resid * delta * resid.transpose());
    g.error_map = Z.inverse();
  }
  return g;
}

StepGeometry scalar_geometry(double s_corr, double trace_cond) {
  StepGeometry g;
  g.track = Track::ao;
  g.s_corr = Matrix::Constant(1, 1, s_corr);
  g.trace_cond = trace_cond;
  g.error_map = Matrix::Identity(1, 1);
  g.gain = Matrix::Identity(1, 1);
  // ΔX = U + W with W independent of U, Var W = trace_cond
  g.s_joint.resize(2, 2);
  g.s_joint << s_corr + trace_cond, s_corr, s_corr, s_corr;
  return g;
}

ClippedMoments clipped_moments_1d(double variance, double b) {
  if (!(b >= 0.0)) throw DomainError("clipped_moments: b must be >= 0");
  if (variance < 0.0) throw DomainError("clipped_moments: negative variance");
  ClippedMoments m;
  if (variance == 0.0 || std::isinf(b)) return m;
  const double sigma = std::sqrt(variance);
  const double c = b / sigma;
  const double tail = normal_cdf(-c);
  const double dens = normal_pdf(c);
  m.m1 = std::max(0.0, 2.0 * sigma * (dens - c * tail));
  m.m2 = std::max(0.0, variance * ((1.0 + c * c) * 2.0 * tail - 2.0 * c * dens));
  return m;
}

ClippedMoments clipped_moments_mc(const Matrix& s, double b, RngStream& stream, int samples) {
  if (!(b >= 0.0)) throw DomainError("clipped_moments: b must be >= 0");
  if (samples < 2) throw DomainError("clipped_moments: need at least two samples");
  const GaussianSampler sampler(Vector::Zero(s.rows()), s);
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < samples; ++i) {
    const double e = std::max(0.0, sampler(stream).norm() - b);
    const double e2 = e * e;
    s1 += e;
    s2 += e2;
    s4 += e2 * e2;
  }
  const double n = samples;
  ClippedMoments m;
  m.m1 = s1 / n;
  m.m2 = s2 / n;
  m.se1 = std::sqrt(std::max(0.0, s2 / n - m.m1 * m.m1) / (n - 1));
  m.se2 = std::sqrt(std::max(0.0, s4 / n - m.m2 * m.m2) / (n - 1));
  return m;
}

ClippedMoments clipped_moments(const Matrix& s, double b, const MonteCarloOptions& mc) {
  if (s.rows() == 1 && s.cols() == 1) return clipped_moments_1d(s(0, 0), b);
  RngStream stream(mc.seed, mc.stream);
  return clipped_moments_mc(s, b, stream, mc.samples);
}

double solve_radius_equation(const Matrix& s, double r, const MonteCarloOptions& mc) {
  check_radius(r);
  if (is_zero(s)) return 0.0;
  if (s.rows() == 1) {
    const double var = s(0, 0);
    auto f = [&](double b) { return (1.0 - r) * clipped_moments_1d(var, b).m1 - r * b; };
    return solve_decreasing(f, 0.0, expand_upper(f, std::sqrt(var)));
  }
  const ClipSample sample(s, Matrix(), Matrix(), mc);
  auto f = [&](double b) { return (1.0 - r) * sample.m1(b) - r * b; };
  return solve_decreasing(f, 0.0, expand_upper(f, std::sqrt(s.trace())));
}

double calibrate_b_radius(const StepGeometry& geom, double r, const MonteCarloOptions& mc) {
  return solve_radius_equation(geom.s_norm(), r, mc);
}

namespace {

/// E|error_map (U - H_b(U))|² as a function object over b, closed form when
/// everything is scalar.
class MappedLoss {
 public:
  MappedLoss(const StepGeometry& geom, const MonteCarloOptions& mc) {
    if (geom.s_corr.rows() == 1) {
      const double w = geom.norm.is_euclidean() ? 1.0 : geom.norm.weight()(0, 0);
      const double a = geom.error_map(0, 0);
      scale_ = a * a / w;
      variance_ = geom.s_norm()(0, 0);
    } else {
      const Matrix& root = geom.norm.is_euclidean() ? Matrix() : geom.norm.weight_root();
      sample_.emplace(geom.s_corr, root, geom.error_map, mc);
    }
  }

  double operator()(double b) const {
    if (sample_) return sample_->mapped_loss(b);
    return scale_ * clipped_moments_1d(variance_, b).m2;
  }

  double scale_hint() const { return sample_ ? sample_->max_norm() : std::sqrt(variance_); }

 private:
  double scale_ = 1.0;
  double variance_ = 0.0;
  std::optional<ClipSample> sample_;
};

}  // namespace

double efficiency_ratio(const StepGeometry& geom, double b, const MonteCarloOptions& mc) {
  if (geom.trace_cond <= 0.0) return std::isinf(b) ? 1.0 : std::numeric_limits<double>::infinity();
  if (std::isinf(b)) return 1.0;
  return 1.0 + MappedLoss(geom, mc)(b) / geom.trace_cond;
}

double calibrate_b_efficiency(const StepGeometry& geom, double delta, const MonteCarloOptions& mc) {
  if (!(delta > 0.0)) throw DomainError("efficiency loss must be positive");
  if (is_zero(geom.s_corr) || geom.trace_cond <= 0.0) return kNoClipping;
  const MappedLoss loss(geom, mc);
  const double target = delta * geom.trace_cond;
  if (loss(0.0) <= target)
    throw InfeasibleError("efficiency loss " + std::to_string(delta) +
                          " exceeds what any clipping height can produce");
  auto f = [&](double b) { return loss(b) - target; };
  return solve_decreasing(f, 0.0, expand_upper(f, std::max(loss.scale_hint(), 1e-300)));
}

RadiusTerms radius_terms(const StepGeometry& geom, double r, const MonteCarloOptions& mc) {
  RadiusTerms out;
  const Matrix s = geom.s_norm();
  out.b = solve_radius_equation(s, r, mc);
  const double m2 = clipped_moments(s, out.b, mc).m2;
  out.a = geom.trace_cond + m2;
  out.bias = s.trace() - m2 + out.b * out.b;
  return out;
}

double least_favorable_radius(const StepGeometry& geom, double r_l, double r_u, const MonteCarloOptions& mc) {
  if (!(r_l >= 0.0 && r_l < r_u && r_u <= 1.0)) throw DomainError("least_favorable_radius needs 0 <= r_l < r_u <= 1");
  const double lo = std::clamp(r_l, kRadiusClampLo, kRadiusClampHi);
  const double hi = std::clamp(r_u, kRadiusClampLo, kRadiusClampHi);
  if (!(lo < hi)) return lo;
  const RadiusTerms at_lo = radius_terms(geom, lo, mc);
  const RadiusTerms at_hi = radius_terms(geom, hi, mc);
  // g increases in r: A_r is nondecreasing, B_r nonincreasing.
  auto g = [&](double r) {
    const RadiusTerms t = radius_terms(geom, r, mc);
    return t.a / at_lo.a - t.bias / at_hi.bias;
  };
  double a = lo, b = hi;
  if (g(a) >= 0.0) return a;
  if (g(b) <= 0.0) return b;
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    const double mid = 0.5 * (a + b);
    (g(mid) < 0.0 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

ClippingPolicy calibrate_policy(const ModelSpec& model, int horizon, Track track, const Calibration& cal) {
  auto height = [&](const FilterState& predicted) {
    const StepGeometry geom = step_geometry(predicted, model, track, cal.norm);
    double b = cal.criterion == Calibration::Criterion::radius ? calibrate_b_radius(geom, cal.value, cal.mc)
                                                               : calibrate_b_efficiency(geom, cal.value, cal.mc);
    // nothing to clip at this step
    if (!(b > 0.0)) b = kNoClipping;
    return b;
  };
  if (cal.steady_state || horizon < 1) return ClippingPolicy::fixed(height(riccati_limit(model)), cal.norm);

  std::vector<double> heights;
  heights.reserve(static_cast<std::size_t>(horizon));
  FilterState state = init(model);
  for (int t = 1; t <= horizon; ++t) {
    FilterState pred = predict(state, model);
    heights.push_back(height(pred));
    state = pred;
    state.sigma_filt = filtered_covariance(pred, model);
    state.x_filt = Vector::Zero(model.p);
  }
  return ClippingPolicy::per_step(std::move(heights), cal.norm);
}

}  // namespace robkf
