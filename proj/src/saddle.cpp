#include "robkf/saddle.hpp"

#include <cmath>
#include <numbers>

namespace robkf {

SoModel SoModel::gaussian(Vector mean_x, Matrix cov_x, Matrix cov_eps, double radius) {
  const auto d = mean_x.size();
  if (cov_x.rows() != d || cov_x.cols() != d || cov_eps.rows() != d || cov_eps.cols() != d)
    throw NonConformalError("SO model: X and ε must share one dimension");
  if (!is_psd(cov_x) || !is_psd(cov_eps)) throw NotSpdError("SO model: covariances must be PSD");
  if (!(radius >= 0.0 && radius < 1.0)) throw DomainError("SO model: radius must lie in [0,1)");
  SoModel m;
  m.mean_x = std::move(mean_x);
  m.cov_x = std::move(cov_x);
  m.cov_eps = std::move(cov_eps);
  m.radius = radius;
  // Cov(X, Y) = Var X
  m.gain = m.cov_x * m.cov_y().completeOrthogonalDecomposition().pseudoInverse();
  return m;
}

Matrix SoModel::cov_d() const { return symmetrize(gain * cov_y() * gain.transpose()); }

Matrix SoModel::posterior_cov() const { return symmetrize(cov_x - cov_d()); }

Vector d_value(const SoModel& m, const Vector& y) { return m.gain * (y - m.mean_y()); }

Vector f0_apply(const SoModel& m, const Vector& y) {
  const Vector d = d_value(m, y);
  const double n = d.norm();
  if (std::isinf(m.rho) || n <= m.rho) return m.mean_x + d;
  return m.mean_x + d * (m.rho / n);
}

double rho_solve(const SoModel& m, const MonteCarloOptions& mc) {
  if (m.radius == 0.0) return kNoClipping;
  const Matrix s = m.cov_d();
  if (s.cwiseAbs().maxCoeff() == 0.0) throw DegenerateGeometryError("rho_solve: D(y) vanishes identically");
  // E(|D|/ρ - 1)_+ = r/(1-r)  <=>  (1-r) E(|D| - ρ)_+ = r ρ
  return solve_radius_equation(s, m.radius, mc);
}

SoModel solve_rho(SoModel m, const MonteCarloOptions& mc) {
  m.rho = rho_solve(m, mc);
  return m;
}

double least_favorable_density_ratio(const SoModel& m, const Vector& y) {
  const double excess = d_value(m, y).norm() / m.rho - 1.0;
  return excess > 0.0 ? (1.0 - m.radius) / m.radius * excess : 0.0;
}

namespace {

void require_solved(const SoModel& m) {
  if (!(m.radius > 0.0) || std::isinf(m.rho) || !(m.rho > 0.0))
    throw DomainError("least favorable contamination needs 0 < r < 1 and a solved rho");
}

/// sup_{u >= 0} (s u/ρ - 1)_+ exp(-a u²)
double radial_sup(double s_over_rho, double a) {
  const double k = s_over_rho;
  const double u = (2.0 * a + std::sqrt(4.0 * a * a + 8.0 * a * k * k)) / (4.0 * a * k);
  return std::max(0.0, k * u - 1.0) * std::exp(-a * u * u);
}

}  // namespace

LeastFavorableSample sample_least_favorable(const SoModel& m, RngStream& stream, int n) {
  require_solved(m);
  LeastFavorableSample out;
  if (n <= 0) return out;
  const int d = m.dim();
  // y = E Y + root z, z ~ N(0, I); D(y) = B z
  const GaussianSampler ideal_y(m.mean_y(), m.cov_y());
  const Matrix B = m.gain * ideal_y.root();
  const double s = B.size() ? Eigen::JacobiSVD<Matrix>(B).singularValues()(0) : 0.0;
  if (!(s > 0.0)) throw DegenerateGeometryError("least favorable sampler: D(y) vanishes identically");

  double kappa = 1.5;
  auto envelope = [&](double k) {
    const double a = 0.5 * (1.0 - 1.0 / (k * k));
    return std::pow(k, d) * (1.0 - m.radius) / m.radius * radial_sup(s / m.rho, a);
  };
  double bound = envelope(kappa);

  std::uint64_t proposals = 0;
  out.draws.reserve(static_cast<std::size_t>(n));
  Vector z(d);
  while (static_cast<int>(out.draws.size()) < n) {
    for (int i = 0; i < d; ++i) z[i] = kappa * stream.normal();
    ++proposals;
    const double zz = z.squaredNorm();
    const double excess = (B * z).norm() / m.rho - 1.0;
    if (excess <= 0.0) {
      if (proposals > 200000 && out.draws.empty())
        throw EnvelopeTooTightError("least favorable sampler: no acceptance after 200000 proposals");
      continue;
    }
    // target/proposal density ratio in z coordinates
    const double ratio = (1.0 - m.radius) / m.radius * excess * std::pow(kappa, d) *
                         std::exp(-0.5 * zz * (1.0 - 1.0 / (kappa * kappa)));
    if (ratio > bound) {
      // the radial bound was violated numerically: widen and start over
      kappa *= 2.0;
      bound = envelope(kappa);
      ++out.envelope_doublings;
      out.draws.clear();
      proposals = 0;
      if (out.envelope_doublings > 8) throw EnvelopeTooTightError("least favorable sampler: envelope kept failing");
      continue;
    }
    if (stream.uniform() * bound < ratio) out.draws.push_back(ideal_y.transform(z));
  }
  out.acceptance_rate = static_cast<double>(out.draws.size()) / static_cast<double>(proposals);
  return out;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double var() const { return n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0; }
  double se() const { return n ? std::sqrt(var() / n) : 0.0; }
};

/// Stratified estimate of the mixture MSE (1-r) ideal + r contaminated,
/// from per-draw ideal and contaminated losses.
MseEstimate mixture(const std::string& label, double r, const std::vector<double>& ideal,
                    const std::vector<double>& contaminated) {
  Accumulator a, c;
  for (double x : ideal) a.add(x);
  for (double x : contaminated) c.add(x);
  MseEstimate e;
  e.label = label;
  e.mse = (1.0 - r) * a.mean() + r * c.mean();
  e.se = std::sqrt((1.0 - r) * (1.0 - r) * a.var() / std::max(a.n, 1) + r * r * c.var() / std::max(c.n, 1));
  return e;
}

/// SE of the difference of two stratified estimates built on the same draws.
double paired_se(double r, const std::vector<double>& ideal_a, const std::vector<double>& ideal_b,
                 const std::vector<double>& cont_a, const std::vector<double>& cont_b) {
  Accumulator di, dc;
  for (std::size_t i = 0; i < ideal_a.size(); ++i) di.add(ideal_a[i] - ideal_b[i]);
  for (std::size_t i = 0; i < cont_a.size(); ++i) dc.add(cont_a[i] - cont_b[i]);
  return std::sqrt((1.0 - r) * (1.0 - r) * di.var() / std::max(di.n, 1) + r * r * dc.var() / std::max(dc.n, 1));
}

}  // namespace

MseEstimate point_contamination_mse(const SoModel& m, const Reconstruction& f, const Vector& y_c, int n,
                                    RngStream& stream) {
  const GaussianSampler x_law(m.mean_x, m.cov_x);
  const GaussianSampler eps_law(Vector::Zero(m.dim()), m.cov_eps);
  std::vector<double> ideal, cont;
  const Vector fc = f(y_c);
  for (int i = 0; i < n; ++i) {
    const Vector x = x_law(stream);
    ideal.push_back((x - f(x + eps_law(stream))).squaredNorm());
    // the contaminating observation is independent of X
    cont.push_back((x_law(stream) - fc).squaredNorm());
  }
  return mixture("point", m.radius, ideal, cont);
}

SaddleReport saddle_check(const SoModel& model, int n, RngStream& stream) {
  if (n < 2) throw DomainError("saddle_check: need at least two samples");
  SoModel m = model;
  if (std::isinf(m.rho) && m.radius > 0.0) m = solve_rho(m);
  const double r = m.radius;
  const int d = m.dim();

  SaddleReport rep;
  rep.radius = r;
  rep.rho = m.rho;
  rep.samples = n;
  rep.posterior_trace = m.posterior_cov().trace();

  RngStream ideal_stream = stream.substream(1);
  RngStream lf_stream = stream.substream(2);
  RngStream x2_stream = stream.substream(3);
  RngStream alt_stream = stream.substream(4);

  const GaussianSampler x_law(m.mean_x, m.cov_x);
  const GaussianSampler eps_law(Vector::Zero(d), m.cov_eps);

  // ideal pairs (X, Y)
  std::vector<Vector> xs, ys;
  xs.reserve(n);
  ys.reserve(n);
  for (int i = 0; i < n; ++i) {
    xs.push_back(x_law(ideal_stream));
    ys.push_back(xs.back() + eps_law(ideal_stream));
  }

  // contaminated observations Y^di with an independent X'
  std::vector<Vector> x2(n);
  for (auto& x : x2) x = x_law(x2_stream);
  std::vector<Vector> lf;
  if (r > 0.0) {
    LeastFavorableSample s = sample_least_favorable(m, lf_stream, n);
    rep.acceptance_rate = s.acceptance_rate;
    lf = std::move(s.draws);
  }

  Accumulator norm;
  for (const Vector& y : ys) norm.add(r > 0.0 ? least_favorable_density_ratio(m, y) : 1.0);
  rep.normalization = norm.mean();
  rep.normalization_se = norm.se();

  auto ideal_losses = [&](const Reconstruction& f) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = (xs[i] - f(ys[i])).squaredNorm();
    return out;
  };
  auto cont_losses = [&](const Reconstruction& f, const std::vector<Vector>& contamination) {
    std::vector<double> out(contamination.size());
    for (std::size_t i = 0; i < contamination.size(); ++i) out[i] = (x2[i] - f(contamination[i])).squaredNorm();
    return out;
  };

  const Reconstruction f0 = [&m](const Vector& y) { return f0_apply(m, y); };
  const std::vector<double> f0_ideal = ideal_losses(f0);
  {
    Accumulator a;
    for (double x : f0_ideal) a.add(x);
    rep.ideal_mse = a.mean();
  }
  const std::vector<double> f0_lf = r > 0.0 ? cont_losses(f0, lf) : std::vector<double>{};
  rep.least_favorable = mixture("f0 | least favorable", r, f0_ideal, f0_lf);

  // adversarial alternatives for f0
  rep.alternatives_ok = true;
  if (r > 0.0) {
    const double rho = m.rho;
    for (int k = 0; k <= 10; ++k) {
      Vector dir(d);
      for (int i = 0; i < d; ++i) dir[i] = alt_stream.normal();
      dir /= dir.norm();
      const Vector y_c = m.mean_y() + dir * (rho * std::ldexp(1.0, k));
      const std::vector<Vector> point(static_cast<std::size_t>(n), y_c);
      const std::vector<double> losses = cont_losses(f0, point);
      MseEstimate e = mixture("f0 | point |y-EY|=rho*2^" + std::to_string(k), r, f0_ideal, losses);
      e.diff_se = paired_se(r, f0_ideal, f0_ideal, f0_lf, losses);
      rep.alternatives.push_back(e);
    }
    std::vector<Vector> cauchy(static_cast<std::size_t>(n));
    for (auto& y : cauchy) {
      y = m.mean_y();
      for (int i = 0; i < d; ++i) y[i] += rho * std::tan(std::numbers::pi * (alt_stream.uniform() - 0.5));
    }
    const std::vector<double> losses = cont_losses(f0, cauchy);
    MseEstimate e = mixture("f0 | cauchy", r, f0_ideal, losses);
    e.diff_se = paired_se(r, f0_ideal, f0_ideal, f0_lf, losses);
    rep.alternatives.push_back(e);
    for (const MseEstimate& alt : rep.alternatives)
      if (alt.mse > rep.least_favorable.mse + 3.0 * alt.diff_se) rep.alternatives_ok = false;
  }

  // competing reconstructions under the least favorable mixture
  const Reconstruction classical = [&m](const Vector& y) -> Vector { return m.mean_x + d_value(m, y); };
  const double rho = m.rho;
  const Reconstruction hard = [&m, rho](const Vector& y) -> Vector {
    const Vector dv = d_value(m, y);
    return dv.norm() <= rho ? Vector(m.mean_x + dv) : m.mean_x;
  };
  rep.competitors_ok = true;
  for (const auto& [label, f] : {std::pair<std::string, Reconstruction>{"classical | least favorable", classical},
                                 std::pair<std::string, Reconstruction>{"hard rejection | least favorable", hard}}) {
    const std::vector<double> il = ideal_losses(f);
    const std::vector<double> cl = cont_losses(f, lf);
    MseEstimate e = mixture(label, r, il, cl);
    e.diff_se = paired_se(r, il, f0_ideal, cl, f0_lf);
    if (e.mse < rep.least_favorable.mse - 3.0 * e.diff_se) rep.competitors_ok = false;
    rep.competitors.push_back(e);
  }
  return rep;
}

}  // namespace robkf
