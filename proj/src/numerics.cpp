#include "robkf/numerics.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace robkf {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_psd(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  if (!a.allFinite()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  const double trace = std::max(std::abs(a.trace()), std::numeric_limits<double>::min());
  return eig.eigenvalues().minCoeff() >= -tol * trace;
}

bool is_pd(const Matrix& a, double tol) {
  if (!is_psd(a, tol) || a.size() == 0) return false;
  Eigen::LLT<Matrix> llt(symmetrize(a));
  return llt.info() == Eigen::Success;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols()) throw NonConformalError("solve_spd: matrix is not square");
  if (b.rows() != a.rows()) throw NonConformalError("solve_spd: right-hand side has wrong row count");
  Eigen::LLT<Matrix> llt(symmetrize(a));
  if (llt.info() != Eigen::Success) throw NotSpdError("solve_spd: non-positive pivot in Cholesky factorization");
  return llt.solve(b);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = mix64(seed);
  const std::uint64_t b = mix64(a ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(id + 1)));
}

double RngStream::normal() { return normal_(engine_); }
double RngStream::uniform() { return uniform_(engine_); }
std::uint64_t RngStream::next_u64() { return engine_(); }

GaussianSampler::GaussianSampler(Vector mean, const Matrix& cov) : mean_(std::move(mean)) {
  if (cov.rows() != cov.cols() || cov.rows() != mean_.size())
    throw NonConformalError("gaussian_sample: covariance does not match mean dimension");
  if (!is_psd(cov)) throw NotSpdError("gaussian_sample: covariance is not PSD");
  const Eigen::Index d = cov.rows();
  if (d == 0 || cov.isZero(0.0)) {
    root_ = Matrix::Zero(d, d);
    return;
  }
  // cov = Pᵀ L D Lᵀ P  =>  root = Pᵀ L sqrt(D)
  Eigen::LDLT<Matrix> ldlt(symmetrize(cov));
  Vector dsqrt = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Matrix l = ldlt.matrixL();
  root_ = ldlt.transpositionsP().transpose() * (l * dsqrt.asDiagonal());
}

Vector GaussianSampler::transform(const Vector& z) const { return mean_ + root_ * z; }

Vector GaussianSampler::operator()(RngStream& stream) const {
  Vector z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = stream.normal();
  return transform(z);
}

Vector gaussian_sample(const Vector& mean, const Matrix& cov, RngStream& stream) {
  return GaussianSampler(mean, cov)(stream);
}

double chi_square_quantile(int dof, double p) {
  if (dof < 1) throw DomainError("chi_square_quantile: dof must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi_square_quantile: p must lie in (0,1)");
  return 2.0 * boost::math::gamma_p_inv(0.5 * dof, p);
}

double chi_square_cdf(int dof, double x) {
  if (dof < 1) throw DomainError("chi_square_cdf: dof must be >= 1");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double condition_number(const Matrix& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

}  // namespace robkf
