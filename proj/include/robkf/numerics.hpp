#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace robkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. Everything numerical derives from NumericalError so the
// CLI can map it onto a single exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotSpdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConformalError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Relative tolerance used by the PSD/PD predicates.
inline constexpr double kPsdTolerance = 1e-10;

/// (A + Aᵀ)/2
Matrix symmetrize(const Matrix& a);

/// Symmetric within `tol` (relative to the largest entry) and all eigenvalues
/// >= -tol * trace.
bool is_psd(const Matrix& a, double tol = kPsdTolerance);

/// Like is_psd, but additionally requires a successful Cholesky factorization.
bool is_pd(const Matrix& a, double tol = kPsdTolerance);

/// Solves A X = B for symmetric positive definite A via a Cholesky
/// factorization. Throws NotSpdError when a pivot is not positive and
/// NonConformalError on shape mismatch.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Seeded normal/uniform stream. A (seed, stream id) pair fully determines the
/// draw sequence; substreams derived from distinct ids are decorrelated by a
/// splitmix64 finalizer before seeding the engine.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream keyed by (seed, stream_id, id). Does not advance *this.
  RngStream substream(std::uint64_t id) const;

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t next_u64();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

std::uint64_t mix64(std::uint64_t x);

/// Precomputed square root of a PSD covariance. Rank-deficient matrices are
/// handled by the pivoted LDLᵀ factorization, so cov = 0 yields exactly the
/// mean.
class GaussianSampler {
 public:
  GaussianSampler(Vector mean, const Matrix& cov);

  Vector operator()(RngStream& stream) const;
  /// mean + root * z for caller-supplied standard normals z.
  Vector transform(const Vector& z) const;

  const Vector& mean() const { return mean_; }
  const Matrix& root() const { return root_; }

 private:
  Vector mean_;
  Matrix root_;
};

/// One draw from N(mean, cov).
Vector gaussian_sample(const Vector& mean, const Matrix& cov, RngStream& stream);

/// Inverse CDF of the chi-square distribution with `dof` degrees of freedom.
double chi_square_quantile(int dof, double p);
double chi_square_cdf(int dof, double x);

double normal_pdf(double x);
double normal_cdf(double x);

/// Smallest/largest singular value ratio; infinity for singular input.
double condition_number(const Matrix& a);

}  // namespace robkf
