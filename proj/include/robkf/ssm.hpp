#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "robkf/numerics.hpp"

namespace robkf {

/// Time-indexed hyper-parameter. Transitions and observations are indexed
/// from t = 1.
using MatrixProvider = std::function<Matrix(int t)>;

/// Linear Gaussian state space model
///
///   X_t = F_t X_{t-1} + v_t,   v_t ~ N_p(0, Q_t)
///   Y_t = Z_t X_t + e_t,       e_t ~ N_q(0, V_t)
///   X_0 ~ N_p(a0, Q0)
struct ModelSpec {
  int p = 0;
  int q = 0;
  MatrixProvider F;
  MatrixProvider Z;
  MatrixProvider Q;
  MatrixProvider V;
  Vector a0;
  Matrix Q0;
  bool time_invariant = false;

  static ModelSpec constant(Matrix F, Matrix Z, Matrix Q, Matrix V, Vector a0, Matrix Q0);
};

/// p = q = 1, F = Z = 1, Q = V = 1, with a0 = 0 and Q0 = 1.
ModelSpec steady_state_model();

/// Dimension and definiteness problems for t = 1..horizon. Empty means valid.
std::vector<std::string> validate(const ModelSpec& model, int horizon);

enum class Mark : std::uint8_t { clean = 0, ao = 1, io = 2, io_ao = 3 };

inline Mark operator|(Mark a, Mark b) {
  return static_cast<Mark>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}
std::string to_string(Mark m);
Mark parse_mark(const std::string& s);

/// A simulated path. All per-time vectors have length horizon + 1 and are
/// indexed by t; the t = 0 entries of `observations`, `state_noise` and
/// `obs_noise` are empty. The noise draws are kept so that contamination can
/// re-run the recursions with common random numbers.
struct Trajectory {
  int horizon = 0;
  std::vector<Vector> states;
  std::vector<Vector> observations;
  std::vector<Vector> state_noise;
  std::vector<Vector> obs_noise;
  std::vector<Mark> marks;

  /// Y_1..Y_T
  std::span<const Vector> observed() const {
    return std::span<const Vector>(observations).subspan(1);
  }
};

/// Draws X_0, v_1..v_T and e_1..e_T from three independent substreams of
/// `stream`, in that order.
Trajectory simulate_ideal(const ModelSpec& model, int horizon, const RngStream& stream);

}  // namespace robkf
