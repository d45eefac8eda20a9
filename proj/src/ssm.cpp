#include "robkf/ssm.hpp"

#include <sstream>

namespace robkf {

ModelSpec ModelSpec::constant(Matrix F, Matrix Z, Matrix Q, Matrix V, Vector a0, Matrix Q0) {
  ModelSpec m;
  m.p = static_cast<int>(F.rows());
  m.q = static_cast<int>(Z.rows());
  m.F = [F = std::move(F)](int) { return F; };
  m.Z = [Z = std::move(Z)](int) { return Z; };
  m.Q = [Q = std::move(Q)](int) { return Q; };
  m.V = [V = std::move(V)](int) { return V; };
  m.a0 = std::move(a0);
  m.Q0 = std::move(Q0);
  m.time_invariant = true;
  return m;
}

ModelSpec steady_state_model() {
  const Matrix one = Matrix::Ones(1, 1);
  return ModelSpec::constant(one, one, one, one, Vector::Zero(1), one);
}

namespace {

std::string at(const char* what, int t) {
  std::ostringstream os;
  os << what << " at t=" << t;
  return os.str();
}

bool dims(const Matrix& m, int rows, int cols) { return m.rows() == rows && m.cols() == cols; }

}  // namespace

std::vector<std::string> validate(const ModelSpec& model, int horizon) {
  std::vector<std::string> out;
  const int p = model.p, q = model.q;
  if (p < 1) out.emplace_back("p must be >= 1");
  if (q < 1) out.emplace_back("q must be >= 1");
  if (!model.F || !model.Z || !model.Q || !model.V) {
    out.emplace_back("missing hyper-parameter provider");
    return out;
  }
  if (model.a0.size() != p) out.emplace_back("a0 dims");
  if (!dims(model.Q0, p, p))
    out.emplace_back("Q0 dims");
  else if (!is_psd(model.Q0))
    out.emplace_back("Q0 not PSD");
  for (int t = 1; t <= horizon; ++t) {
    const Matrix F = model.F(t), Z = model.Z(t), Q = model.Q(t), V = model.V(t);
    if (!dims(F, p, p)) out.push_back(at("F dims", t));
    if (!dims(Z, q, p)) out.push_back(at("Z dims", t));
    if (!dims(Q, p, p))
      out.push_back(at("Q dims", t));
    else if (!is_psd(Q))
      out.push_back(at("Q not PSD", t));
    if (!dims(V, q, q))
      out.push_back(at("V dims", t));
    else if (!is_pd(V))
      out.push_back(at("V not PD", t));
  }
  return out;
}

std::string to_string(Mark m) {
  switch (m) {
    case Mark::clean: return "clean";
    case Mark::ao: return "ao";
    case Mark::io: return "io";
    case Mark::io_ao: return "io+ao";
  }
  return "clean";
}

Mark parse_mark(const std::string& s) {
  if (s == "clean" || s.empty()) return Mark::clean;
  if (s == "ao") return Mark::ao;
  if (s == "io") return Mark::io;
  if (s == "io+ao") return Mark::io_ao;
  throw Error("unknown mark '" + s + "'");
}

Trajectory simulate_ideal(const ModelSpec& model, int horizon, const RngStream& stream) {
  if (horizon < 0) throw DomainError("simulate_ideal: negative horizon");
  RngStream init_stream = stream.substream(0);
  RngStream state_stream = stream.substream(1);
  RngStream obs_stream = stream.substream(2);

  Trajectory traj;
  traj.horizon = horizon;
  const auto n = static_cast<std::size_t>(horizon) + 1;
  traj.states.resize(n);
  traj.observations.resize(n);
  traj.state_noise.resize(n);
  traj.obs_noise.resize(n);
  traj.marks.assign(n, Mark::clean);

  traj.states[0] = gaussian_sample(model.a0, model.Q0, init_stream);
  const Vector zero_p = Vector::Zero(model.p);
  const Vector zero_q = Vector::Zero(model.q);
  for (int t = 1; t <= horizon; ++t) traj.state_noise[t] = gaussian_sample(zero_p, model.Q(t), state_stream);
  for (int t = 1; t <= horizon; ++t) traj.obs_noise[t] = gaussian_sample(zero_q, model.V(t), obs_stream);
  for (int t = 1; t <= horizon; ++t) {
    traj.states[t] = model.F(t) * traj.states[t - 1] + traj.state_noise[t];
    traj.observations[t] = model.Z(t) * traj.states[t] + traj.obs_noise[t];
  }
  return traj;
}

}  // namespace robkf
