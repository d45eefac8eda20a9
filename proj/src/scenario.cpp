#include "robkf/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "robkf/kalman.hpp"

namespace robkf {

ParseError::ParseError(int line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

double parse_real(const std::string& tok, int line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v))
    throw ParseError(line, "expected a number, got '" + tok + "'");
  return v;
}

int parse_time(const std::string& tok, int line) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || end != tok.c_str() + tok.size()) throw ParseError(line, "expected a time index, got '" + tok + "'");
  if (v < 1) throw ParseError(line, "time indices start at 1");
  return static_cast<int>(v);
}

Vector parse_vector(const std::vector<std::string>& toks, std::size_t from, int line) {
  if (from >= toks.size()) throw ParseError(line, "missing vector values");
  Vector v(static_cast<Eigen::Index>(toks.size() - from));
  for (std::size_t i = from; i < toks.size(); ++i) v[static_cast<Eigen::Index>(i - from)] = parse_real(toks[i], line);
  return v;
}

void write_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;

    const std::string& kw = toks[0];
    if (kw == "ao") {
      if (toks.size() < 4) throw ParseError(line, "usage: ao <replace|add> <t> <v1> [<v2> ...]");
      AoPatch patch;
      if (toks[1] == "replace")
        patch.mode = AoPatch::Mode::replace;
      else if (toks[1] == "add")
        patch.mode = AoPatch::Mode::add;
      else
        throw ParseError(line, "unknown ao mode '" + toks[1] + "'");
      patch.t = parse_time(toks[2], line);
      patch.value = parse_vector(toks, 3, line);
      sc.ao_patches.push_back(std::move(patch));
    } else if (kw == "io") {
      if (toks.size() < 5) throw ParseError(line, "usage: io <level-shift|linear-trend> <t_start> <t_end> <m1> ...");
      IoEvent ev;
      if (toks[1] == "level-shift")
        ev.kind = IoEvent::Kind::level_shift;
      else if (toks[1] == "linear-trend")
        ev.kind = IoEvent::Kind::linear_trend;
      else
        throw ParseError(line, "unknown io kind '" + toks[1] + "'");
      ev.t_start = parse_time(toks[2], line);
      ev.t_end = parse_time(toks[3], line);
      if (ev.t_end < ev.t_start) throw ParseError(line, "io window ends before it starts");
      ev.magnitude = parse_vector(toks, 4, line);
      sc.io_events.push_back(std::move(ev));
    } else if (kw == "so") {
      if (toks.size() < 4) throw ParseError(line, "usage: so <r> <point c1 ... | gauss mean scale>");
      if (sc.so_random) throw ParseError(line, "only one so directive is allowed");
      RandomSo so;
      so.radius = parse_real(toks[1], line);
      if (so.radius < 0.0 || so.radius > 1.0) throw ParseError(line, "so radius must lie in [0,1]");
      if (toks[2] == "point") {
        so.law = RandomSo::Law::point;
        so.point = parse_vector(toks, 3, line);
      } else if (toks[2] == "gauss") {
        if (toks.size() != 5) throw ParseError(line, "usage: so <r> gauss <mean> <scale>");
        so.law = RandomSo::Law::gauss;
        so.mean = parse_real(toks[3], line);
        so.scale = parse_real(toks[4], line);
        if (so.scale < 0.0) throw ParseError(line, "so scale must be >= 0");
      } else {
        throw ParseError(line, "unknown so law '" + toks[2] + "'");
      }
      sc.so_random = std::move(so);
    } else {
      throw ParseError(line, "unknown directive '" + kw + "'");
    }
  }
  return sc;
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& p : sc.ao_patches) {
    os << "ao " << (p.mode == AoPatch::Mode::replace ? "replace" : "add") << ' ' << p.t;
    write_vector(os, p.value);
    os << '\n';
  }
  for (const auto& e : sc.io_events) {
    os << "io " << (e.kind == IoEvent::Kind::level_shift ? "level-shift" : "linear-trend") << ' ' << e.t_start << ' '
       << e.t_end;
    write_vector(os, e.magnitude);
    os << '\n';
  }
  if (sc.so_random) {
    const RandomSo& so = *sc.so_random;
    os << "so " << so.radius;
    if (so.law == RandomSo::Law::point) {
      os << " point";
      write_vector(os, so.point);
    } else {
      os << " gauss " << so.mean << ' ' << so.scale;
    }
    os << '\n';
  }
  return os.str();
}

RegimeVariant parse_variant(const std::string& name) {
  if (name == "ideal") return RegimeVariant::ideal;
  if (name == "io") return RegimeVariant::io;
  if (name == "ao") return RegimeVariant::ao;
  if (name == "io-and-ao" || name == "io&ao") return RegimeVariant::io_and_ao;
  throw Error("unknown regime '" + name + "' (expected ideal, io, ao, io-and-ao)");
}

std::string to_string(RegimeVariant v) {
  switch (v) {
    case RegimeVariant::ideal: return "ideal";
    case RegimeVariant::io: return "io";
    case RegimeVariant::ao: return "ao";
    case RegimeVariant::io_and_ao: return "io-and-ao";
  }
  return "ideal";
}

Scenario builtin_scenario(RegimeVariant variant, const ModelSpec& model, const RegimeMagnitudes& mag) {
  Scenario sc;
  const bool with_ao = variant == RegimeVariant::ao || variant == RegimeVariant::io_and_ao;
  const bool with_io = variant == RegimeVariant::io || variant == RegimeVariant::io_and_ao;
  if (with_ao) {
    const Vector sd = riccati_limit(model).innovation_cov.diagonal().cwiseSqrt();
    for (int t : {10, 15, 23}) sc.ao_patches.push_back({t, AoPatch::Mode::add, mag.ao_sd_multiple * sd});
  }
  if (with_io) {
    sc.io_events.push_back({20, 25, IoEvent::Kind::linear_trend, Vector::Constant(model.p, mag.trend_slope)});
    sc.io_events.push_back({37, 42, IoEvent::Kind::level_shift, Vector::Constant(model.p, mag.level_shift)});
  }
  return sc;
}

Trajectory contaminate(const Trajectory& traj, const Scenario& sc, const ModelSpec& model, const RngStream& stream) {
  const int T = traj.horizon;
  auto check_time = [T](int t, const char* what) {
    if (t < 1 || t > T)
      throw OutOfHorizonError(std::string(what) + " at t=" + std::to_string(t) + " outside 1.." + std::to_string(T));
  };
  for (const auto& ev : sc.io_events) {
    check_time(ev.t_start, "io event");
    check_time(ev.t_end, "io event");
    if (ev.magnitude.size() != model.p) throw NonConformalError("io magnitude must have dimension p");
  }
  for (const auto& patch : sc.ao_patches) {
    check_time(patch.t, "ao patch");
    if (patch.value.size() != model.q) throw NonConformalError("ao value must have dimension q");
  }
  if (sc.so_random && sc.so_random->law == RandomSo::Law::point && sc.so_random->point.size() != model.q)
    throw NonConformalError("so point must have dimension q");

  Trajectory out = traj;

  if (!sc.io_events.empty()) {
    std::vector<Vector> inject(static_cast<std::size_t>(T) + 1, Vector::Zero(model.p));
    for (const auto& ev : sc.io_events) {
      Vector prev = Vector::Zero(model.p);
      for (int t = ev.t_start, k = 1; t <= ev.t_end; ++t, ++k) {
        const Vector target = ev.kind == IoEvent::Kind::level_shift ? ev.magnitude : Vector(k * ev.magnitude);
        inject[t] += target - model.F(t) * prev;
        prev = target;
        out.marks[t] = out.marks[t] | Mark::io;
      }
    }
    for (int t = 1; t <= T; ++t) {
      out.states[t] = model.F(t) * out.states[t - 1] + out.state_noise[t] + inject[t];
      out.observations[t] = model.Z(t) * out.states[t] + out.obs_noise[t];
    }
  }

  for (const auto& patch : sc.ao_patches) {
    Vector& y = out.observations[patch.t];
    y = patch.mode == AoPatch::Mode::replace ? patch.value : Vector(y + patch.value);
    out.marks[patch.t] = out.marks[patch.t] | Mark::ao;
  }

  if (sc.so_random && sc.so_random->radius > 0.0) {
    const RandomSo& so = *sc.so_random;
    RngStream u_stream = stream.substream(10);
    RngStream law_stream = stream.substream(11);
    for (int t = 1; t <= T; ++t) {
      if (u_stream.uniform() >= so.radius) continue;
      if (so.law == RandomSo::Law::point) {
        out.observations[t] = so.point;
      } else {
        Vector y(model.q);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = so.mean + so.scale * law_stream.normal();
        out.observations[t] = y;
      }
      out.marks[t] = out.marks[t] | Mark::ao;
    }
  }
  return out;
}

}  // namespace robkf
