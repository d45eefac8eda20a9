#include "robkf/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace robkf {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& tok, int line) {
  const std::string t = trim(tok);
  if (t == "inf" || t == "Inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || std::isnan(v))
    throw ParseError(line, "expected a number, got '" + t + "'");
  return v;
}

long long to_int(const std::string& tok, int line) {
  const std::string t = trim(tok);
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) throw ParseError(line, "expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> numbers(const std::string& s, int line) {
  std::string cleaned = s;
  for (char& c : cleaned)
    if (c == ',' || c == ';') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> out;
  for (std::string tok; in >> tok;) out.push_back(to_real(tok, line));
  return out;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<int> parse_index_list(const std::string& s) {
  std::vector<int> out;
  if (trim(s).empty()) return out;
  for (const auto& tok : split_list(s, ',')) {
    const long long v = to_int(tok, 0);
    if (v < 1) throw DomainError("time index must be >= 1, got " + tok);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw Error("expected a boolean, got '" + t + "'");
}

std::string write_trajectory_csv(const Trajectory& traj) {
  if (traj.states.empty()) throw Error("empty trajectory");
  const Eigen::Index p = traj.states[0].size();
  const Eigen::Index q = traj.horizon > 0 ? traj.observations[1].size() : 0;
  std::ostringstream os;
  os << 't';
  for (Eigen::Index i = 1; i <= p; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= q; ++i) os << ",y_" << i;
  os << ",mark\n";
  for (int t = 0; t <= traj.horizon; ++t) {
    os << t;
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << fmt(traj.states[t][i]);
    for (Eigen::Index i = 0; i < q; ++i) {
      os << ',';
      if (t > 0) os << fmt(traj.observations[t][i]);
    }
    os << ',' << to_string(t < static_cast<int>(traj.marks.size()) ? traj.marks[t] : Mark::clean) << '\n';
  }
  return os.str();
}

Trajectory read_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int p = 0, q = 0;
  Trajectory traj;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_list(line, ',');
    if (lineno == 1) {
      if (f.empty() || f.front() != "t" || f.back() != "mark") throw ParseError(lineno, "expected header t,x_..,y_..,mark");
      for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        if (f[i] == "x_" + std::to_string(p + 1) && q == 0)
          ++p;
        else if (f[i] == "y_" + std::to_string(q + 1))
          ++q;
        else
          throw ParseError(lineno, "unexpected column '" + f[i] + "'");
      }
      if (p == 0 || q == 0) throw ParseError(lineno, "header needs at least one x and one y column");
      continue;
    }
    if (static_cast<int>(f.size()) != p + q + 2) throw ParseError(lineno, "wrong number of fields");
    const long long t = to_int(f[0], lineno);
    if (t != static_cast<long long>(traj.states.size())) throw ParseError(lineno, "rows must be t = 0, 1, 2, ...");
    Vector x(p);
    for (int i = 0; i < p; ++i) x[i] = to_real(f[1 + i], lineno);
    Vector y;
    if (t == 0) {
      for (int i = 0; i < q; ++i)
        if (!f[1 + p + i].empty()) throw ParseError(lineno, "t=0 row must have empty y fields");
    } else {
      y.resize(q);
      for (int i = 0; i < q; ++i) y[i] = to_real(f[1 + p + i], lineno);
    }
    Mark mark;
    try {
      mark = parse_mark(f.back());
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    traj.states.push_back(std::move(x));
    traj.observations.push_back(std::move(y));
    traj.state_noise.emplace_back();
    traj.obs_noise.emplace_back();
    traj.marks.push_back(mark);
  }
  if (traj.states.size() < 2) throw ParseError(lineno, "trajectory needs rows for t = 0 and at least t = 1");
  traj.horizon = static_cast<int>(traj.states.size()) - 1;
  return traj;
}

std::string write_estimates_csv(FilterKind filter, const FilterOutput& out) {
  std::ostringstream os;
  const Eigen::Index p = out.filtered.empty() ? 0 : out.filtered.front().size();
  os << "t,filter";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",xfilt_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",xpred_" << i;
  os << ",revised\n";
  const std::string name = to_string(filter);
  for (std::size_t k = 0; k < out.filtered.size(); ++k) {
    os << k + 1 << ',' << name;
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << fmt(out.filtered[k][i]);
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << fmt(out.predicted[k][i]);
    os << ',' << (k < out.revised.size() && out.revised[k] ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string write_revisions_csv(const std::vector<Revision>& revisions) {
  std::ostringstream os;
  os << "from_t,to_t,switch_t\n";
  for (const Revision& r : revisions) os << r.from_t << ',' << r.to_t << ',' << r.switch_t << '\n';
  return os.str();
}

std::vector<KeyValue> parse_key_values(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::vector<KeyValue> out;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      if (out.empty()) throw ParseError(line, "expected key = value");
      out.back().value += ' ' + trim(raw);
      continue;
    }
    KeyValue kv{trim(raw.substr(0, eq)), trim(raw.substr(eq + 1)), line};
    if (kv.key.empty()) throw ParseError(line, "empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

ModelSpec parse_model(const std::string& text) {
  std::map<std::string, KeyValue> kv;
  for (auto& e : parse_key_values(text)) {
    static const std::vector<std::string> known{"p", "q", "F", "Z", "Q", "V", "a0", "Q0"};
    if (std::find(known.begin(), known.end(), e.key) == known.end())
      throw ParseError(e.line, "unknown model key '" + e.key + "'");
    if (kv.count(e.key)) throw ParseError(e.line, "duplicate key '" + e.key + "'");
    kv[e.key] = e;
  }
  for (const char* k : {"p", "q", "F", "Z", "Q", "V"})
    if (!kv.count(k)) throw ParseError(0, std::string("model is missing key '") + k + "'");
  const long long p = to_int(kv["p"].value, kv["p"].line);
  const long long q = to_int(kv["q"].value, kv["q"].line);
  if (p < 1 || q < 1) throw ParseError(kv["p"].line, "p and q must be >= 1");

  auto matrix = [&](const std::string& key, long long rows, long long cols) {
    const KeyValue& e = kv[key];
    const auto xs = numbers(e.value, e.line);
    if (static_cast<long long>(xs.size()) != rows * cols)
      throw ParseError(e.line, key + " needs " + std::to_string(rows * cols) + " values, got " + std::to_string(xs.size()));
    Matrix m(rows, cols);
    for (long long i = 0; i < rows; ++i)
      for (long long j = 0; j < cols; ++j) m(i, j) = xs[static_cast<std::size_t>(i * cols + j)];
    return m;
  };
  const Matrix F = matrix("F", p, p), Z = matrix("Z", q, p), Q = matrix("Q", p, p), V = matrix("V", q, q);
  const Vector a0 = kv.count("a0") ? Vector(matrix("a0", p, 1).col(0)) : Vector(Vector::Zero(p));
  const Matrix Q0 = kv.count("Q0") ? matrix("Q0", p, p) : Matrix(Matrix::Identity(p, p));
  return ModelSpec::constant(F, Z, Q, V, a0, Q0);
}

std::string format_model(const ModelSpec& model) {
  std::ostringstream os;
  auto row_major = [&](const char* key, const Matrix& m) {
    os << key << " =";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << fmt(m(i, j));
    os << '\n';
  };
  os << "p = " << model.p << "\nq = " << model.q << '\n';
  row_major("F", model.F(1));
  row_major("Z", model.Z(1));
  row_major("Q", model.Q(1));
  row_major("V", model.V(1));
  row_major("a0", model.a0);
  row_major("Q0", model.Q0);
  return os.str();
}

void apply_config(BenchmarkInputs& in, const std::vector<KeyValue>& entries) {
  BenchmarkConfig& c = in.config;
  FilterSettings& s = c.settings;
  for (const KeyValue& e : entries) {
    const std::string& k = e.key;
    const std::string& v = e.value;
    try {
      if (k == "model") {
        in.model_file = (v == "steady-state" || v == "steady_state") ? "" : v;
      } else if (k == "horizon") {
        c.horizon = static_cast<int>(to_int(v, e.line));
      } else if (k == "replications") {
        c.replications = static_cast<int>(to_int(v, e.line));
      } else if (k == "seed") {
        c.seed = std::stoull(v);
      } else if (k == "filters") {
        c.filters.clear();
        for (const auto& f : split_list(v)) c.filters.push_back(parse_filter(f));
      } else if (k == "regimes") {
        in.regime_names = split_list(v);
      } else if (k == "scenario_file") {
        in.scenario_file = v;
      } else if (k == "exclude") {
        c.exclude = parse_index_list(v);
      } else if (k == "single_realization") {
        c.single_realization = parse_bool(v);
      } else if (k == "threads") {
        c.threads = static_cast<int>(to_int(v, e.line));
      } else if (k == "ao_radius") {
        s.ao = Calibration::radius(to_real(v, e.line));
      } else if (k == "io_radius") {
        s.io = Calibration::radius(to_real(v, e.line));
      } else if (k == "ao_delta") {
        s.ao = Calibration::efficiency(to_real(v, e.line));
      } else if (k == "io_delta") {
        s.io = Calibration::efficiency(to_real(v, e.line));
      } else if (k == "ao_height") {
        s.ao_height = to_real(v, e.line);
      } else if (k == "io_height") {
        s.io_height = to_real(v, e.line);
      } else if (k == "steady_state") {
        s.ao.steady_state = s.io.steady_state = parse_bool(v);
      } else if (k == "window") {
        s.window = static_cast<int>(to_int(v, e.line));
      } else if (k == "switch_fraction") {
        s.switch_fraction = to_real(v, e.line);
      } else if (k == "quantile") {
        s.quantile = to_real(v, e.line);
      } else if (k == "switching") {
        s.switching = parse_bool(v);
      } else if (k == "ao_sd_multiple") {
        in.magnitudes.ao_sd_multiple = to_real(v, e.line);
      } else if (k == "level_shift") {
        in.magnitudes.level_shift = to_real(v, e.line);
      } else if (k == "trend_slope") {
        in.magnitudes.trend_slope = to_real(v, e.line);
      } else if (k == "output") {
        in.output = v;
      } else if (k == "format") {
        if (v != "csv" && v != "table") throw Error("format must be csv or table");
        in.format = v;
      } else {
        throw ParseError(e.line, "unknown config key '" + k + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError(e.line, k + ": " + ex.what());
    }
  }
}

void finalize_inputs(BenchmarkInputs& in) {
  BenchmarkConfig& c = in.config;
  if (!in.model_file.empty()) c.model = parse_model(read_file(in.model_file));
  c.regimes.clear();
  std::vector<std::string> names = in.regime_names;
  if (names.empty() && in.scenario_file.empty()) names = {"ideal", "io", "ao", "io-and-ao"};
  for (const auto& n : names) {
    const RegimeVariant v = parse_variant(n);
    c.regimes.push_back({to_string(v), builtin_scenario(v, c.model, in.magnitudes)});
  }
  if (!in.scenario_file.empty()) c.regimes.push_back({"custom", parse_scenario(read_file(in.scenario_file))});
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!f) throw Error("write failed for '" + path + "'");
}

}  // namespace robkf
