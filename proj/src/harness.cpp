#include "robkf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace robkf {

std::string to_string(FilterKind f) {
  switch (f) {
    case FilterKind::kalman: return "kalman";
    case FilterKind::rls_ao: return "rls-ao";
    case FilterKind::rls_io: return "rls-io";
    case FilterKind::rls_ioao: return "rls-ioao";
  }
  return "kalman";
}

FilterKind parse_filter(const std::string& name) {
  if (name == "kalman") return FilterKind::kalman;
  if (name == "rls-ao") return FilterKind::rls_ao;
  if (name == "rls-io") return FilterKind::rls_io;
  if (name == "rls-ioao") return FilterKind::rls_ioao;
  throw Error("unknown filter '" + name + "' (expected kalman, rls-ao, rls-io, rls-ioao)");
}

std::vector<FilterKind> all_filters() {
  return {FilterKind::kalman, FilterKind::rls_io, FilterKind::rls_ao, FilterKind::rls_ioao};
}

double empirical_mse(std::span<const Vector> truth, std::span<const Vector> estimates, const std::vector<int>& exclude) {
  if (truth.size() != estimates.size()) throw NonConformalError("empirical_mse: length mismatch");
  std::vector<double> sq;
  sq.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    if (std::find(exclude.begin(), exclude.end(), t) != exclude.end()) continue;
    sq.push_back((truth[i] - estimates[i]).squaredNorm());
  }
  if (sq.empty()) throw EmptyAfterExclusionError("empirical_mse: no time points left after exclusion");
  return pairwise_sum(sq) / static_cast<double>(sq.size());
}

namespace {

bool needs(const std::vector<FilterKind>& fs, std::initializer_list<FilterKind> any) {
  for (FilterKind f : any)
    if (std::find(fs.begin(), fs.end(), f) != fs.end()) return true;
  return false;
}

}  // namespace

ResolvedFilters resolve_filters(const ModelSpec& model, int horizon, const FilterSettings& s,
                                const std::vector<FilterKind>& filters) {
  ResolvedFilters r;
  if (needs(filters, {FilterKind::rls_ao, FilterKind::rls_ioao}))
    r.ao = s.ao_height ? ClippingPolicy::fixed(*s.ao_height, s.ao.norm)
                       : calibrate_policy(model, horizon, Track::ao, s.ao);
  if (needs(filters, {FilterKind::rls_io, FilterKind::rls_ioao}))
    r.io = s.io_height ? ClippingPolicy::fixed(*s.io_height, s.io.norm)
                       : calibrate_policy(model, horizon, Track::io, s.io);
  r.hybrid.window = s.window;
  r.hybrid.switch_fraction = s.switch_fraction;
  r.hybrid.quantile = s.quantile;
  r.hybrid.switching = s.switching;
  r.hybrid.ao_policy = r.ao;
  r.hybrid.io_policy = r.io;
  r.hybrid.check();
  return r;
}

FilterOutput run_filter(FilterKind kind, const ModelSpec& model, std::span<const Vector> observations,
                        const ResolvedFilters& filters) {
  FilterOutput out;
  std::vector<FilterState> states;
  switch (kind) {
    case FilterKind::kalman: states = filter_run(model, observations, classic_corrector(model)); break;
    case FilterKind::rls_ao: states = filter_run(model, observations, rls_ao_corrector(model, filters.ao)); break;
    case FilterKind::rls_io: states = filter_run(model, observations, rls_io_corrector(model, filters.io)); break;
    case FilterKind::rls_ioao: {
      HybridRunResult h = hybrid_run(model, observations, filters.hybrid);
      states = std::move(h.outputs);
      out.revised = std::move(h.revised);
      out.revisions = std::move(h.revisions);
      break;
    }
  }
  out.filtered.reserve(states.size());
  out.predicted.reserve(states.size());
  for (const FilterState& s : states) {
    out.filtered.push_back(s.x_filt);
    out.predicted.push_back(s.x_pred);
  }
  if (out.revised.empty()) out.revised.assign(states.size(), false);
  return out;
}

void BenchmarkConfig::check() const {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (replications < 1) throw DomainError("replications must be >= 1");
  if (filters.empty()) throw DomainError("filter list must not be empty");
  if (threads < 1) throw DomainError("threads must be >= 1");
  if (const auto v = validate(model, horizon); !v.empty()) throw DomainError("invalid model: " + v.front());
}

std::vector<Regime> builtin_regimes(const ModelSpec& model, const RegimeMagnitudes& mag) {
  std::vector<Regime> out;
  for (RegimeVariant v : {RegimeVariant::ideal, RegimeVariant::io, RegimeVariant::ao, RegimeVariant::io_and_ao})
    out.push_back({to_string(v), builtin_scenario(v, model, mag)});
  return out;
}

const MseCell* MseReport::find(FilterKind f, const std::string& kind) const {
  for (const MseCell& c : cells)
    if (c.filter == f && c.kind == kind) return &c;
  return nullptr;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  out.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) return out;
  std::vector<double> dev(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
  out.se = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
  return out;
}

}  // namespace

PairedDiff paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw NonConformalError("paired_difference: sample sizes differ");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const MeanSe m = mean_se(d);
  return {m.mean, m.se};
}

std::vector<MseReport> run_benchmark(const BenchmarkConfig& cfg) {
  cfg.check();
  const std::vector<Regime> regimes = cfg.regimes.empty() ? builtin_regimes(cfg.model) : cfg.regimes;
  const int reps = cfg.single_realization ? 1 : cfg.replications;
  const ResolvedFilters resolved = resolve_filters(cfg.model, cfg.horizon, cfg.settings, cfg.filters);
  const std::size_t nf = cfg.filters.size();
  const std::size_t nr = regimes.size();

  // [rep][regime][filter] -> (filter mse, pred mse)
  std::vector<std::vector<std::vector<std::pair<double, double>>>> results(
      static_cast<std::size_t>(reps), std::vector<std::vector<std::pair<double, double>>>(nr));

  const RngStream master(cfg.seed, 0);
  auto run_one = [&](int rep) {
    const RngStream rs = master.substream(static_cast<std::uint64_t>(rep));
    const Trajectory ideal = simulate_ideal(cfg.model, cfg.horizon, rs.substream(0));
    for (std::size_t g = 0; g < nr; ++g) {
      const Trajectory traj = contaminate(ideal, regimes[g].scenario, cfg.model, rs.substream(100 + g));
      const std::span<const Vector> truth = std::span<const Vector>(traj.states).subspan(1);
      auto& row = results[static_cast<std::size_t>(rep)][g];
      row.reserve(nf);
      for (FilterKind f : cfg.filters) {
        const FilterOutput out = run_filter(f, cfg.model, traj.observed(), resolved);
        row.emplace_back(empirical_mse(truth, out.filtered, cfg.exclude),
                         empirical_mse(truth, out.predicted, cfg.exclude));
      }
    }
  };

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int rep = next++; rep < reps; rep = next++) {
      try {
        run_one(rep);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = reps;
      }
    }
  };
  const int nthreads = std::min(cfg.threads, reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MseReport> reports;
  for (std::size_t g = 0; g < nr; ++g) {
    MseReport rep;
    rep.regime = regimes[g].label;
    rep.replications = reps;
    rep.excluded = cfg.exclude;
    std::sort(rep.excluded.begin(), rep.excluded.end());
    for (std::size_t fi = 0; fi < nf; ++fi) {
      std::vector<double> fm(static_cast<std::size_t>(reps)), pm(static_cast<std::size_t>(reps));
      for (int r = 0; r < reps; ++r) {
        fm[r] = results[r][g][fi].first;
        pm[r] = results[r][g][fi].second;
      }
      const MeanSe a = mean_se(fm), b = mean_se(pm);
      rep.cells.push_back({cfg.filters[fi], "filter", a.mean, a.se});
      rep.cells.push_back({cfg.filters[fi], "pred", b.mean, b.se});
      rep.filter_samples[cfg.filters[fi]] = std::move(fm);
      rep.pred_samples[cfg.filters[fi]] = std::move(pm);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string join_ints(const std::vector<int>& xs, char sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(xs[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string emit_report(const std::vector<MseReport>& reports, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::csv) {
    os << "regime,filter,kind,mse,se,replications,excluded\n";
    for (const MseReport& r : reports)
      for (const MseCell& c : r.cells)
        os << r.regime << ',' << to_string(c.filter) << ',' << c.kind << ',' << fmt(c.mse) << ',' << fmt(c.se) << ','
           << r.replications << ',' << join_ints(r.excluded, ';') << '\n';
    return os.str();
  }

  // columns in order of first appearance
  std::vector<FilterKind> cols;
  for (const MseReport& r : reports)
    for (const MseCell& c : r.cells)
      if (std::find(cols.begin(), cols.end(), c.filter) == cols.end()) cols.push_back(c.filter);

  constexpr int kw = 12;
  os << "empirical MSE";
  if (!reports.empty()) {
    os << " (" << reports.front().replications << " replications";
    if (!reports.front().excluded.empty()) os << ", excluding t=" << join_ints(reports.front().excluded, ',');
    os << ")";
  }
  os << "\n" << std::left << std::setw(kw) << "regime" << std::setw(8) << "type";
  for (FilterKind f : cols) os << std::right << std::setw(kw) << to_string(f);
  os << "\n";
  for (const MseReport& r : reports) {
    for (const char* kind : {"filter", "pred"}) {
      double best = std::numeric_limits<double>::infinity();
      for (FilterKind f : cols)
        if (const MseCell* c = r.find(f, kind)) best = std::min(best, c->mse);
      os << std::left << std::setw(kw) << (std::string(kind) == "filter" ? r.regime : "") << std::setw(8) << kind;
      for (FilterKind f : cols) {
        const MseCell* c = r.find(f, kind);
        std::string cell = c ? fmt(std::round(c->mse * 1000.0) / 1000.0) : "-";
        if (c && c->mse == best) cell = "*" + cell;
        os << std::right << std::setw(kw) << cell;
      }
      os << "\n";
    }
  }
  os << "(* smallest MSE in the row)\n";
  return os.str();
}

std::vector<MseReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<MseReport> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "regime,filter,kind,mse,se,replications,excluded") throw ParseError(lineno, "unexpected report header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw ParseError(lineno, "expected 7 fields");
    if (out.empty() || out.back().regime != f[0]) {
      MseReport r;
      r.regime = f[0];
      r.replications = std::stoi(f[5]);
      if (!f[6].empty())
        for (const auto& s : split(f[6], ';')) r.excluded.push_back(std::stoi(s));
      out.push_back(std::move(r));
    }
    if (f[2] != "filter" && f[2] != "pred") throw ParseError(lineno, "kind must be filter or pred");
    out.back().cells.push_back({parse_filter(f[1]), f[2], std::stod(f[3]), std::stod(f[4])});
  }
  return out;
}

}  // namespace robkf
