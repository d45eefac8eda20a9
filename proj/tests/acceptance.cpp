// Acceptance suite: one PASS/FAIL line per criterion. With no arguments all
// criteria run; otherwise only the listed numbers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <unistd.h>

#include "oracles.hpp"
#include "robkf/harness.hpp"
#include "robkf/io.hpp"
#include "robkf/saddle.hpp"

using namespace robkf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

// ---------------------------------------------------------------------------

Outcome classical_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(1, 3);
  double worst = 0.0;
  int models = 0;
  auto dev = [&](const std::vector<FilterState>& a, const std::vector<FilterState>& b) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      worst = std::max(worst, (a[t].x_filt - b[t].x_filt).cwiseAbs().maxCoeff());
      worst = std::max(worst, (a[t].x_pred - b[t].x_pred).cwiseAbs().maxCoeff());
    }
  };
  // square Z: all three robust filters
  for (int i = 0; i < 100; ++i, ++models) {
    const int p = dim(gen);
    const ModelSpec m = oracle::random_model(gen, p, p);
    const Trajectory tr = simulate_ideal(m, 100, RngStream(i, 7));
    const auto k = filter_run(m, tr.observed(), classic_corrector(m));
    dev(filter_run(m, tr.observed(), rls_ao_corrector(m, ClippingPolicy::unclipped())), k);
    dev(filter_run(m, tr.observed(), rls_io_corrector(m, ClippingPolicy::unclipped())), k);
    HybridConfig hc;
    hc.ao_policy = hc.io_policy = ClippingPolicy::unclipped();
    hc.switching = false;
    dev(hybrid_run(m, tr.observed(), hc).outputs, k);
  }
  // q != p: rLS.AO only (rLS.IO needs an invertible Z)
  for (int i = 0; i < 100; ++i, ++models) {
    const int p = dim(gen);
    int q = dim(gen);
    if (q == p) q = p % 3 + 1;
    const ModelSpec m = oracle::random_model(gen, p, q);
    const Trajectory tr = simulate_ideal(m, 100, RngStream(i, 8));
    dev(filter_run(m, tr.observed(), rls_ao_corrector(m, ClippingPolicy::unclipped())),
        filter_run(m, tr.observed(), classic_corrector(m)));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 10.0, fmt("%d models, max deviation %.3g, %.2f s", models, worst, secs)};
}

Outcome riccati_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelSpec m = steady_state_model();
  FilterState s = init(m);
  for (int t = 1; t <= 60; ++t) s = correct_classic(predict(s, m), Vector::Zero(1), m);
  const double sig_err = std::abs(s.sigma_pred(0, 0) - kGolden);
  const double gain_err = std::abs(s.gain(0, 0) - (kGolden - 1.0));

  BenchmarkConfig cfg;
  cfg.filters = {FilterKind::kalman};
  cfg.regimes = {builtin_regimes(m)[0]};
  cfg.replications = 200;
  cfg.horizon = 50;
  const MseCell c = *run_benchmark(cfg)[0].find(FilterKind::kalman, "filter");
  const double target = kGolden - 1.0;
  const double z = (c.mse - target) / c.se;
  const double secs = seconds_since(t0);
  const bool ok = sig_err < 1e-8 && gain_err < 1e-8 && std::abs(z) <= 3.0 && secs < 10.0;
  return {ok, fmt("|sigma_pred-phi|=%.2g |gain-0.618|=%.2g at t=60; MSE %.4f (SE %.4f, z=%.2f) vs 0.618; %.2f s",
                  sig_err, gain_err, c.mse, c.se, z, secs)};
}

// Orderings over the default configuration. Each ordering claim a < b must
// hold as a paired difference b - a > 3 SE.
struct Paired {
  const MseReport& rep;
  std::string notes;
  bool ok = true;

  double mse(FilterKind f) const { return rep.find(f, "filter")->mse; }

  void less(FilterKind a, FilterKind b) {
    const PairedDiff d = paired_difference(rep.filter_samples.at(b), rep.filter_samples.at(a));
    const double z = d.mean / d.se;
    const bool pass = z > 3.0;
    ok = ok && pass;
    notes += fmt("%s<%s z=%.1f%s; ", to_string(a).c_str(), to_string(b).c_str(), z, pass ? "" : " (FAIL)");
  }
};

const std::vector<MseReport>& default_reports() {
  static const std::vector<MseReport> reports = [] {
    BenchmarkConfig cfg;
    cfg.replications = 200;
    return run_benchmark(cfg);
  }();
  return reports;
}

const MseReport& regime(const std::string& label) {
  for (const auto& r : default_reports())
    if (r.regime == label) return r;
  throw std::runtime_error("missing regime " + label);
}

std::string row(const MseReport& r) {
  std::string s;
  for (FilterKind f : all_filters()) s += fmt("%s=%.3f ", to_string(f).c_str(), r.find(f, "filter")->mse);
  return s;
}

Outcome ordering_ideal() {
  Paired p{regime("ideal")};
  p.less(FilterKind::kalman, FilterKind::rls_io);
  p.less(FilterKind::rls_io, FilterKind::rls_ao);
  return {p.ok, row(p.rep) + "| " + p.notes};
}

Outcome ordering_io() {
  Paired p{regime("io")};
  p.less(FilterKind::rls_io, FilterKind::kalman);
  p.less(FilterKind::kalman, FilterKind::rls_ao);
  const double ratio = p.mse(FilterKind::rls_ioao) / p.mse(FilterKind::rls_io);
  const bool within = ratio <= 2.0;
  return {p.ok && within, row(p.rep) + "| " + p.notes + fmt("ioao/io=%.2f%s", ratio, within ? "" : " (FAIL: > 2)")};
}

Outcome ordering_ao() {
  Paired p{regime("ao")};
  p.less(FilterKind::rls_ao, FilterKind::rls_ioao);
  p.less(FilterKind::rls_ioao, FilterKind::kalman);
  p.less(FilterKind::kalman, FilterKind::rls_io);
  const double ratio = p.mse(FilterKind::kalman) / p.mse(FilterKind::rls_ao);
  const bool big = ratio > 3.0;
  return {p.ok && big, row(p.rep) + "| " + p.notes + fmt("kalman/ao=%.2f", ratio)};
}

Outcome ordering_io_and_ao_excluding_23() {
  BenchmarkConfig cfg;
  cfg.replications = 200;
  cfg.exclude = {23};
  cfg.regimes = {builtin_regimes(cfg.model)[3]};
  const MseReport rep = run_benchmark(cfg)[0];
  Paired p{rep};
  for (FilterKind f : {FilterKind::kalman, FilterKind::rls_io, FilterKind::rls_ao}) p.less(FilterKind::rls_ioao, f);
  return {p.ok, row(rep) + "| " + p.notes};
}

Outcome calibration_consistency() {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> us(0.1, 5.0), ut(0.05, 3.0);
  double worst_b = 0.0, worst_r0 = 0.0;
  bool decreasing = true, inside = true;
  for (int g = 0; g < 20; ++g) {
    const double s = us(gen), tc = ut(gen);
    const StepGeometry geom = scalar_geometry(s, tc);
    double prev = INFINITY;
    for (int k = 1; k <= 10; ++k) {
      const double r = 0.05 * k;
      const double b = calibrate_b_radius(geom, r);
      const auto [m1, m2] = oracle::clipped_moments_1d(std::sqrt(s), b);
      worst_b = std::max(worst_b, std::abs((1.0 - r) * m1 - r * b));
      if (!(b < prev)) decreasing = false;
      prev = b;
    }
    const double rl = 0.05, ru = 0.5;
    const double r0 = least_favorable_radius(geom, rl, ru);
    if (r0 < rl || r0 > ru) inside = false;
    // independent residual from the quadrature moments
    auto terms = [&](double r) {
      const double b = calibrate_b_radius(geom, r);
      const auto [m1, m2] = oracle::clipped_moments_1d(std::sqrt(s), b);
      return std::pair{tc + m2, s - m2 + b * b};
    };
    const auto lo = terms(rl), hi = terms(ru), at = terms(r0);
    worst_r0 = std::max(worst_r0, std::abs(at.first / lo.first - at.second / hi.second));
  }
  const bool ok = worst_b < 1e-8 && decreasing && worst_r0 < 1e-6 && inside;
  return {ok, fmt("20 geometries x 10 radii: max radius residual %.2g, b(r) decreasing=%d, max r0 residual %.2g, "
                  "r0 in [r_l,r_u]=%d",
                  worst_b, decreasing, worst_r0, inside)};
}

Outcome efficiency_criterion() {
  const ModelSpec m = steady_state_model();
  const FilterState lim = riccati_limit(m);
  const StepGeometry geom = step_geometry(lim, m, Track::ao);
  const double b = calibrate_b_efficiency(geom, 0.1);

  // joint (ΔX, ΔY) simulation with an engine unrelated to the library streams
  const double sigma = lim.sigma_pred(0, 0), gain = lim.gain(0, 0);
  std::mt19937_64 gen(31337);
  std::normal_distribution<double> n01;
  const int n = 1000000;
  double sa = 0, sc = 0, saa = 0, scc = 0, sac = 0;
  for (int i = 0; i < n; ++i) {
    const double dx = std::sqrt(sigma) * n01(gen);
    const double dy = dx + n01(gen);  // Z = 1, V = 1
    const double u = gain * dy;
    const double clip = u * std::min(1.0, b / std::abs(u));
    const double a = (dx - clip) * (dx - clip), c = (dx - u) * (dx - u);
    sa += a;
    sc += c;
    saa += a * a;
    scc += c * c;
    sac += a * c;
  }
  const double ma = sa / n, mc = sc / n;
  const double ratio = ma / mc;
  // delta method for a ratio of means
  const double va = saa / n - ma * ma, vc = scc / n - mc * mc, cov = sac / n - ma * mc;
  const double se = std::sqrt((va - 2.0 * ratio * cov + ratio * ratio * vc) / n) / mc;
  const double z = (ratio - 1.1) / se;
  return {std::abs(z) <= 2.0, fmt("b=%.6f, MC ratio %.5f (SE %.5f, z=%.2f) vs 1.1, n=1e6", b, ratio, se, z)};
}

Outcome saddle_point() {
  const auto t0 = std::chrono::steady_clock::now();
  const SoModel m = solve_rho(SoModel::gaussian(Vector::Zero(1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), 0.2));
  RngStream stream(20100701, 9);
  const SaddleReport rep = saddle_check(m, 1000000, stream);
  const double secs = seconds_since(t0);
  const double zn = (rep.normalization - 1.0) / rep.normalization_se;
  bool alts = true;
  double worst_alt = -INFINITY;
  for (const MseEstimate& a : rep.alternatives) {
    const double z = (a.mse - rep.least_favorable.mse) / a.diff_se;
    if (a.diff_se > 0.0) worst_alt = std::max(worst_alt, z);
    if (a.mse > rep.least_favorable.mse + 3.0 * a.diff_se) alts = false;
  }
  const MseEstimate& classical = rep.competitors.at(0);
  const double zc = (classical.mse - rep.least_favorable.mse) / classical.diff_se;
  const bool ok = std::abs(zn) <= 3.0 && alts && zc >= 3.0 && secs < 60.0;
  return {ok, fmt("rho=%.4f, normalization %.5f (z=%.2f), MSE(f0|P0 mix)=%.4f, worst alternative z=%.2f, "
                  "classical %.4f (z=%.1f), %.1f s",
                  rep.rho, rep.normalization, zn, rep.least_favorable.mse, worst_alt, classical.mse, zc, secs)};
}

Outcome hybrid_behavior() {
  const ModelSpec m = steady_state_model();
  const int T = 50, reps = 500, t0 = 25;
  const ResolvedFilters rf = resolve_filters(m, T, {}, {FilterKind::rls_ioao});
  const int w = rf.hybrid.window;

  Scenario shift;
  shift.io_events.push_back({t0, T, IoEvent::Kind::level_shift, Vector::Constant(1, 8.0)});
  Scenario spike;
  spike.ao_patches.push_back({t0, AoPatch::Mode::add, Vector::Constant(1, 8.0 * std::sqrt(riccati_limit(m).innovation_cov(0, 0)))});

  int detected = 0, spike_switch = 0, ideal_switch = 0;
  const RngStream master(4242, 0);
  for (int r = 0; r < reps; ++r) {
    const RngStream rs = master.substream(static_cast<std::uint64_t>(r));
    const Trajectory ideal = simulate_ideal(m, T, rs.substream(0));
    auto switched_in = [&](const Trajectory& tr, int lo, int hi) {
      for (const Revision& rev : hybrid_run(m, tr.observed(), rf.hybrid).revisions)
        if (rev.switch_t >= lo && rev.switch_t <= hi) return true;
      return false;
    };
    if (switched_in(contaminate(ideal, shift, m, rs.substream(1)), t0, t0 + w - 1)) ++detected;
    if (switched_in(contaminate(ideal, spike, m, rs.substream(2)), t0, t0 + w - 1)) ++spike_switch;
    if (switched_in(ideal, 1, T)) ++ideal_switch;
  }
  const double pd = double(detected) / reps, ps = double(spike_switch) / reps, pi = double(ideal_switch) / reps;
  const bool ok = pd >= 0.95 && ps <= 0.01 && pi <= 0.01;
  return {ok, fmt("level shift +8 detected within w=%d steps in %.1f%% (need >= 95%%); spike switch rate %.1f%%; "
                  "ideal false-switch rate %.1f%% per 50-step run",
                  w, 100 * pd, 100 * ps, 100 * pi)};
}

Outcome boundedness() {
  double worst = 0.0;
  int probes = 0;
  auto probe = [&](const ModelSpec& m, const ClippingPolicy& policy, int steps) {
    FilterState s = init(m);
    for (int t = 1; t <= steps; ++t) {
      const FilterState pred = predict(s, m);
      double sup = 0.0;
      for (double mag : {1e3, 1e6, 1e9, 1e12}) {
        for (double sign : {-1.0, 1.0}) {
          Vector y = Vector::Constant(m.q, sign * mag);
          if (m.q > 1) y[0] = -y[0];
          const FilterState c = correct_rls_ao(pred, y, policy, m);
          sup = std::max(sup, (c.x_filt - c.x_pred).norm());
          ++probes;
        }
      }
      worst = std::max(worst, std::abs(sup - policy.height(t)));
      s = correct_rls_ao(pred, Vector::Zero(m.q), policy, m);
    }
  };
  const ModelSpec ss = steady_state_model();
  probe(ss, calibrate_policy(ss, 20, Track::ao, Calibration::radius(0.1)), 20);
  std::mt19937_64 gen(5);
  const ModelSpec m3 = oracle::random_model(gen, 3, 2);
  probe(m3, calibrate_policy(m3, 10, Track::ao, Calibration::radius(0.1)), 10);
  return {worst < 1e-9, fmt("%d probes up to |y|=1e12, max |sup|dx| - b_t| = %.3g", probes, worst)};
}

#ifndef ROBKF_CLI_PATH
#define ROBKF_CLI_PATH "robkf"
#endif

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("robkf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto run = [&](const std::string& name, int threads) {
    const fs::path out = dir / name;
    const std::string cmd = std::string("\"") + ROBKF_CLI_PATH + "\" benchmark --seed 987 --replications 100 --threads " +
                            std::to_string(threads) + " --output \"" + out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) throw std::runtime_error("benchmark command failed: " + cmd);
    return read_file(out.string());
  };
  const std::string a = run("a.csv", 1), b = run("b.csv", 1), c = run("c.csv", 4);
  fs::remove_all(dir);
  const bool ok = !a.empty() && a == b && a == c;
  return {ok, fmt("two runs identical=%d, threads 1 vs 4 identical=%d, %zu bytes", a == b, a == c, a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"classical equivalence at b=inf", classical_equivalence}},
      {2, {"Riccati limit and Kalman MSE", riccati_check}},
      {3, {"ordering, ideal regime", ordering_ideal}},
      {4, {"ordering, IO regime", ordering_io}},
      {5, {"ordering, AO regime", ordering_ao}},
      {6, {"IO&AO regime without t=23: hybrid best", ordering_io_and_ao_excluding_23}},
      {7, {"calibration self-consistency", calibration_consistency}},
      {8, {"efficiency criterion, independent MC", efficiency_criterion}},
      {9, {"saddle point", saddle_point}},
      {10, {"hybrid switching behavior", hybrid_behavior}},
      {11, {"boundedness of the AO correction", boundedness}},
      {12, {"benchmark determinism", determinism}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, v] : criteria) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", k, it->second.first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
