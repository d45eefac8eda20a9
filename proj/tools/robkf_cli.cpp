// robkf: command line front end for simulation, calibration, filtering,
// benchmarking and the saddle-point check.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robkf/io.hpp"
#include "robkf/saddle.hpp"

using namespace robkf;

namespace {

constexpr const char* kSeedEnv = "ROBKF_SEED";

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
    }
  }
  return BenchmarkConfig{}.seed;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

ModelSpec load_model(const std::string& path) { return path.empty() ? steady_state_model() : parse_model(read_file(path)); }

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Vector parse_numbers(const std::string& s) {
  std::vector<double> xs;
  for (const auto& tok : split_list(s, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw Error("not a number: '" + tok + "'");
    xs.push_back(v);
  }
  return Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

Matrix square(const Vector& v, Eigen::Index d, const char* what) {
  if (v.size() == 1) return v[0] * Matrix::Identity(d, d);
  if (v.size() != d * d) throw Error(std::string(what) + " needs 1 or d*d values");
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v[i * d + j];
  return m;
}

// --- shared filter options -------------------------------------------------

struct FilterFlags {
  std::optional<double> ao_radius, io_radius, ao_delta, io_delta, ao_height, io_height;
  std::optional<int> window;
  std::optional<double> switch_fraction, quantile;
  bool no_switching = false;
  bool steady_state = false;

  void add(CLI::App* app) {
    app->add_option("--ao-radius", ao_radius, "radius r for the AO-track heights");
    app->add_option("--io-radius", io_radius, "radius r for the IO-track heights");
    app->add_option("--ao-delta", ao_delta, "efficiency loss for the AO-track heights");
    app->add_option("--io-delta", io_delta, "efficiency loss for the IO-track heights");
    app->add_option("--ao-height", ao_height, "fixed AO clipping height (inf disables clipping)");
    app->add_option("--io-height", io_height, "fixed IO clipping height (inf disables clipping)");
    app->add_option("--window", window, "hybrid window w");
    app->add_option("--switch-fraction", switch_fraction, "hybrid switch fraction h");
    app->add_option("--quantile", quantile, "chi-square quantile for the hybrid flags");
    app->add_flag("--no-switching", no_switching, "disable hybrid switching");
    app->add_flag("--steady-state", steady_state, "one clipping height from the Riccati limit");
  }

  void apply(FilterSettings& s) const {
    if (ao_radius) s.ao = Calibration::radius(*ao_radius);
    if (io_radius) s.io = Calibration::radius(*io_radius);
    if (ao_delta) s.ao = Calibration::efficiency(*ao_delta);
    if (io_delta) s.io = Calibration::efficiency(*io_delta);
    if (ao_height) s.ao_height = *ao_height;
    if (io_height) s.io_height = *io_height;
    if (window) s.window = *window;
    if (switch_fraction) s.switch_fraction = *switch_fraction;
    if (quantile) s.quantile = *quantile;
    if (no_switching) s.switching = false;
    if (steady_state) s.ao.steady_state = s.io.steady_state = true;
  }
};

// --- subcommands -------------------------------------------------------------

struct SimulateCmd {
  std::string model, regime = "ideal", scenario_file, output;
  int horizon = 50;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("simulate", "simulate a (contaminated) trajectory as CSV");
    app->add_option("--model", model, "model file (default: built-in steady-state model)");
    app->add_option("--horizon", horizon, "number of time steps T");
    app->add_option("--seed", seed, std::string("master seed (default from ") + kSeedEnv + ")");
    app->add_option("--regime", regime, "ideal, io, ao or io-and-ao");
    app->add_option("--scenario-file", scenario_file, "scenario file (replaces --regime)");
    app->add_option("--output", output, "output path (default stdout)");
    app->callback([this] { run(); });
  }

  void run() const {
    const ModelSpec m = load_model(model);
    if (const auto v = validate(m, horizon); !v.empty()) throw DomainError("invalid model: " + v.front());
    const Scenario sc = scenario_file.empty() ? builtin_scenario(parse_variant(regime), m)
                                              : parse_scenario(read_file(scenario_file));
    // replication 0 of a benchmark with the same seed
    const RngStream rs = RngStream(seed.value_or(default_seed()), 0).substream(0);
    const Trajectory tr = contaminate(simulate_ideal(m, horizon, rs.substream(0)), sc, m, rs.substream(100));
    emit(output, write_trajectory_csv(tr));
  }
};

struct CalibrateCmd {
  std::string model, output;
  int horizon = 50;
  double r_lower = 0.05, r_upper = 0.5;
  FilterFlags flags;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("calibrate", "clipping heights b_t and least favorable radius per step");
    app->add_option("--model", model, "model file (default: built-in steady-state model)");
    app->add_option("--horizon", horizon, "number of time steps T");
    app->add_option("--r-lower", r_lower, "lower end of the radius interval for r0");
    app->add_option("--r-upper", r_upper, "upper end of the radius interval for r0");
    app->add_option("--output", output, "output path (default stdout)");
    flags.add(app);
    app->callback([this] { run(); });
  }

  void run() const {
    const ModelSpec m = load_model(model);
    if (const auto v = validate(m, horizon); !v.empty()) throw DomainError("invalid model: " + v.front());
    FilterSettings s;
    flags.apply(s);
    const ClippingPolicy ao = s.ao_height ? ClippingPolicy::fixed(*s.ao_height) : calibrate_policy(m, horizon, Track::ao, s.ao);
    std::optional<ClippingPolicy> io;
    if (m.q == m.p) {
      try {
        io = s.io_height ? ClippingPolicy::fixed(*s.io_height) : calibrate_policy(m, horizon, Track::io, s.io);
      } catch (const SingularZError&) {
      }
    }
    std::ostringstream os;
    os << "t,b_ao,b_io,r0\n";
    FilterState state = init(m);
    for (int t = 1; t <= horizon; ++t) {
      const FilterState pred = predict(state, m);
      const double r0 = least_favorable_radius(step_geometry(pred, m, Track::ao, s.ao.norm), r_lower, r_upper, s.ao.mc);
      os << t << ',' << num(ao.height(t)) << ',' << (io ? num(io->height(t)) : "") << ',' << num(r0) << '\n';
      state = pred;
      state.sigma_filt = filtered_covariance(pred, m);
      state.x_filt = Vector::Zero(m.p);
    }
    emit(output, os.str());
  }
};

struct FilterCmd {
  std::string model, input, output, revisions;
  std::vector<std::string> filters{"rls-ioao"};
  FilterFlags flags;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("filter", "run filters over a trajectory CSV");
    app->add_option("--input", input, "trajectory CSV (as written by simulate)")->required();
    app->add_option("--model", model, "model file (default: built-in steady-state model)");
    app->add_option("--filter", filters, "kalman, rls-ao, rls-io, rls-ioao (repeatable)");
    app->add_option("--output", output, "estimates CSV (default stdout)");
    app->add_option("--revisions", revisions, "revision log CSV of the hybrid filter");
    flags.add(app);
    app->callback([this] { run(); });
  }

  void run() const {
    const ModelSpec m = load_model(model);
    const Trajectory tr = read_trajectory_csv(read_file(input));
    if (tr.states[0].size() != m.p || tr.observations[1].size() != m.q)
      throw NonConformalError("trajectory dimensions do not match the model");
    if (const auto v = validate(m, tr.horizon); !v.empty()) throw DomainError("invalid model: " + v.front());
    std::vector<FilterKind> kinds;
    for (const auto& f : filters) kinds.push_back(parse_filter(f));
    FilterSettings s;
    flags.apply(s);
    const ResolvedFilters rf = resolve_filters(m, tr.horizon, s, kinds);
    std::string out;
    std::vector<Revision> log;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      FilterOutput fo = run_filter(kinds[i], m, tr.observed(), rf);
      std::string csv = write_estimates_csv(kinds[i], fo);
      if (i > 0) csv.erase(0, csv.find('\n') + 1);
      out += csv;
      if (kinds[i] == FilterKind::rls_ioao) log = fo.revisions;
    }
    emit(output, out);
    if (!revisions.empty()) write_file(revisions, write_revisions_csv(log));
  }
};

struct BenchmarkCmd {
  std::string config, model, scenario_file, output, format, exclude;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications, threads, horizon;
  std::vector<std::string> regimes, filters;
  bool single = false;
  FilterFlags flags;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("benchmark", "empirical MSE over replications and regimes");
    app->add_option("--config", config, "key = value config file; flags override it");
    app->add_option("--model", model, "model file (default: built-in steady-state model)");
    app->add_option("--seed", seed, std::string("master seed (default from ") + kSeedEnv + ")");
    app->add_option("--replications", replications, "number of replications");
    app->add_option("--horizon", horizon, "number of time steps T");
    app->add_option("--threads", threads, "worker threads");
    app->add_option("--regime", regimes, "ideal, io, ao, io-and-ao (repeatable)");
    app->add_option("--filter", filters, "kalman, rls-ao, rls-io, rls-ioao (repeatable)");
    app->add_option("--scenario-file", scenario_file, "extra regime from a scenario file");
    app->add_option("--exclude", exclude, "comma separated time indices left out of the MSE");
    app->add_flag("--single-realization", single, "one replication (time-averaged MSE of a single path)");
    app->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
    app->add_option("--output", output, "output path (default stdout)");
    flags.add(app);
    app->callback([this] { run(); });
  }

  void run() const {
    BenchmarkInputs in;
    in.config.seed = default_seed();
    if (!config.empty()) apply_config(in, parse_key_values(read_file(config)));
    BenchmarkConfig& c = in.config;
    if (!model.empty()) in.model_file = model;
    if (seed) c.seed = *seed;
    if (replications) c.replications = *replications;
    if (horizon) c.horizon = *horizon;
    if (threads) c.threads = *threads;
    if (!regimes.empty()) in.regime_names = regimes;
    if (!filters.empty()) {
      c.filters.clear();
      for (const auto& f : filters) c.filters.push_back(parse_filter(f));
    }
    if (!scenario_file.empty()) in.scenario_file = scenario_file;
    if (!exclude.empty()) c.exclude = parse_index_list(exclude);
    if (single) c.single_realization = true;
    if (!format.empty()) in.format = format;
    if (!output.empty()) in.output = output;
    flags.apply(c.settings);
    finalize_inputs(in);
    const auto reports = run_benchmark(c);
    emit(in.output, emit_report(reports, in.format == "table" ? ReportFormat::table : ReportFormat::csv));
  }
};

struct SaddleCmd {
  std::string mean_x = "0", cov_x = "1", cov_eps = "1", output;
  double radius = 0.2;
  int samples = 1000000;
  std::optional<std::uint64_t> seed;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("saddle", "Monte Carlo check of the minimax saddle point");
    app->add_option("--mean-x", mean_x, "E X, comma separated (sets the dimension)");
    app->add_option("--cov-x", cov_x, "Var X: one value (times identity) or d*d row-major values");
    app->add_option("--cov-eps", cov_eps, "Var eps: one value (times identity) or d*d row-major values");
    app->add_option("--radius", radius, "contamination radius r in (0,1)");
    app->add_option("--samples", samples, "Monte Carlo sample size");
    app->add_option("--seed", seed, std::string("master seed (default from ") + kSeedEnv + ")");
    app->add_option("--output", output, "output path (default stdout)");
    app->callback([this] { run(); });
  }

  void run() const {
    const Vector mx = parse_numbers(mean_x);
    const Eigen::Index d = mx.size();
    if (d < 1) throw Error("--mean-x must not be empty");
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("--radius must lie in (0,1)");
    const SoModel m = solve_rho(SoModel::gaussian(mx, square(parse_numbers(cov_x), d, "--cov-x"),
                                                  square(parse_numbers(cov_eps), d, "--cov-eps"), radius));
    RngStream stream(seed.value_or(default_seed()), 0);
    const SaddleReport rep = saddle_check(m, samples, stream);
    std::ostringstream os;
    os << "quantity,value,se\n";
    os << "radius," << num(rep.radius) << ",\n";
    os << "rho," << num(rep.rho) << ",\n";
    os << "samples," << rep.samples << ",\n";
    os << "acceptance_rate," << num(rep.acceptance_rate) << ",\n";
    os << "normalization," << num(rep.normalization) << ',' << num(rep.normalization_se) << '\n';
    os << "posterior_trace," << num(rep.posterior_trace) << ",\n";
    os << "ideal_mse," << num(rep.ideal_mse) << ",\n";
    os << rep.least_favorable.label << ',' << num(rep.least_favorable.mse) << ',' << num(rep.least_favorable.se) << '\n';
    for (const auto& e : rep.alternatives) os << e.label << ',' << num(e.mse) << ',' << num(e.diff_se) << '\n';
    for (const auto& e : rep.competitors) os << e.label << ',' << num(e.mse) << ',' << num(e.diff_se) << '\n';
    os << "alternatives_ok," << rep.alternatives_ok << ",\n";
    os << "competitors_ok," << rep.competitors_ok << ",\n";
    emit(output, os.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robust Kalman filtering: rLS.AO, rLS.IO and the hybrid rLS.IOAO"};
  app.require_subcommand(1);
  SimulateCmd simulate;
  CalibrateCmd calibrate;
  FilterCmd filter;
  BenchmarkCmd benchmark;
  SaddleCmd saddle;
  simulate.add(app);
  calibrate.add(app);
  filter.add(app);
  benchmark.add(app);
  saddle.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const NumericalError& e) {
    std::cerr << "robkf: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "robkf: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
