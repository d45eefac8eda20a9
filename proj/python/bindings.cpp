#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robkf/io.hpp"
#include "robkf/saddle.hpp"

namespace py = pybind11;
using namespace robkf;

namespace {

std::vector<Vector> rows(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

Matrix stack(const std::vector<Vector>& vs, std::size_t from = 0) {
  if (vs.size() <= from) return Matrix();
  Matrix m(static_cast<Eigen::Index>(vs.size() - from), vs[from].size());
  for (std::size_t i = from; i < vs.size(); ++i) m.row(static_cast<Eigen::Index>(i - from)) = vs[i].transpose();
  return m;
}

FilterSettings settings(double r_ao, double r_io, std::optional<double> b_ao, std::optional<double> b_io,
                        bool switching) {
  FilterSettings s;
  s.ao = Calibration::radius(r_ao);
  s.io = Calibration::radius(r_io);
  s.ao_height = b_ao;
  s.io_height = b_io;
  s.switching = switching;
  return s;
}

}  // namespace

PYBIND11_MODULE(_robkf, m) {
  m.doc() = "robust Kalman filtering (rLS.AO, rLS.IO, rLS.IOAO)";

  py::register_exception<Error>(m, "Error");
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ModelSpec>(m, "Model")
      .def(py::init([](Matrix F, Matrix Z, Matrix Q, Matrix V, std::optional<Vector> a0, std::optional<Matrix> Q0) {
             const auto p = F.rows();
             ModelSpec s = ModelSpec::constant(F, Z, Q, V, a0.value_or(Vector::Zero(p)),
                                               Q0.value_or(Matrix::Identity(p, p)));
             if (const auto v = validate(s, 1); !v.empty()) throw DomainError("invalid model: " + v.front());
             return s;
           }),
           py::arg("F"), py::arg("Z"), py::arg("Q"), py::arg("V"), py::arg("a0") = py::none(),
           py::arg("Q0") = py::none())
      .def_readonly("p", &ModelSpec::p)
      .def_readonly("q", &ModelSpec::q)
      .def_static("from_text", &parse_model)
      .def("to_text", &format_model);

  m.def("steady_state_model", &steady_state_model);

  m.def(
      "simulate",
      [](const ModelSpec& model, int horizon, std::uint64_t seed, const std::string& regime) {
        const RngStream rs = RngStream(seed, 0).substream(0);
        const Trajectory tr = contaminate(simulate_ideal(model, horizon, rs.substream(0)),
                                          builtin_scenario(parse_variant(regime), model), model, rs.substream(100));
        std::vector<std::string> marks;
        for (std::size_t t = 1; t < tr.marks.size(); ++t) marks.push_back(to_string(tr.marks[t]));
        return py::make_tuple(stack(tr.states), stack(tr.observations, 1), marks);
      },
      py::arg("model"), py::arg("horizon") = 50, py::arg("seed") = 20100701, py::arg("regime") = "ideal",
      "returns (states for t=0..T, observations for t=1..T, marks)");

  m.def("huberize", [](const Vector& v, double b) { return huberize(v, b); }, py::arg("v"), py::arg("b"));

  m.def(
      "run_filter",
      [](const std::string& name, const ModelSpec& model, const Matrix& ys, double r_ao, double r_io,
         std::optional<double> b_ao, std::optional<double> b_io, bool switching) {
        const FilterKind kind = parse_filter(name);
        const std::vector<Vector> obs = rows(ys);
        const ResolvedFilters rf = resolve_filters(model, static_cast<int>(obs.size()),
                                                   settings(r_ao, r_io, b_ao, b_io, switching), {kind});
        const FilterOutput out = run_filter(kind, model, obs, rf);
        return py::make_tuple(stack(out.filtered), stack(out.predicted), out.revised);
      },
      py::arg("name"), py::arg("model"), py::arg("observations"), py::arg("ao_radius") = 0.1,
      py::arg("io_radius") = 0.1, py::arg("ao_height") = py::none(), py::arg("io_height") = py::none(),
      py::arg("switching") = true, "returns (filtered, predicted, revised) for t=1..T");

  m.def(
      "clipping_heights",
      [](const ModelSpec& model, int horizon, const std::string& track, double radius) {
        const ClippingPolicy p =
            calibrate_policy(model, horizon, track == "io" ? Track::io : Track::ao, Calibration::radius(radius));
        std::vector<double> out;
        for (int t = 1; t <= horizon; ++t) out.push_back(p.height(t));
        return out;
      },
      py::arg("model"), py::arg("horizon"), py::arg("track") = "ao", py::arg("radius") = 0.1);

  m.def("calibrate_radius_scalar", [](double s, double r) { return calibrate_b_radius(scalar_geometry(s, 1.0), r); },
        py::arg("variance"), py::arg("radius"));
  m.def(
      "least_favorable_radius_scalar",
      [](double s, double trace_cond, double r_l, double r_u) {
        return least_favorable_radius(scalar_geometry(s, trace_cond), r_l, r_u);
      },
      py::arg("variance"), py::arg("trace_cond"), py::arg("r_lower"), py::arg("r_upper"));
  m.def("chi_square_quantile", &chi_square_quantile, py::arg("dof"), py::arg("p"));

  m.def(
      "benchmark",
      [](int replications, std::uint64_t seed, std::vector<std::string> regimes, std::vector<std::string> filters,
         std::vector<int> exclude, int threads) {
        BenchmarkConfig cfg;
        cfg.replications = replications;
        cfg.seed = seed;
        cfg.exclude = std::move(exclude);
        cfg.threads = threads;
        if (!filters.empty()) {
          cfg.filters.clear();
          for (const auto& f : filters) cfg.filters.push_back(parse_filter(f));
        }
        for (const auto& r : regimes) {
          const RegimeVariant v = parse_variant(r);
          cfg.regimes.push_back({to_string(v), builtin_scenario(v, cfg.model)});
        }
        return emit_report(run_benchmark(cfg), ReportFormat::csv);
      },
      py::arg("replications") = 200, py::arg("seed") = 20100701, py::arg("regimes") = std::vector<std::string>{},
      py::arg("filters") = std::vector<std::string>{}, py::arg("exclude") = std::vector<int>{},
      py::arg("threads") = 1, "report CSV over the built-in regimes");

  m.def(
      "saddle_check",
      [](double radius, int samples, std::uint64_t seed) {
        const SoModel so =
            solve_rho(SoModel::gaussian(Vector::Zero(1), Matrix::Identity(1, 1), Matrix::Identity(1, 1), radius));
        RngStream stream(seed, 0);
        const SaddleReport rep = saddle_check(so, samples, stream);
        py::dict d;
        d["rho"] = rep.rho;
        d["normalization"] = rep.normalization;
        d["normalization_se"] = rep.normalization_se;
        d["least_favorable_mse"] = rep.least_favorable.mse;
        d["alternatives_ok"] = rep.alternatives_ok;
        d["competitors_ok"] = rep.competitors_ok;
        return d;
      },
      py::arg("radius") = 0.2, py::arg("samples") = 100000, py::arg("seed") = 1,
      "scalar model with Var X = Var eps = 1");
}
