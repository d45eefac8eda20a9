#include "doctest.h"

#include <cmath>

#include "robkf/harness.hpp"
#include "robkf/io.hpp"

using namespace robkf;

TEST_CASE("empirical MSE with exclusion") {
  const std::vector<Vector> truth{Vector::Constant(1, 0.0), Vector::Constant(1, 0.0), Vector::Constant(1, 0.0)};
  const std::vector<Vector> est{Vector::Constant(1, 1.0), Vector::Constant(1, -1.0), Vector::Constant(1, 7.0)};
  CHECK(empirical_mse(truth, truth) == 0.0);
  CHECK(empirical_mse(truth, est, {3}) == 1.0);
  CHECK_THROWS_AS(empirical_mse(truth, est, {1, 2, 3}), EmptyAfterExclusionError);
  CHECK_THROWS_AS(empirical_mse(truth, std::vector<Vector>(2, Vector::Zero(1))), NonConformalError);
}

TEST_CASE("pairwise sum is order-fixed and accurate") {
  std::vector<double> xs(1000, 0.1);
  CHECK(pairwise_sum(xs) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("Kalman on ideal data is near the Riccati filter variance") {
  BenchmarkConfig cfg;
  cfg.filters = {FilterKind::kalman};
  cfg.regimes = {builtin_regimes(cfg.model)[0]};
  cfg.horizon = 2000;
  cfg.replications = 4;
  const auto rep = run_benchmark(cfg);
  const MseCell* c = rep[0].find(FilterKind::kalman, "filter");
  REQUIRE(c);
  CHECK(c->mse == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(0.05));
  const MseCell* p = rep[0].find(FilterKind::kalman, "pred");
  CHECK(p->mse > c->mse);
}

TEST_CASE("unclipped rLS.AO reproduces the Kalman row") {
  BenchmarkConfig cfg;
  cfg.filters = {FilterKind::kalman, FilterKind::rls_ao};
  cfg.settings.ao_height = kNoClipping;
  cfg.replications = 10;
  for (const MseReport& r : run_benchmark(cfg)) {
    CHECK(r.find(FilterKind::kalman, "filter")->mse ==
          doctest::Approx(r.find(FilterKind::rls_ao, "filter")->mse).epsilon(1e-12));
  }
}

TEST_CASE("thread count does not change the report") {
  BenchmarkConfig cfg;
  cfg.replications = 20;
  const std::string one = emit_report(run_benchmark(cfg), ReportFormat::csv);
  cfg.threads = 4;
  CHECK(emit_report(run_benchmark(cfg), ReportFormat::csv) == one);
}

TEST_CASE("csv report round-trips and the table marks minima") {
  BenchmarkConfig cfg;
  cfg.replications = 5;
  cfg.exclude = {23, 10};
  const auto reps = run_benchmark(cfg);
  const std::string csv = emit_report(reps, ReportFormat::csv);
  CHECK(csv.rfind("regime,filter,kind,mse,se,replications,excluded\n", 0) == 0);
  CHECK(csv.find(",5,10;23\n") != std::string::npos);
  CHECK(emit_report(parse_report_csv(csv), ReportFormat::csv) == csv);
  const std::string table = emit_report(reps, ReportFormat::table);
  CHECK(table.find('*') != std::string::npos);
  CHECK(table.find("io-and-ao") != std::string::npos);
}

TEST_CASE("single realization mode uses one replication with zero SE") {
  BenchmarkConfig cfg;
  cfg.single_realization = true;
  const auto reps = run_benchmark(cfg);
  CHECK(reps[0].replications == 1);
  CHECK(reps[0].cells[0].se == 0.0);
}

TEST_CASE("config validation") {
  BenchmarkConfig cfg;
  cfg.filters.clear();
  CHECK_THROWS_AS(run_benchmark(cfg), DomainError);
  cfg = {};
  cfg.replications = 0;
  CHECK_THROWS_AS(run_benchmark(cfg), DomainError);
  CHECK_THROWS_AS(parse_filter("acm"), Error);
}

TEST_CASE("paired difference") {
  const auto d = paired_difference({1, 2, 3, 4}, {0, 1, 2, 3});
  CHECK(d.mean == 1.0);
  CHECK(d.se == 0.0);
}
