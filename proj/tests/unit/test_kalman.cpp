#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "robkf/kalman.hpp"

using namespace robkf;

TEST_CASE("classical filter matches the textbook recursion on random models") {
  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 1 + rep % 3, q = 1 + (rep / 3) % 3;
    const ModelSpec m = oracle::random_model(gen, p, q);
    const Trajectory tr = simulate_ideal(m, 30, RngStream(rep, 0));
    const auto ours = filter_run(m, tr.observed(), classic_corrector(m));
    const std::vector<Vector> ys(tr.observations.begin() + 1, tr.observations.end());
    const auto ref = oracle::kalman(m, ys);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      CHECK((ours[k].x_filt - ref[k].x_filt).norm() < 1e-9);
      CHECK((ours[k].x_pred - ref[k].x_pred).norm() < 1e-9);
      CHECK((ours[k].sigma_filt - ref[k].p_filt).norm() < 1e-9);
      CHECK((ours[k].gain - ref[k].gain).norm() < 1e-9);
    }
  }
}

TEST_CASE("steady-state Riccati limit") {
  const ModelSpec m = steady_state_model();
  const FilterState lim = riccati_limit(m);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(lim.sigma_pred(0, 0) == doctest::Approx(golden).epsilon(1e-12));
  CHECK(lim.gain(0, 0) == doctest::Approx(golden - 1.0).epsilon(1e-12));
  CHECK(lim.innovation_cov(0, 0) == doctest::Approx(golden + 1.0).epsilon(1e-12));
}

TEST_CASE("uninformative observation leaves the prediction") {
  ModelSpec m = steady_state_model();
  m.V = [](int) { return Matrix::Constant(1, 1, 1e12); };
  FilterState s = predict(init(m), m);
  s = correct_classic(s, Vector::Constant(1, 5.0), m);
  CHECK(std::abs(s.x_filt[0] - s.x_pred[0]) < 1e-6);
}

TEST_CASE("covariances are symmetric and PSD; NotSpd names the time") {
  std::mt19937_64 gen(3);
  const ModelSpec m = oracle::random_model(gen, 3, 2);
  FilterState s = init(m);
  for (int t = 1; t <= 10; ++t) {
    s = correct_classic(predict(s, m), Vector::Zero(2), m);
    CHECK(s.sigma_filt == s.sigma_filt.transpose());
    CHECK(is_psd(s.sigma_filt));
    CHECK(is_psd(s.sigma_pred - s.sigma_filt));
  }
  ModelSpec bad = steady_state_model();
  bad.V = [](int t) { return Matrix::Constant(1, 1, t == 3 ? -5.0 : 1.0); };
  FilterState b = init(bad);
  b = correct_classic(predict(b, bad), Vector::Zero(1), bad);
  b = correct_classic(predict(b, bad), Vector::Zero(1), bad);
  try {
    predict(b, bad);
    FAIL("expected NotSpdError");
  } catch (const NotSpdError& e) {
    CHECK(std::string(e.what()).find("t=3") != std::string::npos);
  }
}

TEST_CASE("observation dimension is checked") {
  const ModelSpec m = steady_state_model();
  CHECK_THROWS_AS(correct_classic(predict(init(m), m), Vector::Zero(2), m), NonConformalError);
}
