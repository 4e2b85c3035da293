#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlcz/analysis.hpp"
#include "dlcz/errors.hpp"
#include "dlcz/fitting.hpp"

using namespace dlcz;

TEST_CASE("Levenberg-Marquardt on the Rosenbrock valley") {
  const ResidualFunction fn = [](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                 Eigen::MatrixXd& J) {
    r.resize(2);
    J.resize(2, 2);
    r << 10 * (p(1) - p(0) * p(0)), 1 - p(0);
    J << -20 * p(0), 10, -1, 0;
  };
  const auto fit = levenberg_marquardt(fn, Eigen::Vector2d(-1.2, 1.0));
  CHECK(fit.params(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.params(1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.chi2 < 1e-20);
}

TEST_CASE("Levenberg-Marquardt linear model gives the normal-equation covariance") {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{1.1, 2.9, 5.2, 7.1, 8.8};
  const ResidualFunction fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                  Eigen::MatrixXd& J) {
    r.resize(5);
    J.resize(5, 2);
    for (int k = 0; k < 5; ++k) {
      r(k) = y[k] - (p(0) + p(1) * x[k]);
      J(k, 0) = -1;
      J(k, 1) = -x[k];
    }
  };
  const auto fit = levenberg_marquardt(fn, Eigen::Vector2d(0, 0));
  CHECK(fit.params(1) == doctest::Approx(1.96));
  CHECK(fit.params(0) == doctest::Approx(1.1));
  // (X^T X)^-1 for x = 0..4
  CHECK(fit.covariance(1, 1) == doctest::Approx(0.1));
  CHECK(fit.covariance(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("Levenberg-Marquardt reports non-convergence") {
  const ResidualFunction fn = [](const Eigen::VectorXd& p, Eigen::VectorXd& r,
                                 Eigen::MatrixXd& J) {
    r.resize(1);
    J.resize(1, 1);
    r(0) = std::exp(p(0));
    J(0, 0) = std::exp(p(0));
  };
  LevenbergMarquardtOptions opt;
  opt.max_iterations = 5;
  CHECK_THROWS_AS(levenberg_marquardt(fn, Eigen::VectorXd::Constant(1, 0.0), opt),
                  NumericalError);
}

TEST_CASE("noiseless fringe is recovered exactly") {
  const double eta = 0.81 * std::numbers::pi / 4;
  for (double ti_deg : {0.0, 45.0, 67.5}) {
    for (double phase_deg : {-30.0, 0.0, 12.0, 80.0}) {
      const double ti = deg_to_rad(ti_deg), phase = deg_to_rad(phase_deg);
      std::vector<FringePoint> pts;
      for (int k = 0; k < 24; ++k) {
        const double ts = deg_to_rad(7.5 * k);
        pts.push_back({ts, 300.0 * fringe_shape(eta, ts + phase, ti) + 20.0, 1.0});
      }
      const FringeFit fit = fit_fringe(pts, eta, ti);
      CAPTURE(ti_deg);
      CAPTURE(phase_deg);
      CHECK(fit.amplitude == doctest::Approx(300.0).epsilon(1e-6));
      CHECK(fit.background == doctest::Approx(20.0).epsilon(1e-6));
      CHECK(fit.chi2 < 1e-8);
      CHECK(fit.visibility ==
            doctest::Approx(fringe_visibility({eta, 300.0, 20.0}, ti)).epsilon(1e-8));
      // the fringe shape has period pi in theta_s
      CHECK(same_orientation(fit.phase_offset, phase, 1e-6));
    }
  }
}

TEST_CASE("fringe fit input checks") {
  const double eta = std::numbers::pi / 4;
  std::vector<FringePoint> few{{0, 1, 1}, {0.5, 2, 1}, {2.0, 3, 1}};
  CHECK_THROWS_AS(fit_fringe(few, eta, 0.0), std::invalid_argument);
  std::vector<FringePoint> narrow;
  for (int k = 0; k < 10; ++k) narrow.push_back({0.1 * k, 10.0 + k, 1.0});
  CHECK_THROWS_AS(fit_fringe(narrow, eta, 0.0), std::invalid_argument);
  std::vector<FringePoint> bad_sigma{{0, 1, 1}, {0.5, 2, 0}, {1.0, 3, 1}, {2.0, 3, 1}};
  CHECK_THROWS_AS(fit_fringe(bad_sigma, eta, 0.0), std::invalid_argument);
  // eta = 0 and theta_i = 90 degrees: the idler polarizer blocks every pair
  std::vector<FringePoint> ok{{0, 1, 1}, {0.5, 2, 1}, {1.0, 3, 1}, {2.0, 3, 1}};
  CHECK_THROWS_AS(fit_fringe(ok, 0.0, kHalfPi), std::invalid_argument);
}

TEST_CASE("Poisson-weighted fringe fit is close to unbiased") {
  const double eta = 0.81 * std::numbers::pi / 4, ti = deg_to_rad(67.5);
  const double amp = 180.0 / fringe_shape_peak(eta, ti), bg = 10.0;
  std::mt19937_64 rng(4);
  double sum = 0.0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    std::vector<FringePoint> pts;
    for (int k = 0; k < 36; ++k) {
      const double ts = deg_to_rad(5.0 * k);
      pts.push_back(
          {ts, double(std::poisson_distribution<int>(amp * fringe_shape(eta, ts, ti) + bg)(rng)),
           1.0});
    }
    sum += fit_fringe_counts(pts, eta, ti).visibility;
  }
  const double truth = fringe_visibility({eta, amp, bg}, ti);
  CHECK(sum / runs == doctest::Approx(truth).epsilon(0.004));
}

TEST_CASE("noiseless decay is recovered exactly") {
  std::vector<DecayPoint> pts;
  for (double t : {200.0, 1000.0, 2000.0, 4000.0, 7000.0}) {
    pts.push_back({t, 1.2 + 3.0 * std::exp(-t / 3700.0), 0.01});
  }
  const DecayFit fit = fit_exponential(pts);
  CHECK(fit.tau_ns == doctest::Approx(3700.0).epsilon(1e-7));
  CHECK(fit.floor == doctest::Approx(1.2).epsilon(1e-7));
  CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(fit.chi2 < 1e-12);
  CHECK(std::isfinite(fit.sigma_tau_ns));
}

TEST_CASE("decay fit input checks") {
  CHECK_THROWS_AS(fit_exponential({{1, 2, 0.1}, {1, 2.1, 0.1}, {2, 1.5, 0.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_exponential({{1, 2, 0.1}, {2, 1.8, -1.0}, {3, 1.5, 0.1}}),
                  std::invalid_argument);
  // an exponential rise cannot be described with tau > 0
  std::vector<DecayPoint> rising;
  for (double t : {0.0, 1.0, 2.0, 3.0, 4.0}) rising.push_back({t, std::exp(t), 0.01});
  CHECK_THROWS_AS(fit_exponential(rising), NumericalError);
}
