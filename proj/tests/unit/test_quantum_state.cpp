#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlcz/analysis.hpp"
#include "dlcz/predictor.hpp"
#include "dlcz/quantum_state.hpp"

using namespace dlcz;

TEST_CASE("ideal state is pure and normalized") {
  for (int k = 0; k <= 20; ++k) {
    const double eta = kHalfPi * k / 20.0;
    const TwoQubitState s = ideal_state(eta);
    CHECK(s.rho().trace().real() == doctest::Approx(1.0));
    CHECK(s.purity() == doctest::Approx(1.0));
    CHECK(s.rho()(0, 0).real() == doctest::Approx(std::cos(eta) * std::cos(eta)));
    CHECK(s.rho()(3, 3).real() == doctest::Approx(std::sin(eta) * std::sin(eta)));
  }
  CHECK_THROWS_AS(ideal_state(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(ideal_state(2.0), std::invalid_argument);
}

TEST_CASE("concurrence of the ideal state is sin(2 eta)") {
  for (int k = 0; k < 50; ++k) {
    const double eta = kHalfPi * k / 49.0;
    CHECK(std::abs(concurrence(ideal_state(eta)) - std::sin(2 * eta)) <= 1e-12);
  }
  CHECK(concurrence(ideal_state(0.0)) == doctest::Approx(0.0).scale(1.0));
  CHECK(concurrence(ideal_state(std::numbers::pi / 4)) == doctest::Approx(1.0));
  CHECK(concurrence(ideal_state(0.81 * std::numbers::pi / 4)) ==
        doctest::Approx(0.95579).epsilon(1e-5));
}

TEST_CASE("white noise") {
  const TwoQubitState pure = ideal_state(std::numbers::pi / 4);
  for (double v : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0}) {
    const TwoQubitState s = add_white_noise(pure, v);
    CHECK(s.rho().trace().real() == doctest::Approx(1.0));
    CHECK(s.purity() == doctest::Approx((1 + 3 * v * v) / 4));
    CHECK(concurrence(s) == doctest::Approx(std::max(0.0, (3 * v - 1) / 2)).scale(1.0));
  }
  CHECK((add_white_noise(pure, 1.0).rho() - pure.rho()).norm() < 1e-15);
  CHECK((add_white_noise(pure, 0.0).rho() - Matrix4c::Identity() / 4.0).norm() < 1e-15);
  CHECK_THROWS_AS(add_white_noise(pure, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(add_white_noise(pure, -0.1), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = 2.0;
  rho(3, 3) = 2.0;
  const TwoQubitState s = TwoQubitState::from_unnormalized(rho);
  CHECK(s.raw_trace() == doctest::Approx(4.0));
  CHECK(s.rho()(0, 0).real() == doctest::Approx(0.5));

  Matrix4c non_hermitian = rho;
  non_hermitian(0, 1) = 0.3;
  CHECK_THROWS_AS(TwoQubitState::from_unnormalized(non_hermitian), std::invalid_argument);
  Matrix4c negative = Matrix4c::Zero();
  negative(0, 0) = 1.0;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(TwoQubitState::from_unnormalized(negative), std::invalid_argument);
  CHECK_THROWS_AS(TwoQubitState::from_unnormalized(Matrix4c::Zero()), std::invalid_argument);
}

TEST_CASE("polarizer outcomes are probabilities") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (int k = 0; k < 200; ++k) {
    const double eta = 0.5 * (u(rng) + std::numbers::pi) / 2;
    const double ts = u(rng), ti = u(rng);
    const auto s = add_white_noise(ideal_state(eta), 0.7);
    const PolarizerOutcomes p = polarizer_outcomes(s, ts, ti);
    CHECK(p.pass_pass + p.pass_block + p.block_pass + p.block_block == doctest::Approx(1.0));
    CHECK(p.pass_pass >= -1e-15);
    CHECK(p.block_block >= -1e-15);
    // signal marginal of the noisy state
    const double c = std::cos(eta), sn = std::sin(eta);
    const double marginal = 0.7 * (c * c * std::cos(ts) * std::cos(ts) +
                                   sn * sn * std::sin(ts) * std::sin(ts)) +
                            0.3 * 0.5;
    CHECK(p.signal_pass() == doctest::Approx(marginal));
  }
}

TEST_CASE("pass-pass probability follows the fringe shape") {
  for (double eta : {0.3, std::numbers::pi / 4, 0.81 * std::numbers::pi / 4}) {
    for (int a = 0; a < 12; ++a) {
      for (int b = 0; b < 12; ++b) {
        const double ts = a * 0.3, ti = b * 0.27;
        const double pp = polarizer_outcomes(ideal_state(eta), ts, ti).pass_pass;
        CHECK(2 * pp == doctest::Approx(fringe_shape(eta, ts, ti)).scale(1.0));
      }
    }
  }
}

TEST_CASE("phase matching") {
  const double k = 2 * std::numbers::pi / 795e-9;
  // counter-propagating write and read: the idler leaves opposite the signal
  const double angle = 2.0 * std::numbers::pi / 180.0;
  WaveVectors v{{0, 0, k}, {0, 0, -k}, {k * std::sin(angle), 0, k * std::cos(angle)}};
  const Eigen::Vector3d ki = phase_match(v);
  CHECK((ki + v.signal).norm() == doctest::Approx(0.0).scale(k));
  // 2 degrees between signal and write
  CHECK(std::acos(v.signal.normalized().dot(v.write.normalized())) ==
        doctest::Approx(angle).epsilon(1e-12));
  WaveVectors w{{1, 2, 3}, {4, 5, 6}, {0.5, 0.5, 0.5}};
  CHECK((phase_match(w) - Eigen::Vector3d(4.5, 6.5, 8.5)).norm() < 1e-12);
}

TEST_CASE("white noise at V = 0.9 gives a 0.90 fringe visibility") {
  const TwoQubitState s = add_white_noise(ideal_state(std::numbers::pi / 4), 0.9);
  for (double ti_deg : {0.0, 67.5}) {
    const double ti = deg_to_rad(ti_deg);
    std::vector<FringePoint> pts;
    for (int k = 0; k < 36; ++k) {
      const double ts = deg_to_rad(5.0 * k);
      pts.push_back({ts, 1000.0 * polarizer_outcomes(s, ts, ti).pass_pass, 1.0});
    }
    CHECK(fit_fringe(pts, std::numbers::pi / 4, ti).visibility ==
          doctest::Approx(0.90).epsilon(1e-9));
  }
}

TEST_CASE("phase matching examples") {
  const double k = 2 * std::numbers::pi / 795e-9, angle = deg_to_rad(2.0);
  const Eigen::Vector3d kw(0, 0, k);
  // k_s = k_w leaves k_i = k_r
  const Eigen::Vector3d kr(0.1 * k, 0.0, -k);
  CHECK((phase_match({kw, kr, kw}) - kr).norm() == doctest::Approx(0.0).scale(k));
  // signal 2 degrees off the write beam: idler 2 degrees off the read beam
  const WaveVectors v{kw, -kw, {k * std::sin(angle), 0, k * std::cos(angle)}};
  const Eigen::Vector3d ki = phase_match(v);
  CHECK(std::acos(ki.normalized().dot(v.read.normalized())) ==
        doctest::Approx(angle).epsilon(1e-12));
}
