#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dlcz/predictor.hpp"
#include "dlcz/quantum_state.hpp"

using namespace dlcz;

namespace {

constexpr double kPi4 = std::numbers::pi / 4;

// E from Born-rule outcome probabilities of the ideal state.
double born_correlation(double eta, double ts, double ti) {
  const PolarizerOutcomes p = polarizer_outcomes(ideal_state(eta), ts, ti);
  return (p.pass_pass + p.block_block - p.pass_block - p.block_pass);
}

double born_S(double eta, const ChshAngles& a) {
  return born_correlation(eta, a.theta_s, a.theta_i) +
         born_correlation(eta, a.theta_s_prime, a.theta_i) +
         born_correlation(eta, a.theta_s, a.theta_i_prime) -
         born_correlation(eta, a.theta_s_prime, a.theta_i_prime);
}

ChshAngles random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("fringe shape at eta = pi/4") {
  for (int a = 0; a < 36; ++a) {
    for (int b = 0; b < 8; ++b) {
      const double ts = deg_to_rad(5.0 * a), ti = deg_to_rad(22.5 * b);
      CHECK(fringe_shape(kPi4, ts, ti) ==
            doctest::Approx(std::pow(std::cos(ts - ti), 2)).scale(1.0));
    }
  }
  CHECK(fringe_shape_peak(kPi4, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("fringe peak and visibility") {
  for (double eta : {0.2, 0.6, kPi4, 1.2}) {
    for (double ti : {0.0, 0.4, deg_to_rad(67.5)}) {
      double hi = 0.0, lo = 1e9;
      for (int k = 0; k < 20000; ++k) {
        const double v = fringe_shape(eta, std::numbers::pi * k / 20000.0, ti);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
      }
      CHECK(fringe_shape_peak(eta, ti) == doctest::Approx(hi).epsilon(1e-7));
      CHECK(lo == doctest::Approx(0.0).scale(1.0));
      const FringeModel m{eta, 150.0, 12.0};
      const double peak = 150.0 * hi + 12.0;
      CHECK(fringe_visibility(m, ti) ==
            doctest::Approx((peak - 12.0) / (peak + 12.0)).epsilon(1e-7));
      CHECK(coincidence_rate(m, {0.7, ti}) ==
            doctest::Approx(150.0 * fringe_shape(eta, 0.7, ti) + 12.0));
    }
  }
  CHECK(fringe_visibility({kPi4, 1.0, 0.0}, 0.3) == doctest::Approx(1.0));
  CHECK_THROWS_AS((FringeModel{kPi4, -1.0, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FringeModel{kPi4, 1.0, -1.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((FringeModel{2.0, 1.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("ideal correlation follows the Born rule") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
  for (int k = 0; k < 300; ++k) {
    const double eta = 0.5 * u(rng), ts = u(rng), ti = u(rng);
    CHECK(ideal_correlation(eta, {ts, ti}) ==
          doctest::Approx(born_correlation(eta, ts, ti)).scale(1.0));
  }
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      const double ts = 0.3 * a, ti = 0.2 * b;
      CHECK(ideal_correlation(kPi4, {ts, ti}) ==
            doctest::Approx(std::cos(2 * (ts - ti))).scale(1.0));
    }
  }
}

TEST_CASE("ideal S values") {
  CHECK(predict_ideal_S(0.81 * kPi4) ==
        doctest::Approx(born_S(0.81 * kPi4, ChshAngles::canonical())).epsilon(1e-12));
  CHECK(predict_ideal_S(0.81 * kPi4) == doctest::Approx(2.77).epsilon(0.01 / 2.77));
  CHECK(std::abs(predict_ideal_S(kPi4) - 2 * std::numbers::sqrt2) < 1e-12);
  // a product state cannot beat the classical bound
  CHECK(std::abs(predict_ideal_S(0.0)) <= 2.0 + 1e-12);
}

TEST_CASE("Tsirelson bound and eta symmetry") {
  std::mt19937_64 rng(2);
  for (int k = 0; k <= 100; ++k) {
    const double eta = std::numbers::pi / 2 * k / 100.0;
    for (int r = 0; r < 40; ++r) {
      const ChshAngles a = random_angles(rng);
      const double s = predict_ideal_S(eta, a);
      CHECK(std::abs(s) <= 2 * std::numbers::sqrt2 + 1e-12);
      CHECK(s == doctest::Approx(predict_ideal_S(std::numbers::pi / 2 - eta, a)).scale(1.0));
      CHECK(s == doctest::Approx(born_S(eta, a)).scale(1.0));
    }
  }
}

TEST_CASE("same orientation modulo pi") {
  CHECK(same_orientation(0.1, 0.1 + std::numbers::pi));
  CHECK(same_orientation(deg_to_rad(-22.5), deg_to_rad(157.5)));
  CHECK_FALSE(same_orientation(0.0, kHalfPi));
  CHECK_FALSE(same_orientation(0.0, 1e-6));
}

TEST_CASE("correlation from counts") {
  const Correlation e = correlation_E({90, 80, 10, 20});
  CHECK(e.value == doctest::Approx(140.0 / 200.0));
  // scaling all counts leaves E unchanged and shrinks sigma as 1/sqrt(k)
  for (double k : {2.0, 10.0, 1000.0}) {
    const Correlation s = correlation_E({90 * k, 80 * k, 10 * k, 20 * k});
    CHECK(s.value == doctest::Approx(e.value));
    CHECK(s.sigma == doctest::Approx(e.sigma / std::sqrt(k)));
  }
  // sigma^2 = 4 (A B) / T^3 with A, B the positive and negative sums
  CHECK(e.sigma == doctest::Approx(std::sqrt(4.0 * 170 * 30 / std::pow(200.0, 3))));
  CHECK_THROWS_AS(correlation_E({0, 0, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(correlation_E({1, -1, 0, 0}), std::invalid_argument);
}

TEST_CASE("correlation sigma against a Poisson bootstrap") {
  std::mt19937_64 rng(17);
  for (const CountQuartet q : {CountQuartet{400, 350, 60, 45}, CountQuartet{120, 100, 110, 90},
                               CountQuartet{30, 25, 5, 8}}) {
    const double sigma = correlation_E(q).sigma;
    double s1 = 0.0, s2 = 0.0;
    int used = 0;
    for (int b = 0; b < 100000; ++b) {
      const CountQuartet r{double(std::poisson_distribution<int>(q.same)(rng)),
                           double(std::poisson_distribution<int>(q.both_perp)(rng)),
                           double(std::poisson_distribution<int>(q.signal_perp)(rng)),
                           double(std::poisson_distribution<int>(q.idler_perp)(rng))};
      if (r.same + r.both_perp + r.signal_perp + r.idler_perp == 0) continue;
      const double v = correlation_E(r).value;
      s1 += v;
      s2 += v * v;
      ++used;
    }
    const double mean = s1 / used;
    const double boot = std::sqrt(s2 / used - mean * mean);
    CHECK(sigma == doctest::Approx(boot).epsilon(0.05));
  }
}

TEST_CASE("CHSH combination") {
  const ChshAngles a = ChshAngles::canonical();
  CHECK(rad_to_deg(a.theta_s) == doctest::Approx(-22.5));
  CHECK(rad_to_deg(a.theta_s_prime) == doctest::Approx(22.5));
  CHECK(rad_to_deg(a.theta_i) == doctest::Approx(0.0));
  CHECK(rad_to_deg(a.theta_i_prime) == doctest::Approx(-45.0));
  const auto s = a.settings();
  CHECK(s[1].theta_s == a.theta_s_prime);
  CHECK(s[2].theta_i == a.theta_i_prime);
  const ChshResult r = chsh_S({{{0.5, 0.03}, {0.4, 0.04}, {0.3, 0.12}, {-0.2, 0.0}}}, a);
  CHECK(r.s == doctest::Approx(1.4));
  CHECK(r.sigma_s == doctest::Approx(0.13));
}

TEST_CASE("correlation examples") {
  CHECK(correlation_E({100, 100, 0, 0}).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(correlation_E({50, 50, 50, 50}).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  const ChshResult r = chsh_S({{{0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}, {0.5, 0.0}}},
                              ChshAngles::canonical());
  CHECK(r.s == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("E from rate quartets is cos 2(ts - ti) at eta = pi/4") {
  const FringeModel m{kPi4, 1.0, 0.0};
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      const double ts = std::numbers::pi * a / 20, ti = std::numbers::pi * b / 20;
      const CountQuartet q{coincidence_rate(m, {ts, ti}),
                           coincidence_rate(m, {ts + kHalfPi, ti + kHalfPi}),
                           coincidence_rate(m, {ts + kHalfPi, ti}),
                           coincidence_rate(m, {ts, ti + kHalfPi})};
      CHECK(std::abs(correlation_E(q).value - std::cos(2 * (ts - ti))) <= 1e-12);
    }
  }
}

TEST_CASE("coincidence rate is bounded below by background and has period pi") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  for (int k = 0; k < 500; ++k) {
    const FringeModel m{0.25 * u(rng), 10.0 * u(rng), 0.5 * u(rng)};
    const double ts = u(rng), ti = u(rng);
    const double r = coincidence_rate(m, {ts, ti});
    CHECK(r >= m.background);
    CHECK(coincidence_rate(m, {ts + std::numbers::pi, ti}) ==
          doctest::Approx(r).epsilon(1e-12));
    CHECK(coincidence_rate(m, {ts, ti + std::numbers::pi}) ==
          doctest::Approx(r).epsilon(1e-12));
  }
}
