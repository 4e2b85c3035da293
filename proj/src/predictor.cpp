#include "dlcz/predictor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dlcz {

bool same_orientation(double a, double b, double tol_rad) {
  const double d = std::remainder(a - b, std::numbers::pi);
  return std::abs(d) <= tol_rad;
}

void FringeModel::validate() const {
  if (!(eta >= 0.0 && eta <= kHalfPi)) throw std::invalid_argument("eta must lie in [0, pi/2]");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("fringe amplitude must be >= 0");
  if (!(background >= 0.0)) throw std::invalid_argument("fringe background must be >= 0");
}

double fringe_shape(double eta, double theta_s, double theta_i) {
  const double c = std::cos(eta), s = std::sin(eta);
  const double f = (c + s) * std::cos(theta_s - theta_i) + (c - s) * std::cos(theta_s + theta_i);
  return 0.5 * f * f;
}

double coincidence_rate(const FringeModel& model, const MeasurementSetting& setting) {
  return model.amplitude * fringe_shape(model.eta, setting.theta_s, setting.theta_i) +
         model.background;
}

double fringe_shape_peak(double eta, double theta_i) {
  // the bracket is 2 (cos eta cos ti cos ts + sin eta sin ti sin ts)
  const double a = std::cos(eta) * std::cos(theta_i);
  const double b = std::sin(eta) * std::sin(theta_i);
  return 2.0 * (a * a + b * b);
}

double fringe_visibility(const FringeModel& model, double theta_i) {
  const double c_max = model.amplitude * fringe_shape_peak(model.eta, theta_i) + model.background;
  const double c_min = model.background;
  if (c_max + c_min == 0.0) return 0.0;
  return (c_max - c_min) / (c_max + c_min);
}

Correlation correlation_E(const CountQuartet& q) {
  if (q.same < 0 || q.both_perp < 0 || q.signal_perp < 0 || q.idler_perp < 0) {
    throw std::invalid_argument("coincidence counts must be non-negative");
  }
  const double plus = q.same + q.both_perp;
  const double minus = q.signal_perp + q.idler_perp;
  const double total = plus + minus;
  if (total <= 0.0) throw std::invalid_argument("correlation undefined: no coincidence counts");
  // dE/dC_plus = 2 minus / T^2, dE/dC_minus = -2 plus / T^2, var(C) = C
  return {(plus - minus) / total, std::sqrt(4.0 * plus * minus / (total * total * total))};
}

ChshAngles ChshAngles::canonical() {
  return {deg_to_rad(-22.5), deg_to_rad(22.5), deg_to_rad(0.0), deg_to_rad(-45.0)};
}

std::array<MeasurementSetting, 4> ChshAngles::settings() const {
  return {MeasurementSetting{theta_s, theta_i}, MeasurementSetting{theta_s_prime, theta_i},
          MeasurementSetting{theta_s, theta_i_prime},
          MeasurementSetting{theta_s_prime, theta_i_prime}};
}

ChshResult chsh_S(const std::array<Correlation, 4>& e, const ChshAngles& angles) {
  ChshResult r;
  r.correlations = e;
  r.angles = angles;
  r.s = e[0].value + e[1].value + e[2].value - e[3].value;
  double var = 0.0;
  for (const auto& c : e) var += c.sigma * c.sigma;
  r.sigma_s = std::sqrt(var);
  return r;
}

double ideal_correlation(double eta, const MeasurementSetting& setting) {
  const FringeModel model{eta, 1.0, 0.0};
  const CountQuartet q{coincidence_rate(model, setting), coincidence_rate(model, setting.both_perp()),
                       coincidence_rate(model, setting.signal_perp()),
                       coincidence_rate(model, setting.idler_perp())};
  return correlation_E(q).value;
}

double predict_ideal_S(double eta, const ChshAngles& angles) {
  if (!(eta >= 0.0 && eta <= kHalfPi)) {
    throw std::invalid_argument("eta must lie in [0, pi/2], got " + std::to_string(eta));
  }
  const auto settings = angles.settings();
  return ideal_correlation(eta, settings[0]) + ideal_correlation(eta, settings[1]) +
         ideal_correlation(eta, settings[2]) - ideal_correlation(eta, settings[3]);
}

}  // namespace dlcz
