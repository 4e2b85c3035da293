#pragma once

#include <array>
#include <numbers>

namespace dlcz {

inline constexpr double kHalfPi = std::numbers::pi / 2;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Polarizer orientations (radians) in front of D1 (signal) and D2 (idler).
struct MeasurementSetting {
  double theta_s = 0.0;
  double theta_i = 0.0;

  MeasurementSetting signal_perp() const { return {theta_s + kHalfPi, theta_i}; }
  MeasurementSetting idler_perp() const { return {theta_s, theta_i + kHalfPi}; }
  MeasurementSetting both_perp() const { return {theta_s + kHalfPi, theta_i + kHalfPi}; }
};

/// Same polarizer orientation modulo pi, within `tol_rad`.
bool same_orientation(double a, double b, double tol_rad = 1e-9);

struct FringeModel {
  double eta = std::numbers::pi / 4;
  double amplitude = 1.0;
  double background = 0.0;

  void validate() const;
};

/// [(cos eta + sin eta) cos(ts - ti) + (cos eta - sin eta) cos(ts + ti)]^2 / 2,
/// scaled so that the eta = pi/4 maximum is 1.
double fringe_shape(double eta, double theta_s, double theta_i);

/// amplitude * fringe_shape + background.
double coincidence_rate(const FringeModel& model, const MeasurementSetting& setting);

/// Largest value of fringe_shape over theta_s at fixed theta_i (the minimum
/// is always 0).
double fringe_shape_peak(double eta, double theta_i);

/// (C_max - C_min) / (C_max + C_min) of coincidence_rate swept over theta_s.
double fringe_visibility(const FringeModel& model, double theta_i);

/// Coincidence counts entering one correlation estimate.
struct CountQuartet {
  double same = 0.0;         // (theta_s, theta_i)
  double both_perp = 0.0;    // (theta_s+90, theta_i+90)
  double signal_perp = 0.0;  // (theta_s+90, theta_i)
  double idler_perp = 0.0;   // (theta_s, theta_i+90)
};

struct Correlation {
  double value = 0.0;
  double sigma = 0.0;
};

/// E = (C + C_perp,perp - C_perp,. - C_.,perp) / sum, with sigma from
/// independent Poisson counts propagated to first order. Throws
/// std::invalid_argument on negative counts or a zero total.
Correlation correlation_E(const CountQuartet& q);

/// Polarizer angles of a CHSH measurement (radians).
struct ChshAngles {
  double theta_s = 0.0;
  double theta_s_prime = 0.0;
  double theta_i = 0.0;
  double theta_i_prime = 0.0;

  /// theta_s = -22.5, theta_i = 0, theta_s' = 22.5, theta_i' = -45 degrees.
  static ChshAngles canonical();

  /// (s,i), (s',i), (s,i'), (s',i'): the order in which S adds them.
  std::array<MeasurementSetting, 4> settings() const;
};

struct ChshResult {
  std::array<Correlation, 4> correlations;  // ChshAngles::settings() order
  double s = 0.0;
  double sigma_s = 0.0;
  ChshAngles angles;
};

/// S = E1 + E2 + E3 - E4, sigma_S as the quadrature sum of the four sigmas.
ChshResult chsh_S(const std::array<Correlation, 4>& correlations, const ChshAngles& angles);

/// Correlation of noiseless, background-free fringe counts.
double ideal_correlation(double eta, const MeasurementSetting& setting);

/// S from zero-background fringes at each setting and its perpendicular
/// companions.
double predict_ideal_S(double eta, const ChshAngles& angles = ChshAngles::canonical());

}  // namespace dlcz
