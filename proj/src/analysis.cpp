#include "dlcz/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dlcz/errors.hpp"
#include "dlcz/fitting.hpp"

namespace dlcz {

CoincidenceCounts& CoincidenceCounts::operator+=(const CoincidenceCounts& o) {
  trials += o.trials;
  singles_s += o.singles_s;
  singles_i += o.singles_i;
  coincidences += o.coincidences;
  return *this;
}

CoincidenceCounts CoincidenceTable::pooled() const {
  CoincidenceCounts total;
  for (const auto& [id, c] : by_setting) total += c;
  return total;
}

CoincidenceCounter::CoincidenceCounter(const EventLogHeader& header, const GateConfig& gates)
    : header_(header), gates_(gates) {
  gates_.validate();
  table_.settings = header.settings;
  for (const auto& s : header.settings) {
    table_.by_setting[s.id].trials = header.trials_per_setting;
  }
}

void CoincidenceCounter::add(const DetectionEvent& e) {
  if (have_trial_ && e.trial < trial_) {
    throw std::invalid_argument("events must be ordered by trial");
  }
  if (!have_trial_ || e.trial != trial_) {
    flush();
    have_trial_ = true;
    trial_ = e.trial;
    setting_id_ = e.setting_id;
  }
  const auto t = static_cast<double>(e.t_ns);
  if (e.channel == Channel::D1 && gates_.in_d1(t)) d1_ = true;
  if (e.channel == Channel::D2 && gates_.in_d2(t)) d2_ = true;
}

void CoincidenceCounter::flush() {
  if (!have_trial_) return;
  auto it = table_.by_setting.find(setting_id_);
  if (it == table_.by_setting.end()) {
    throw std::invalid_argument("event refers to unknown setting " + std::to_string(setting_id_));
  }
  CoincidenceCounts& c = it->second;
  if (d1_) ++c.singles_s;
  if (d2_) ++c.singles_i;
  if (d1_ && d2_) ++c.coincidences;
  d1_ = d2_ = false;
  have_trial_ = false;
}

CoincidenceTable CoincidenceCounter::finish() {
  flush();
  return table_;
}

CoincidenceTable gate_and_count(const EventLog& log, const GateConfig& gates) {
  CoincidenceCounter counter(log.header, gates);
  for (const auto& e : log.events) counter.add(e);
  return counter.finish();
}

Estimate compute_g_si(const CoincidenceCounts& c) {
  if (c.trials == 0) throw std::invalid_argument("g_si undefined: no trials");
  if (c.singles_s == 0 || c.singles_i == 0) {
    throw std::invalid_argument("g_si undefined: zero singles on a channel");
  }
  const double n = static_cast<double>(c.trials);
  const double ns = static_cast<double>(c.singles_s);
  const double ni = static_cast<double>(c.singles_i);
  const double nsi = static_cast<double>(c.coincidences);
  const double g = n * nsi / (ns * ni);
  // relative variances add for a product of independent Poisson counts
  const double rel2 = (nsi > 0 ? 1.0 / nsi : 0.0) + 1.0 / ns + 1.0 / ni;
  return {g, nsi > 0 ? g * std::sqrt(rel2) : n / (ns * ni)};
}

DetectionEfficiency detection_efficiency(const CoincidenceCounts& c) {
  if (c.singles_s == 0 || c.singles_i == 0) {
    throw std::invalid_argument("detection efficiency undefined: zero singles on a channel");
  }
  const double nsi = static_cast<double>(c.coincidences);
  return {nsi / static_cast<double>(c.singles_i), nsi / static_cast<double>(c.singles_s)};
}

ChshResult chsh_from_table(const CoincidenceTable& table, const ChshAngles& angles) {
  std::vector<std::string> missing;
  const auto coincidences_at = [&](const MeasurementSetting& want) {
    double total = 0.0;
    bool found = false;
    for (const auto& s : table.settings) {
      const MeasurementSetting m = s.setting();
      if (same_orientation(m.theta_s, want.theta_s) && same_orientation(m.theta_i, want.theta_i)) {
        const auto it = table.by_setting.find(s.id);
        if (it != table.by_setting.end()) total += static_cast<double>(it->second.coincidences);
        found = true;
      }
    }
    if (!found) {
      std::ostringstream name;
      const auto wrap = [](double rad) {
        const double deg = std::fmod(rad_to_deg(rad), 180.0);
        return deg < 0.0 ? deg + 180.0 : deg;
      };
      name << "(" << wrap(want.theta_s) << ", " << wrap(want.theta_i) << ")";
      missing.push_back(name.str());
    }
    return total;
  };

  std::array<CountQuartet, 4> quartets;
  const auto settings = angles.settings();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& s = settings[k];
    quartets[k] = {coincidences_at(s), coincidences_at(s.both_perp()),
                   coincidences_at(s.signal_perp()), coincidences_at(s.idler_perp())};
  }
  if (!missing.empty()) {
    std::string msg = "missing polarizer settings (theta_s, theta_i) in degrees:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }
  std::array<Correlation, 4> e;
  for (std::size_t k = 0; k < 4; ++k) e[k] = correlation_E(quartets[k]);
  return chsh_S(e, angles);
}

ChshResult chsh_from_log(const EventLog& log, const GateConfig& gates, const ChshAngles& angles) {
  return chsh_from_table(gate_and_count(log, gates), angles);
}

namespace {

double fringe_derivative(double eta, double x, double theta_i) {
  const double c = std::cos(eta), s = std::sin(eta);
  const double f = (c + s) * std::cos(x - theta_i) + (c - s) * std::cos(x + theta_i);
  const double df = -(c + s) * std::sin(x - theta_i) - (c - s) * std::sin(x + theta_i);
  return f * df;
}

void check_sigmas(const auto& points) {
  for (const auto& p : points) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
      throw std::invalid_argument("every point needs a positive, finite sigma");
    }
  }
}

}  // namespace

FringeFit fit_fringe(const std::vector<FringePoint>& points, double eta, double theta_i) {
  if (points.size() < 4) throw std::invalid_argument("fringe fit needs at least 4 points");
  check_sigmas(points);
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const auto& a, const auto& b) {
                                              return a.theta_s < b.theta_s;
                                            });
  if (hi->theta_s - lo->theta_s < kHalfPi * (1.0 - 1e-9)) {
    throw std::invalid_argument("fringe points must span at least half a period (90 degrees)");
  }
  const double peak = fringe_shape_peak(eta, theta_i);
  if (peak <= 1e-12) {
    throw std::invalid_argument("no fringe exists for this eta and theta_i (degenerate design)");
  }

  // Phase start: best of a grid, each with its linear (amplitude, background)
  // solution.
  double best_phase = 0.0, best_chi2 = INFINITY;
  for (int k = 0; k < 180; ++k) {
    const double phase = -kHalfPi + k * (std::numbers::pi / 180.0);
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (const auto& p : points) {
      const double w = 1.0 / (p.sigma * p.sigma);
      const Eigen::Vector2d x(fringe_shape(eta, p.theta_s + phase, theta_i), 1.0);
      a += w * x * x.transpose();
      b += w * x * p.counts;
    }
    const Eigen::Vector2d sol = a.ldlt().solve(b);
    if (!(sol(0) > 0.0)) continue;  // an inverted fringe belongs to another phase
    double chi2 = 0.0;
    for (const auto& p : points) {
      const double m = sol(0) * fringe_shape(eta, p.theta_s + phase, theta_i) + sol(1);
      chi2 += (p.counts - m) * (p.counts - m) / (p.sigma * p.sigma);
    }
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_phase = phase;
    }
  }
  double c_min = INFINITY, c_max = -INFINITY;
  for (const auto& p : points) {
    c_min = std::min(c_min, p.counts);
    c_max = std::max(c_max, p.counts);
  }

  const ResidualFunction fn = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r,
                                  Eigen::MatrixXd& J) {
    const auto n = static_cast<Eigen::Index>(points.size());
    r.resize(n);
    J.resize(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& p = points[k];
      const double x = p.theta_s + q(2);
      const double shape = fringe_shape(eta, x, theta_i);
      r(k) = (p.counts - (q(0) * shape + q(1))) / p.sigma;
      J(k, 0) = -shape / p.sigma;
      J(k, 1) = -1.0 / p.sigma;
      J(k, 2) = -q(0) * fringe_derivative(eta, x, theta_i) / p.sigma;
    }
  };
  LevenbergMarquardtOptions options;
  options.project = [](Eigen::VectorXd& q) {
    q(0) = std::max(q(0), 0.0);
    q(1) = std::max(q(1), 0.0);
  };
  const Eigen::Vector3d start(std::max(c_max - c_min, 0.0) / peak, std::max(c_min, 0.0),
                              best_phase);
  const auto fit = levenberg_marquardt(fn, start, options);

  FringeFit out;
  out.amplitude = fit.params(0);
  out.background = fit.params(1);
  out.phase_offset = -std::remainder(-fit.params(2), std::numbers::pi);
  out.chi2 = fit.chi2;
  out.visibility = fringe_visibility(FringeModel{eta, out.amplitude, out.background}, theta_i);
  for (const auto& p : points) {
    out.residuals.push_back(p.counts - (out.amplitude * fringe_shape(eta, p.theta_s + out.phase_offset,
                                                                     theta_i) +
                                        out.background));
  }
  return out;
}

FringeFit fit_fringe_counts(std::vector<FringePoint> points, double eta, double theta_i,
                            int reweight_passes) {
  for (auto& p : points) {
    if (!(p.counts >= 0.0)) throw std::invalid_argument("negative or NaN fringe counts");
    p.sigma = std::sqrt(std::max(p.counts, 1.0));
  }
  FringeFit fit = fit_fringe(points, eta, theta_i);
  for (int pass = 0; pass < reweight_passes; ++pass) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double model = points[k].counts - fit.residuals[k];
      points[k].sigma = std::sqrt(std::max(model, 0.5));
    }
    fit = fit_fringe(points, eta, theta_i);
  }
  return fit;
}

DecayFit fit_exponential(const std::vector<DecayPoint>& points) {
  check_sigmas(points);
  std::set<double> delays;
  for (const auto& p : points) delays.insert(p.delta_t_ns);
  if (delays.size() < 3) {
    throw std::invalid_argument("exponential fit needs at least 3 distinct delays");
  }
  const auto [first, last] = std::minmax_element(
      points.begin(), points.end(),
      [](const auto& a, const auto& b) { return a.delta_t_ns < b.delta_t_ns; });
  double g_min = INFINITY, g_max = -INFINITY;
  for (const auto& p : points) {
    g_min = std::min(g_min, p.g_si);
    g_max = std::max(g_max, p.g_si);
  }
  const double span = last->delta_t_ns - first->delta_t_ns;
  const double t0 = first->delta_t_ns;

  // fitted in terms of (t - t0) and rescaled at the end
  const ResidualFunction fn = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r,
                                  Eigen::MatrixXd& J) {
    const auto n = static_cast<Eigen::Index>(points.size());
    r.resize(n);
    J.resize(n, 3);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& p = points[k];
      const double t = p.delta_t_ns - t0;
      const double e = std::exp(-t / q(2));
      r(k) = (p.g_si - (q(0) + q(1) * e)) / p.sigma;
      J(k, 0) = -1.0 / p.sigma;
      J(k, 1) = -e / p.sigma;
      J(k, 2) = -q(1) * e * t / (q(2) * q(2)) / p.sigma;
    }
  };
  const double rising = last->g_si > first->g_si ? -1.0 : 1.0;
  const Eigen::Vector3d start(rising > 0 ? g_min : g_max, rising * (g_max - g_min), 0.5 * span);
  const auto fit = levenberg_marquardt(fn, start);
  const double tau = fit.params(2);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw NumericalError("exponential fit produced a non-positive time constant");
  }
  DecayFit out;
  out.tau_ns = tau;
  out.floor = fit.params(0);
  out.amplitude = fit.params(1) * std::exp(t0 / tau);
  out.chi2 = fit.chi2;
  out.sigma_tau_ns = fit.covariance.size() == 9 ? std::sqrt(std::max(0.0, fit.covariance(2, 2)))
                                                : INFINITY;
  return out;
}

}  // namespace dlcz
