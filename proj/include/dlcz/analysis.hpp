#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dlcz/event_log.hpp"
#include "dlcz/predictor.hpp"

namespace dlcz {

/// Gated counts for one polarizer setting (or pooled over several).
struct CoincidenceCounts {
  std::uint64_t trials = 0;
  std::uint64_t singles_s = 0;     // trials with a D1 click in the D1 gate
  std::uint64_t singles_i = 0;     // trials with a D2 click in the D2 gate
  std::uint64_t coincidences = 0;  // trials with both

  CoincidenceCounts& operator+=(const CoincidenceCounts& o);
  bool operator==(const CoincidenceCounts&) const = default;
};

struct CoincidenceTable {
  std::vector<SettingEntry> settings;
  std::map<int, CoincidenceCounts> by_setting;  // keyed by setting id

  const CoincidenceCounts& at(int setting_id) const { return by_setting.at(setting_id); }
  CoincidenceCounts pooled() const;
};

/// Start/stop coincidence logic over a trial-ordered event stream. The first
/// in-gate click of each channel in a trial counts; later clicks in the same
/// trial are ignored.
class CoincidenceCounter {
 public:
  CoincidenceCounter(const EventLogHeader& header, const GateConfig& gates);

  /// Events must arrive in non-decreasing trial order.
  void add(const DetectionEvent& event);
  CoincidenceTable finish();

 private:
  void flush();

  const EventLogHeader& header_;
  GateConfig gates_;
  CoincidenceTable table_;
  bool have_trial_ = false;
  std::uint64_t trial_ = 0;
  int setting_id_ = 0;
  bool d1_ = false;
  bool d2_ = false;
};

CoincidenceTable gate_and_count(const EventLog& log, const GateConfig& gates);

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// g_si = (N_si/n) / ((N_s/n)(N_i/n)), sigma from independent Poisson
/// counts. Throws std::invalid_argument on zero singles or trials.
Estimate compute_g_si(const CoincidenceCounts& counts);

struct DetectionEfficiency {
  double alpha_s = 0.0;  // N_si / N_i
  double alpha_i = 0.0;  // N_si / N_s
};

/// Throws std::invalid_argument on zero singles.
DetectionEfficiency detection_efficiency(const CoincidenceCounts& counts);

/// Builds the four count quartets from coincidences at each CHSH setting
/// and its perpendicular companions (angles matched modulo 180 degrees;
/// repeated entries are summed). Throws std::invalid_argument listing every
/// missing setting.
ChshResult chsh_from_table(const CoincidenceTable& table, const ChshAngles& angles);
ChshResult chsh_from_log(const EventLog& log, const GateConfig& gates, const ChshAngles& angles);

struct FringePoint {
  double theta_s = 0.0;  // radians
  double counts = 0.0;
  double sigma = 1.0;
};

struct FringeFit {
  double amplitude = 0.0;
  double background = 0.0;
  double phase_offset = 0.0;  // radians, in (-pi/2, pi/2]
  double visibility = 0.0;
  double chi2 = 0.0;
  std::vector<double> residuals;  // counts - model
};

/// Weighted least squares of amplitude * fringe_shape(eta, theta_s + phase,
/// theta_i) + background with eta and theta_i fixed. Needs at least four
/// points spanning half a period; throws std::invalid_argument otherwise
/// and NumericalError on non-convergence.
FringeFit fit_fringe(const std::vector<FringePoint>& points, double eta, double theta_i);

/// Fit to raw Poisson counts: starts from sigma = sqrt(counts), then refits
/// with sigma^2 taken from the fitted model, which removes the low-count
/// bias of data-derived weights. The sigma fields of `points` are ignored.
FringeFit fit_fringe_counts(std::vector<FringePoint> points, double eta, double theta_i,
                            int reweight_passes = 3);

struct DecayPoint {
  double delta_t_ns = 0.0;
  double g_si = 0.0;
  double sigma = 1.0;
};

struct DecayFit {
  double tau_ns = 0.0;
  double sigma_tau_ns = 0.0;
  double floor = 0.0;
  double amplitude = 0.0;
  double chi2 = 0.0;
};

/// Weighted least squares of floor + amplitude * exp(-delta_t / tau). Needs
/// three distinct delays; throws NumericalError when the fit fails or
/// yields tau <= 0.
DecayFit fit_exponential(const std::vector<DecayPoint>& points);

}  // namespace dlcz
