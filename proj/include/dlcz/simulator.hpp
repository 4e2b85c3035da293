#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dlcz/event_log.hpp"
#include "dlcz/experiment.hpp"

namespace dlcz {

/// v0 * exp(-delta_t / tau). Throws std::invalid_argument for tau <= 0,
/// negative delay or v0 outside [0, 1].
double decoherence_visibility(double delta_t_ns, double tau_ns, double v0);

/// Ground-truth click counts per setting, in settings-table order, tallied
/// by the generator itself.
struct SimulationTally {
  std::uint64_t trials = 0;
  std::uint64_t signal_clicks = 0;
  std::uint64_t idler_clicks = 0;
  std::uint64_t coincidences = 0;
};

struct SimulationOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  std::uint64_t chunk_trials = 1u << 16;
};

using EventCallback = std::function<void(const DetectionEvent&)>;

/// Runs n_trials_per_setting write/read cycles for every setting and hands
/// the clicks to `sink` in (trial, t_ns) order. Each trial draws from its
/// own counter-based random stream keyed by (seed, trial), so the output is
/// independent of the thread count. Throws std::invalid_argument for an
/// invalid config or an empty settings table.
std::vector<SimulationTally> stream_trials(const ExperimentConfig& config,
                                           const std::vector<SettingEntry>& settings,
                                           std::uint64_t n_trials_per_setting, std::uint64_t seed,
                                           const EventCallback& sink,
                                           const SimulationOptions& options = {});

/// Collects stream_trials into an in-memory log.
EventLog run_trials(const ExperimentConfig& config, const std::vector<SettingEntry>& settings,
                    std::uint64_t n_trials_per_setting, std::uint64_t seed,
                    std::vector<SimulationTally>* tally = nullptr,
                    const SimulationOptions& options = {});

/// Per-trial click probabilities of the generator's model at one setting.
struct ClickProbabilities {
  double signal = 0.0;       // D1 fires
  double idler = 0.0;        // D2 fires
  double coincidence = 0.0;  // both fire
};

ClickProbabilities expected_probabilities(const ExperimentConfig& config,
                                          const MeasurementSetting& setting, double delta_t_ns);

/// g_si = P_si / (P_s P_i) for counts pooled over a setting and its three
/// perpendicular companions, which is equivalent to polarization-blind
/// detection with half the transmission.
double expected_g_si(const ExperimentConfig& config, double delta_t_ns);

}  // namespace dlcz
