#include "dlcz/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "dlcz/quantum_state.hpp"

namespace dlcz {

namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// SplitMix64 sequence whose starting point is a hash of (seed, trial).
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial)
      : state_(mix64(mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(trial ^ 0xD1B54A32D192ED03ULL))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Grid points k * resolution inside [lo, hi] and inside the cycle.
struct TimeGrid {
  std::int64_t first = 0;
  std::uint64_t count = 0;
  std::int64_t step = 1;

  TimeGrid(double lo, double hi, double cycle, std::int64_t resolution) : step(resolution) {
    const double r = static_cast<double>(resolution);
    const auto k_lo = static_cast<std::int64_t>(std::ceil(std::max(lo, 0.0) / r));
    auto k_hi = static_cast<std::int64_t>(std::floor(hi / r));
    while (k_hi >= k_lo && static_cast<double>(k_hi) * r >= cycle) --k_hi;
    if (k_hi < k_lo) throw std::invalid_argument("gate window contains no TIA time bin");
    first = k_lo * resolution;
    count = static_cast<std::uint64_t>(k_hi - k_lo + 1);
  }

  std::int64_t draw(TrialStream& rng) const {
    return first + static_cast<std::int64_t>(rng.below(count)) * step;
  }
};

struct SettingPlan {
  int id = 0;
  double pass_pass = 0.0;   // cumulative outcome thresholds
  double pass_block = 0.0;
  double block_pass = 0.0;
};

struct Model {
  double pair_prob = 0.0;
  double signal_eff = 0.0;
  double idler_eff = 0.0;
  double bg_s = 0.0;
  double bg_i = 0.0;
  TimeGrid d1;
  TimeGrid d2;
  std::vector<SettingPlan> plans;
};

Model build_model(const ExperimentConfig& c, const std::vector<SettingEntry>& settings) {
  const GateConfig gates = GateConfig::from(c);
  const auto res = static_cast<std::int64_t>(c.tia_resolution_ns);
  Model m{c.excitation_prob,
          c.det_eff_s,
          c.retrieval_eff * std::exp(-c.delta_t_ns / c.retrieval_tau_ns) * c.det_eff_i,
          c.bg_prob_s,
          c.bg_prob_i,
          TimeGrid(gates.d1_center_ns - 0.5 * gates.d1_width_ns,
                   gates.d1_center_ns + 0.5 * gates.d1_width_ns, c.cycle_ns, res),
          TimeGrid(gates.d2_center_ns - 0.5 * gates.d2_width_ns,
                   gates.d2_center_ns + 0.5 * gates.d2_width_ns, c.cycle_ns, res),
          {}};
  const double v = decoherence_visibility(c.delta_t_ns, c.memory_tau_ns, c.visibility);
  const TwoQubitState state = add_white_noise(ideal_state(c.eta), v);
  for (const auto& s : settings) {
    const MeasurementSetting ms = s.setting();
    const PolarizerOutcomes o = polarizer_outcomes(state, ms.theta_s, ms.theta_i);
    SettingPlan plan;
    plan.id = s.id;
    plan.pass_pass = o.pass_pass;
    plan.pass_block = plan.pass_pass + o.pass_block;
    plan.block_pass = plan.pass_block + o.block_pass;
    m.plans.push_back(plan);
  }
  return m;
}

struct ChunkResult {
  std::vector<DetectionEvent> events;
  std::vector<SimulationTally> tally;
};

void simulate_chunk(const Model& model, std::uint64_t n_per_setting, std::uint64_t seed,
                    std::uint64_t begin, std::uint64_t end, ChunkResult& out) {
  out.events.clear();
  out.tally.assign(model.plans.size(), {});
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    const std::size_t si = trial / n_per_setting;
    const SettingPlan& plan = model.plans[si];
    TrialStream rng(seed, trial);
    bool signal = false, idler = false;
    if (rng.uniform() < model.pair_prob) {
      const double u = rng.uniform();
      const bool s_pass = u < plan.pass_block;
      const bool i_pass = u < plan.pass_pass || (u >= plan.pass_block && u < plan.block_pass);
      if (s_pass) signal = rng.uniform() < model.signal_eff;
      if (i_pass) idler = rng.uniform() < model.idler_eff;
    }
    if (rng.uniform() < model.bg_s) signal = true;
    if (rng.uniform() < model.bg_i) idler = true;

    SimulationTally& t = out.tally[si];
    ++t.trials;
    if (!signal && !idler) continue;
    DetectionEvent e1{trial, Channel::D1, 0, plan.id};
    DetectionEvent e2{trial, Channel::D2, 0, plan.id};
    if (signal) {
      e1.t_ns = model.d1.draw(rng);
      ++t.signal_clicks;
    }
    if (idler) {
      e2.t_ns = model.d2.draw(rng);
      ++t.idler_clicks;
    }
    if (signal && idler) {
      ++t.coincidences;
      if (e2.t_ns < e1.t_ns) std::swap(e1, e2);
      out.events.push_back(e1);
      out.events.push_back(e2);
    } else {
      out.events.push_back(signal ? e1 : e2);
    }
  }
}

}  // namespace

double decoherence_visibility(double delta_t_ns, double tau_ns, double v0) {
  if (!(tau_ns > 0.0)) throw std::invalid_argument("decoherence time constant must be > 0");
  if (!(delta_t_ns >= 0.0)) throw std::invalid_argument("storage time must be >= 0");
  if (!(v0 >= 0.0 && v0 <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
  return v0 * std::exp(-delta_t_ns / tau_ns);
}

std::vector<SimulationTally> stream_trials(const ExperimentConfig& config,
                                           const std::vector<SettingEntry>& settings,
                                           std::uint64_t n_trials_per_setting, std::uint64_t seed,
                                           const EventCallback& sink,
                                           const SimulationOptions& options) {
  config.validate();
  validate_settings(settings);
  const Model model = build_model(config, settings);
  std::vector<SimulationTally> total(settings.size());
  if (n_trials_per_setting == 0) return total;

  const std::uint64_t n_trials = n_trials_per_setting * settings.size();
  const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk_trials);
  const unsigned threads =
      options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<ChunkResult> results(threads);

  for (std::uint64_t wave = 0; wave < n_trials; wave += chunk * threads) {
    const auto range = [&](unsigned k) {
      const std::uint64_t b = std::min(n_trials, wave + k * chunk);
      return std::pair{b, std::min(n_trials, b + chunk)};
    };
    if (threads == 1) {
      const auto [b, e] = range(0);
      simulate_chunk(model, n_trials_per_setting, seed, b, e, results[0]);
    } else {
      std::vector<std::jthread> workers;
      for (unsigned k = 0; k < threads; ++k) {
        const auto [b, e] = range(k);
        if (b == e) break;
        workers.emplace_back([&, k, b = b, e = e] {
          simulate_chunk(model, n_trials_per_setting, seed, b, e, results[k]);
        });
      }
    }
    for (unsigned k = 0; k < threads; ++k) {
      const auto [b, e] = range(k);
      if (b == e) break;
      for (const auto& ev : results[k].events) sink(ev);
      for (std::size_t s = 0; s < total.size(); ++s) {
        total[s].trials += results[k].tally[s].trials;
        total[s].signal_clicks += results[k].tally[s].signal_clicks;
        total[s].idler_clicks += results[k].tally[s].idler_clicks;
        total[s].coincidences += results[k].tally[s].coincidences;
      }
    }
  }
  return total;
}

EventLog run_trials(const ExperimentConfig& config, const std::vector<SettingEntry>& settings,
                    std::uint64_t n_trials_per_setting, std::uint64_t seed,
                    std::vector<SimulationTally>* tally, const SimulationOptions& options) {
  EventLog log;
  log.header = EventLogHeader{config, settings, seed, n_trials_per_setting};
  auto counts = stream_trials(config, settings, n_trials_per_setting, seed,
                              [&log](const DetectionEvent& e) { log.events.push_back(e); },
                              options);
  if (tally != nullptr) *tally = std::move(counts);
  return log;
}

ClickProbabilities expected_probabilities(const ExperimentConfig& c,
                                          const MeasurementSetting& setting, double delta_t_ns) {
  const double v = decoherence_visibility(delta_t_ns, c.memory_tau_ns, c.visibility);
  const PolarizerOutcomes o =
      polarizer_outcomes(add_white_noise(ideal_state(c.eta), v), setting.theta_s, setting.theta_i);
  const double p = c.excitation_prob;
  const double ds = c.det_eff_s * o.signal_pass();
  const double di =
      c.retrieval_eff * std::exp(-delta_t_ns / c.retrieval_tau_ns) * c.det_eff_i * o.idler_pass();
  const double dsi = c.det_eff_s * c.retrieval_eff * std::exp(-delta_t_ns / c.retrieval_tau_ns) *
                     c.det_eff_i * o.pass_pass;
  const double bs = c.bg_prob_s, bi = c.bg_prob_i;

  ClickProbabilities out;
  out.signal = 1.0 - (1.0 - p * ds) * (1.0 - bs);
  out.idler = 1.0 - (1.0 - p * di) * (1.0 - bi);
  const double none = (1.0 - bs) * (1.0 - bi) * ((1.0 - p) + p * (1.0 - ds - di + dsi));
  out.coincidence = out.signal + out.idler - 1.0 + none;
  return out;
}

double expected_g_si(const ExperimentConfig& config, double delta_t_ns) {
  const MeasurementSetting base{0.0, 0.0};
  ClickProbabilities sum;
  for (const auto& s : {base, base.both_perp(), base.signal_perp(), base.idler_perp()}) {
    const ClickProbabilities p = expected_probabilities(config, s, delta_t_ns);
    sum.signal += p.signal;
    sum.idler += p.idler;
    sum.coincidence += p.coincidence;
  }
  const double ps = sum.signal / 4, pi = sum.idler / 4, psi = sum.coincidence / 4;
  if (ps <= 0.0 || pi <= 0.0) throw std::domain_error("g_si undefined: a channel never fires");
  return psi / (ps * pi);
}

}  // namespace dlcz
