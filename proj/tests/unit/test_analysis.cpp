#include <doctest.h>

#include <cmath>

#include "dlcz/analysis.hpp"

using namespace dlcz;

namespace {

EventLogHeader header_for(const std::vector<SettingEntry>& settings, std::uint64_t per_setting) {
  return {ExperimentConfig::defaults(), settings, 1, per_setting};
}

}  // namespace

TEST_CASE("coincidence counter gating") {
  const auto settings = std::vector<SettingEntry>{{0, 0, 0}, {1, 90, 0}};
  const EventLogHeader h = header_for(settings, 3);
  const GateConfig gates = GateConfig::from(h.config);
  CHECK(gates.d1_center_ns == doctest::Approx(70.0));
  CHECK(gates.d2_center_ns == doctest::Approx(265.0));
  CoincidenceCounter counter(h, gates);
  counter.add({0, Channel::D1, 10, 0});
  counter.add({0, Channel::D2, 250, 0});  // coincidence
  counter.add({1, Channel::D1, 140, 0});  // gate edge counts
  counter.add({1, Channel::D2, 332, 0});  // just outside the D2 gate
  counter.add({2, Channel::D2, 200, 0});
  counter.add({2, Channel::D2, 210, 0});  // second click ignored
  counter.add({4, Channel::D1, 142, 1});  // outside D1 gate
  counter.add({5, Channel::D1, 0, 1});
  counter.add({5, Channel::D2, 330, 1});
  const CoincidenceTable t = counter.finish();
  CHECK(t.at(0) == CoincidenceCounts{3, 2, 2, 1});
  CHECK(t.at(1) == CoincidenceCounts{3, 1, 1, 1});
  CHECK(t.pooled() == CoincidenceCounts{6, 3, 3, 2});
}

TEST_CASE("g_si and efficiencies") {
  const CoincidenceCounts c{1000000, 2000, 1500, 60};
  const Estimate g = compute_g_si(c);
  CHECK(g.value == doctest::Approx(60.0 * 1e6 / (2000.0 * 1500.0)));
  const double rel = std::sqrt(1.0 / 60 + 1.0 / 2000 + 1.0 / 1500);
  CHECK(g.sigma == doctest::Approx(g.value * rel).epsilon(0.01));
  const DetectionEfficiency e = detection_efficiency(c);
  CHECK(e.alpha_s == doctest::Approx(60.0 / 1500));
  CHECK(e.alpha_i == doctest::Approx(60.0 / 2000));
  CHECK_THROWS_AS(compute_g_si({10, 0, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(detection_efficiency({10, 1, 0, 0}), std::invalid_argument);
}

TEST_CASE("CHSH from a coincidence table") {
  const ChshAngles angles = ChshAngles::canonical();
  const auto settings = chsh_settings(angles);
  CoincidenceTable table;
  table.settings = settings;
  // quartets with E = 0.6, 0.5, 0.4, -0.3 on 1000 coincidences each
  const double e[] = {0.6, 0.5, 0.4, -0.3};
  for (int k = 0; k < 4; ++k) {
    const std::uint64_t same = std::llround(250 * (1 + e[k]));
    const std::uint64_t diff = std::llround(250 * (1 - e[k]));
    table.by_setting[4 * k + 0] = {100000, 0, 0, same};
    table.by_setting[4 * k + 1] = {100000, 0, 0, same};
    table.by_setting[4 * k + 2] = {100000, 0, 0, diff};
    table.by_setting[4 * k + 3] = {100000, 0, 0, diff};
  }
  const ChshResult r = chsh_from_table(table, angles);
  CHECK(r.correlations[0].value == doctest::Approx(0.6));
  CHECK(r.correlations[3].value == doctest::Approx(-0.3));
  CHECK(r.s == doctest::Approx(1.8));

  // angles given as the equivalent orientations 180 degrees away
  const ChshAngles shifted{angles.theta_s + std::numbers::pi, angles.theta_s_prime,
                           angles.theta_i - std::numbers::pi, angles.theta_i_prime};
  CHECK(chsh_from_table(table, shifted).s == doctest::Approx(1.8));

  table.by_setting.erase(5);
  table.settings.erase(table.settings.begin() + 5);
  try {
    (void)chsh_from_table(table, angles);
    FAIL("expected a missing-setting error");
  } catch (const std::invalid_argument& ex) {
    CHECK(std::string(ex.what()).find("112.5") != std::string::npos);
  }
}

TEST_CASE("gating examples and invariants") {
  const auto settings = std::vector<SettingEntry>{{0, 0, 0}};
  const EventLogHeader h = header_for(settings, 50);
  const GateConfig gates = GateConfig::from(h.config);
  EventLog one{h, {{0, Channel::D1, 70, 0}, {0, Channel::D2, 400, 0}}};
  CHECK(gate_and_count(one, gates).at(0) == CoincidenceCounts{50, 1, 0, 0});

  EventLog paired{h, {}};
  for (std::uint64_t t = 0; t < 50; t += 3) {
    paired.events.push_back({t, Channel::D1, 60, 0});
    paired.events.push_back({t, Channel::D2, 270, 0});
  }
  const CoincidenceCounts counts = gate_and_count(paired, gates).at(0);
  CHECK(counts.coincidences == 17);
  CHECK(counts.coincidences <= std::min(counts.singles_s, counts.singles_i));

  // counting is idempotent and ignores event order within a trial
  CHECK(gate_and_count(paired, gates).at(0) == counts);
  EventLog swapped = paired;
  for (std::size_t k = 0; k + 1 < swapped.events.size(); k += 2) {
    std::swap(swapped.events[k], swapped.events[k + 1]);
  }
  CHECK(gate_and_count(swapped, gates).at(0) == counts);
}

TEST_CASE("g_si and efficiency examples") {
  CHECK(compute_g_si({500, 500, 500, 500}).value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(compute_g_si({100, 1, 1, 1}).value == doctest::Approx(100.0).epsilon(1e-15));
  const DetectionEfficiency e = detection_efficiency({100000, 5000, 5000, 100});
  CHECK(e.alpha_s == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(e.alpha_i == doctest::Approx(0.02).epsilon(1e-15));
  const DetectionEfficiency full = detection_efficiency({10, 7, 7, 7});
  CHECK(full.alpha_s == 1.0);
  CHECK(full.alpha_i == 1.0);
}

TEST_CASE("fringe fit examples") {
  const double eta = 0.81 * std::numbers::pi / 4, ti = deg_to_rad(67.5);
  std::vector<FringePoint> flat;
  for (int k = 0; k < 18; ++k) flat.push_back({deg_to_rad(10.0 * k), 40.0, 1.0});
  const FringeFit f = fit_fringe(flat, eta, ti);
  CHECK(f.visibility == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));

  // visibility 0.90 built from amplitude and background
  const double a = 180.0, peak = fringe_shape_peak(eta, ti);
  const double b = a * peak * (1 - 0.9) / (2 * 0.9);
  std::vector<FringePoint> pts;
  for (int k = 0; k < 36; ++k) {
    const double ts = deg_to_rad(5.0 * k);
    pts.push_back({ts, coincidence_rate({eta, a, b}, {ts, ti}), 1.0});
  }
  const FringeFit g = fit_fringe(pts, eta, ti);
  CHECK(std::abs(g.visibility - 0.9) <= 0.01);
  CHECK(g.amplitude == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("decay fit recovers tau to 1 ns") {
  std::vector<DecayPoint> pts;
  for (double t : {200.0, 1000.0, 2000.0, 4000.0, 7000.0}) {
    pts.push_back({t, 1.5 + 8.0 * std::exp(-t / 3700.0), 0.05});
  }
  CHECK(std::abs(fit_exponential(pts).tau_ns - 3700.0) <= 1.0);
}
