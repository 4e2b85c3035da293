#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlcz/predictor.hpp"

namespace dlcz {

/// Parameters of the write/read sequence and the detection chain. Durations
/// in ns, probabilities dimensionless, eta in radians.
struct ExperimentConfig {
  double eta = 0.0;
  double excitation_prob = 0.0;  // pair creation per write pulse
  double retrieval_eff = 0.0;    // spin wave -> idler at zero delay
  double det_eff_s = 0.0;
  double det_eff_i = 0.0;
  double bg_prob_s = 0.0;  // accidental click per D1 gate
  double bg_prob_i = 0.0;  // accidental click per D2 gate
  double visibility = 1.0;  // state visibility at zero delay
  double delta_t_ns = 200.0;
  double memory_tau_ns = 3700.0;     // visibility decay constant
  double retrieval_tau_ns = 3700.0;  // retrieval efficiency decay constant
  double cycle_ns = 1500.0;
  double dark_ns = 640.0;
  double write_len_ns = 130.0;
  double read_len_ns = 120.0;
  double gate_d1_ns = 140.0;
  double gate_d2_ns = 130.0;
  double tia_resolution_ns = 2.0;

  /// Calibrated so that the canonical CHSH run gives alpha_s,i ~ 0.02 and
  /// S ~ 2.3 at the 200 ns delay.
  static ExperimentConfig defaults();

  /// Throws std::invalid_argument on out-of-range values or gates that do
  /// not fit in the cycle.
  void validate() const;
  /// Non-fatal oddities, e.g. gates extending past the dark period.
  std::vector<std::string> warnings() const;

  /// The write pulse starts so that the D1 gate opens at t = 0 of the cycle;
  /// the read pulse starts delta_t_ns after the write pulse.
  double write_start_ns() const;
  double write_center_ns() const;
  double read_center_ns() const;

  /// Key/value pairs in a fixed order, with shortest round-trip formatting.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  /// Throws std::invalid_argument for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  static const std::vector<std::string>& keys();
};

/// Start/stop gate windows of the time-interval analyzer.
struct GateConfig {
  double d1_center_ns = 70.0;
  double d1_width_ns = 140.0;
  double d2_center_ns = 265.0;
  double d2_width_ns = 130.0;

  static GateConfig from(const ExperimentConfig& config);
  void validate() const;
  bool in_d1(double t_ns) const { return std::abs(t_ns - d1_center_ns) <= 0.5 * d1_width_ns; }
  bool in_d2(double t_ns) const { return std::abs(t_ns - d2_center_ns) <= 0.5 * d2_width_ns; }
};

/// One row of the polarizer-setting table; angles kept in degrees as written.
struct SettingEntry {
  int id = 0;
  double theta_s_deg = 0.0;
  double theta_i_deg = 0.0;

  MeasurementSetting setting() const { return {deg_to_rad(theta_s_deg), deg_to_rad(theta_i_deg)}; }
  bool operator==(const SettingEntry&) const = default;
};

/// The four CHSH settings and the perpendicular companions needed for each
/// correlation, 16 entries with ids 0..15.
std::vector<SettingEntry> chsh_settings(const ChshAngles& angles = ChshAngles::canonical());

/// Parses "key = value" lines over the defaults; '#' starts a comment.
ExperimentConfig read_config(std::istream& in);
ExperimentConfig read_config_file(const std::filesystem::path& path);

/// Parses "setting <id> <theta_s_deg> <theta_i_deg>" lines; '#' comments.
std::vector<SettingEntry> read_settings(std::istream& in);
std::vector<SettingEntry> read_settings_file(const std::filesystem::path& path);

void validate_settings(const std::vector<SettingEntry>& settings);

std::string format_double(double value);

}  // namespace dlcz
