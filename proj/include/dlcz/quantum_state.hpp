#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <string_view>

namespace dlcz {

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;

/// Density matrix of the signal photon and the stored spin wave, reduced to
/// two qubits. Basis order is |r,S-> |r,S+> |l,S-> |l,S+>, signal first.
class TwoQubitState {
 public:
  static constexpr std::array<std::string_view, 4> kBasisLabels{"r,S-", "r,S+", "l,S-", "l,S+"};
  static constexpr double kTolerance = 1e-12;

  /// Normalizes `rho` by its trace and keeps the original trace for
  /// inspection. Throws std::invalid_argument if the result is not a
  /// Hermitian, positive semidefinite, unit-trace matrix.
  static TwoQubitState from_unnormalized(const Matrix4c& rho);

  const Matrix4c& rho() const { return rho_; }
  double raw_trace() const { return raw_trace_; }

  double purity() const;

 private:
  TwoQubitState(const Matrix4c& rho, double raw_trace) : rho_(rho), raw_trace_(raw_trace) {}

  Matrix4c rho_;
  double raw_trace_ = 1.0;
};

/// cos(eta)|r>|S-> + sin(eta)|l>|S+> with real positive amplitudes.
TwoQubitState ideal_state(double eta);

/// V*rho + (1-V)*I/4.
TwoQubitState add_white_noise(const TwoQubitState& state, double visibility);

/// Wootters concurrence.
double concurrence(const TwoQubitState& state);

/// Joint outcome probabilities for linear polarizers at theta_s (signal) and
/// theta_i (idler), after the quarter-wave plates map r,S- to horizontal and
/// l,S+ to vertical. A polarizer at angle theta transmits
/// cos(theta)|H> + sin(theta)|V>.
struct PolarizerOutcomes {
  double pass_pass = 0.0;
  double pass_block = 0.0;
  double block_pass = 0.0;
  double block_block = 0.0;

  double signal_pass() const { return pass_pass + pass_block; }
  double idler_pass() const { return pass_pass + block_pass; }
};

PolarizerOutcomes polarizer_outcomes(const TwoQubitState& state, double theta_s, double theta_i);

/// Wave vectors of the write, read and signal fields (rad/m).
struct WaveVectors {
  Eigen::Vector3d write;
  Eigen::Vector3d read;
  Eigen::Vector3d signal;
};

/// Idler direction fixed by phase matching: k_i = k_w + k_r - k_s.
Eigen::Vector3d phase_match(const WaveVectors& k);

}  // namespace dlcz
