#include "dlcz/quantum_state.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dlcz {

namespace {

using Vector4c = Eigen::Matrix<std::complex<double>, 4, 1>;

Vector4c polarizer_product(double theta_s, double theta_i, bool pass_s, bool pass_i) {
  // transmitted state of a polarizer, or the orthogonal (blocked) one
  const auto axis = [](double theta, bool pass) {
    return pass ? Eigen::Vector2d(std::cos(theta), std::sin(theta))
                : Eigen::Vector2d(-std::sin(theta), std::cos(theta));
  };
  const Eigen::Vector2d s = axis(theta_s, pass_s);
  const Eigen::Vector2d i = axis(theta_i, pass_i);
  Vector4c v;
  v << s(0) * i(0), s(0) * i(1), s(1) * i(0), s(1) * i(1);
  return v;
}

double expectation(const Matrix4c& rho, const Vector4c& v) {
  return (v.adjoint() * rho * v)(0, 0).real();
}

}  // namespace

TwoQubitState TwoQubitState::from_unnormalized(const Matrix4c& rho) {
  const std::complex<double> tr = rho.trace();
  if (std::abs(tr.imag()) > kTolerance || tr.real() <= 0.0) {
    throw std::invalid_argument("density matrix trace must be real and positive");
  }
  const Matrix4c normalized = rho / tr.real();
  if ((normalized - normalized.adjoint()).cwiseAbs().maxCoeff() > kTolerance) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(normalized, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kTolerance) {
    throw std::invalid_argument("density matrix has a negative eigenvalue " +
                                std::to_string(solver.eigenvalues().minCoeff()));
  }
  return TwoQubitState(normalized, tr.real());
}

double TwoQubitState::purity() const { return (rho_ * rho_).trace().real(); }

TwoQubitState ideal_state(double eta) {
  if (!(eta >= 0.0 && eta <= std::numbers::pi / 2)) {
    throw std::invalid_argument("eta must lie in [0, pi/2], got " + std::to_string(eta));
  }
  Vector4c psi = Vector4c::Zero();
  psi(0) = std::cos(eta);
  psi(3) = std::sin(eta);
  return TwoQubitState::from_unnormalized(psi * psi.adjoint());
}

TwoQubitState add_white_noise(const TwoQubitState& state, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility must lie in [0, 1], got " + std::to_string(visibility));
  }
  const Matrix4c mixed = Matrix4c::Identity() * 0.25;
  return TwoQubitState::from_unnormalized(visibility * state.rho() + (1.0 - visibility) * mixed);
}

double concurrence(const TwoQubitState& state) {
  constexpr double kEpsilon = std::numeric_limits<double>::epsilon();
  Matrix4c flip = Matrix4c::Zero();
  // sigma_y (x) sigma_y
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  // lambda_k are the singular values of sqrt(rho) F conj(sqrt(rho)), which
  // avoids square roots of roundoff-level eigenvalues of rho * rho_tilde
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(state.rho());
  Eigen::Vector4d w = eig.eigenvalues();
  for (int k = 0; k < 4; ++k) w(k) = w(k) > 16 * kEpsilon ? std::sqrt(w(k)) : 0.0;
  const Matrix4c root = eig.eigenvectors() * w.cast<std::complex<double>>().asDiagonal() *
                        eig.eigenvectors().adjoint();
  const Matrix4c a = root * flip * root.conjugate();
  Eigen::JacobiSVD<Matrix4c> svd(a);
  std::array<double, 4> lambda{};
  for (int k = 0; k < 4; ++k) lambda[k] = svd.singularValues()(k);
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

PolarizerOutcomes polarizer_outcomes(const TwoQubitState& state, double theta_s, double theta_i) {
  const Matrix4c& rho = state.rho();
  PolarizerOutcomes out;
  out.pass_pass = expectation(rho, polarizer_product(theta_s, theta_i, true, true));
  out.pass_block = expectation(rho, polarizer_product(theta_s, theta_i, true, false));
  out.block_pass = expectation(rho, polarizer_product(theta_s, theta_i, false, true));
  out.block_block = expectation(rho, polarizer_product(theta_s, theta_i, false, false));
  return out;
}

Eigen::Vector3d phase_match(const WaveVectors& k) { return k.write + k.read - k.signal; }

}  // namespace dlcz
