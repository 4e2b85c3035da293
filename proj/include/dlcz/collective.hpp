#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dlcz/angular_momentum.hpp"
#include "dlcz/half_int.hpp"

namespace dlcz {

using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>>;

/// N atoms initially spread uniformly over the |a, m> sublevels, at fixed
/// positions, addressed by a write/signal pair with momentum mismatch
/// delta_k = k_s - k_w.
struct EnsembleModel {
  HalfInt fa;
  HalfInt fb;
  std::vector<Eigen::Vector3d> positions;  // metres
  Eigen::Vector3d delta_k = Eigen::Vector3d::Zero();  // rad/m

  int atom_count() const { return static_cast<int>(positions.size()); }
  void validate() const;

  /// Positions drawn uniformly from a cube of side `extent_m` centred at the
  /// origin.
  static EnsembleModel random_cloud(int n_atoms, HalfInt fa, HalfInt fb,
                                    const Eigen::Vector3d& delta_k, double extent_m,
                                    std::uint64_t seed);
};

/// One term s^dag_alpha(m): moves an atom from |a, m> to |b, m+1+alpha>.
struct SpinWaveComponent {
  int alpha = -1;
  HalfInt m;

  HalfInt final_projection() const { return m + 1 + alpha; }
};

/// Sublevel of each atom in the ground configuration. std::nullopt marks an
/// atom sitting in some |a, m> that none of the operators under study touch.
using GroundConfiguration = std::vector<std::optional<HalfInt>>;

/// Truncated Hilbert space over a fixed ground configuration: at most
/// `max_excitations` atoms promoted into the listed |b> sublevels. Index 0
/// is the unexcited configuration itself.
class ExcitationSpace {
 public:
  struct Excitation {
    int atom = 0;
    int level = 0;  // index into b_levels()
    auto operator<=>(const Excitation&) const = default;
  };
  using State = std::vector<Excitation>;  // sorted by atom

  ExcitationSpace(int n_atoms, std::vector<HalfInt> b_levels, int max_excitations);

  int atom_count() const { return n_atoms_; }
  int max_excitations() const { return max_excitations_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  const std::vector<HalfInt>& b_levels() const { return b_levels_; }
  const std::vector<State>& basis() const { return basis_; }

  /// -1 when the level is not part of this space.
  int level_index(HalfInt mb) const;
  /// -1 when the state exceeds the truncation.
  int index_of(const State& state) const;

 private:
  int n_atoms_;
  int max_excitations_;
  std::vector<HalfInt> b_levels_;
  std::vector<State> basis_;
  std::map<State, int> index_;
};

/// Explicit matrix of
///   s^dag_alpha(m) = sqrt((2F_a+1)/N) sum_mu exp(-i dk.r_mu) |b, m+1+alpha>_mu <a, m|
/// restricted to `space` for the given ground configuration. Raising out of
/// the truncation is dropped. Throws std::invalid_argument for projections
/// outside the F_a / F_b manifolds or a b-level missing from the space.
SparseMatrixC collective_raising(const EnsembleModel& model, const ExcitationSpace& space,
                                 const GroundConfiguration& ground, SpinWaveComponent component);

/// Components of the normalized mode s^dag_alpha with nonzero weight
/// X_m(alpha) / sqrt(sum_m X_m(alpha)^2).
struct WeightedComponent {
  SpinWaveComponent component;
  double weight = 0.0;
};
std::vector<WeightedComponent> mode_components(const BranchingTable& table, int alpha);

/// sum_m w_m s^dag_alpha(m). Throws std::domain_error when sum_m X_m^2 = 0.
SparseMatrixC normalized_mode_raising(const EnsembleModel& model, const ExcitationSpace& space,
                                      const GroundConfiguration& ground,
                                      const BranchingTable& table, int alpha);

/// <s_lhs s^dag_rhs> in the unpolarized ensemble vacuum rho_a, summed
/// exactly over every ground configuration. Sublevels not touched by either
/// component are lumped into one spectator class with their combined
/// population, which keeps the enumeration at most 3^N.
std::complex<double> vacuum_correlation(const EnsembleModel& model, SpinWaveComponent lhs,
                                        SpinWaveComponent rhs);

/// <s_alpha s^dag_alpha'> for the normalized modes of the table's scheme.
std::complex<double> mode_vacuum_correlation(const EnsembleModel& model,
                                             const BranchingTable& table, int alpha_lhs,
                                             int alpha_rhs);

/// Expectation of [s, s^dag] for s = s_alpha(m) in the one-excitation state
/// s^dag rho_a s / Tr(...). The bosonic value is 1; `deviation` is the
/// distance from it.
struct CommutatorCheck {
  double expectation = 0.0;
  double deviation = 0.0;
};
CommutatorCheck commutator_deviation(const EnsembleModel& model, SpinWaveComponent component);

}  // namespace dlcz
