#include "dlcz/collective.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace dlcz {

namespace {

// One class of single-atom ground states and its population.
struct GroundClass {
  std::optional<HalfInt> sublevel;
  double probability = 0.0;
};

// Touched sublevels get population 1/(2F_a+1) each; the rest are lumped.
std::vector<GroundClass> ground_classes(HalfInt fa, std::vector<HalfInt> touched) {
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  const double q = 1.0 / fa.multiplicity();
  std::vector<GroundClass> classes;
  for (HalfInt m : touched) classes.push_back({m, q});
  const int rest = fa.multiplicity() - static_cast<int>(touched.size());
  if (rest > 0) classes.push_back({std::nullopt, rest * q});
  return classes;
}

// Calls fn(config, probability) for every assignment of classes to atoms.
void for_each_configuration(int n_atoms, const std::vector<GroundClass>& classes,
                            const std::function<void(const GroundConfiguration&, double)>& fn) {
  const int k = static_cast<int>(classes.size());
  std::vector<int> digit(n_atoms, 0);
  GroundConfiguration config(n_atoms, classes.front().sublevel);
  while (true) {
    double w = 1.0;
    for (int mu = 0; mu < n_atoms; ++mu) w *= classes[digit[mu]].probability;
    fn(config, w);
    int mu = 0;
    while (mu < n_atoms && ++digit[mu] == k) {
      digit[mu] = 0;
      config[mu] = classes[0].sublevel;
      ++mu;
    }
    if (mu == n_atoms) break;
    config[mu] = classes[digit[mu]].sublevel;
  }
}

void check_component(const EnsembleModel& model, SpinWaveComponent c) {
  if (c.alpha != -1 && c.alpha != 1) {
    throw std::invalid_argument("helicity alpha must be -1 or +1");
  }
  if (!is_valid_projection(model.fa, c.m)) {
    throw std::invalid_argument("m=" + c.m.to_string() + " is not a projection of F_a=" +
                                model.fa.to_string());
  }
  if (!is_valid_projection(model.fb, c.final_projection())) {
    throw std::invalid_argument("final projection m+1+alpha=" + c.final_projection().to_string() +
                                " is outside F_b=" + model.fb.to_string());
  }
}

std::vector<HalfInt> distinct_levels(std::initializer_list<HalfInt> levels) {
  std::vector<HalfInt> out(levels);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void EnsembleModel::validate() const {
  if (positions.empty()) throw std::invalid_argument("ensemble needs at least one atom");
  if (fa.twice() < 0 || fb.twice() < 0) {
    throw std::invalid_argument("negative angular momentum in ensemble model");
  }
  for (const auto& r : positions) {
    if (!r.allFinite()) throw std::invalid_argument("non-finite atom position");
  }
  if (!delta_k.allFinite()) throw std::invalid_argument("non-finite delta_k");
}

EnsembleModel EnsembleModel::random_cloud(int n_atoms, HalfInt fa, HalfInt fb,
                                          const Eigen::Vector3d& delta_k, double extent_m,
                                          std::uint64_t seed) {
  if (n_atoms < 1) throw std::invalid_argument("ensemble needs at least one atom");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5 * extent_m, 0.5 * extent_m);
  EnsembleModel model{fa, fb, {}, delta_k};
  model.positions.reserve(n_atoms);
  for (int i = 0; i < n_atoms; ++i) model.positions.emplace_back(u(rng), u(rng), u(rng));
  return model;
}

ExcitationSpace::ExcitationSpace(int n_atoms, std::vector<HalfInt> b_levels, int max_excitations)
    : n_atoms_(n_atoms), max_excitations_(max_excitations), b_levels_(std::move(b_levels)) {
  if (n_atoms < 1) throw std::invalid_argument("excitation space needs at least one atom");
  if (max_excitations < 0) throw std::invalid_argument("negative excitation truncation");
  const int nb = static_cast<int>(b_levels_.size());
  basis_.push_back({});
  // grow states by appending atoms above the current highest one
  for (std::size_t start = 0; start < basis_.size(); ++start) {
    const State base = basis_[start];
    if (static_cast<int>(base.size()) == max_excitations_ || nb == 0) continue;
    const int first = base.empty() ? 0 : base.back().atom + 1;
    for (int mu = first; mu < n_atoms_; ++mu) {
      for (int j = 0; j < nb; ++j) {
        State next = base;
        next.push_back({mu, j});
        basis_.push_back(std::move(next));
      }
    }
  }
  for (int i = 0; i < dimension(); ++i) index_.emplace(basis_[i], i);
}

int ExcitationSpace::level_index(HalfInt mb) const {
  const auto it = std::find(b_levels_.begin(), b_levels_.end(), mb);
  return it == b_levels_.end() ? -1 : static_cast<int>(it - b_levels_.begin());
}

int ExcitationSpace::index_of(const State& state) const {
  const auto it = index_.find(state);
  return it == index_.end() ? -1 : it->second;
}

SparseMatrixC collective_raising(const EnsembleModel& model, const ExcitationSpace& space,
                                 const GroundConfiguration& ground, SpinWaveComponent component) {
  check_component(model, component);
  const int n = model.atom_count();
  if (space.atom_count() != n || static_cast<int>(ground.size()) != n) {
    throw std::invalid_argument("atom count mismatch between model, space and ground configuration");
  }
  const int level = space.level_index(component.final_projection());
  if (level < 0) {
    throw std::invalid_argument("b sublevel " + component.final_projection().to_string() +
                                " is not part of the excitation space");
  }
  const double scale = std::sqrt(static_cast<double>(model.fa.multiplicity()) / n);
  std::vector<std::complex<double>> phase(n);
  for (int mu = 0; mu < n; ++mu) {
    phase[mu] = scale * std::polar(1.0, -model.delta_k.dot(model.positions[mu]));
  }

  std::vector<Eigen::Triplet<std::complex<double>>> triplets;
  const auto& basis = space.basis();
  for (int col = 0; col < space.dimension(); ++col) {
    const auto& state = basis[col];
    if (static_cast<int>(state.size()) >= space.max_excitations()) continue;
    for (int mu = 0; mu < n; ++mu) {
      if (ground[mu] != component.m) continue;
      const bool excited = std::any_of(state.begin(), state.end(),
                                       [mu](const auto& e) { return e.atom == mu; });
      if (excited) continue;
      ExcitationSpace::State target = state;
      target.insert(std::upper_bound(target.begin(), target.end(),
                                     ExcitationSpace::Excitation{mu, level}),
                    ExcitationSpace::Excitation{mu, level});
      const int row = space.index_of(target);
      if (row >= 0) triplets.emplace_back(row, col, phase[mu]);
    }
  }
  SparseMatrixC op(space.dimension(), space.dimension());
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

std::vector<WeightedComponent> mode_components(const BranchingTable& table, int alpha) {
  const Rational total = table.weight(alpha);
  if (total == 0) {
    throw std::domain_error("mode alpha=" + std::to_string(alpha) +
                            " has no allowed transitions (sum_m X_m^2 = 0)");
  }
  const double norm = std::sqrt(total.convert_to<double>());
  std::vector<WeightedComponent> out;
  for (const auto& e : table.entries()) {
    if (e.alpha != alpha || e.amplitude.sign == 0) continue;
    out.push_back({{alpha, e.m}, e.amplitude.value() / norm});
  }
  return out;
}

SparseMatrixC normalized_mode_raising(const EnsembleModel& model, const ExcitationSpace& space,
                                      const GroundConfiguration& ground,
                                      const BranchingTable& table, int alpha) {
  SparseMatrixC op(space.dimension(), space.dimension());
  for (const auto& wc : mode_components(table, alpha)) {
    op += wc.weight * collective_raising(model, space, ground, wc.component);
  }
  return op;
}

std::complex<double> vacuum_correlation(const EnsembleModel& model, SpinWaveComponent lhs,
                                        SpinWaveComponent rhs) {
  model.validate();
  check_component(model, lhs);
  check_component(model, rhs);
  const int n = model.atom_count();
  const ExcitationSpace space(n, distinct_levels({lhs.final_projection(), rhs.final_projection()}),
                              1);

  // Columns s^dag|vac> with every atom eligible; a ground configuration only
  // keeps the excitations of atoms sitting in the component's sublevel.
  const auto column = [&](SpinWaveComponent c) {
    const GroundConfiguration all(n, c.m);
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(space.dimension());
    vac(0) = 1.0;
    return Eigen::VectorXcd(collective_raising(model, space, all, c) * vac);
  };
  const Eigen::VectorXcd left = column(lhs);
  const Eigen::VectorXcd right = column(rhs);
  std::vector<int> atom_of(space.dimension(), -1);
  for (int k = 1; k < space.dimension(); ++k) atom_of[k] = space.basis()[k].front().atom;

  std::complex<double> total = 0.0;
  for_each_configuration(
      n, ground_classes(model.fa, {lhs.m, rhs.m}),
      [&](const GroundConfiguration& config, double w) {
        std::complex<double> overlap = 0.0;
        for (int k = 1; k < space.dimension(); ++k) {
          const auto& level = config[atom_of[k]];
          if (level == lhs.m && level == rhs.m) overlap += std::conj(left(k)) * right(k);
        }
        total += w * overlap;
      });
  return total;
}

std::complex<double> mode_vacuum_correlation(const EnsembleModel& model,
                                             const BranchingTable& table, int alpha_lhs,
                                             int alpha_rhs) {
  std::complex<double> total = 0.0;
  for (const auto& l : mode_components(table, alpha_lhs)) {
    for (const auto& r : mode_components(table, alpha_rhs)) {
      total += l.weight * r.weight * vacuum_correlation(model, l.component, r.component);
    }
  }
  return total;
}

CommutatorCheck commutator_deviation(const EnsembleModel& model, SpinWaveComponent component) {
  model.validate();
  check_component(model, component);
  const int n = model.atom_count();
  // two excitations: s s^dag acting on a one-excitation state
  const ExcitationSpace space(n, {component.final_projection()}, 2);
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(space.dimension());
  vac(0) = 1.0;

  double norm = 0.0;
  double commutator = 0.0;
  for_each_configuration(
      n, ground_classes(model.fa, {component.m}),
      [&](const GroundConfiguration& config, double w) {
        const SparseMatrixC raise = collective_raising(model, space, config, component);
        const SparseMatrixC lower = raise.adjoint();
        const Eigen::VectorXcd psi = raise * vac;
        const double p = psi.squaredNorm();
        if (p == 0.0) return;
        const Eigen::VectorXcd up = raise * psi;
        const Eigen::VectorXcd down = lower * psi;
        norm += w * p;
        commutator += w * (up.squaredNorm() - down.squaredNorm());
      });
  CommutatorCheck out;
  out.expectation = commutator / norm;
  out.deviation = std::abs(out.expectation - 1.0);
  return out;
}

}  // namespace dlcz
