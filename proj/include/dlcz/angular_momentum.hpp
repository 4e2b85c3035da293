#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <utility>
#include <vector>

#include "dlcz/half_int.hpp"

namespace dlcz {

using Rational = boost::multiprecision::cpp_rational;

/// A real coefficient held exactly as sign * sqrt(square).
struct ExactCoefficient {
  int sign = 0;  // -1, 0 or +1
  Rational square = 0;

  double value() const;
};

/// <j1 m1; j2 m2 | J M> in the Condon-Shortley convention, computed with the
/// Racah sum over exact big-integer factorials. Forbidden couplings give 0.
ExactCoefficient clebsch_gordan_exact(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J,
                                      HalfInt M);

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);

/// Hyperfine levels |a> (initial ground), |c> (excited), |b> (final ground)
/// of the write/read lambda system.
struct LevelScheme {
  HalfInt fa;
  HalfInt fb;
  HalfInt fc;

  /// Throws std::invalid_argument when either dipole transition a->c or c->b
  /// violates the triangle rule with a photon of spin 1.
  void validate() const;
};

/// 85Rb D1 line: F_a = 3, F_c = 3, F_b = 2.
inline constexpr LevelScheme kRubidium85Scheme{HalfInt(3), HalfInt(2), HalfInt(3)};

/// Transition amplitudes X_m(alpha) for the write photon (sigma+) followed by
/// emission of helicity alpha into the signal mode:
///   X_m(alpha) = <F_a m; 1 1 | F_c m+1> <F_c m+1; 1 alpha | F_b m+1+alpha>.
class BranchingTable {
 public:
  struct Entry {
    HalfInt m;
    int alpha = 0;
    ExactCoefficient amplitude;
  };

  explicit BranchingTable(const LevelScheme& scheme);

  const LevelScheme& scheme() const { return scheme_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// X_m(alpha); 0 for m outside {-F_a..F_a}.
  double amplitude(HalfInt m, int alpha) const;
  const ExactCoefficient& exact(HalfInt m, int alpha) const;

  /// sum_m X_m(alpha)^2, exact.
  Rational weight(int alpha) const;

 private:
  LevelScheme scheme_;
  std::vector<Entry> entries_;
  std::map<std::pair<int, int>, std::size_t> index_;
};

BranchingTable branching_table(const LevelScheme& scheme);

/// cos^2(eta) = sum_m X_m^2(-1) / sum_m sum_alpha X_m^2(alpha). Throws
/// std::domain_error when no decay channel is allowed.
Rational cos2_mixing_angle(const BranchingTable& table);

/// eta in [0, pi/2].
double mixing_angle(const BranchingTable& table);
double mixing_angle(const LevelScheme& scheme);

}  // namespace dlcz
