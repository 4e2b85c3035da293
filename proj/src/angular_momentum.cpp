#include "dlcz/angular_momentum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dlcz {

namespace {

using boost::multiprecision::cpp_int;

cpp_int factorial(int n) {
  cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Factorial of a half-integer combination whose value must be a
// non-negative integer; `twice` is twice that integer.
cpp_int factorial_twice(int twice) { return factorial(twice / 2); }

std::string describe(const LevelScheme& s) {
  return "F_a=" + s.fa.to_string() + ", F_c=" + s.fc.to_string() + ", F_b=" + s.fb.to_string();
}

}  // namespace

double ExactCoefficient::value() const {
  if (sign == 0) return 0.0;
  return sign * std::sqrt(square.convert_to<double>());
}

ExactCoefficient clebsch_gordan_exact(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J,
                                      HalfInt M) {
  ExactCoefficient zero;
  if (M != m1 + m2) return zero;
  if (!is_valid_projection(j1, m1) || !is_valid_projection(j2, m2) || !is_valid_projection(J, M)) {
    return zero;
  }
  if (!satisfies_triangle(j1, j2, J)) return zero;

  const int a = j1.twice(), b = j2.twice(), c = J.twice();
  const int ma = m1.twice(), mb = m2.twice(), mc = M.twice();

  // Racah: prefactor^2 * (sum_k)^2, all factorial arguments integral.
  Rational pre2(cpp_int(c + 1) * factorial_twice(c + a - b) * factorial_twice(c - a + b) *
                    factorial_twice(a + b - c) * factorial_twice(c + mc) * factorial_twice(c - mc) *
                    factorial_twice(a - ma) * factorial_twice(a + ma) * factorial_twice(b - mb) *
                    factorial_twice(b + mb),
                factorial_twice(a + b + c + 2));

  // k runs over integers keeping every factorial argument non-negative.
  const int k_min = std::max({0, (b - c - ma) / 2, (a - c + mb) / 2});
  const int k_max = std::min({(a + b - c) / 2, (a - ma) / 2, (b + mb) / 2});
  Rational sum = 0;
  for (int k = k_min; k <= k_max; ++k) {
    cpp_int den = factorial(k) * factorial((a + b - c) / 2 - k) * factorial((a - ma) / 2 - k) *
                  factorial((b + mb) / 2 - k) * factorial((c - b + ma) / 2 + k) *
                  factorial((c - a - mb) / 2 + k);
    Rational term(cpp_int(1), den);
    if (k % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return zero;
  return ExactCoefficient{sum > 0 ? 1 : -1, pre2 * sum * sum};
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  return clebsch_gordan_exact(j1, m1, j2, m2, J, M).value();
}

void LevelScheme::validate() const {
  const HalfInt photon(1);
  if (fa.twice() < 0 || fb.twice() < 0 || fc.twice() < 0) {
    throw std::invalid_argument("negative angular momentum in level scheme (" + describe(*this) +
                                ")");
  }
  if (!satisfies_triangle(fa, photon, fc)) {
    throw std::invalid_argument("write transition a->c violates the triangle rule |F_a-1| <= F_c <= "
                                "F_a+1 (" + describe(*this) + ")");
  }
  if (!satisfies_triangle(fc, photon, fb)) {
    throw std::invalid_argument("emission c->b violates the triangle rule |F_c-1| <= F_b <= "
                                "F_c+1 (" + describe(*this) + ")");
  }
}

BranchingTable::BranchingTable(const LevelScheme& scheme) : scheme_(scheme) {
  scheme_.validate();
  const HalfInt photon(1);
  for (HalfInt m = -scheme_.fa; m <= scheme_.fa; m = m + 1) {
    for (int alpha : {-1, +1}) {
      const HalfInt mc = m + 1;
      const HalfInt mb = mc + alpha;
      const ExactCoefficient write =
          clebsch_gordan_exact(scheme_.fa, m, photon, HalfInt(1), scheme_.fc, mc);
      const ExactCoefficient emit =
          clebsch_gordan_exact(scheme_.fc, mc, photon, HalfInt(alpha), scheme_.fb, mb);
      ExactCoefficient x{write.sign * emit.sign, write.square * emit.square};
      if (x.sign == 0) x.square = 0;
      index_[{m.twice(), alpha}] = entries_.size();
      entries_.push_back(Entry{m, alpha, x});
    }
  }
}

const ExactCoefficient& BranchingTable::exact(HalfInt m, int alpha) const {
  static const ExactCoefficient zero{};
  const auto it = index_.find({m.twice(), alpha});
  return it == index_.end() ? zero : entries_[it->second].amplitude;
}

double BranchingTable::amplitude(HalfInt m, int alpha) const { return exact(m, alpha).value(); }

Rational BranchingTable::weight(int alpha) const {
  Rational total = 0;
  for (const auto& e : entries_) {
    if (e.alpha == alpha) total += e.amplitude.square;
  }
  return total;
}

BranchingTable branching_table(const LevelScheme& scheme) { return BranchingTable(scheme); }

Rational cos2_mixing_angle(const BranchingTable& table) {
  const Rational minus = table.weight(-1);
  const Rational total = minus + table.weight(+1);
  if (total == 0) {
    throw std::domain_error("no allowed decay channel: sum of X_m^2 vanishes for this scheme");
  }
  return minus / total;
}

double mixing_angle(const BranchingTable& table) {
  const double c2 = cos2_mixing_angle(table).convert_to<double>();
  return std::acos(std::sqrt(std::clamp(c2, 0.0, 1.0)));
}

double mixing_angle(const LevelScheme& scheme) { return mixing_angle(BranchingTable(scheme)); }

}  // namespace dlcz
