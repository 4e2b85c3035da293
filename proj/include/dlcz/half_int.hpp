#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace dlcz {

/// Angular-momentum quantum number j or projection m, stored as 2j so that
/// half-integers are exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr explicit HalfInt(int integer_value) : twice_(2 * integer_value) {}

  static constexpr HalfInt from_twice(int twice_value) {
    HalfInt h;
    h.twice_ = twice_value;
    return h;
  }

  /// Accepts "3", "-2", "3/2", "-1/2" and decimal forms such as "1.5".
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  /// 2j + 1
  constexpr int multiplicity() const { return twice_ + 1; }

  std::string to_string() const;

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr HalfInt operator+(int o) const { return from_twice(twice_ + 2 * o); }
  constexpr HalfInt operator-(int o) const { return from_twice(twice_ - 2 * o); }

  constexpr auto operator<=>(const HalfInt&) const = default;

 private:
  int twice_ = 0;
};

/// j - m is a non-negative integer no larger than 2j.
constexpr bool is_valid_projection(HalfInt j, HalfInt m) {
  return j.twice() >= 0 && m.twice() >= -j.twice() && m.twice() <= j.twice() &&
         (j.twice() - m.twice()) % 2 == 0;
}

/// |j1 - j2| <= j3 <= j1 + j2 with j1 + j2 + j3 integer.
constexpr bool satisfies_triangle(HalfInt j1, HalfInt j2, HalfInt j3) {
  const int a = j1.twice(), b = j2.twice(), c = j3.twice();
  if (a < 0 || b < 0 || c < 0) return false;
  if ((a + b + c) % 2 != 0) return false;
  return c >= (a > b ? a - b : b - a) && c <= a + b;
}

}  // namespace dlcz
