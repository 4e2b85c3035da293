#include "dlcz/half_int.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace dlcz {

namespace {

int parse_int(std::string_view text) {
  int value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

HalfInt HalfInt::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const int num = parse_int(text.substr(0, slash));
    const int den = parse_int(text.substr(slash + 1));
    if (den == 1) return HalfInt(num);
    if (den == 2) return from_twice(num);
    throw std::invalid_argument("denominator must be 1 or 2: '" + std::string(text) + "'");
  }
  if (text.find('.') != std::string_view::npos) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    const double twice = 2.0 * value;
    if (ec != std::errc{} || ptr != text.data() + text.size() ||
        std::abs(twice - std::round(twice)) > 1e-12) {
      throw std::invalid_argument("not a half-integer: '" + std::string(text) + "'");
    }
    return from_twice(static_cast<int>(std::lround(twice)));
  }
  return HalfInt(parse_int(text));
}

std::string HalfInt::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

}  // namespace dlcz
