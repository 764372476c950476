#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>

namespace grdf {

/// Exact value num/den with den > 0, in lowest terms. Interpolated lattice
/// positions at integer times are always of this form.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {  // NOLINT
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr bool operator==(const Rational&, const Rational&) = default;
  friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num) * b.den;
    const __int128 rhs = static_cast<__int128>(b.num) * a.den;
    return lhs <=> rhs;
  }
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  os << r.num;
  if (r.den != 1) os << '/' << r.den;
  return os;
}

}  // namespace grdf
