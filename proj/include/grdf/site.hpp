#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace grdf {

/// Lattice point of Z^2. `x` is space, `t` is time.
struct Site {
  std::int64_t x = 0;
  std::int64_t t = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Site& s) {
  return os << '(' << s.x << ',' << s.t << ')';
}

constexpr std::int64_t l1_distance(Site a, Site b) {
  const std::int64_t dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const std::int64_t dt = a.t > b.t ? a.t - b.t : b.t - a.t;
  return dx + dt;
}

struct SiteHash {
  std::size_t operator()(const Site& s) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(s.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(s.t) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Error types. Every simulation failure surfaces as one of these.

struct SearchCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HorizonExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfRange : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace grdf
