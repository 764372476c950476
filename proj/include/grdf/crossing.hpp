#pragma once

#include <cstdint>
#include <vector>

#include "grdf/environment.hpp"
#include "grdf/rational.hpp"
#include "grdf/walker.hpp"

namespace grdf {

/// Smallest n >= 1 such that (v.x, v.t+1), ..., (v.x, v.t+n) hold K open sites.
std::int64_t H_depth(const Environment& env, Site v, std::int64_t cap = kDefaultLevelCap);

/// Gamma(u) = {u.x, ..., u.x+K-1} x {u.t-K+1, ..., u.t}.
/// Good: every site open with W = 1.
bool good_box(const Environment& env, Site u);
/// Every site of Gamma(u) open, W unrestricted.
bool open_box(const Environment& env, Site u);

/// Which boxes may bound the crossing region. Both block every segment that
/// starts beyond the box and crosses the box's top row on the far side, since
/// the top row alone supplies K open levels closer than such a jump.
enum class Barrier { kGoodBox, kOpenBox };

/// g+(u): first n >= 1 with Gamma(u + (n-1)K e1) acceptable.
std::int64_t g_plus(const Environment& env, Site u, Barrier barrier = Barrier::kGoodBox,
                    std::int64_t cap = kDefaultLevelCap);
/// g-(u): first n >= 1 with Gamma(u - (nK-1) e1) acceptable.
std::int64_t g_minus(const Environment& env, Site u, Barrier barrier = Barrier::kGoodBox,
                     std::int64_t cap = kDefaultLevelCap);

/// Finite region guaranteed to hold the last vertex at or below t0 of every
/// path crossing [a, b] x {t0}.
struct DRegion {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t t0 = 0;
  std::int64_t g_minus = 0;
  std::int64_t g_plus = 0;
  std::int64_t col_lo = 0;  // left edge of the left box
  std::int64_t col_hi = 0;  // right edge of the right box
  /// Column depths, index j - col_lo: smallest n >= 0 such that
  /// (j, t0 - n), ..., (j, t0) hold K open sites.
  std::vector<std::int64_t> depth;

  std::int64_t width() const noexcept { return col_hi - col_lo + 1; }
  std::int64_t max_depth() const noexcept;
  /// Sites whose outgoing segment may cross row t0: rows [t0 - depth, t0 - 1].
  std::vector<Site> candidates() const;
};

DRegion d_region(const Environment& env, std::int64_t a, std::int64_t b, std::int64_t t0,
                 Barrier barrier = Barrier::kOpenBox, std::int64_t cap = kDefaultLevelCap);

/// One path through [a, b] x {t0}, identified by its last vertex at or below
/// t0 and the next vertex. For a vertex at t0 both are that vertex.
struct Crossing {
  Site from;
  Site to;

  /// Interpolated position at time t0.
  Rational position(std::int64_t t0) const;
  friend constexpr auto operator<=>(const Crossing&, const Crossing&) = default;
};

/// Classifies the step from -> X[from]: the crossing it makes at row t0, if
/// it is the last step at or below t0 of its path and hits [a, b].
bool crossing_of_step(Site from, Site to, std::int64_t a, std::int64_t b, std::int64_t t0,
                      Crossing& out);

struct IntervalCrossings {
  DRegion region;
  std::vector<Crossing> crossings;  // sorted, distinct

  /// Each crossing as a two-vertex path (one vertex for a crossing at t0).
  std::vector<PathRecord> paths() const;
};

/// Every path of the forest (started at or below t0, from any site) with
/// position in [a, b] at time t0. The sites of [a, b] x {t0} are always
/// included; the rest come from one jump per D-region candidate.
IntervalCrossings paths_through_interval(const Environment& env, std::int64_t a, std::int64_t b,
                                         std::int64_t t0, Barrier barrier = Barrier::kOpenBox,
                                         std::int64_t cap = kDefaultLevelCap);

struct EtaOptions {
  Barrier barrier = Barrier::kOpenBox;
  std::int64_t cap = kDefaultLevelCap;
};

struct EtaResult {
  std::int64_t eta = 0;
  std::int64_t paths = 0;  // crossings of the base interval
};

/// Number of distinct positions at time t0 + t of the paths through
/// [a, b] x {t0}, compared exactly. Evolution stops early once a single
/// unfinished class is left, which forces the count to 1.
EtaResult eta_count(const Environment& env, std::int64_t t0, std::int64_t t, std::int64_t a,
                    std::int64_t b, const EtaOptions& options = {});

/// A+(x0, t0; rho, t): some path touches [x0-rho, x0+rho] x [t0, t0+t] and
/// afterwards touches {x0+20rho} x [t0, t0+4t]. Paths are taken from the
/// crossings of [x0-2rho, x0+2rho] x {t0} and from every site of
/// [x0-2rho, x0+2rho] x [t0, t0+2t].
bool event_A_plus(const Environment& env, std::int64_t x0, std::int64_t t0, std::int64_t rho,
                  std::int64_t t, Barrier barrier = Barrier::kOpenBox,
                  std::int64_t cap = kDefaultLevelCap);

}  // namespace grdf
