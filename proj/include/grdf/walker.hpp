#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "grdf/environment.hpp"
#include "grdf/history.hpp"
#include "grdf/rational.hpp"

namespace grdf {

/// Rows scanned before a level search gives up. Unreachable for sane p.
inline constexpr std::int64_t kDefaultLevelCap = 1'000'000;

/// L(u, k): sites strictly above u at L1 distance exactly k.
std::vector<Site> level_set(Site u, std::int64_t k);

/// h(u, r): index of the r-th open level of u.
std::int64_t open_level_index(const Environment& env, Site u, int r,
                              std::int64_t cap = kDefaultLevelCap);

struct Jump {
  Site target;
  std::int64_t radius = 0;  // level index, equals ||target - u||_1
};

/// Upmost open site of the w-th open level; a same-row pair is resolved by the
/// larger U, then by the larger x.
Jump next_jump(const Environment& env, Site u, int w, std::int64_t cap = kDefaultLevelCap);

inline Site select_target(const Environment& env, Site u, int w,
                          std::int64_t cap = kDefaultLevelCap) {
  return next_jump(env, u, w, cap).target;
}

/// X[u]: the target for the weight W_u drawn from the environment.
inline Site select_target(const Environment& env, Site u) {
  return next_jump(env, u, env.w(u)).target;
}

/// Vertex sequence X^u_0 = u, X^u_1, ... of one path.
struct PathRecord {
  Site start;
  std::vector<Site> vertices;
};

/// Linear interpolation of the path at time t. Throws OutOfRange outside
/// [start.t, last vertex time].
double interpolate(const PathRecord& path, double t);

/// Exact interpolated position at an integer time.
Rational position_at(const PathRecord& path, std::int64_t t);

/// Single path with its history region.
struct WalkerState {
  Site current;
  HistoryRegion history;
  PathRecord path;
};

WalkerState make_walker(Site start);

/// Appends X[current] and applies the history recursion.
Jump step(const Environment& env, WalkerState& state, std::int64_t cap = kDefaultLevelCap);

struct RenewalRecord {
  int index = 0;
  std::int64_t time = 0;
  std::int64_t position = 0;
  std::int64_t gap = 0;
  std::int64_t max_displacement = 0;
};

/// Run until `renewals` renewals are recorded (when set) or until the time
/// advanced by `horizon`, whichever comes first.
struct StopRule {
  std::optional<std::int64_t> renewals;
  std::int64_t horizon = 100'000;
};

struct RenewalRun {
  PathRecord path;
  std::vector<RenewalRecord> renewals;
};

/// Renewals are the jumps after which the history region is empty.
/// Throws HorizonExhausted if the stop rule's renewal count (or, without one,
/// a single renewal) is not reached within the horizon.
RenewalRun evolve_with_renewals(const Environment& env, Site u, const StopRule& stop,
                                std::int64_t cap = kDefaultLevelCap);

/// Interpolated position at time `t` of the path from `start`, without history
/// bookkeeping or a vertex log.
Rational walk_position(const Environment& env, Site start, std::int64_t t,
                       std::int64_t cap = kDefaultLevelCap);

void write_path_csv(std::ostream& os, const PathRecord& path);
void write_renewals_csv(std::ostream& os, const std::vector<RenewalRecord>& renewals);

}  // namespace grdf
