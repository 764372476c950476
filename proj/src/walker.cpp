#include "grdf/walker.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <string>

namespace grdf {

namespace {

struct LevelTop {
  bool open = false;
  Site site;
};

// Scans L(u, k) from the apex downwards and returns its upmost open site.
LevelTop upmost_open(const Environment& env, Site u, std::int64_t k) {
  const double p = env.p();
  for (std::int64_t j = k; j >= 1; --j) {
    const std::int64_t dx = k - j;
    if (dx == 0) {
      const Site apex{u.x, u.t + j};
      if (env.uniform(apex) < p) return {true, apex};
      continue;
    }
    const Site left{u.x - dx, u.t + j};
    const Site right{u.x + dx, u.t + j};
    const double ul = env.uniform(left);
    const double ur = env.uniform(right);
    const bool lo = ul < p;
    const bool ro = ur < p;
    if (lo && ro) return {true, ul > ur ? left : right};
    if (lo) return {true, left};
    if (ro) return {true, right};
  }
  return {};
}

}  // namespace

std::vector<Site> level_set(Site u, std::int64_t k) {
  std::vector<Site> out;
  if (k < 1) return out;
  out.reserve(static_cast<std::size_t>(2 * k - 1));
  for (std::int64_t j = 1; j < k; ++j) {
    out.push_back({u.x - (k - j), u.t + j});
    out.push_back({u.x + (k - j), u.t + j});
  }
  out.push_back({u.x, u.t + k});
  return out;
}

std::int64_t open_level_index(const Environment& env, Site u, int r, std::int64_t cap) {
  int found = 0;
  for (std::int64_t k = 1; k <= cap; ++k) {
    if (upmost_open(env, u, k).open && ++found == r) return k;
  }
  throw SearchCapExceeded("open level search from (" + std::to_string(u.x) + "," +
                          std::to_string(u.t) + ") exceeded " + std::to_string(cap) + " levels");
}

Jump next_jump(const Environment& env, Site u, int w, std::int64_t cap) {
  int found = 0;
  for (std::int64_t k = 1; k <= cap; ++k) {
    const LevelTop top = upmost_open(env, u, k);
    if (top.open && ++found == w) return {top.site, k};
  }
  throw SearchCapExceeded("jump search from (" + std::to_string(u.x) + "," +
                          std::to_string(u.t) + ") exceeded " + std::to_string(cap) + " levels");
}

double interpolate(const PathRecord& path, double t) {
  const auto& v = path.vertices;
  if (v.empty() || t < static_cast<double>(v.front().t) || t > static_cast<double>(v.back().t))
    throw OutOfRange("interpolation time outside the path's vertex range");
  auto it = std::lower_bound(v.begin(), v.end(), t,
                             [](const Site& s, double tt) { return static_cast<double>(s.t) < tt; });
  if (static_cast<double>(it->t) == t) return static_cast<double>(it->x);
  const Site& b = *it;
  const Site& a = *(it - 1);
  const double frac = (t - static_cast<double>(a.t)) / static_cast<double>(b.t - a.t);
  return static_cast<double>(a.x) + frac * static_cast<double>(b.x - a.x);
}

Rational position_at(const PathRecord& path, std::int64_t t) {
  const auto& v = path.vertices;
  if (v.empty() || t < v.front().t || t > v.back().t)
    throw OutOfRange("interpolation time outside the path's vertex range");
  auto it = std::lower_bound(v.begin(), v.end(), t,
                             [](const Site& s, std::int64_t tt) { return s.t < tt; });
  if (it->t == t) return Rational(it->x);
  const Site& b = *it;
  const Site& a = *(it - 1);
  return Rational(a.x * (b.t - a.t) + (b.x - a.x) * (t - a.t), b.t - a.t);
}

WalkerState make_walker(Site start) {
  WalkerState s;
  s.current = start;
  s.path.start = start;
  s.path.vertices.push_back(start);
  return s;
}

Jump step(const Environment& env, WalkerState& state, std::int64_t cap) {
  const Jump j = next_jump(env, state.current, env.w(state.current), cap);
  state.history.insert_ball_above(state.current, j.radius, j.target.t);
  state.history.clip_at_or_below(j.target.t);
  state.current = j.target;
  state.path.vertices.push_back(j.target);
  return j;
}

RenewalRun evolve_with_renewals(const Environment& env, Site u, const StopRule& stop,
                                std::int64_t cap) {
  WalkerState w = make_walker(u);
  RenewalRun run;
  std::int64_t last_time = u.t;
  std::int64_t last_x = u.x;
  std::int64_t max_disp = 0;
  const std::int64_t deadline = u.t + stop.horizon;
  const auto done = [&] {
    return stop.renewals && static_cast<std::int64_t>(run.renewals.size()) >= *stop.renewals;
  };
  while (!done() && w.current.t < deadline) {
    step(env, w, cap);
    max_disp = std::max(max_disp, std::abs(w.current.x - last_x));
    if (w.history.empty()) {
      RenewalRecord r;
      r.index = static_cast<int>(run.renewals.size()) + 1;
      r.time = w.current.t;
      r.position = w.current.x;
      r.gap = w.current.t - last_time;
      r.max_displacement = max_disp;
      run.renewals.push_back(r);
      last_time = w.current.t;
      last_x = w.current.x;
      max_disp = 0;
    }
  }
  const std::int64_t wanted = stop.renewals.value_or(1);
  if (static_cast<std::int64_t>(run.renewals.size()) < wanted)
    throw HorizonExhausted("found " + std::to_string(run.renewals.size()) + " of " +
                           std::to_string(wanted) + " renewals within horizon " +
                           std::to_string(stop.horizon));
  run.path = std::move(w.path);
  return run;
}

Rational walk_position(const Environment& env, Site start, std::int64_t t, std::int64_t cap) {
  if (t < start.t) throw OutOfRange("query time precedes the path start");
  Site cur = start;
  while (cur.t < t) {
    const Site next = next_jump(env, cur, env.w(cur), cap).target;
    if (next.t >= t) {
      if (next.t == t) return Rational(next.x);
      return Rational(cur.x * (next.t - cur.t) + (next.x - cur.x) * (t - cur.t), next.t - cur.t);
    }
    cur = next;
  }
  return Rational(cur.x);
}

void write_path_csv(std::ostream& os, const PathRecord& path) {
  os << "x,t\n";
  for (const Site& v : path.vertices) os << v.x << ',' << v.t << '\n';
}

void write_renewals_csv(std::ostream& os, const std::vector<RenewalRecord>& renewals) {
  os << "j,T_j,position,gap,max_displacement\n";
  for (const auto& r : renewals)
    os << r.index << ',' << r.time << ',' << r.position << ',' << r.gap << ','
       << r.max_displacement << '\n';
}

}  // namespace grdf
