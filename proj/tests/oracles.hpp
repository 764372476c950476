#pragma once

// Independent reference implementations used only by the tests. Each one
// recomputes a library result from the definitions by exhaustive search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "grdf/crossing.hpp"
#include "grdf/environment.hpp"
#include "grdf/history.hpp"
#include "grdf/metric.hpp"
#include "grdf/walker.hpp"

namespace oracle {

using grdf::Environment;
using grdf::Site;

/// All open sites strictly above u within L1 distance R, grouped by distance.
inline std::map<std::int64_t, std::vector<Site>> open_by_level(const Environment& env, Site u,
                                                               std::int64_t R) {
  std::map<std::int64_t, std::vector<Site>> out;
  for (std::int64_t dt = 1; dt <= R; ++dt)
    for (std::int64_t dx = -(R - dt); dx <= R - dt; ++dx) {
      const Site v{u.x + dx, u.t + dt};
      if (env.is_open(v)) out[grdf::l1_distance(u, v)].push_back(v);
    }
  return out;
}

/// Index of the r-th open level found by scanning growing half-balls.
inline std::int64_t open_level_index(const Environment& env, Site u, int r) {
  for (std::int64_t R = 4;; R *= 2) {
    const auto levels = open_by_level(env, u, R);
    if (static_cast<int>(levels.size()) >= r) {
      auto it = levels.begin();
      std::advance(it, r - 1);
      return it->first;
    }
  }
}

/// Upmost open site of the w-th open level; ties by larger U then larger x.
inline Site select_target(const Environment& env, Site u, int w) {
  for (std::int64_t R = 4;; R *= 2) {
    const auto levels = open_by_level(env, u, R);
    if (static_cast<int>(levels.size()) < w) continue;
    auto it = levels.begin();
    std::advance(it, w - 1);
    Site best = it->second.front();
    for (const Site& v : it->second) {
      const double ub = env.uniform(best), uv = env.uniform(v);
      if (v.t > best.t || (v.t == best.t && (uv > ub || (uv == ub && v.x > best.x)))) best = v;
    }
    return best;
  }
}

/// Vertices of the path from u after `steps` jumps, recomputed jump by jump.
inline std::vector<Site> path(const Environment& env, Site u, std::size_t steps) {
  std::vector<Site> out{u};
  for (std::size_t i = 0; i < steps; ++i) out.push_back(oracle::select_target(env, out.back(), env.w(out.back())));
  return out;
}

/// Set form of the history recursion, recomputed from a vertex log.
inline std::set<Site> history(const std::vector<Site>& vertices, std::size_t n) {
  std::set<Site> delta;
  for (std::size_t i = 1; i <= n; ++i) {
    const Site a = vertices[i - 1], b = vertices[i];
    const std::int64_t r = grdf::l1_distance(a, b);
    for (std::int64_t dt = -r; dt <= r; ++dt)
      for (std::int64_t dx = -(r - std::abs(dt)); dx <= r - std::abs(dt); ++dx)
        delta.insert({a.x + dx, a.t + dt});
    std::set<Site> kept;
    for (const Site& v : delta)
      if (v.t > b.t) kept.insert(v);
    delta = std::move(kept);
  }
  return delta;
}

inline std::set<Site> expand(const grdf::HistoryRegion& h) {
  std::set<Site> out;
  for (const auto& [t, runs] : h.rows())
    for (const auto& iv : runs)
      for (std::int64_t x = iv.lo; x <= iv.hi; ++x) out.insert({x, t});
  return out;
}

/// Linear interpolation found by a plain scan over segments.
inline double interpolate(const std::vector<Site>& v, double t) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double a = static_cast<double>(v[i].t), b = static_cast<double>(v[i + 1].t);
    if (t >= a && t <= b) {
      if (t == a) return static_cast<double>(v[i].x);
      return static_cast<double>(v[i].x) +
             (static_cast<double>(v[i + 1].x) - static_cast<double>(v[i].x)) * (t - a) / (b - a);
    }
  }
  return static_cast<double>(v.back().x);
}

/// Crossings of [a, b] x {t0} found by launching a path from every site of
/// the window [x_lo, x_hi] x [t_lo, t0] and following it up to row t0.
inline std::set<grdf::Crossing> crossings_in_window(const Environment& env, std::int64_t a,
                                                    std::int64_t b, std::int64_t t0,
                                                    std::int64_t x_lo, std::int64_t x_hi,
                                                    std::int64_t t_lo) {
  std::set<grdf::Crossing> out;
  std::map<Site, Site> next;
  for (std::int64_t t = t_lo; t <= t0; ++t)
    for (std::int64_t x = x_lo; x <= x_hi; ++x) {
      Site v{x, t};
      if (v.t == t0) {
        if (x >= a && x <= b) out.insert({v, v});
        continue;
      }
      for (;;) {
        auto it = next.find(v);
        const Site w = it != next.end() ? it->second : grdf::select_target(env, v);
        if (it == next.end()) next.emplace(v, w);
        if (w.t < t0) {
          v = w;
          continue;
        }
        if (w.t == t0) {
          if (w.x >= a && w.x <= b) out.insert({w, w});
        } else {
          const __int128 span = w.t - v.t;
          const __int128 num = static_cast<__int128>(v.x) * span +
                               static_cast<__int128>(w.x - v.x) * (t0 - v.t);
          if (num >= static_cast<__int128>(a) * span && num <= static_cast<__int128>(b) * span)
            out.insert({v, w});
        }
        break;
      }
    }
  return out;
}

/// Hausdorff distance by the plain sup-inf definition.
inline double hausdorff(const std::vector<grdf::MetricPath>& A,
                        const std::vector<grdf::MetricPath>& B, double tol) {
  double ab = 0.0, ba = 0.0;
  for (const auto& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : B) best = std::min(best, grdf::path_distance(a, b, tol));
    ab = std::max(ab, best);
  }
  for (const auto& b : B) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : A) best = std::min(best, grdf::path_distance(b, a, tol));
    ba = std::max(ba, best);
  }
  return std::max(ab, ba);
}

/// Dense-grid lower estimate of the path-space distance.
inline double path_distance_grid(const grdf::MetricPath& a, const grdf::MetricPath& b,
                                 double t_hi, int steps) {
  const double lo = std::min(a.t0(), b.t0());
  double best = std::fabs(std::tanh(a.t0()) - std::tanh(b.t0()));
  for (int i = 0; i <= steps; ++i) {
    const double t = lo + (t_hi - lo) * i / steps;
    best = std::max(best, std::fabs(grdf::phi(a.eval(t), t) - grdf::phi(b.eval(t), t)));
  }
  return best;
}

}  // namespace oracle
