#include "grdf/crossing.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>

#include "grdf/forest.hpp"

namespace grdf {

namespace {

bool box_ok(const Environment& env, Site u, Barrier barrier) {
  const int K = env.K();
  for (std::int64_t dt = 0; dt < K; ++dt)
    for (std::int64_t dx = 0; dx < K; ++dx) {
      const Site v{u.x + dx, u.t - dt};
      if (!env.is_open(v)) return false;
      if (barrier == Barrier::kGoodBox && env.w(v) != 1) return false;
    }
  return true;
}

[[noreturn]] void cap_error(const char* what, Site u, std::int64_t cap) {
  throw SearchCapExceeded(std::string(what) + " from (" + std::to_string(u.x) + "," +
                          std::to_string(u.t) + ") exceeded " + std::to_string(cap));
}

}  // namespace

std::int64_t H_depth(const Environment& env, Site v, std::int64_t cap) {
  int found = 0;
  for (std::int64_t n = 1; n <= cap; ++n)
    if (env.is_open({v.x, v.t + n}) && ++found == env.K()) return n;
  cap_error("H depth", v, cap);
}

bool good_box(const Environment& env, Site u) { return box_ok(env, u, Barrier::kGoodBox); }
bool open_box(const Environment& env, Site u) { return box_ok(env, u, Barrier::kOpenBox); }

std::int64_t g_plus(const Environment& env, Site u, Barrier barrier, std::int64_t cap) {
  const int K = env.K();
  for (std::int64_t n = 1; n <= cap; ++n)
    if (box_ok(env, {u.x + (n - 1) * K, u.t}, barrier)) return n;
  cap_error("g+ search", u, cap);
}

std::int64_t g_minus(const Environment& env, Site u, Barrier barrier, std::int64_t cap) {
  const int K = env.K();
  for (std::int64_t n = 1; n <= cap; ++n)
    if (box_ok(env, {u.x - (n * K - 1), u.t}, barrier)) return n;
  cap_error("g- search", u, cap);
}

std::int64_t DRegion::max_depth() const noexcept {
  return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

std::vector<Site> DRegion::candidates() const {
  std::vector<Site> out;
  for (std::int64_t j = col_lo; j <= col_hi; ++j) {
    const std::int64_t d = depth[static_cast<std::size_t>(j - col_lo)];
    for (std::int64_t n = 1; n <= d; ++n) out.push_back({j, t0 - n});
  }
  return out;
}

DRegion d_region(const Environment& env, std::int64_t a, std::int64_t b, std::int64_t t0,
                 Barrier barrier, std::int64_t cap) {
  if (a > b) throw std::invalid_argument("d_region needs a <= b");
  const int K = env.K();
  DRegion d;
  d.a = a;
  d.b = b;
  d.t0 = t0;
  d.g_plus = g_plus(env, {b + 1, t0}, barrier, cap);
  d.g_minus = g_minus(env, {a - 1, t0}, barrier, cap);
  d.col_hi = b + d.g_plus * K;
  d.col_lo = a - d.g_minus * K;
  d.depth.reserve(static_cast<std::size_t>(d.width()));
  for (std::int64_t j = d.col_lo; j <= d.col_hi; ++j) {
    int found = 0;
    std::int64_t n = 0;
    for (;; ++n) {
      if (n > cap) cap_error("column depth", {j, t0}, cap);
      if (env.is_open({j, t0 - n}) && ++found == K) break;
    }
    d.depth.push_back(n);
  }
  return d;
}

Rational Crossing::position(std::int64_t t0) const {
  if (from == to) return Rational(from.x);
  return Rational(from.x * (to.t - from.t) + (to.x - from.x) * (t0 - from.t), to.t - from.t);
}

bool crossing_of_step(Site from, Site to, std::int64_t a, std::int64_t b, std::int64_t t0,
                      Crossing& out) {
  if (from.t > t0) return false;
  if (from.t == t0 || to.t == t0) {
    const Site v = from.t == t0 ? from : to;
    if (v.x < a || v.x > b) return false;
    out = {v, v};
    return true;
  }
  if (to.t < t0) return false;
  // a <= from.x + (to.x - from.x)(t0 - from.t)/(to.t - from.t) <= b
  const __int128 span = to.t - from.t;
  const __int128 num = static_cast<__int128>(from.x) * span +
                       static_cast<__int128>(to.x - from.x) * (t0 - from.t);
  if (num < static_cast<__int128>(a) * span || num > static_cast<__int128>(b) * span) return false;
  out = {from, to};
  return true;
}

std::vector<PathRecord> IntervalCrossings::paths() const {
  std::vector<PathRecord> out;
  out.reserve(crossings.size());
  for (const auto& c : crossings) {
    PathRecord p{c.from, {c.from}};
    if (c.to != c.from) p.vertices.push_back(c.to);
    out.push_back(std::move(p));
  }
  return out;
}

IntervalCrossings paths_through_interval(const Environment& env, std::int64_t a, std::int64_t b,
                                         std::int64_t t0, Barrier barrier, std::int64_t cap) {
  IntervalCrossings out;
  out.region = d_region(env, a, b, t0, barrier, cap);
  for (std::int64_t x = a; x <= b; ++x) out.crossings.push_back({{x, t0}, {x, t0}});
  Crossing c;
  for (const Site& v : out.region.candidates()) {
    const Site to = next_jump(env, v, env.w(v), cap).target;
    // Landing on row t0 inside [a, b] is already listed.
    if (to.t > t0 && crossing_of_step(v, to, a, b, t0, c)) out.crossings.push_back(c);
  }
  std::sort(out.crossings.begin(), out.crossings.end());
  out.crossings.erase(std::unique(out.crossings.begin(), out.crossings.end()),
                      out.crossings.end());
  return out;
}

EtaResult eta_count(const Environment& env, std::int64_t t0, std::int64_t t, std::int64_t a,
                    std::int64_t b, const EtaOptions& options) {
  if (t < 1) throw std::invalid_argument("eta_count needs t >= 1");
  const auto crossings = paths_through_interval(env, a, b, t0, options.barrier, options.cap);
  std::vector<Site> starts;
  starts.reserve(crossings.crossings.size());
  for (const auto& c : crossings.crossings) starts.push_back(c.from);
  EtaResult r;
  r.paths = static_cast<std::int64_t>(starts.size());
  Forest f(env, starts, options.cap);
  const std::int64_t tf = t0 + t;
  while (f.min_time() < tf) {
    if (f.live_classes() == 1) {
      r.eta = 1;
      return r;
    }
    f.advance();
  }
  std::set<Rational> seen;
  for (std::size_t i = 0; i < f.walker_count(); ++i) seen.insert(f.position(static_cast<int>(i), tf));
  r.eta = static_cast<std::int64_t>(seen.size());
  return r;
}

namespace {

struct SegmentWindow {
  double t_lo, t_hi, x_lo, x_hi;
};

// Time range of segment a->b (clipped to [t_lo, t_hi]) during which the
// segment lies inside the x-range of the window; empty if none.
bool segment_meets(Site a, Site b, const SegmentWindow& w, double& first) {
  const double ta = static_cast<double>(a.t), tb = static_cast<double>(b.t);
  double lo = std::max(ta, w.t_lo), hi = std::min(tb, w.t_hi);
  if (lo > hi) return false;
  const double slope = (static_cast<double>(b.x) - static_cast<double>(a.x)) / (tb - ta);
  const double xa = static_cast<double>(a.x);
  if (slope == 0.0) {
    if (xa < w.x_lo || xa > w.x_hi) return false;
  } else {
    double s1 = ta + (w.x_lo - xa) / slope;
    double s2 = ta + (w.x_hi - xa) / slope;
    if (s1 > s2) std::swap(s1, s2);
    lo = std::max(lo, s1);
    hi = std::min(hi, s2);
    if (lo > hi) return false;
  }
  first = lo;
  return true;
}

}  // namespace

bool event_A_plus(const Environment& env, std::int64_t x0, std::int64_t t0, std::int64_t rho,
                  std::int64_t t, Barrier barrier, std::int64_t cap) {
  if (rho < 1 || t < 1) throw std::invalid_argument("event_A_plus needs rho >= 1 and t >= 1");
  const std::int64_t t_end = t0 + 4 * t;
  const std::int64_t t_rect = t0 + t;
  const SegmentWindow inner{static_cast<double>(t0), static_cast<double>(t_rect),
                            static_cast<double>(x0 - rho), static_cast<double>(x0 + rho)};
  const double xr = static_cast<double>(x0 + 20 * rho);

  struct Flags {
    bool reach = false;  // the path from here touches the right boundary
    bool event = false;  // the path from here touches the rectangle, then the boundary
  };
  std::unordered_map<Site, Flags, SiteHash> memo;
  std::vector<std::pair<Site, Site>> chain;

  auto evaluate = [&](Site src) -> bool {
    chain.clear();
    Site v = src;
    Flags tail;
    for (;;) {
      if (v.t >= t_end) break;
      if (auto it = memo.find(v); it != memo.end()) {
        tail = it->second;
        break;
      }
      const Site w = next_jump(env, v, env.w(v), cap).target;
      chain.emplace_back(v, w);
      v = w;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const auto [a, b] = *it;
      Flags f;
      const SegmentWindow bound{static_cast<double>(t0), static_cast<double>(t_end), xr, xr};
      double when = 0.0;
      f.reach = segment_meets(a, b, bound, when) || tail.reach;
      double first = 0.0;
      if (segment_meets(a, b, inner, first)) {
        const SegmentWindow after{first, static_cast<double>(t_end), xr, xr};
        f.event = segment_meets(a, b, after, when) || tail.reach;
      }
      f.event = f.event || tail.event;
      memo.emplace(a, f);
      tail = f;
    }
    return tail.event;
  };

  const auto base = paths_through_interval(env, x0 - 2 * rho, x0 + 2 * rho, t0, barrier, cap);
  for (const auto& c : base.crossings)
    if (evaluate(c.from)) return true;
  for (std::int64_t s = t0; s <= t0 + 2 * t; ++s)
    for (std::int64_t x = x0 - 2 * rho; x <= x0 + 2 * rho; ++x)
      if (evaluate({x, s})) return true;
  return false;
}

}  // namespace grdf
