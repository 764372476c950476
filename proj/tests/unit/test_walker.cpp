#include <set>
#include <sstream>

#include "doctest.h"
#include "grdf/diagnostics.hpp"
#include "grdf/walker.hpp"
#include "oracles.hpp"

using namespace grdf;

namespace {

EnvConfig config(double p, std::vector<double> w, std::uint64_t seed) {
  EnvConfig c;
  c.p = p;
  c.w_pmf = std::move(w);
  c.seed = seed;
  return c;
}

constexpr double kNearlyOne = 1.0 - 1e-15;

Site random_site(std::uint64_t h) {
  return {static_cast<std::int64_t>(h % 2001) - 1000, static_cast<std::int64_t>((h >> 20) % 2001) - 1000};
}

}  // namespace

TEST_CASE("level sets") {
  CHECK(level_set({0, 0}, 1) == std::vector<Site>{{0, 1}});
  const auto l2 = level_set({0, 0}, 2);
  CHECK(std::set<Site>(l2.begin(), l2.end()) == std::set<Site>{{-1, 1}, {1, 1}, {0, 2}});
  for (const Site u : {Site{0, 0}, Site{-7, 13}, Site{100, -4}})
    for (std::int64_t k = 1; k <= 50; ++k) {
      const auto l = level_set(u, k);
      const std::set<Site> got(l.begin(), l.end());
      CHECK(got.size() == l.size());
      std::set<Site> want;
      for (std::int64_t dx = -k; dx <= k; ++dx)
        for (std::int64_t dt = 1; dt <= k; ++dt)
          if (std::abs(dx) + dt == k) want.insert({u.x + dx, u.t + dt});
      CHECK(got == want);
      CHECK(static_cast<std::int64_t>(l.size()) == 2 * k - 1);
    }
}

TEST_CASE("open level index") {
  SitePatches patches = plant_window(-3, 3, 1, 3, {{0, 1}});
  const Environment env(config(0.5, {1.0}, 4), patches);
  CHECK(open_level_index(env, {0, 0}, 1) == 1);

  for (std::uint64_t s = 0; s < 300; ++s) {
    const Environment e(config(0.4, {0.5, 0.25, 0.25}, s));
    const Site u = random_site(mix64(s));
    for (int r = 1; r <= 3; ++r) CHECK(open_level_index(e, u, r) == oracle::open_level_index(e, u, r));
  }
}

TEST_CASE("level search cap") {
  const Environment env(config(1e-12, {1.0}, 1));
  CHECK_THROWS_AS(open_level_index(env, {0, 0}, 1, 20), SearchCapExceeded);
  CHECK_THROWS_AS(next_jump(env, {0, 0}, 1, 20), SearchCapExceeded);
}

TEST_CASE("jump rule on planted configurations") {
  // Levels 1 and 2 of (3, 0) closed; level 3 holds (5,1), (2,2), (3,3).
  SitePatches fig = plant_window(-2, 8, 1, 3, {{5, 1}, {2, 2}, {3, 3}});
  fig[{3, 0}].w = 1;
  const Environment env(config(0.5, {0.5, 0.5}, 8), fig);
  CHECK(select_target(env, {3, 0}) == Site{3, 3});
  CHECK(next_jump(env, {3, 0}, 1).radius == 3);

  // Same-row pair on the first open level: the larger U wins.
  for (bool left_first : {true, false}) {
    const std::vector<Site> open = left_first ? std::vector<Site>{{-1, 1}, {1, 1}}
                                              : std::vector<Site>{{1, 1}, {-1, 1}};
    const Environment e(config(0.5, {1.0}, 8), plant_window(-3, 3, 1, 3, open));
    const Site want = e.uniform({-1, 1}) > e.uniform({1, 1}) ? Site{-1, 1} : Site{1, 1};
    CHECK(want == open.front());
    CHECK(select_target(e, {0, 0}) == want);
  }
}

TEST_CASE("jump rule agrees with the exhaustive scan") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const double p = 0.2 + 0.6 * static_cast<double>(s % 7) / 6.0;
    const Environment env(config(p, {0.4, 0.3, 0.3}, s));
    const Site u = random_site(mix64(s + 77));
    for (int w = 1; w <= 3; ++w) REQUIRE(select_target(env, u, w) == oracle::select_target(env, u, w));
  }
}

TEST_CASE("steps") {
  const Environment up(config(kNearlyOne, {1.0}, 2));
  WalkerState w = make_walker({0, 0});
  const Jump j = step(up, w);
  CHECK(j.target == Site{0, 1});
  CHECK(w.current == Site{0, 1});
  CHECK(w.history.empty());

  for (std::uint64_t s = 0; s < 1000; ++s) {
    const Environment env(config(0.5, {0.5, 0.5}, s));
    WalkerState ws = make_walker({0, 0});
    for (int i = 0; i < 20; ++i) step(env, ws);
    REQUIRE(ws.path.vertices == oracle::path(env, {0, 0}, 20));
    REQUIRE(oracle::expand(ws.history) == oracle::history(ws.path.vertices, 20));
  }
}

TEST_CASE("renewals in the straight-up limit") {
  const Environment env(config(kNearlyOne, {1.0}, 2));
  const RenewalRun run = evolve_with_renewals(env, {4, 7}, {10, 1000});
  REQUIRE(run.renewals.size() == 10);
  for (std::size_t j = 0; j < 10; ++j) {
    CHECK(run.renewals[j].index == static_cast<int>(j) + 1);
    CHECK(run.renewals[j].time == 7 + static_cast<std::int64_t>(j) + 1);
    CHECK(run.renewals[j].position == 4);
    CHECK(run.renewals[j].gap == 1);
    CHECK(run.renewals[j].max_displacement == 0);
  }
}

TEST_CASE("renewals exist and respect the displacement bound") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 606);
  for (std::size_t i = 0; i < 1000; ++i) {
    const Environment env(trial_config(base, i));
    const RenewalRun run = evolve_with_renewals(env, {0, 0}, {std::nullopt, 10'000});
    REQUIRE_FALSE(run.renewals.empty());
    std::int64_t prev = 0;
    for (const auto& r : run.renewals) {
      CHECK(r.gap >= 1);
      CHECK(r.time - prev == r.gap);
      CHECK(r.max_displacement <= r.gap * r.gap);
      prev = r.time;
    }
  }
}

TEST_CASE("horizon exhaustion") {
  const Environment env(config(0.5, {0.5, 0.5}, 1));
  CHECK_THROWS_AS(evolve_with_renewals(env, {0, 0}, {1'000'000, 50}), HorizonExhausted);
}

TEST_CASE("interpolation") {
  const PathRecord two{{0, 0}, {{0, 0}, {2, 2}}};
  CHECK(interpolate(two, 1.0) == 1.0);
  CHECK(interpolate(two, 2.0) == 2.0);
  CHECK(position_at(two, 1) == Rational(1));

  const Environment env(config(0.5, {0.5, 0.5}, 31));
  const RenewalRun run = evolve_with_renewals(env, {0, 0}, {std::nullopt, 500});
  const auto& v = run.path.vertices;
  for (const Site& s : v) CHECK(interpolate(run.path, static_cast<double>(s.t)) == static_cast<double>(s.x));
  const double t_end = static_cast<double>(v.back().t);
  for (int i = 0; i < 1000; ++i) {
    const double t = t_end * (i + 0.5) / 1000.0;
    CHECK(std::abs(interpolate(run.path, t) - oracle::interpolate(v, t)) <= 1e-12);
  }
  for (std::int64_t t = 0; t <= v.back().t; ++t) {
    const Rational r = position_at(run.path, t);
    CHECK(std::abs(r.to_double() - oracle::interpolate(v, static_cast<double>(t))) <= 1e-9);
    CHECK(walk_position(env, {0, 0}, t) == r);
  }
  CHECK_THROWS_AS(position_at(run.path, -1), OutOfRange);
}

TEST_CASE("path and renewal CSV") {
  std::ostringstream a, b;
  write_path_csv(a, PathRecord{{0, 0}, {{0, 0}, {-1, 2}}});
  CHECK(a.str() == "x,t\n0,0\n-1,2\n");
  write_renewals_csv(b, {{1, 3, -2, 3, 2}});
  CHECK(b.str() == "j,T_j,position,gap,max_displacement\n1,3,-2,3,2\n");
}
