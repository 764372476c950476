#include <map>

#include "doctest.h"
#include "grdf/diagnostics.hpp"
#include "grdf/forest.hpp"
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

Rational oracle_position(const std::vector<Site>& v, std::int64_t t) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i].t <= t && t <= v[i + 1].t)
      return Rational(v[i].x * (v[i + 1].t - v[i].t) + (v[i + 1].x - v[i].x) * (t - v[i].t),
                      v[i + 1].t - v[i].t);
  throw std::logic_error("time outside oracle path");
}

// Oracle path long enough to cover time t.
std::vector<Site> oracle_path_to(const Environment& env, Site u, std::int64_t t) {
  std::vector<Site> v{u};
  while (v.back().t < t) v.push_back(oracle::select_target(env, v.back(), env.w(v.back())));
  return v;
}

std::optional<std::size_t> naive_hit(const std::vector<std::int64_t>& ys, HitRegion r) {
  for (std::size_t n = 1; n < ys.size(); ++n)
    if (r.contains(ys[n])) return n;
  return std::nullopt;
}

// Alternating passages written out directly from the definition.
SignChanges naive_sign_changes(const std::vector<std::int64_t>& ys) {
  SignChanges out;
  bool want_nonpositive = true;
  for (std::size_t n = 1; n < ys.size(); ++n) {
    const bool hit = want_nonpositive ? ys[n] <= 0 : ys[n] >= 0;
    if (!hit) continue;
    out.indices.push_back(n);
    if (ys[n] == 0) {
      out.reached_zero = true;
      break;
    }
    ++out.crossings;
    want_nonpositive = !want_nonpositive;
  }
  return out;
}

}  // namespace

TEST_CASE("a single start is the single walker") {
  const Environment env(config(0.5, {0.5, 0.5}, 41));
  const Forest f = evolve_joint(env, {{0, 0}}, 300);
  const RenewalRun run = evolve_with_renewals(env, {0, 0}, {std::nullopt, 300});
  CHECK(f.path_of(0).vertices == run.path.vertices);

  const auto joint = joint_renewal_times(env, {{0, 0}}, 5, 10'000);
  const RenewalRun five = evolve_with_renewals(env, {0, 0}, {5, 10'000});
  for (std::size_t j = 0; j < 5; ++j) CHECK(joint[j].time == five.renewals[j].time);
}

TEST_CASE("parallel vertical paths never merge") {
  const Environment env(config(kNearlyOne, {1.0}, 3));
  const Forest f = evolve_joint(env, {{0, 0}, {1, 0}}, 1000);
  CHECK(f.merges().empty());
  CHECK(f.live_classes() == 2);
  for (std::int64_t t = 0; t <= 1000; t += 50) {
    CHECK(f.position(0, t) == Rational(0));
    CHECK(f.position(1, t) == Rational(1));
  }
  const auto joint = joint_renewal_times(env, {{0, 0}, {1, 0}}, 20, 100);
  for (std::size_t j = 0; j < 20; ++j) CHECK(joint[j].time == static_cast<std::int64_t>(j) + 1);
}

TEST_CASE("forest positions match independently derived walkers") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 808);
  int merged_trials = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    const Environment env(trial_config(base, i));
    const std::int64_t horizon = 400;
    const Forest f = evolve_joint(env, {{0, 0}, {1, 0}}, horizon);
    const auto a = oracle_path_to(env, {0, 0}, horizon);
    const auto b = oracle_path_to(env, {1, 0}, horizon);
    std::optional<std::int64_t> shared;
    for (const Site& s : a)
      if (std::find(b.begin(), b.end(), s) != b.end()) {
        shared = s.t;
        break;
      }
    for (std::int64_t t = 0; t <= horizon; ++t) {
      REQUIRE(f.position(0, t) == oracle_position(a, t));
      REQUIRE(f.position(1, t) == oracle_position(b, t));
      if (shared && t >= *shared) REQUIRE(f.position(0, t) == f.position(1, t));
    }
    CHECK(f.merges().size() == (shared ? 1u : 0u));
    merged_trials += shared.has_value();
  }
  CHECK(merged_trials > 100);
}

TEST_CASE("joint renewals have empty per-walker histories") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 9);
  for (std::size_t i = 0; i < 200; ++i) {
    const Environment env(trial_config(base, i));
    Forest f(env, {{0, 0}, {3, 0}});
    int seen = 0;
    while (seen < 5 && f.min_time() < 20'000) {
      f.advance();
      if (!f.at_joint_renewal()) continue;
      ++seen;
      for (int w = 0; w < 2; ++w) {
        const auto v = f.path_of(w).vertices;
        REQUIRE(oracle::history(v, v.size() - 1).empty());
        CHECK(v.back().t == f.min_time());
      }
    }
    CHECK(seen == 5);
  }
}

TEST_CASE("difference process") {
  const Environment up(config(kNearlyOne, {1.0}, 3));
  const DifferenceSeries s = difference_process(up, 4, 10, 1000);
  CHECK(s.values.front() == 4);
  for (auto y : s.values) CHECK(y == 4);

  const EnvConfig base = config(0.5, {0.5, 0.5}, 12);
  for (std::size_t i = 0; i < 300; ++i) {
    const Environment env(trial_config(base, i));
    const DifferenceSeries d = difference_process(env, 1, 30, 1'000'000);
    CHECK(d.values.front() == 1);
    bool frozen = false;
    for (std::size_t n = 1; n < d.values.size(); ++n) {
      if (frozen) REQUIRE(d.values[n] == 0);
      frozen = frozen || d.values[n] == 0;
      CHECK(d.renewal_times[n] > d.renewal_times[n - 1]);
    }
  }
}

TEST_CASE("martingale increments have mean zero") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 2718);
  for (std::int64_t m : {1, 3}) {
    const auto rows = martingale_increments(base, m, 3, 4000, 1'000'000, 1);
    for (std::size_t n = 0; n < 3; ++n) {
      std::vector<double> xs;
      for (const auto& r : rows) xs.push_back(static_cast<double>(r[n]));
      const MeanEstimate e = mean_estimate(xs);
      CHECK(std::abs(e.mean) <= 3.0 * e.stderr_);
    }
  }
}

TEST_CASE("hitting times") {
  DifferenceSeries s;
  s.values = {1, 0, 0};
  CHECK(hitting_time(s, {HitRegion::Kind::kZero}) == 1u);
  s.values = {2, 3, 1, -1};
  CHECK(hitting_time(s, {HitRegion::Kind::kNonpositive}) == 3u);
  CHECK(hitting_time(s, {HitRegion::Kind::kAtLeast, 3}) == 1u);
  CHECK_FALSE(hitting_time(s, {HitRegion::Kind::kZero}).has_value());

  std::uint64_t state = 1;
  for (int i = 0; i < 10'000; ++i) {
    state = mix64(state + i);
    std::vector<std::int64_t> ys{static_cast<std::int64_t>(state % 5) + 1};
    for (int n = 0; n < 12; ++n) ys.push_back(static_cast<std::int64_t>(mix64(state + n) % 11) - 5);
    s.values = ys;
    for (HitRegion r : {HitRegion{HitRegion::Kind::kZero}, HitRegion{HitRegion::Kind::kNonpositive},
                        HitRegion{HitRegion::Kind::kAtLeast, 4}})
      REQUIRE(hitting_time(s, r) == naive_hit(ys, r));
  }
}

TEST_CASE("sign changes") {
  const SignChanges a = sign_change_times({1, 0});
  CHECK(a.indices == std::vector<std::size_t>{1});
  CHECK(a.crossings == 0);
  CHECK(a.reached_zero);

  const SignChanges b = sign_change_times({1, -2, 3, 0});
  CHECK(b.indices == std::vector<std::size_t>{1, 2, 3});
  CHECK(b.crossings == 2);

  std::uint64_t state = 3;
  for (int i = 0; i < 10'000; ++i) {
    state = mix64(state + i);
    std::vector<std::int64_t> ys{static_cast<std::int64_t>(state % 4) + 1};
    for (int n = 0; n < 15; ++n) ys.push_back(static_cast<std::int64_t>(mix64(state ^ n) % 9) - 4);
    const SignChanges got = sign_change_times(ys);
    const SignChanges want = naive_sign_changes(ys);
    REQUIRE(got.indices == want.indices);
    REQUIRE(got.crossings == want.crossings);
    REQUIRE(got.reached_zero == want.reached_zero);
  }
}

TEST_CASE("agreement start") {
  // Path A cuts straight through B's vertex (1,1); they agree from t = 1.
  const PathRecord a{{0, 0}, {{0, 0}, {2, 2}}};
  const PathRecord b{{1, 0}, {{1, 0}, {1, 1}, {2, 2}}};
  CHECK(agreement_start(a, b) == 1);
  const PathRecord c{{3, 0}, {{3, 0}, {2, 2}}};
  CHECK(agreement_start(a, c) == 2);
  CHECK_THROWS(agreement_start(a, PathRecord{{0, 0}, {{0, 0}, {0, 1}}}));
}

TEST_CASE("immediate merge gives the merge time") {
  // (0,0) jumps to (0,1); (1,0) finds (1,1) closed and (0,1) alone on level 2.
  SitePatches patches = plant_window(-3, 4, 1, 2, {{0, 1}});
  patches[{0, 0}].w = 1;
  patches[{1, 0}].w = 1;
  const Environment env(config(0.5, {0.5, 0.5}, 5), patches);
  const CoalescenceResult r = coalescence_experiment(env, 1, 100'000);
  CHECK(r.theta == 1);
  CHECK_FALSE(r.theta_censored);
  CHECK(r.theta <= r.T_nu);
}

TEST_CASE("coalescence results agree with an integer-time oracle") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 77);
  for (std::size_t i = 0; i < 300; ++i) {
    const Environment env(trial_config(base, i));
    const std::int64_t m = 1 + static_cast<std::int64_t>(i % 3);
    const CoalescenceResult r = coalescence_experiment(env, m, 20'000);
    if (r.theta_censored) continue;
    CHECK(r.theta <= r.T_nu);
    const auto a = oracle_path_to(env, {0, 0}, r.T_nu);
    const auto b = oracle_path_to(env, {m, 0}, r.T_nu);
    std::int64_t start = r.T_nu;
    while (start > 0 && oracle_position(a, start - 1) == oracle_position(b, start - 1)) --start;
    REQUIRE(r.theta == start);
    for (std::int64_t t = r.theta; t <= r.T_nu; ++t)
      REQUIRE(oracle_position(a, t) == oracle_position(b, t));
  }
}

TEST_CASE("distance preservation") {
  const EnvConfig up = config(kNearlyOne, {1.0}, 1);
  CHECK(distance_preserved_probability(up, 2, 200, 1000).estimate == 1.0);

  const EnvConfig k1 = config(0.5, {1.0}, 55);
  const ProportionEstimate e = distance_preserved_probability(k1, 2, 4000, 1'000'000, 1);
  CHECK(e.estimate >= 0.25 - 3.0 * e.stderr_);
  const double upper = 1.0 - (1.0 - 0.25) * std::pow(0.5, 6);
  CHECK(e.estimate <= upper + 3.0 * e.stderr_);
}

TEST_CASE("workers do not change results") {
  const EnvConfig base = config(0.5, {0.5, 0.5}, 4);
  const auto a = coalescence_samples(base, 2, 200, 100'000, 1);
  const auto b = coalescence_samples(base, 2, 200, 100'000, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta == b[i].theta);
    CHECK(a[i].T_nu == b[i].T_nu);
    CHECK(a[i].sign_changes == b[i].sign_changes);
  }
}
