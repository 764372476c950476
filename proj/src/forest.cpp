#include "grdf/forest.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "grdf/parallel.hpp"

namespace grdf {

Forest::Forest(const Environment& env, const std::vector<Site>& starts, std::int64_t cap)
    : env_(&env), cap_(cap) {
  if (starts.empty()) throw std::invalid_argument("forest needs at least one start");
  classes_.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const int id = static_cast<int>(i);
    if (!occupied_.emplace(starts[i], id).second)
      throw std::invalid_argument("forest starts must be distinct");
    classes_.push_back({make_walker(starts[i]), -1, 0});
    walker_class_.push_back(id);
    queue_.emplace(starts[i].t, id);
  }
}

int Forest::class_of(int walker) const {
  int c = walker_class_.at(static_cast<std::size_t>(walker));
  while (classes_[static_cast<std::size_t>(c)].merged_into >= 0)
    c = classes_[static_cast<std::size_t>(c)].merged_into;
  return c;
}

std::vector<int> Forest::live_class_ids() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < classes_.size(); ++c)
    if (classes_[c].merged_into < 0) out.push_back(static_cast<int>(c));
  return out;
}

std::int64_t Forest::min_time() const { return queue_.begin()->first; }
std::int64_t Forest::max_time() const { return queue_.rbegin()->first; }

std::optional<MergeEvent> Forest::advance() {
  const auto [time, c] = *queue_.begin();
  queue_.erase(queue_.begin());
  ClassState& cls = classes_[static_cast<std::size_t>(c)];
  occupied_.erase(cls.state.current);
  const bool was_nonempty = !cls.state.history.empty();
  step(*env_, cls.state, cap_);
  nonempty_histories_ += static_cast<int>(!cls.state.history.empty()) - static_cast<int>(was_nonempty);

  const Site v = cls.state.current;
  auto it = occupied_.find(v);
  if (it == occupied_.end()) {
    occupied_.emplace(v, c);
    queue_.emplace(v.t, c);
    return std::nullopt;
  }
  const int d = it->second;
  ClassState& into = classes_[static_cast<std::size_t>(d)];
  const bool into_nonempty = !into.state.history.empty();
  into.state.history.merge(cls.state.history);
  nonempty_histories_ += static_cast<int>(!into.state.history.empty()) -
                         static_cast<int>(into_nonempty) -
                         static_cast<int>(!cls.state.history.empty());
  cls.merged_into = d;
  cls.merge_time = v.t;
  MergeEvent ev{v, c, d};
  merges_.push_back(ev);
  return ev;
}

Rational Forest::position(int walker, std::int64_t t) const {
  int c = walker_class_.at(static_cast<std::size_t>(walker));
  for (;;) {
    const ClassState& cls = classes_[static_cast<std::size_t>(c)];
    if (cls.merged_into < 0 || t <= cls.merge_time) return position_at(cls.state.path, t);
    c = cls.merged_into;
  }
}

PathRecord Forest::path_of(int walker) const {
  int c = walker_class_.at(static_cast<std::size_t>(walker));
  PathRecord out;
  out.start = classes_[static_cast<std::size_t>(c)].state.path.start;
  std::int64_t after = out.start.t - 1;
  for (;;) {
    const ClassState& cls = classes_[static_cast<std::size_t>(c)];
    for (const Site& v : cls.state.path.vertices)
      if (v.t > after) out.vertices.push_back(v);
    if (cls.merged_into < 0) return out;
    after = cls.merge_time;
    c = cls.merged_into;
  }
}

HistoryRegion Forest::joint_history() const {
  HistoryRegion out;
  for (const auto& [t, c] : queue_) out.merge(classes_[static_cast<std::size_t>(c)].state.history);
  return out;
}

Forest evolve_joint(const Environment& env, const std::vector<Site>& starts, std::int64_t horizon,
                    std::int64_t cap) {
  Forest f(env, starts, cap);
  const std::int64_t target = f.min_time() + horizon;
  while (f.min_time() < target) f.advance();
  return f;
}

std::vector<JointRenewalRecord> joint_renewal_times(const Environment& env,
                                                    const std::vector<Site>& starts,
                                                    std::size_t count, std::int64_t horizon,
                                                    std::int64_t cap) {
  Forest f(env, starts, cap);
  const std::int64_t deadline = f.min_time() + horizon;
  std::vector<JointRenewalRecord> out;
  while (out.size() < count) {
    if (f.min_time() >= deadline)
      throw HorizonExhausted("found " + std::to_string(out.size()) + " of " +
                             std::to_string(count) + " joint renewals within horizon " +
                             std::to_string(horizon));
    f.advance();
    if (f.at_joint_renewal()) {
      JointRenewalRecord r;
      r.time = f.min_time();
      for (std::size_t i = 0; i < f.walker_count(); ++i)
        r.positions.push_back(f.current(static_cast<int>(i)).x);
      out.push_back(std::move(r));
    }
  }
  return out;
}

DifferenceSeries difference_process(const Environment& env, std::int64_t m, std::size_t count,
                                    std::int64_t horizon, std::int64_t cap) {
  if (m == 0) throw std::invalid_argument("difference process needs m != 0");
  DifferenceSeries s;
  s.m = m;
  for (const auto& r : joint_renewal_times(env, {{0, 0}, {m, 0}}, count, horizon, cap)) {
    s.values.push_back(r.positions[1] - r.positions[0]);
    s.renewal_times.push_back(r.time);
  }
  s.values.insert(s.values.begin(), m);
  s.renewal_times.insert(s.renewal_times.begin(), 0);
  return s;
}

std::optional<std::size_t> hitting_time(const DifferenceSeries& series, HitRegion region) {
  for (std::size_t n = 1; n < series.values.size(); ++n)
    if (region.contains(series.values[n])) return n;
  return std::nullopt;
}

SignChanges sign_change_times(const std::vector<std::int64_t>& values) {
  SignChanges out;
  bool seek_nonpositive = true;
  for (std::size_t n = 1; n < values.size(); ++n) {
    const std::int64_t y = values[n];
    if (seek_nonpositive ? y > 0 : y < 0) continue;
    out.indices.push_back(n);
    if (y == 0) {
      out.reached_zero = true;
      break;
    }
    ++out.crossings;
    seek_nonpositive = !seek_nonpositive;
  }
  return out;
}

std::int64_t agreement_start(const PathRecord& a, const PathRecord& b) {
  const auto& va = a.vertices;
  const auto& vb = b.vertices;
  if (va.empty() || vb.empty() || va.back() != vb.back())
    throw std::invalid_argument("agreement_start needs paths ending at a common vertex");
  const std::int64_t lo = std::max(va.front().t, vb.front().t);
  std::int64_t agreed = va.back().t;
  auto ia = va.rbegin() + 1;
  auto ib = vb.rbegin() + 1;
  for (;;) {
    std::int64_t s = lo;
    if (ia != va.rend() && ia->t > s) s = ia->t;
    if (ib != vb.rend() && ib->t > s) s = ib->t;
    if (s >= agreed) break;
    if (position_at(a, s) != position_at(b, s)) return agreed;
    agreed = s;
    if (s == lo) break;
    while (ia != va.rend() && ia->t >= s) ++ia;
    while (ib != vb.rend() && ib->t >= s) ++ib;
  }
  return agreed;
}

CoalescenceResult coalescence_experiment(const Environment& env, std::int64_t m,
                                         std::int64_t horizon, std::int64_t cap) {
  if (m == 0) throw std::invalid_argument("coalescence experiment needs m != 0");
  Forest f(env, {{0, 0}, {m, 0}}, cap);
  CoalescenceResult r;
  std::vector<std::int64_t> values{m};
  bool merged = false;
  for (;;) {
    if (f.min_time() >= horizon) {
      r.theta_censored = !merged;
      if (!merged) r.theta = horizon;
      r.nu_censored = true;
      r.nu = static_cast<std::int64_t>(values.size()) - 1;
      r.T_nu = f.min_time();
      break;
    }
    if (auto ev = f.advance()) {
      merged = true;
      r.theta = agreement_start(f.class_state(ev->absorbed).path, f.class_state(ev->into).path);
    }
    if (f.at_joint_renewal()) {
      const std::int64_t y = merged ? 0 : f.current(1).x - f.current(0).x;
      values.push_back(y);
      if (y == 0) {
        r.nu = static_cast<std::int64_t>(values.size()) - 1;
        r.T_nu = f.min_time();
        break;
      }
    }
  }
  r.sign_changes = sign_change_times(values).crossings;
  return r;
}

ProportionEstimate distance_preserved_probability(const EnvConfig& cfg, std::int64_t m,
                                                  std::int64_t trials, std::int64_t horizon,
                                                  int workers) {
  const auto hits = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t i) {
    EnvConfig c = cfg;
    c.seed = derive_trial_seed(cfg.seed, i);
    const Environment env(c);
    return static_cast<int>(difference_process(env, m, 1, horizon).values[1] == m);
  });
  ProportionEstimate out;
  out.trials = trials;
  for (int h : hits) out.successes += h;
  out.estimate = static_cast<double>(out.successes) / static_cast<double>(trials);
  out.stderr_ = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  return out;
}

}  // namespace grdf
