#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "grdf/environment.hpp"
#include "grdf/walker.hpp"

namespace grdf {

struct MergeEvent {
  Site vertex;
  int absorbed = 0;  // class that stepped onto the vertex
  int into = 0;      // class that already sat there
};

/// Several paths on one environment, advanced in lock-step: the class with the
/// smallest current time (lowest index on ties) jumps next. A class that lands
/// on the current vertex of another class is merged into it.
///
/// Under lock-step a class can only land on the *current* vertex of another
/// class, never on an older one, so the current-vertex map is a complete merge
/// test.
class Forest {
 public:
  Forest(const Environment& env, const std::vector<Site>& starts,
         std::int64_t cap = kDefaultLevelCap);

  std::size_t walker_count() const noexcept { return walker_class_.size(); }
  std::size_t live_classes() const noexcept { return queue_.size(); }
  /// Live class currently carrying walker `i`.
  int class_of(int walker) const;
  std::vector<int> live_class_ids() const;

  std::int64_t min_time() const;
  std::int64_t max_time() const;

  /// One jump of a minimal-time class.
  std::optional<MergeEvent> advance();

  /// Every live class sits at the same time and every history region is empty.
  bool at_joint_renewal() const noexcept {
    return nonempty_histories_ == 0 && min_time() == max_time();
  }

  const WalkerState& class_state(int c) const { return classes_[static_cast<std::size_t>(c)].state; }
  Site current(int walker) const { return class_state(class_of(walker)).current; }

  /// Exact interpolated position of walker `i` at integer time t, following
  /// merges. Throws OutOfRange outside the simulated range.
  Rational position(int walker, std::int64_t t) const;

  /// Full vertex sequence of walker `i` assembled across merges.
  PathRecord path_of(int walker) const;

  const std::vector<MergeEvent>& merges() const noexcept { return merges_; }
  HistoryRegion joint_history() const;

 private:
  struct ClassState {
    WalkerState state;
    int merged_into = -1;
    std::int64_t merge_time = 0;
  };

  const Environment* env_;
  std::int64_t cap_;
  std::vector<ClassState> classes_;
  std::vector<int> walker_class_;  // class created for walker i (== i)
  std::set<std::pair<std::int64_t, int>> queue_;
  std::unordered_map<Site, int, SiteHash> occupied_;
  std::vector<MergeEvent> merges_;
  int nonempty_histories_ = 0;
};

/// Advances until every live class has reached time min(start) + horizon.
Forest evolve_joint(const Environment& env, const std::vector<Site>& starts, std::int64_t horizon,
                    std::int64_t cap = kDefaultLevelCap);

struct JointRenewalRecord {
  std::int64_t time = 0;
  std::vector<std::int64_t> positions;  // one per walker, in start order
};

/// First `count` joint renewals. Throws HorizonExhausted if fewer are found
/// before min(start) + horizon.
std::vector<JointRenewalRecord> joint_renewal_times(const Environment& env,
                                                    const std::vector<Site>& starts,
                                                    std::size_t count, std::int64_t horizon,
                                                    std::int64_t cap = kDefaultLevelCap);

/// Gap between the paths from (m,0) and (0,0) at their joint renewals.
/// values[0] = m at time 0.
struct DifferenceSeries {
  std::int64_t m = 0;
  std::vector<std::int64_t> values;
  std::vector<std::int64_t> renewal_times;
};

/// Series with `count` joint renewals after time 0.
DifferenceSeries difference_process(const Environment& env, std::int64_t m, std::size_t count,
                                    std::int64_t horizon, std::int64_t cap = kDefaultLevelCap);

struct HitRegion {
  enum class Kind { kZero, kNonpositive, kAtLeast };
  Kind kind = Kind::kZero;
  std::int64_t threshold = 0;

  bool contains(std::int64_t y) const noexcept {
    switch (kind) {
      case Kind::kZero: return y == 0;
      case Kind::kNonpositive: return y <= 0;
      case Kind::kAtLeast: return y >= threshold;
    }
    return false;
  }
};

/// Smallest n >= 1 with values[n] in the region.
std::optional<std::size_t> hitting_time(const DifferenceSeries& series, HitRegion region);

struct SignChanges {
  std::vector<std::size_t> indices;  // a_1, a_2, ...
  int crossings = 0;                 // a_l with nonzero value
  bool reached_zero = false;
};

/// Alternating first passages into (-inf,0], [0,inf), ... for a series that
/// starts positive; stops at the first zero.
SignChanges sign_change_times(const std::vector<std::int64_t>& values);

struct CoalescenceResult {
  std::int64_t theta = 0;
  std::int64_t nu = 0;
  std::int64_t T_nu = 0;
  int sign_changes = 0;
  /// Censored trials carry the last observed values as lower bounds.
  bool theta_censored = false;
  bool nu_censored = false;
};

/// Pair started at (0,0) and (m,0), run until coalescence is followed by a
/// joint renewal or the time horizon is hit.
CoalescenceResult coalescence_experiment(const Environment& env, std::int64_t m,
                                         std::int64_t horizon,
                                         std::int64_t cap = kDefaultLevelCap);

/// Largest time before which the two piecewise linear paths ending at a
/// common vertex disagree.
std::int64_t agreement_start(const PathRecord& a, const PathRecord& b);

struct ProportionEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

/// Fraction of trials with Y^m_1 = m. Trial i uses derive_trial_seed(cfg.seed, i).
ProportionEstimate distance_preserved_probability(const EnvConfig& cfg, std::int64_t m,
                                                  std::int64_t trials, std::int64_t horizon,
                                                  int workers = 1);

}  // namespace grdf
