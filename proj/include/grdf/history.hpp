#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "grdf/site.hpp"

namespace grdf {

/// Closed integer interval [lo, hi].
struct Interval {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, disjoint, non-adjacent intervals of one lattice row.
using RowSet = std::vector<Interval>;

/// Set of lattice sites whose configuration is already known, stored row by
/// row as maximal runs. Empty rows are never stored at either end.
class HistoryRegion {
 public:
  bool empty() const noexcept { return rows_.empty(); }
  std::int64_t min_row() const noexcept { return first_row_; }
  std::int64_t max_row() const noexcept {
    return first_row_ + static_cast<std::int64_t>(rows_.size()) - 1;
  }

  /// Row contents, or nullptr if the row holds no site.
  const RowSet* row(std::int64_t t) const noexcept;
  bool contains(Site v) const noexcept;
  std::int64_t site_count() const noexcept;

  void insert(std::int64_t t, Interval iv);
  /// Adds every site v with ||v - center||_1 <= radius and v.t > above_t.
  void insert_ball_above(Site center, std::int64_t radius, std::int64_t above_t);
  /// Removes every row <= t.
  void clip_at_or_below(std::int64_t t);
  void merge(const HistoryRegion& other);

  /// (row, runs) pairs in increasing row order, empty rows skipped.
  std::vector<std::pair<std::int64_t, RowSet>> rows() const;

  friend bool operator==(const HistoryRegion& a, const HistoryRegion& b) {
    return a.rows() == b.rows();
  }

 private:
  void trim();

  std::int64_t first_row_ = 0;
  std::deque<RowSet> rows_;
};

/// One application of the history recursion: union with the L1 ball of radius
/// ||x_new - x_prev||_1 around x_prev, then keep only rows above x_new.
HistoryRegion history_update(HistoryRegion delta, Site x_prev, Site x_new);

}  // namespace grdf
