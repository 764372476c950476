#include "grdf/history.hpp"

#include <algorithm>

namespace grdf {

namespace {

void insert_run(RowSet& row, Interval iv) {
  // Find first run that could touch iv (hi >= iv.lo - 1).
  auto first = std::lower_bound(row.begin(), row.end(), iv.lo - 1,
                                [](const Interval& r, std::int64_t v) { return r.hi < v; });
  auto last = first;
  while (last != row.end() && last->lo <= iv.hi + 1) {
    iv.lo = std::min(iv.lo, last->lo);
    iv.hi = std::max(iv.hi, last->hi);
    ++last;
  }
  if (first == last) {
    row.insert(first, iv);
  } else {
    *first = iv;
    row.erase(first + 1, last);
  }
}

}  // namespace

const RowSet* HistoryRegion::row(std::int64_t t) const noexcept {
  if (rows_.empty() || t < first_row_ || t > max_row()) return nullptr;
  const RowSet& r = rows_[static_cast<std::size_t>(t - first_row_)];
  return r.empty() ? nullptr : &r;
}

bool HistoryRegion::contains(Site v) const noexcept {
  const RowSet* r = row(v.t);
  if (r == nullptr) return false;
  auto it = std::lower_bound(r->begin(), r->end(), v.x,
                             [](const Interval& iv, std::int64_t x) { return iv.hi < x; });
  return it != r->end() && it->lo <= v.x;
}

std::int64_t HistoryRegion::site_count() const noexcept {
  std::int64_t n = 0;
  for (const auto& r : rows_)
    for (const auto& iv : r) n += iv.hi - iv.lo + 1;
  return n;
}

void HistoryRegion::insert(std::int64_t t, Interval iv) {
  if (iv.hi < iv.lo) return;
  if (rows_.empty()) {
    first_row_ = t;
    rows_.emplace_back();
  } else if (t < first_row_) {
    rows_.insert(rows_.begin(), static_cast<std::size_t>(first_row_ - t), RowSet{});
    first_row_ = t;
  } else if (t > max_row()) {
    rows_.resize(static_cast<std::size_t>(t - first_row_ + 1));
  }
  insert_run(rows_[static_cast<std::size_t>(t - first_row_)], iv);
}

void HistoryRegion::insert_ball_above(Site center, std::int64_t radius, std::int64_t above_t) {
  const std::int64_t lo_dt = std::max<std::int64_t>(above_t - center.t + 1, -radius);
  for (std::int64_t dt = lo_dt; dt <= radius; ++dt) {
    const std::int64_t half = radius - (dt < 0 ? -dt : dt);
    insert(center.t + dt, {center.x - half, center.x + half});
  }
}

void HistoryRegion::clip_at_or_below(std::int64_t t) {
  while (!rows_.empty() && first_row_ <= t) {
    rows_.pop_front();
    ++first_row_;
  }
  trim();
}

void HistoryRegion::merge(const HistoryRegion& other) {
  for (std::size_t i = 0; i < other.rows_.size(); ++i)
    for (const auto& iv : other.rows_[i])
      insert(other.first_row_ + static_cast<std::int64_t>(i), iv);
}

std::vector<std::pair<std::int64_t, RowSet>> HistoryRegion::rows() const {
  std::vector<std::pair<std::int64_t, RowSet>> out;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (!rows_[i].empty()) out.emplace_back(first_row_ + static_cast<std::int64_t>(i), rows_[i]);
  return out;
}

void HistoryRegion::trim() {
  while (!rows_.empty() && rows_.front().empty()) {
    rows_.pop_front();
    ++first_row_;
  }
  while (!rows_.empty() && rows_.back().empty()) rows_.pop_back();
}

HistoryRegion history_update(HistoryRegion delta, Site x_prev, Site x_new) {
  delta.insert_ball_above(x_prev, l1_distance(x_prev, x_new), x_new.t);
  delta.clip_at_or_below(x_new.t);
  return delta;
}

}  // namespace grdf
