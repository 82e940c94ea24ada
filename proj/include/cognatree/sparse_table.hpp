#pragma once

#include <bit>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cognatree {

/*
 * Sparse table answering range-arg-min queries in O(1) after O(n log n)
 * preprocessing. Stores indices into the referenced values; ties resolve to
 * the leftmost position.
 */
template <typename T, typename Less = std::less<T>>
class SparseTable {
 public:
  SparseTable() = default;

  explicit SparseTable(std::vector<T> values, Less less = Less{})
      : values_(std::move(values)), less_(less) {
    const std::size_t n = values_.size();
    if (n == 0) return;
    levels_.emplace_back(n);
    for (std::size_t i = 0; i < n; ++i) levels_[0][i] = i;
    for (std::size_t width = 2; width <= n; width *= 2) {
      const auto& prev = levels_.back();
      std::vector<std::size_t> cur(n - width + 1);
      const std::size_t half = width / 2;
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = pick(prev[i], prev[i + half]);
      levels_.push_back(std::move(cur));
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  const T& value(std::size_t i) const { return values_[i]; }

  // Position of the minimum in the closed range [lo, hi]; requires lo <= hi.
  std::size_t arg_min(std::size_t lo, std::size_t hi) const {
    const std::size_t len = hi - lo + 1;
    const auto level = static_cast<std::size_t>(std::bit_width(len) - 1);
    const auto& row = levels_[level];
    return pick(row[lo], row[hi + 1 - (std::size_t{1} << level)]);
  }

 private:
  std::size_t pick(std::size_t a, std::size_t b) const {
    return less_(values_[b], values_[a]) ? b : a;
  }

  std::vector<T> values_;
  Less less_;
  std::vector<std::vector<std::size_t>> levels_;
};

}  // namespace cognatree
