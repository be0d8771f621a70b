#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace glow {

// Bounded collection keeping the `capacity` best elements seen so far,
// ordered best-first. `Better(a, b)` must be a strict weak ordering that is
// true when `a` ranks ahead of `b`. Sizes here are tiny (k <= a few dozen),
// so a sorted vector with binary insertion beats a heap in practice and
// keeps iteration order meaningful.
template <typename T, typename Better>
class TopK {
 public:
  explicit TopK(std::size_t capacity, Better better = Better{})
      : capacity_(capacity), better_(std::move(better)) {}

  // Returns true if `value` entered the collection.
  bool push(T value) {
    if (capacity_ == 0) return false;
    if (items_.size() == capacity_ && !better_(value, items_.back())) return false;
    auto pos = std::upper_bound(items_.begin(), items_.end(), value,
                                [this](const T& a, const T& b) { return better_(a, b); });
    items_.insert(pos, std::move(value));
    if (items_.size() > capacity_) items_.pop_back();
    return true;
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  bool full() const noexcept { return items_.size() == capacity_; }
  const std::vector<T>& items() const noexcept { return items_; }
  const T& front() const { return items_.front(); }
  const T& back() const { return items_.back(); }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }

 private:
  std::size_t capacity_;
  Better better_;
  std::vector<T> items_;
};

}  // namespace glow
