#pragma once

// Open-addressing hash map used for the per-site particle counts. The
// per-step rebuild touches every occupied site 2d times, which makes node
// allocation and pointer chasing in std::unordered_map the dominant cost;
// this flat table with linear probing keeps the step loop memory-bound
// only on its own slots. No erase (states are rebuilt, never shrunk).

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace brwre {

template <class Key, class Value, class HashFn>
class FlatMap {
 public:
  explicit FlatMap(std::size_t expected = 0) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    slots_.resize(cap);
    used_.assign(cap, 0);
    mask_ = cap - 1;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // insert-or-get; value default-constructed on first touch
  Value& slot(const Key& k) {
    if (2 * (size_ + 1) > slots_.size()) grow();
    std::size_t i = HashFn{}(k)&mask_;
    while (used_[i]) {
      if (slots_[i].first == k) return slots_[i].second;
      i = (i + 1) & mask_;
    }
    used_[i] = 1;
    ++size_;
    slots_[i].first = k;
    slots_[i].second = Value{};
    return slots_[i].second;
  }

  const Value* find(const Key& k) const {
    std::size_t i = HashFn{}(k)&mask_;
    while (used_[i]) {
      if (slots_[i].first == k) return &slots_[i].second;
      i = (i + 1) & mask_;
    }
    return nullptr;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (used_[i]) f(slots_[i].first, slots_[i].second);
  }

 private:
  void grow() {
    std::vector<std::pair<Key, Value>> old = std::move(slots_);
    std::vector<std::uint8_t> old_used = std::move(used_);
    std::size_t cap = 2 * old.size();
    slots_.assign(cap, {});
    used_.assign(cap, 0);
    mask_ = cap - 1;
    for (std::size_t i = 0; i < old.size(); ++i) {
      if (!old_used[i]) continue;
      std::size_t j = HashFn{}(old[i].first) & mask_;
      while (used_[j]) j = (j + 1) & mask_;
      used_[j] = 1;
      slots_[j] = std::move(old[i]);
    }
  }

  std::vector<std::pair<Key, Value>> slots_;
  std::vector<std::uint8_t> used_;
  std::size_t mask_ = 0;
  std::size_t size_ = 0;
};

}  // namespace brwre
