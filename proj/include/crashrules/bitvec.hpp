#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace crashrules {

/// Fixed-length bit vector. One of these per one-hot item column; itemset
/// support is the popcount of the AND of the member columns.
class Bitvec {
 public:
  Bitvec() = default;
  explicit Bitvec(std::size_t size)
      : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }

  void set(std::size_t i) { words_[i >> 6] |= (1ull << (i & 63)); }

  bool get(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1ull;
  }

  std::size_t count() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
  }

  void and_with(const Bitvec& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  }

  static std::size_t and_count(const Bitvec& a, const Bitvec& b) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.words_.size(); ++i) {
      total += std::popcount(a.words_[i] & b.words_[i]);
    }
    return total;
  }

  /// New Bitvec over the given row subset, preserving order.
  Bitvec gather(const std::vector<std::size_t>& rows) const {
    Bitvec out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (get(rows[i])) out.set(i);
    }
    return out;
  }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace crashrules
