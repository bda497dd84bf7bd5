#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "amisc/errors.hpp"

namespace amisc {

/// Vector of non-negative level indices. Totally ordered lexicographically
/// (for containers and tie-breaking); `leq` gives the componentwise partial order.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim, int fill = 0) : entries_(dim, fill) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) { check(); }
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { check(); }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  int& operator[](std::size_t i) { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const std::vector<int>& entries() const noexcept { return entries_; }

  int l1() const noexcept { return std::accumulate(entries_.begin(), entries_.end(), 0); }
  int max_entry() const noexcept {
    return entries_.empty() ? 0 : *std::max_element(entries_.begin(), entries_.end());
  }

  /// Copy with entry k incremented by `delta`.
  MultiIndex shifted(std::size_t k, int delta = 1) const {
    MultiIndex out = *this;
    out.entries_[k] += delta;
    return out;
  }

  /// Concatenation [this, tail].
  MultiIndex concat(const MultiIndex& tail) const {
    MultiIndex out = *this;
    out.entries_.insert(out.entries_.end(), tail.entries_.begin(), tail.entries_.end());
    return out;
  }

  /// Entries [first, first+count).
  MultiIndex slice(std::size_t first, std::size_t count) const {
    return MultiIndex(std::vector<int>(entries_.begin() + static_cast<std::ptrdiff_t>(first),
                                       entries_.begin() + static_cast<std::ptrdiff_t>(first + count)));
  }

  std::string to_string(char sep = ' ') const {
    std::string s;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) s += sep;
      s += std::to_string(entries_[i]);
    }
    return s;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.entries_ <=> b.entries_; }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& m) {
    return os << '(' << m.to_string(',') << ')';
  }

 private:
  void check() const {
    for (int e : entries_)
      if (e < 0) throw ValidationError("multi-index entries must be non-negative");
  }

  std::vector<int> entries_;
};

/// Componentwise u <= v. Lengths must agree.
inline bool leq(const MultiIndex& u, const MultiIndex& v) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] > v[i]) return false;
  return true;
}

inline MultiIndex unit_index(std::size_t dim, std::size_t k) {
  MultiIndex e(dim);
  e[k] = 1;
  return e;
}

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int e : m) {
      h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// Ordered set of equal-length multi-indices.
using IndexSet = std::set<MultiIndex>;

}  // namespace amisc
