#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace chainfrag {

using Mask = std::uint64_t;

inline constexpr Mask bit(int i) noexcept { return Mask{1} << i; }

inline constexpr Mask low_bits(int n) noexcept {
  return n >= 64 ? ~Mask{0} : (bit(n) - 1);
}

inline constexpr int popcount(Mask m) noexcept { return std::popcount(m); }

inline constexpr bool is_subset(Mask a, Mask b) noexcept { return (a & ~b) == 0; }

/// Calls f(i) for every set bit i of m, lowest first.
template <class F>
constexpr void for_each_bit(Mask m, F&& f) {
  while (m) {
    f(std::countr_zero(m));
    m &= m - 1;
  }
}

inline std::vector<int> bits_of(Mask m) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(popcount(m)));
  for_each_bit(m, [&](int i) { out.push_back(i); });
  return out;
}

/// Calls f(sub) for every subset of m, including 0 and m itself.
template <class F>
constexpr void for_each_subset(Mask m, F&& f) {
  Mask sub = 0;
  while (true) {
    f(sub);
    if (sub == m) break;
    sub = (sub - m) & m;
  }
}

/// Subsets of m ordered by increasing cardinality. Requires popcount(m) < 64.
inline std::vector<Mask> subsets_by_size(Mask m) {
  const std::vector<int> idx = bits_of(m);
  const int k = static_cast<int>(idx.size());
  assert(k < 64);
  std::vector<Mask> out;
  out.reserve(std::size_t{1} << k);
  for (int size = 0; size <= k; ++size) {
    if (size == 0) {
      out.push_back(0);
      continue;
    }
    // Gosper's hack over compressed indices, then spread onto m.
    Mask c = low_bits(size);
    const Mask limit = bit(k);
    while (c < limit) {
      Mask spread = 0;
      for_each_bit(c, [&](int j) { spread |= bit(idx[static_cast<std::size_t>(j)]); });
      out.push_back(spread);
      const Mask lo = c & (~c + 1);
      const Mask hi = c + lo;
      c = (((hi ^ c) >> 2) / lo) | hi;
    }
  }
  return out;
}

}  // namespace chainfrag
