#pragma once

#include <compare>
#include <string>
#include <vector>

#include "chainfrag/bits.hpp"
#include "chainfrag/error.hpp"

namespace chainfrag {

inline constexpr int kMaxLinks = 64;

/// Link alpha in {1..n} occupies bit alpha-1 of a Mask.
inline constexpr Mask link_bit(int alpha) noexcept { return bit(alpha - 1); }

/// The ground chain L = {1, ..., n}.
struct LinkSet {
  int n = 0;

  explicit LinkSet(int links) : n(links) {
    CHAINFRAG_REQUIRE(n >= 1 && n <= kMaxLinks, "number of links must lie in [1, 64]");
  }

  Mask mask() const noexcept { return low_bits(n); }
  bool contains(int alpha) const noexcept { return alpha >= 1 && alpha <= n; }
  bool contains_all(Mask g) const noexcept { return is_subset(g, mask()); }

  friend bool operator==(const LinkSet&, const LinkSet&) = default;
};

/// A contiguous (possibly empty) run of links, stored as the two cut
/// positions that bound it: the fragment is {left_cut+1, ..., right_cut-1}.
/// Cut position 0 and n+1 stand for the ends of the chain. Because the
/// bounds are kept, two empty fragments at different places compare unequal.
struct Fragment {
  int left_cut = 0;
  int right_cut = 1;

  static Fragment whole(const LinkSet& links) { return {0, links.n + 1}; }

  int lo() const noexcept { return left_cut + 1; }
  int hi() const noexcept { return right_cut - 1; }
  bool empty() const noexcept { return right_cut - left_cut <= 1; }
  int size() const noexcept { return empty() ? 0 : right_cut - left_cut - 1; }
  bool contains(int alpha) const noexcept { return alpha > left_cut && alpha < right_cut; }

  Mask mask() const noexcept {
    if (empty()) return 0;
    return low_bits(hi()) & ~low_bits(lo() - 1);
  }

  /// "{2,3,4}" or "{}" (position is not printed).
  std::string to_string() const {
    std::string s = "{";
    for (int a = lo(); a <= hi(); ++a) {
      if (a != lo()) s += ",";
      s += std::to_string(a);
    }
    return s + "}";
  }

  friend auto operator<=>(const Fragment&, const Fragment&) = default;
};

/// Splits the fragment `within` at the links of `cuts` and returns the pieces
/// left to right, empty pieces included. cuts must be a subset of `within`.
inline std::vector<Fragment> fragments_of(Mask cuts, const Fragment& within) {
  CHAINFRAG_REQUIRE(is_subset(cuts, within.mask()), "cut set is not contained in the fragment");
  std::vector<Fragment> out;
  out.reserve(static_cast<std::size_t>(popcount(cuts)) + 1);
  int left = within.left_cut;
  for_each_bit(cuts, [&](int i) {
    out.push_back({left, i + 1});
    left = i + 1;
  });
  out.push_back({left, within.right_cut});
  return out;
}

/// The decomposition of L \ G into |G|+1 fragments induced by removing G.
inline std::vector<Fragment> fragments_of(Mask g, const LinkSet& links) {
  CHAINFRAG_REQUIRE(links.contains_all(g), "subset contains links outside L");
  return fragments_of(g, Fragment::whole(links));
}

/// Parses "1,3,4" (or "1;3;4"); empty text is the empty set. Links must be
/// strictly increasing and lie in [1, n].
inline Mask parse_subset(const std::string& text, const LinkSet& links) {
  Mask m = 0;
  int last = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find_first_of(",;", pos);
    if (end == std::string::npos) end = text.size();
    const std::string tok = text.substr(pos, end - pos);
    CHAINFRAG_REQUIRE(!tok.empty(), "empty entry in subset '" + text + "'");
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw invalid_input("not an integer in subset: '" + tok + "'");
    }
    CHAINFRAG_REQUIRE(used == tok.size(), "not an integer in subset: '" + tok + "'");
    CHAINFRAG_REQUIRE(links.contains(v), "link " + tok + " outside [1, n]");
    CHAINFRAG_REQUIRE(v > last, "subset links must be strictly increasing");
    m |= link_bit(v);
    last = v;
    if (end == text.size()) break;
    pos = end + 1;
    CHAINFRAG_REQUIRE(pos < text.size(), "trailing separator in subset '" + text + "'");
  }
  return m;
}

/// "1;3;4" (the CSV convention); the empty set is "".
inline std::string format_subset(Mask g, char sep = ';') {
  std::string s;
  for_each_bit(g, [&](int i) {
    if (!s.empty()) s += sep;
    s += std::to_string(i + 1);
  });
  return s;
}

}  // namespace chainfrag
