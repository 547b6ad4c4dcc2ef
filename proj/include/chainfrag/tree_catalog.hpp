#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "chainfrag/frag_tree.hpp"
#include "chainfrag/rates.hpp"
#include "chainfrag/rooted_tree.hpp"
#include "chainfrag/simulation.hpp"

namespace chainfrag {

/// AHU code of the subtree at v: children codes sorted, so isomorphic
/// unordered rooted trees share a code.
inline std::string canonical_code(const RootedTree& t, int v) {
  std::vector<std::string> kids;
  for (int c : t.children(v)) kids.push_back(canonical_code(t, c));
  std::sort(kids.begin(), kids.end());
  std::string s = "(";
  for (const auto& k : kids) s += k;
  return s + ")";
}

inline std::string canonical_code(const RootedTree& t) { return canonical_code(t, t.root()); }

inline constexpr int kMaxCatalogVertices = 10;

/// One representative of every unordered rooted tree shape with 1..max_vertices
/// vertices. Vertex i has label i and a parent of smaller index.
inline std::vector<RootedTree> rooted_tree_shapes(int max_vertices) {
  CHAINFRAG_REQUIRE(max_vertices >= 1 && max_vertices <= kMaxCatalogVertices,
                    "catalog size must lie in [1, 10] vertices");
  std::vector<RootedTree> out;
  std::set<std::string> seen;
  for (int v = 1; v <= max_vertices; ++v) {
    std::vector<int> labels(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) labels[static_cast<std::size_t>(i)] = i;
    std::vector<int> parent(static_cast<std::size_t>(v), -1);
    auto rec = [&](auto&& self, int i) -> void {
      if (i == v) {
        RootedTree t(labels, parent);
        if (seen.insert(canonical_code(t)).second) out.push_back(std::move(t));
        return;
      }
      for (int p = 0; p < i; ++p) {
        parent[static_cast<std::size_t>(i)] = p;
        self(self, i + 1);
      }
    };
    rec(rec, 1);
  }
  return out;
}

/// Random recursive tree: vertex i attaches to a uniform earlier vertex.
inline RootedTree random_rooted_tree(int vertices, Rng& rng) {
  CHAINFRAG_REQUIRE(vertices >= 1 && vertices <= kMaxVertices, "vertex count must lie in [1, 64]");
  std::vector<int> labels(static_cast<std::size_t>(vertices));
  std::vector<int> parent(static_cast<std::size_t>(vertices), -1);
  for (int i = 0; i < vertices; ++i) {
    labels[static_cast<std::size_t>(i)] = i;
    if (i > 0) parent[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<std::uint64_t>(i));
  }
  return RootedTree(labels, parent);
}

/// Random fragmentation tree with k vertices on n links: a uniform k-subset
/// G and a shape grown by choosing every subtree root uniformly.
inline FragTree random_frag_tree(int n, int k, Rng& rng) {
  CHAINFRAG_REQUIRE(k >= 0 && k <= n, "need 0 <= k <= n");
  const LinkSet links(n);
  if (k == 0) return FragTree(links);
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  Mask g = 0;
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    g |= bit(pool[static_cast<std::size_t>(i)]);
  }
  std::vector<int> left(static_cast<std::size_t>(k), -1), right(static_cast<std::size_t>(k), -1);
  auto build = [&](auto&& self, int lo, int hi) -> int {
    if (lo >= hi) return -1;
    const int r = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo));
    left[static_cast<std::size_t>(r)] = self(self, lo, r);
    right[static_cast<std::size_t>(r)] = self(self, r + 1, hi);
    return r;
  };
  const int root = build(build, 0, k);
  return FragTree(links, g, root, std::move(left), std::move(right));
}

/// Random strictly positive integer weights scaled to sum to `total`
/// (given as a number of thousandths), returned as decimal text per link.
inline std::vector<std::string> random_rate_text(int n, int total_thousandths, Rng& rng) {
  CHAINFRAG_REQUIRE(n >= 1 && total_thousandths >= n, "total too small for n positive rates");
  // Stars and bars: n-1 distinct cut points in [1, total-1].
  std::set<int> cuts;
  while (static_cast<int>(cuts.size()) < n - 1)
    cuts.insert(1 + static_cast<int>(rng() % static_cast<std::uint64_t>(total_thousandths - 1)));
  std::vector<std::string> out;
  int prev = 0;
  for (int c : cuts) {
    out.push_back(std::to_string(c - prev) + "/1000");
    prev = c;
  }
  out.push_back(std::to_string(total_thousandths - prev) + "/1000");
  return out;
}

template <class T>
RateSpec<T> rates_from_text(TimeMode mode, const std::vector<std::string>& text) {
  std::vector<T> v;
  for (const auto& s : text) v.push_back(scalar_traits<T>::from_string(s));
  return RateSpec<T>(mode, std::move(v));
}

/// Continuous rates drawn uniformly from [lo, hi).
inline RateSpec<double> random_continuous_rates(int n, Rng& rng, double lo = 0.1, double hi = 2.0) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * rng.uniform());
  return RateSpec<double>::continuous(std::move(v));
}

}  // namespace chainfrag
