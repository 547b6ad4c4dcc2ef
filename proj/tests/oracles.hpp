#pragma once

// Brute-force reference implementations used only by the tests. They work
// from the definitions directly and share no code paths with the library
// beyond its plain data types.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

using Mask = std::uint64_t;

/// Vertices reachable from `root` without crossing an edge whose upper end
/// is in `cut` (vertex indices, parent[root] = -1).
inline Mask reachable(const std::vector<int>& parent, int root, Mask cut) {
  const int n = static_cast<int>(parent.size());
  Mask seen = Mask{1} << root;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int v = 0; v < n; ++v) {
      if ((seen >> v) & 1U) continue;
      if (parent[v] >= 0 && ((seen >> parent[v]) & 1U) && !((cut >> v) & 1U)) {
        seen |= Mask{1} << v;
        grew = true;
      }
    }
  }
  return seen;
}

inline bool is_ancestor(const std::vector<int>& parent, int a, int b) {
  for (int v = b; v >= 0; v = parent[v])
    if (v == a) return true;
  return false;
}

/// H <=_P K: K within H, and every edge of H \ K still hangs off the root
/// component of T - K.
inline bool leq(const std::vector<int>& parent, int root, Mask h, Mask k) {
  if ((k & ~h) != 0) return false;
  const Mask stump = reachable(parent, root, k);
  return ((h & ~k) & ~stump) == 0;
}

/// Mobius matrix of the pruning poset as the inverse of its zeta matrix,
/// by exact Gauss-Jordan elimination. Index = edge mask (root bit never set).
inline std::map<std::pair<Mask, Mask>, long> mobius_by_inversion(const std::vector<int>& parent, int root) {
  std::vector<Mask> elems;
  const int n = static_cast<int>(parent.size());
  const Mask edges = ((Mask{1} << n) - 1) & ~(Mask{1} << root);
  for (Mask s = 0;; s = (s - edges) & edges) {
    elems.push_back(s);
    if (s == edges) break;
  }
  const std::size_t m = elems.size();
  std::vector<std::vector<mpq_class>> a(m, std::vector<mpq_class>(2 * m, 0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i][j] = leq(parent, root, elems[i], elems[j]) ? 1 : 0;
    a[i][m + i] = 1;
  }
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    while (a[piv][c] == 0) ++piv;
    std::swap(a[piv], a[c]);
    const mpq_class d = a[c][c];
    for (auto& x : a[c]) x /= d;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const mpq_class f = a[r][c];
      for (std::size_t k = 0; k < 2 * m; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::map<std::pair<Mask, Mask>, long> mu;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) mu[{elems[i], elems[j]}] = a[i][m + j].get_num().get_si();
  return mu;
}

/// Distribution of F_t by propagating the chain step by step straight from
/// its definition: each maximal run of present links (a fragment) loses its
/// link a with probability rho_a, or nothing, independently of the others.
inline std::vector<mpq_class> discrete_distribution(const std::vector<mpq_class>& rho, long long t) {
  const int n = static_cast<int>(rho.size());
  const std::size_t states = std::size_t{1} << n;
  std::vector<mpq_class> p(states, 0);
  p[0] = 1;
  for (long long step = 0; step < t; ++step) {
    std::vector<mpq_class> q(states, 0);
    for (std::size_t g = 0; g < states; ++g) {
      if (p[g] == 0) continue;
      // Fragments as lists of link indices (0-based).
      std::vector<std::vector<int>> frags;
      std::vector<int> cur;
      for (int a = 0; a < n; ++a) {
        if ((g >> a) & 1U) {
          frags.push_back(cur);
          cur.clear();
        } else {
          cur.push_back(a);
        }
      }
      frags.push_back(cur);
      std::vector<std::pair<std::size_t, mpq_class>> outcomes{{g, p[g]}};
      for (const auto& f : frags) {
        if (f.empty()) continue;
        std::vector<std::pair<std::size_t, mpq_class>> next;
        mpq_class rest = 1;
        for (int a : f) rest -= rho[a];
        for (const auto& [s, w] : outcomes) {
          next.emplace_back(s, w * rest);
          for (int a : f) next.emplace_back(s | (std::size_t{1} << a), w * rho[a]);
        }
        outcomes = std::move(next);
      }
      for (const auto& [s, w] : outcomes) q[s] += w;
    }
    p = std::move(q);
  }
  return p;
}

/// Binomial form of the Catalan numbers, (2k)! / (k! (k+1)!).
inline std::uint64_t catalan(int k) {
  mpz_class num = 1, den = 1;
  for (int i = 1; i <= k; ++i) {
    num *= 2 * k - i + 1;
    den *= i;
  }
  mpz_class c = num / den / (k + 1);
  return c.get_ui();
}

/// Fragment (left_cut, right_cut) from which link alpha (1-based) was
/// removed: walk outwards to the nearest links removed strictly earlier.
inline std::pair<int, int> removal_fragment(const std::vector<double>& removal_time, int alpha) {
  const int n = static_cast<int>(removal_time.size());
  const double ta = removal_time[alpha - 1];
  int lo = alpha - 1;
  while (lo >= 1 && !(removal_time[lo - 1] < ta)) --lo;
  int hi = alpha + 1;
  while (hi <= n && !(removal_time[hi - 1] < ta)) ++hi;
  return {lo, hi};
}

}  // namespace oracle
