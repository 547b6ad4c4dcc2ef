#pragma once

#include <algorithm>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chainfrag/rooted_tree.hpp"

namespace chainfrag {

// The pruning poset P(T) on subsets of E: H <=_P K iff K is a subset of H
// and every edge of H \ K lies in the stump tree of T - K. The empty set is
// the maximum. Nothing here materialises the 2^|E| elements up front.

inline bool leq_p(const RootedTree& t, EdgeSet h, EdgeSet k) {
  if (!is_subset(k.bits, h.bits)) return false;
  return is_subset((h - k).bits, stump_edges(t, k).bits);
}

/// All I with H <=_P I <=_P K, in order of increasing bit value.
inline std::vector<EdgeSet> interval(const RootedTree& t, EdgeSet h, EdgeSet k) {
  CHAINFRAG_REQUIRE(leq_p(t, h, k), "interval bounds are not comparable (H is not below K)");
  std::vector<EdgeSet> out;
  for_each_subset((h - k).bits, [&](Mask a) {
    const EdgeSet i{k.bits | a};
    if (leq_p(t, h, i) && leq_p(t, i, k)) out.push_back(i);
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// H_{>=e} = {f in H : f >= e}.
inline EdgeSet edges_above(const RootedTree& t, EdgeSet h, int e) { return {h.bits & t.descendants(e)}; }

/// The factors {H_{>=e} : e in M(H)} of the product [H, {}] = x_e [H_{>=e}, {}],
/// ordered by the index of e.
inline std::vector<EdgeSet> product_factorization(const RootedTree& t, EdgeSet h) {
  std::vector<EdgeSet> out;
  for_each_bit(minimal_edges(t, h).bits, [&](int e) { out.push_back(edges_above(t, h, e)); });
  return out;
}

struct MobiusValue {
  long long value = 0;
  /// False when H is not below K; value is then 0 by convention.
  bool comparable = true;
  friend bool operator==(const MobiusValue&, const MobiusValue&) = default;
};

/// Closed form: (-1)^{|H|-|K|} when H \ K is a stump cut set of T_gamma(K),
/// otherwise 0.
inline MobiusValue mobius(const RootedTree& t, EdgeSet h, EdgeSet k) {
  if (!leq_p(t, h, k)) return {0, false};
  // The tree order restricted to T_gamma(K) agrees with that of T, so the
  // antichain test can be done in T.
  if (!is_stump_cut_set(t, h - k)) return {0, true};
  return {((h.size() - k.size()) % 2 == 0) ? 1 : -1, true};
}

/// mu(H, Z) for every Z in [H, K], computed by the defining recursion
/// mu(H,H) = 1, mu(H,Z) = -sum_{H <= W < Z} mu(H,W).
inline std::vector<std::pair<EdgeSet, long long>> mobius_recursive_row(const RootedTree& t, EdgeSet h, EdgeSet k) {
  std::vector<EdgeSet> elems = interval(t, h, k);
  // Z strictly above W forces |Z| < |W|; process larger sets first.
  std::stable_sort(elems.begin(), elems.end(), [](EdgeSet a, EdgeSet b) { return a.size() > b.size(); });
  std::vector<std::pair<EdgeSet, long long>> mu;
  mu.reserve(elems.size());
  for (EdgeSet z : elems) {
    if (z == h) {
      mu.emplace_back(z, 1);
      continue;
    }
    long long s = 0;
    for (const auto& [w, m] : mu)
      if (w != z && leq_p(t, w, z)) s += m;
    mu.emplace_back(z, -s);
  }
  return mu;
}

/// Oracle for mobius(): evaluates the incidence-algebra recursion directly.
inline MobiusValue mobius_recursive(const RootedTree& t, EdgeSet h, EdgeSet k) {
  CHAINFRAG_REQUIRE(leq_p(t, h, k), "mobius_recursive needs H <=_P K");
  for (const auto& [z, m] : mobius_recursive_row(t, h, k))
    if (z == k) return {m, true};
  throw consistency_error("interval does not contain its upper end");
}

/// All H with H <=_P K.
inline std::vector<EdgeSet> down_set(const RootedTree& t, EdgeSet k) {
  std::vector<EdgeSet> out;
  for_each_subset(stump_edges(t, k).bits, [&](Mask a) { out.push_back({k.bits | a}); });
  return out;
}

/// Forms g(X) = sum_{H <=_P X} f(H) for every X <=_P K, then inverts with
/// the closed-form Mobius function. Returns (f(K), recovered f(K)).
/// Scalar only needs exact +, - and * by an integer for the identity to
/// hold exactly (use a rational type).
template <class Scalar, class F>
std::pair<Scalar, Scalar> mobius_inversion_check(const RootedTree& t, F&& f, EdgeSet k) {
  const std::vector<EdgeSet> below = down_set(t, k);
  std::unordered_map<Mask, Scalar> g;
  for (EdgeSet x : below) {
    Scalar s(0);
    for (EdgeSet h : down_set(t, x)) s += Scalar(f(h));
    g.emplace(x.bits, s);
  }
  Scalar recovered(0);
  for (EdgeSet h : below) {
    const MobiusValue mu = mobius(t, h, k);
    if (mu.value == 1) recovered += g.at(h.bits);
    else if (mu.value == -1) recovered -= g.at(h.bits);
  }
  return {Scalar(f(k)), recovered};
}

inline constexpr int kDefaultHasseEdgeBound = 16;

/// Covering pairs (lower, upper) of P(T): lower = upper + {e} for every edge
/// e of the stump tree of T - upper.
inline std::vector<std::pair<EdgeSet, EdgeSet>> hasse_edges(const RootedTree& t,
                                                            int max_edges = kDefaultHasseEdgeBound) {
  CHAINFRAG_REQUIRE(t.edge_count() <= max_edges,
                    "tree has " + std::to_string(t.edge_count()) + " edges; Hasse export is limited to " +
                        std::to_string(max_edges));
  std::vector<std::pair<EdgeSet, EdgeSet>> out;
  for_each_subset(t.all_edges().bits, [&](Mask k) {
    for_each_bit(stump_edges(t, {k}).bits, [&](int e) { out.emplace_back(EdgeSet{k | bit(e)}, EdgeSet{k}); });
  });
  std::sort(out.begin(), out.end());
  return out;
}

/// Atoms of [H, {}] (the elements covering H): H \ {nu} for nu minimal in H.
inline std::vector<EdgeSet> interval_atoms(const RootedTree& t, EdgeSet h) {
  std::vector<EdgeSet> out;
  for_each_bit(minimal_edges(t, h).bits, [&](int e) { out.push_back(h - EdgeSet{bit(e)}); });
  return out;
}

}  // namespace chainfrag
