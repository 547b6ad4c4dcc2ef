#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "chainfrag/frag_tree.hpp"
#include "chainfrag/rates.hpp"
#include "chainfrag/scalar.hpp"

namespace chainfrag {

/// P(F_t = G) for every G, indexed by the link mask of G.
template <class T>
struct DistTable {
  TimeMode mode = TimeMode::discrete;
  double time = 0.0;
  int n = 0;
  std::vector<T> p;

  const T& operator[](Mask g) const { return p.at(static_cast<std::size_t>(g)); }
  T total() const {
    Accumulator<T> acc;
    for (const auto& x : p) acc.add(x);
    return acc.value();
  }
};

inline constexpr double kProbabilitySlack = 1e-10;

/// Guards a formula result that should be a probability. Exact types must
/// land in [0,1]; doubles may stray by kProbabilitySlack and are clamped.
template <class T>
T checked_probability(const T& raw, const char* what) {
  if constexpr (scalar_traits<T>::exact) {
    if (raw < T(0) || raw > T(1)) throw consistency_error(std::string(what) + " left [0,1]");
    return raw;
  } else {
    if (!(raw >= -kProbabilitySlack && raw <= 1.0 + kProbabilitySlack))
      throw consistency_error(std::string(what) + " = " + std::to_string(raw) + " is not a probability");
    return raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw);
  }
}

inline void require_time(double t) {
  CHAINFRAG_REQUIRE(std::isfinite(t) && t >= 0.0, "time must be finite and nonnegative");
}

inline void require_steps(long long t) { CHAINFRAG_REQUIRE(t >= 0, "time must be nonnegative"); }

// ---------------------------------------------------------------------------
// Discrete time.

/// lambda^I_G = prod over the pieces J of I cut at G of (1 - rho_J): the
/// probability that nothing is removed in one step from state G.
template <class T>
T lambda(const RateSpec<T>& r, Mask g, const Fragment& within) {
  r.require(TimeMode::discrete);
  T prod(1);
  for (const auto& j : fragments_of(g, within))
    if (!j.empty()) prod *= T(1) - r.of(j);
  return prod;
}

template <class T>
T lambda(const RateSpec<T>& r, Mask g) {
  return lambda(r, g, Fragment::whole(r.links()));
}

inline constexpr int kGapExpansionMaxFragments = 10;

/// lambda^I_S - lambda^I_{}. Floating types expand the product so that the
/// leading term sum_{nu in S} rho_nu is not lost to cancellation; exact
/// types (and large fragment families) subtract directly.
template <class T>
T lambda_gap(const RateSpec<T>& r, Mask s, const Fragment& within) {
  if constexpr (scalar_traits<T>::exact) {
    return lambda(r, s, within) - lambda(r, Mask{0}, within);
  } else {
    std::vector<T> rj;
    for (const auto& j : fragments_of(s, within))
      if (!j.empty()) rj.push_back(r.of(j));
    if (rj.size() > static_cast<std::size_t>(kGapExpansionMaxFragments))
      return lambda(r, s, within) - lambda(r, Mask{0}, within);
    Accumulator<T> acc;
    acc.add(r.of(s));
    const Mask all = low_bits(static_cast<int>(rj.size()));
    for (Mask a : subsets_by_size(all)) {
      const int k = popcount(a);
      if (k < 2) continue;
      T prod(1);
      for_each_bit(a, [&](int i) { prod *= rj[static_cast<std::size_t>(i)]; });
      acc.add(k % 2 == 0 ? prod : T(-prod));
    }
    return acc.value();
  }
}

/// One summand of an eigen-expansion: coef * (base^t - lambda_empty^t), or
/// coef * base^t when `absolute` is set.
template <class T>
struct EigenTerm {
  T coef;
  T base;
  bool absolute = false;
};

/// P(event at step t) = sum of EigenTerms, with t only in the exponents.
template <class T>
struct DiscreteExpansion {
  T lambda_empty;
  std::vector<EigenTerm<T>> terms;

  T at(long long t) const {
    require_steps(t);
    const T empty_pow = ipow(lambda_empty, t);
    Accumulator<T> acc;
    for (const auto& term : terms) {
      if (term.absolute)
        acc.add(T(term.coef * ipow(term.base, t)));
      else
        acc.add(T(term.coef * (ipow(term.base, t) - empty_pow)));
    }
    return acc.value();
  }
};

/// Vertex sets G_v(H) of every vertex for one edge set H (vertex masks).
inline std::vector<Mask> component_sets(const RootedTree& t, EdgeSet h) {
  std::vector<Mask> comp(static_cast<std::size_t>(t.size()), 0);
  const auto& order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    comp[static_cast<std::size_t>(v)] |= bit(v);
    if (v != t.root() && !h.contains(v)) comp[static_cast<std::size_t>(t.parent(v))] |= comp[static_cast<std::size_t>(v)];
  }
  return comp;
}

/// Alternating sum over H subset of E for the matching probability of a
/// fragmentation tree, with the t-dependence kept symbolic.
template <class T>
DiscreteExpansion<T> tree_expansion_discrete(const FragTree& tree, const RateSpec<T>& r) {
  r.require(TimeMode::discrete);
  CHAINFRAG_REQUIRE(tree.links().n == r.n(), "tree and rates disagree on n");
  const LinkSet links = tree.links();
  DiscreteExpansion<T> ex{lambda(r, Mask{0}), {}};
  if (tree.empty()) {
    ex.terms.push_back({T(1), ex.lambda_empty, true});
    return ex;
  }
  const RootedTree& rt = tree.tree();
  ex.terms.reserve(std::size_t{1} << rt.edge_count());
  for (Mask hb : subsets_by_size(rt.all_edges().bits)) {
    const EdgeSet h{hb};
    const std::vector<Mask> comp = component_sets(rt, h);
    T coef(1);
    for (int v = 0; v < rt.size(); ++v) {
      const Mask comp_links = tree.to_links({comp[static_cast<std::size_t>(v)]});
      const T gap = lambda_gap(r, comp_links, tree.internal(v));
      if (!(gap > T(0)))
        throw consistency_error("nonpositive geometric parameter for vertex " + std::to_string(tree.link(v)));
      coef *= r[tree.link(v)];
      coef /= gap;
    }
    if (h.size() % 2 == 1) coef = -coef;
    const Mask stump_links = tree.to_links({comp[static_cast<std::size_t>(rt.root())]});
    ex.terms.push_back({coef, lambda(r, stump_links, Fragment::whole(links)), false});
  }
  return ex;
}

/// P(the discrete process matches the fragmentation tree at step t), before
/// the final range check.
template <class T>
T tree_prob_discrete_unclamped(const FragTree& tree, const RateSpec<T>& r, long long t) {
  require_steps(t);
  return tree_expansion_discrete(tree, r).at(t);
}

template <class T>
T tree_prob_discrete(const FragTree& tree, const RateSpec<T>& r, long long t) {
  return checked_probability(tree_prob_discrete_unclamped(tree, r, t), "discrete tree probability");
}

/// All tree expansions of tau(G, L) concatenated: P(F_t = G) as a function of t.
template <class T>
DiscreteExpansion<T> dist_discrete_expansion(Mask g, const RateSpec<T>& r, double budget = kDefaultTermBudget) {
  r.require(TimeMode::discrete);
  DiscreteExpansion<T> ex{lambda(r, Mask{0}), {}};
  for (const auto& tree : enumerate_fragmentation_trees(g, r.links(), budget)) {
    auto part = tree_expansion_discrete(tree, r);
    for (auto& term : part.terms) ex.terms.push_back(std::move(term));
  }
  return ex;
}

/// P(F_t = G) in discrete time as the sum of tree probabilities over tau(G, L).
template <class T>
T dist_discrete(Mask g, const RateSpec<T>& r, long long t, double budget = kDefaultTermBudget) {
  require_steps(t);
  return checked_probability(dist_discrete_expansion(g, r, budget).at(t), "P(F_t = G)");
}

template <class T>
DistTable<T> dist_discrete_table(const RateSpec<T>& r, long long t, double budget = kDefaultTermBudget) {
  r.require(TimeMode::discrete);
  require_steps(t);
  check_budget(r.n(), budget);
  DistTable<T> table{TimeMode::discrete, static_cast<double>(t), r.n(), {}};
  const Mask all = low_bits(r.n());
  table.p.reserve(std::size_t{1} << r.n());
  for (Mask g = 0;; ++g) {
    table.p.push_back(dist_discrete(g, r, t, budget));
    if (g == all) break;
  }
  return table;
}

/// Shortcut for G a nonempty subset of {1, n}, where no dependent event can
/// occur: sum over nonempty H subset of G of (-1)^{|G|-|H|} (lambda_H^t - lambda_{}^t).
template <class T>
T dist_discrete_endpoints(Mask g, const RateSpec<T>& r, long long t) {
  r.require(TimeMode::discrete);
  require_steps(t);
  const Mask ends = link_bit(1) | link_bit(r.n());
  CHAINFRAG_REQUIRE(g != 0 && is_subset(g, ends), "endpoint shortcut needs a nonempty subset of {1, n}");
  const T empty_pow = ipow(lambda(r, Mask{0}), t);
  Accumulator<T> acc;
  for (Mask h : subsets_by_size(g)) {
    if (h == 0) continue;
    const T term = ipow(lambda(r, h), t) - empty_pow;
    acc.add((popcount(g) - popcount(h)) % 2 == 0 ? term : T(-term));
  }
  return checked_probability(acc.value(), "endpoint probability");
}

// ---------------------------------------------------------------------------
// Transition-matrix oracle, built straight from the one-step dynamics.

inline constexpr int kMaxOracleLinks = 12;

/// Sparse one-step transition rows: from G, every fragment J of L_G removes
/// link a in J with probability rho_a or nothing with probability 1 - rho_J,
/// independently across fragments.
template <class T>
std::vector<std::vector<std::pair<Mask, T>>> transition_rows(const RateSpec<T>& r) {
  r.require(TimeMode::discrete);
  CHAINFRAG_REQUIRE(r.n() <= kMaxOracleLinks, "transition-matrix oracle is limited to n <= 12");
  const LinkSet links = r.links();
  const std::size_t states = std::size_t{1} << r.n();
  std::vector<std::vector<std::pair<Mask, T>>> rows(states);
  for (std::size_t gi = 0; gi < states; ++gi) {
    const Mask g = gi;
    std::vector<Fragment> frags;
    for (const auto& j : fragments_of(g, links))
      if (!j.empty()) frags.push_back(j);
    auto rec = [&](auto&& self, std::size_t i, Mask added, T prob) -> void {
      if (i == frags.size()) {
        rows[gi].emplace_back(g | added, prob);
        return;
      }
      const Fragment& j = frags[i];
      self(self, i + 1, added, T(prob * (T(1) - r.of(j))));
      for (int a = j.lo(); a <= j.hi(); ++a) self(self, i + 1, added | link_bit(a), T(prob * r[a]));
    };
    rec(rec, 0, Mask{0}, T(1));
  }
  return rows;
}

/// Dense 2^n x 2^n transition matrix (row = from, column = to).
template <class T>
std::vector<std::vector<T>> transition_matrix(const RateSpec<T>& r) {
  const auto rows = transition_rows(r);
  std::vector<std::vector<T>> m(rows.size(), std::vector<T>(rows.size(), T(0)));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [to, p] : rows[i]) m[i][static_cast<std::size_t>(to)] += p;
  return m;
}

/// Row of the t-th matrix power from state {} (distribution propagation).
template <class T>
DistTable<T> transition_matrix_dist(const RateSpec<T>& r, long long t) {
  require_steps(t);
  const auto rows = transition_rows(r);
  std::vector<T> p(rows.size(), T(0));
  p[0] = T(1);
  for (long long step = 0; step < t; ++step) {
    std::vector<T> q(rows.size(), T(0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (p[i] == T(0)) continue;
      for (const auto& [to, pr] : rows[i]) q[static_cast<std::size_t>(to)] += p[i] * pr;
    }
    p = std::move(q);
  }
  return {TimeMode::discrete, static_cast<double>(t), r.n(), std::move(p)};
}

// ---------------------------------------------------------------------------
// Continuous time.

/// Links are removed independently after Exp(rho) waiting times.
inline double dist_continuous(Mask g, const RateSpec<double>& r, double t) {
  r.require(TimeMode::continuous);
  require_time(t);
  CHAINFRAG_REQUIRE(r.links().contains_all(g), "subset contains links outside L");
  double p = std::exp(-r.of(r.links().mask() & ~g) * t);
  for_each_bit(g, [&](int i) { p *= -std::expm1(-r[i + 1] * t); });
  return p;
}

inline DistTable<double> dist_continuous_table(const RateSpec<double>& r, double t) {
  DistTable<double> table{TimeMode::continuous, t, r.n(), {}};
  CHAINFRAG_REQUIRE(r.n() <= 30, "full tables are limited to n <= 30");
  const Mask all = low_bits(r.n());
  for (Mask g = 0;; ++g) {
    table.p.push_back(dist_continuous(g, r, t));
    if (g == all) break;
  }
  return table;
}

/// Alternating sum over H subset of E for the continuous-time matching
/// probability, before the final range check.
inline double tree_prob_continuous_unclamped(const FragTree& tree, const RateSpec<double>& r, double t) {
  r.require(TimeMode::continuous);
  require_time(t);
  CHAINFRAG_REQUIRE(tree.links().n == r.n(), "tree and rates disagree on n");
  const Mask all = r.links().mask();
  if (tree.empty()) return std::exp(-r.total() * t);
  const RootedTree& rt = tree.tree();
  Accumulator<double> acc;
  for (Mask hb : subsets_by_size(rt.all_edges().bits)) {
    const EdgeSet h{hb};
    const std::vector<Mask> comp = component_sets(rt, h);
    const Mask stump = tree.to_links({comp[static_cast<std::size_t>(rt.root())]});
    double term = -std::expm1(-r.of(stump) * t) * std::exp(-r.of(all & ~stump) * t);
    for (int v = 0; v < rt.size(); ++v)
      term *= r[tree.link(v)] / r.of(tree.to_links({comp[static_cast<std::size_t>(v)]}));
    acc.add(h.size() % 2 == 0 ? term : -term);
  }
  return acc.value();
}

inline double tree_prob_continuous(const FragTree& tree, const RateSpec<double>& r, double t) {
  return checked_probability(tree_prob_continuous_unclamped(tree, r, t), "continuous tree probability");
}

/// Sum of tree_prob_continuous over tau(G, L).
inline double dist_continuous_by_trees(Mask g, const RateSpec<double>& r, double t,
                                       double budget = kDefaultTermBudget) {
  Accumulator<double> acc;
  for (const auto& tree : enumerate_fragmentation_trees(g, r.links(), budget))
    acc.add(tree_prob_continuous_unclamped(tree, r, t));
  return checked_probability(acc.value(), "P(F_t = G)");
}

/// Generator-matrix oracle: transitions G -> G + {a} at rate rho_a,
/// exponentiated by uniformisation.
inline DistTable<double> generator_dist(const RateSpec<double>& r, double t) {
  r.require(TimeMode::continuous);
  require_time(t);
  CHAINFRAG_REQUIRE(r.n() <= kMaxOracleLinks, "generator oracle is limited to n <= 12");
  const std::size_t states = std::size_t{1} << r.n();
  const double big_lambda = r.total();
  const double mu = big_lambda * t;
  std::vector<double> v(states, 0.0);
  v[0] = 1.0;
  std::vector<Accumulator<double>> out(states);
  double log_w = -mu;
  double mass = 0.0;
  for (long long k = 0;; ++k) {
    if (k > 0) log_w += std::log(mu) - std::log(static_cast<double>(k));
    const double w = std::exp(log_w);
    for (std::size_t s = 0; s < states; ++s)
      if (v[s] != 0.0) out[s].add(w * v[s]);
    mass += w;
    if ((k > mu && 1.0 - mass < 1e-17) || mu == 0.0 || k > 100000) break;
    // v <- v (I + Q / Lambda)
    std::vector<double> nv(states, 0.0);
    for (std::size_t s = 0; s < states; ++s) {
      if (v[s] == 0.0) continue;
      double exit = 0.0;
      for (int a = 1; a <= r.n(); ++a) {
        if ((s >> (a - 1)) & 1U) continue;
        const double q = r[a] / big_lambda;
        nv[s | (std::size_t{1} << (a - 1))] += v[s] * q;
        exit += q;
      }
      nv[s] += v[s] * (1.0 - exit);
    }
    v = std::move(nv);
  }
  DistTable<double> table{TimeMode::continuous, t, r.n(), std::vector<double>(states)};
  for (std::size_t s = 0; s < states; ++s) table.p[s] = out[s].value();
  return table;
}

}  // namespace chainfrag
