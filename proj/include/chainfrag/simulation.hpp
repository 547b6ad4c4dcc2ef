#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "chainfrag/frag_tree.hpp"
#include "chainfrag/probabilities.hpp"
#include "chainfrag/rates.hpp"

namespace chainfrag {

// ---------------------------------------------------------------------------
// Random numbers: xoshiro256** seeded through SplitMix64. Every trajectory
// index gets its own stream, so results do not depend on the thread count.

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : x_(seed) {}
  std::uint64_t next() noexcept {
    std::uint64_t z = (x_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t x_;
};

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept {
    SplitMix64 outer(seed);
    SplitMix64 inner(outer.next() ^ SplitMix64(stream).next());
    for (auto& w : s_) w = inner.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

inline constexpr std::uint64_t kDefaultSeed = 20240607;

// ---------------------------------------------------------------------------
// Trajectories.

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// First removal time of every link up to the horizon; kNever if the link
/// is still present at the horizon.
struct Trajectory {
  TimeMode mode = TimeMode::discrete;
  double horizon = 0.0;
  std::vector<double> removal_time;

  int n() const noexcept { return static_cast<int>(removal_time.size()); }
  double time_of(int alpha) const { return removal_time.at(static_cast<std::size_t>(alpha - 1)); }

  /// F_t = {alpha : removal_time(alpha) <= t}.
  Mask state_at(double t) const {
    CHAINFRAG_REQUIRE(t <= horizon, "time beyond the trajectory horizon");
    Mask m = 0;
    for (std::size_t i = 0; i < removal_time.size(); ++i)
      if (removal_time[i] <= t) m |= bit(static_cast<int>(i));
    return m;
  }
};

/// One discrete step from state g: every nonempty fragment draws one uniform
/// and removes the first link whose cumulative rate exceeds it.
inline Mask discrete_step(const RateSpec<double>& r, Mask g, Rng& rng) {
  Mask added = 0;
  for (const auto& j : fragments_of(g, r.links())) {
    if (j.empty()) continue;
    const double u = rng.uniform();
    double cum = 0.0;
    for (int a = j.lo(); a <= j.hi(); ++a) {
      cum += r[a];
      if (u < cum) {
        added |= link_bit(a);
        break;
      }
    }
  }
  return added;
}

inline Trajectory simulate_discrete(const RateSpec<double>& r, long long t_max, Rng& rng) {
  r.require(TimeMode::discrete);
  require_steps(t_max);
  Trajectory tr{TimeMode::discrete, static_cast<double>(t_max), std::vector<double>(static_cast<std::size_t>(r.n()), kNever)};
  const Mask all = r.links().mask();
  Mask g = 0;
  for (long long step = 1; step <= t_max && g != all; ++step) {
    const Mask added = discrete_step(r, g, rng);
    for_each_bit(added, [&](int i) { tr.removal_time[static_cast<std::size_t>(i)] = static_cast<double>(step); });
    g |= added;
  }
  return tr;
}

inline Trajectory simulate_discrete(const RateSpec<double>& r, long long t_max, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_discrete(r, t_max, rng);
}

/// All n exponential clocks drawn up front; times past t_max are censored.
inline Trajectory simulate_continuous(const RateSpec<double>& r, double t_max, Rng& rng) {
  r.require(TimeMode::continuous);
  require_time(t_max);
  Trajectory tr{TimeMode::continuous, t_max, std::vector<double>(static_cast<std::size_t>(r.n()), kNever)};
  for (int a = 1; a <= r.n(); ++a) {
    const double e = -std::log1p(-rng.uniform()) / r[a];
    if (e <= t_max) tr.removal_time[static_cast<std::size_t>(a - 1)] = e;
  }
  return tr;
}

inline Trajectory simulate_continuous(const RateSpec<double>& r, double t_max, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_continuous(r, t_max, rng);
}

inline Trajectory simulate(const RateSpec<double>& r, double t, Rng& rng) {
  if (r.mode() == TimeMode::discrete) {
    CHAINFRAG_REQUIRE(t == std::floor(t), "discrete time must be an integer");
    return simulate_discrete(r, static_cast<long long>(t), rng);
  }
  return simulate_continuous(r, t, rng);
}

/// True iff F_t is the vertex set of a stump tree of T and every removed
/// vertex was removed no later than its removed descendants.
inline bool matches_stump(const Trajectory& tr, const FragTree& tree, double t) {
  CHAINFRAG_REQUIRE(tr.n() == tree.links().n, "trajectory and tree disagree on n");
  const Mask f = tr.state_at(t);
  if (!is_subset(f, tree.vertex_links())) return false;
  if (f == 0) return true;
  const RootedTree& rt = tree.tree();
  for (int v = 0; v < rt.size(); ++v) {
    if (!((f >> (tree.link(v) - 1)) & 1U)) continue;
    if (v != rt.root() && !((f >> (tree.link(rt.parent(v)) - 1)) & 1U)) return false;
    const double tv = tr.time_of(tree.link(v));
    bool ok = true;
    for_each_bit(rt.descendants(v) & ~bit(v), [&](int w) {
      if (tr.time_of(tree.link(w)) < tv) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

/// max{tau_alpha : alpha in G} <= t < tau_{L\G}, and tau_alpha = tau_{G_alpha({})}
/// for every vertex alpha.
inline bool matches_tree(const Trajectory& tr, const FragTree& tree, double t) {
  return tr.state_at(t) == tree.vertex_links() && matches_stump(tr, tree, t);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators.

struct McEstimate {
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;

  double estimate() const noexcept { return samples == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(samples); }
  /// Binomial standard error sqrt(p(1-p)/N).
  double std_error() const noexcept {
    if (samples == 0) return 0.0;
    const double p = estimate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  }
};

/// Runs body(i, worker) for i in [0, count) split into contiguous blocks.
template <class Body>
void parallel_for_blocks(std::uint64_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::uint64_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::uint64_t i = 0; i < count; ++i) body(i, 0);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t block = (count + workers - 1) / workers;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * block;
    const std::uint64_t hi = std::min(count, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      for (std::uint64_t i = lo; i < hi; ++i) body(i, static_cast<int>(w));
    });
  }
  for (auto& th : pool) th.join();
}

/// One simulation pass shared by all trees: trajectory i uses stream i.
inline std::vector<McEstimate> estimate_tree_probs(const std::vector<FragTree>& trees, const RateSpec<double>& r,
                                                   double t, std::uint64_t samples, std::uint64_t seed,
                                                   int threads = 1) {
  CHAINFRAG_REQUIRE(samples >= 1, "samples must be at least 1");
  for (const auto& tree : trees) CHAINFRAG_REQUIRE(tree.links().n == r.n(), "tree and rates disagree on n");
  const int workers = std::max(1, threads);
  std::vector<std::vector<std::uint64_t>> hits(static_cast<std::size_t>(workers), std::vector<std::uint64_t>(trees.size(), 0));
  parallel_for_blocks(samples, workers, [&](std::uint64_t i, int w) {
    Rng rng(seed, i);
    const Trajectory tr = simulate(r, t, rng);
    const Mask f = tr.state_at(t);
    for (std::size_t k = 0; k < trees.size(); ++k)
      if (trees[k].vertex_links() == f && matches_stump(tr, trees[k], t)) ++hits[static_cast<std::size_t>(w)][k];
  });
  std::vector<McEstimate> out(trees.size());
  for (std::size_t k = 0; k < trees.size(); ++k) {
    out[k].samples = samples;
    for (const auto& h : hits) out[k].hits += h[k];
  }
  return out;
}

inline McEstimate estimate_tree_prob(const FragTree& tree, const RateSpec<double>& r, double t, std::uint64_t samples,
                                     std::uint64_t seed, int threads = 1) {
  return estimate_tree_probs({tree}, r, t, samples, seed, threads).front();
}

inline constexpr int kMaxCountedLinks = 20;

/// Histogram of F_t over 2^n states.
inline std::vector<std::uint64_t> simulate_state_counts(const RateSpec<double>& r, double t, std::uint64_t samples,
                                                        std::uint64_t seed, int threads = 1) {
  CHAINFRAG_REQUIRE(r.n() <= kMaxCountedLinks, "state histograms are limited to n <= 20");
  const int workers = std::max(1, threads);
  const std::size_t states = std::size_t{1} << r.n();
  std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(workers), std::vector<std::uint64_t>(states, 0));
  parallel_for_blocks(samples, workers, [&](std::uint64_t i, int w) {
    Rng rng(seed, i);
    ++counts[static_cast<std::size_t>(w)][static_cast<std::size_t>(simulate(r, t, rng).state_at(t))];
  });
  std::vector<std::uint64_t> out(states, 0);
  for (const auto& c : counts)
    for (std::size_t s = 0; s < states; ++s) out[s] += c[s];
  return out;
}

// ---------------------------------------------------------------------------
// Auxiliary process for a fixed fragmentation tree (discrete time).

/// Symbols of Omega_J. External fragments use quiet / fired; internal
/// fragments I_alpha use quiet (omega_empty), removed (omega_alpha), dep, ind.
enum class AuxSymbol : std::uint8_t { quiet, fired, removed, dep, ind };

inline const char* to_string(AuxSymbol s) {
  switch (s) {
    case AuxSymbol::quiet: return "empty";
    case AuxSymbol::fired: return "fired";
    case AuxSymbol::removed: return "alpha";
    case AuxSymbol::dep: return "dep";
    case AuxSymbol::ind: return "ind";
  }
  return "?";
}

/// One draw X_t: internal[v] for I_v (vertex index order) and external[k]
/// for the k-th fragment of L_G from the left.
struct AuxState {
  std::vector<AuxSymbol> internal;
  std::vector<AuxSymbol> external;
  friend bool operator==(const AuxState&, const AuxState&) = default;
  friend auto operator<=>(const AuxState&, const AuxState&) = default;
};

/// Where the two child lines of every vertex lead: an internal fragment
/// (vertex index >= 0) or an external fragment (-1 - k for the k-th one).
struct AuxSlots {
  std::vector<int> left;
  std::vector<int> right;
  std::vector<int> postorder;
};

inline AuxSlots aux_slots(const FragTree& tree) {
  AuxSlots s;
  if (tree.empty()) return s;
  const int k = tree.size();
  s.left.resize(static_cast<std::size_t>(k));
  s.right.resize(static_cast<std::size_t>(k));
  for (int v = 0; v < k; ++v) {
    const int lc = tree.left_child(v);
    const int rc = tree.right_child(v);
    const int lcut = tree.internal(v).left_cut;
    // The k-th external fragment starts right after the (k-1)-th vertex link.
    s.left[static_cast<std::size_t>(v)] = lc >= 0 ? lc : -1 - (lcut == 0 ? 0 : tree.vertex_of_link(lcut) + 1);
    s.right[static_cast<std::size_t>(v)] = rc >= 0 ? rc : -1 - (v + 1);
  }
  const auto& pre = tree.tree().preorder();
  s.postorder.assign(pre.rbegin(), pre.rend());
  return s;
}

inline bool aux_slot_fired(const AuxState& x, int slot) {
  if (slot >= 0) return x.internal[static_cast<std::size_t>(slot)] != AuxSymbol::quiet;
  return x.external[static_cast<std::size_t>(-1 - slot)] != AuxSymbol::quiet;
}

inline double aux_slot_rate(const FragTree& tree, const RateSpec<double>& r, int slot) {
  if (slot >= 0) return r.of(tree.internal(slot));
  return r.of(tree.external_fragments()[static_cast<std::size_t>(-1 - slot)]);
}

/// Samples X_t bottom-up: external fragments fire with probability rho_J;
/// I_alpha is ind when a child line fired, otherwise omega_empty, omega_alpha
/// or dep with probabilities (1-rho_I), rho_alpha, rho_I' rho_I'' over
/// lambda = (1-rho_I')(1-rho_I'').
inline AuxState sample_aux(const FragTree& tree, const RateSpec<double>& r, Rng& rng) {
  r.require(TimeMode::discrete);
  CHAINFRAG_REQUIRE(tree.links().n == r.n(), "tree and rates disagree on n");
  AuxState x;
  for (const auto& j : tree.external_fragments())
    x.external.push_back(!j.empty() && rng.uniform() < r.of(j) ? AuxSymbol::fired : AuxSymbol::quiet);
  if (tree.empty()) return x;
  const AuxSlots slots = aux_slots(tree);
  x.internal.assign(static_cast<std::size_t>(tree.size()), AuxSymbol::quiet);
  for (int v : slots.postorder) {
    const auto uv = static_cast<std::size_t>(v);
    if (aux_slot_fired(x, slots.left[uv]) || aux_slot_fired(x, slots.right[uv])) {
      x.internal[uv] = AuxSymbol::ind;
      continue;
    }
    const double rl = r.of(tree.left_fragment(v));
    const double rr = r.of(tree.right_fragment(v));
    const double lam = (1.0 - rl) * (1.0 - rr);
    const double u = rng.uniform() * lam;
    const double p_quiet = 1.0 - r.of(tree.internal(v));
    if (u < p_quiet)
      x.internal[uv] = AuxSymbol::quiet;
    else if (u < p_quiet + r[tree.link(v)])
      x.internal[uv] = AuxSymbol::removed;
    else
      x.internal[uv] = AuxSymbol::dep;
  }
  return x;
}

/// If X^{I_alpha} is not ind, every fragment strictly inside I_alpha is quiet.
inline bool aux_consistent(const FragTree& tree, const AuxState& x) {
  if (tree.empty()) return true;
  const AuxSlots slots = aux_slots(tree);
  // quiet_below[v]: every fragment strictly inside I_v is quiet.
  std::vector<char> quiet_below(static_cast<std::size_t>(tree.size()), 1);
  auto slot_all_quiet = [&](int slot) {
    if (slot < 0) return !aux_slot_fired(x, slot);
    return !aux_slot_fired(x, slot) && quiet_below[static_cast<std::size_t>(slot)] != 0;
  };
  for (int v : slots.postorder) {
    const auto uv = static_cast<std::size_t>(v);
    const bool below = slot_all_quiet(slots.left[uv]) && slot_all_quiet(slots.right[uv]);
    if (x.internal[uv] != AuxSymbol::ind && !below) return false;
    quiet_below[uv] = below ? 1 : 0;
  }
  return true;
}

/// Marginal law of one fragment's symbol.
struct AuxMarginal {
  Fragment fragment;
  bool internal = false;
  int link = 0;  // vertex link for internal fragments
  std::vector<std::pair<AuxSymbol, double>> law;
};

/// External J: quiet 1-rho_J, fired rho_J. Internal I_alpha: quiet 1-rho_I,
/// alpha rho_alpha, dep rho_I' rho_I'', ind 1-lambda^{I_alpha}_alpha.
inline std::vector<AuxMarginal> aux_marginals(const FragTree& tree, const RateSpec<double>& r) {
  r.require(TimeMode::discrete);
  std::vector<AuxMarginal> out;
  for (int v = 0; v < tree.size(); ++v) {
    const double rl = r.of(tree.left_fragment(v));
    const double rr = r.of(tree.right_fragment(v));
    out.push_back({tree.internal(v), true, tree.link(v),
                   {{AuxSymbol::quiet, 1.0 - r.of(tree.internal(v))},
                    {AuxSymbol::removed, r[tree.link(v)]},
                    {AuxSymbol::dep, rl * rr},
                    {AuxSymbol::ind, 1.0 - (1.0 - rl) * (1.0 - rr)}}});
  }
  for (const auto& j : tree.external_fragments())
    out.push_back({j, false, 0, {{AuxSymbol::quiet, 1.0 - r.of(j)}, {AuxSymbol::fired, r.of(j)}}});
  return out;
}

inline AuxSymbol aux_symbol_of(const AuxState& x, std::size_t marginal_index) {
  if (marginal_index < x.internal.size()) return x.internal[marginal_index];
  return x.external[marginal_index - x.internal.size()];
}

inline constexpr int kMaxAuxEnumerationVertices = 12;

/// Every atom the construction can produce (its case split), with its
/// probability. Empty external fragments are always quiet. Atoms of
/// probability zero are kept; filter on the probability for the support.
inline std::vector<std::pair<AuxState, double>> aux_atoms(const FragTree& tree, const RateSpec<double>& r) {
  r.require(TimeMode::discrete);
  CHAINFRAG_REQUIRE(tree.size() <= kMaxAuxEnumerationVertices, "atom enumeration is limited to 12 vertices");
  const auto ext = tree.external_fragments();
  const AuxSlots slots = aux_slots(tree);
  std::vector<std::pair<AuxState, double>> out;
  AuxState x;
  x.external.assign(ext.size(), AuxSymbol::quiet);
  x.internal.assign(static_cast<std::size_t>(tree.size()), AuxSymbol::quiet);
  auto internal_step = [&](auto&& self, std::size_t i, double p) -> void {
    if (i == slots.postorder.size()) {
      out.emplace_back(x, p);
      return;
    }
    const int v = slots.postorder[i];
    const auto uv = static_cast<std::size_t>(v);
    if (aux_slot_fired(x, slots.left[uv]) || aux_slot_fired(x, slots.right[uv])) {
      x.internal[uv] = AuxSymbol::ind;
      self(self, i + 1, p);
      return;
    }
    const double rl = r.of(tree.left_fragment(v));
    const double rr = r.of(tree.right_fragment(v));
    const double lam = (1.0 - rl) * (1.0 - rr);
    const std::pair<AuxSymbol, double> options[] = {{AuxSymbol::quiet, (1.0 - r.of(tree.internal(v))) / lam},
                                                    {AuxSymbol::removed, r[tree.link(v)] / lam},
                                                    {AuxSymbol::dep, rl * rr / lam}};
    for (const auto& [sym, q] : options) {
      x.internal[uv] = sym;
      self(self, i + 1, p * q);
    }
  };
  auto external_step = [&](auto&& self, std::size_t k, double p) -> void {
    if (k == ext.size()) {
      internal_step(internal_step, 0, p);
      return;
    }
    x.external[k] = AuxSymbol::quiet;
    self(self, k + 1, p * (1.0 - r.of(ext[k])));
    if (!ext[k].empty()) {
      x.external[k] = AuxSymbol::fired;
      self(self, k + 1, p * r.of(ext[k]));
      x.external[k] = AuxSymbol::quiet;
    }
  };
  external_step(external_step, 0, 1.0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Result of the pathwise construction: the compatible prefix and the step
/// at which an incompatible event first occurred, if any.
struct CoupledRun {
  Trajectory prefix;
  std::optional<long long> failure_time;
};

/// Builds F_t from i.i.d. auxiliary draws. Every current fragment is a slot
/// of S: A^J is empty iff X^J is quiet and A^{I_alpha} = {alpha} iff X^{I_alpha}
/// is omega_alpha; any other symbol on a current fragment is a failure.
inline CoupledRun coupled_construction(const FragTree& tree, const RateSpec<double>& r, long long t_max, Rng& rng) {
  r.require(TimeMode::discrete);
  require_steps(t_max);
  CoupledRun run{{TimeMode::discrete, static_cast<double>(t_max), std::vector<double>(static_cast<std::size_t>(r.n()), kNever)},
                 std::nullopt};
  const AuxSlots slots = aux_slots(tree);
  Mask removed = 0;  // vertex indices
  for (long long step = 1; step <= t_max; ++step) {
    const AuxState x = sample_aux(tree, r, rng);
    std::vector<int> current;
    if (tree.empty()) {
      current.push_back(-1);
    } else if (removed == 0) {
      current.push_back(tree.root());
    } else {
      for_each_bit(removed, [&](int v) {
        for (int slot : {slots.left[static_cast<std::size_t>(v)], slots.right[static_cast<std::size_t>(v)]})
          if (slot < 0 || !((removed >> slot) & 1U)) current.push_back(slot);
      });
    }
    Mask added = 0;
    bool failed = false;
    for (int slot : current) {
      if (slot < 0) {
        if (aux_slot_fired(x, slot)) failed = true;
        continue;
      }
      const AuxSymbol s = x.internal[static_cast<std::size_t>(slot)];
      if (s == AuxSymbol::removed)
        added |= bit(slot);
      else if (s != AuxSymbol::quiet)
        failed = true;
    }
    if (failed) {
      run.failure_time = step;
      run.prefix.horizon = static_cast<double>(step - 1);
      return run;
    }
    for_each_bit(added, [&](int v) { run.prefix.removal_time[static_cast<std::size_t>(tree.link(v) - 1)] = static_cast<double>(step); });
    removed |= added;
  }
  return run;
}

/// Matching-event frequency under the coupled construction: no failure up
/// to t and F_t = G.
inline McEstimate estimate_tree_prob_coupled(const FragTree& tree, const RateSpec<double>& r, long long t,
                                             std::uint64_t samples, std::uint64_t seed, int threads = 1) {
  CHAINFRAG_REQUIRE(samples >= 1, "samples must be at least 1");
  const int workers = std::max(1, threads);
  std::vector<std::uint64_t> hits(static_cast<std::size_t>(workers), 0);
  parallel_for_blocks(samples, workers, [&](std::uint64_t i, int w) {
    Rng rng(seed, i);
    const CoupledRun run = coupled_construction(tree, r, t, rng);
    if (!run.failure_time && run.prefix.state_at(static_cast<double>(t)) == tree.vertex_links()) ++hits[static_cast<std::size_t>(w)];
  });
  McEstimate e;
  e.samples = samples;
  for (auto h : hits) e.hits += h;
  return e;
}

/// Bin index for the prefix law: compatible states of F_t by link mask,
/// with every incompatible outcome pooled under the key kIncompatible.
inline constexpr Mask kIncompatible = ~Mask{0};

/// Histogram of F_t over compatible paths, direct simulation.
inline std::vector<std::pair<Mask, std::uint64_t>> compatible_state_counts(const FragTree& tree, const RateSpec<double>& r,
                                                                           long long t, std::uint64_t samples,
                                                                           std::uint64_t seed) {
  std::vector<std::pair<Mask, std::uint64_t>> counts;
  auto bump = [&](Mask key) {
    for (auto& [k, c] : counts)
      if (k == key) {
        ++c;
        return;
      }
    counts.emplace_back(key, 1);
  };
  for (std::uint64_t i = 0; i < samples; ++i) {
    Rng rng(seed, i);
    const Trajectory tr = simulate_discrete(r, t, rng);
    const double tt = static_cast<double>(t);
    bump(matches_stump(tr, tree, tt) ? tr.state_at(tt) : kIncompatible);
  }
  std::sort(counts.begin(), counts.end());
  return counts;
}

/// Histogram of F_t over compatible paths, coupled construction.
inline std::vector<std::pair<Mask, std::uint64_t>> coupled_state_counts(const FragTree& tree, const RateSpec<double>& r,
                                                                        long long t, std::uint64_t samples,
                                                                        std::uint64_t seed) {
  std::vector<std::pair<Mask, std::uint64_t>> counts;
  auto bump = [&](Mask key) {
    for (auto& [k, c] : counts)
      if (k == key) {
        ++c;
        return;
      }
    counts.emplace_back(key, 1);
  };
  for (std::uint64_t i = 0; i < samples; ++i) {
    Rng rng(seed, i);
    const CoupledRun run = coupled_construction(tree, r, t, rng);
    bump(run.failure_time ? kIncompatible : run.prefix.state_at(static_cast<double>(t)));
  }
  std::sort(counts.begin(), counts.end());
  return counts;
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test on histograms keyed by bin.
inline ChiSquare two_sample_chi_square(const std::vector<std::pair<Mask, std::uint64_t>>& a,
                                       const std::vector<std::pair<Mask, std::uint64_t>>& b) {
  std::vector<std::pair<Mask, std::pair<double, double>>> bins;
  auto add = [&](Mask key, double x, bool first) {
    for (auto& [k, v] : bins)
      if (k == key) {
        (first ? v.first : v.second) += x;
        return;
      }
    bins.push_back({key, first ? std::pair{x, 0.0} : std::pair{0.0, x}});
  };
  double na = 0.0, nb = 0.0;
  for (const auto& [k, c] : a) {
    add(k, static_cast<double>(c), true);
    na += static_cast<double>(c);
  }
  for (const auto& [k, c] : b) {
    add(k, static_cast<double>(c), false);
    nb += static_cast<double>(c);
  }
  CHAINFRAG_REQUIRE(na > 0 && nb > 0, "chi-square test needs two nonempty samples");
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  ChiSquare out;
  for (const auto& [k, v] : bins) {
    const double d = ka * v.first - kb * v.second;
    out.statistic += d * d / (v.first + v.second);
  }
  out.dof = static_cast<int>(bins.size()) - 1;
  if (out.dof > 0) {
    const boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  }
  return out;
}

}  // namespace chainfrag
