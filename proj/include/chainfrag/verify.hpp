#pragma once

// Self-check suite behind `chainfrag verify`: every invariant group is run
// at a configurable size and reported with its largest deviation.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "chainfrag/io.hpp"
#include "chainfrag/pruning_poset.hpp"
#include "chainfrag/rational.hpp"
#include "chainfrag/simulation.hpp"
#include "chainfrag/tree_catalog.hpp"

namespace chainfrag {

struct VerifyConfig {
  int n = 4;
  std::vector<long long> discrete_times{0, 1, 2, 5, 10, 20};
  std::vector<double> continuous_times{0.1, 1.0, 5.0};
  int rate_vectors = 3;
  std::uint64_t samples = 20000;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = 1e-10;
  double sigma = 4.0;
  /// Relative change applied to the oracle side only (negative control).
  double perturb = 0.0;
  int threads = 1;
};

struct CheckGroup {
  std::string name;
  std::string status;  // "pass", "fail" or "skipped"
  double max_deviation = 0.0;
  double tolerance = 0.0;
  long long checks = 0;
  std::string detail;
};

struct VerifyReport {
  VerifyConfig config;
  std::vector<CheckGroup> groups;

  bool passed() const {
    return std::none_of(groups.begin(), groups.end(), [](const CheckGroup& g) { return g.status == "fail"; });
  }

  json to_json() const {
    json gs = json::array();
    for (const auto& g : groups)
      gs.push_back({{"name", g.name},
                    {"status", g.status},
                    {"max_deviation", g.max_deviation},
                    {"tolerance", g.tolerance},
                    {"checks", g.checks},
                    {"detail", g.detail}});
    return {{"n", config.n},
            {"samples", config.samples},
            {"seed", config.seed},
            {"perturb", config.perturb},
            {"passed", passed()},
            {"groups", gs}};
  }
};

namespace detail {

/// Collects deviations for one group; status is decided against the tolerance.
class GroupBuilder {
 public:
  GroupBuilder(std::string name, double tolerance) {
    g_.name = std::move(name);
    g_.tolerance = tolerance;
  }
  void deviation(double d) {
    ++g_.checks;
    if (!(d <= g_.max_deviation)) g_.max_deviation = std::isnan(d) ? INFINITY : d;
  }
  void note(const std::string& s) { g_.detail = s; }
  CheckGroup finish() {
    g_.status = g_.max_deviation <= g_.tolerance ? "pass" : "fail";
    return g_;
  }
  static CheckGroup skipped(std::string name, std::string why) {
    CheckGroup g;
    g.name = std::move(name);
    g.status = "skipped";
    g.detail = std::move(why);
    return g;
  }

 private:
  CheckGroup g_;
};

/// Moves delta = perturb * min(rho_1, rho_2) / 2 of removal probability from
/// link 2 to link 1, which keeps the discrete total unchanged.
template <class T>
RateSpec<T> perturb_discrete(const RateSpec<T>& r, double perturb) {
  if (perturb == 0.0 || r.n() < 2) return r;
  std::vector<T> v = r.values();
  const T m = std::min(v[0], v[1]);
  T delta = m * scalar_traits<T>::from_string(shortest_decimal(perturb / 2.0));
  v[0] += delta;
  v[1] -= delta;
  return RateSpec<T>(r.mode(), std::move(v));
}

inline RateSpec<double> perturb_continuous(const RateSpec<double>& r, double perturb) {
  std::vector<double> v = r.values();
  v[0] *= 1.0 + perturb;
  return RateSpec<double>(r.mode(), std::move(v));
}

/// 0 for equal rationals, otherwise a strictly positive double.
inline double exact_gap(const Rational& a, const Rational& b) {
  if (a == b) return 0.0;
  return std::max(std::fabs(Rational(a - b).get_d()), std::numeric_limits<double>::denorm_min());
}

}  // namespace detail

inline VerifyReport run_verify(const VerifyConfig& cfg) {
  CHAINFRAG_REQUIRE(cfg.n >= 2 && cfg.n <= 8, "verify supports 2 <= n <= 8");
  CHAINFRAG_REQUIRE(std::fabs(cfg.perturb) < 1.0, "perturbation must lie in (-1, 1)");
  using detail::GroupBuilder;
  VerifyReport rep{cfg, {}};
  Rng rng(cfg.seed, 0xC0FFEE);
  const int max_vertices = std::min(cfg.n, 6) + 1;
  const auto shapes = rooted_tree_shapes(max_vertices);

  {
    GroupBuilder g("mobius_closed_form_vs_recursive", 0.0);
    for (const auto& t : shapes)
      for_each_subset(t.all_edges().bits, [&](Mask k) {
        for (EdgeSet h : down_set(t, EdgeSet{k})) {
          const auto a = mobius(t, h, EdgeSet{k});
          const auto b = mobius_recursive(t, h, EdgeSet{k});
          g.deviation(static_cast<double>(std::llabs(a.value - b.value)));
        }
      });
    g.note(std::to_string(shapes.size()) + " tree shapes with at most " + std::to_string(max_vertices - 1) + " edges");
    rep.groups.push_back(g.finish());
  }

  {
    GroupBuilder g("mobius_inversion", 0.0);
    for (int rep_i = 0; rep_i < 20; ++rep_i) {
      const RootedTree& t = shapes[rng() % shapes.size()];
      std::vector<long> f(std::size_t{1} << t.size());
      for (auto& x : f) x = static_cast<long>(rng() % 201) - 100;
      for_each_subset(t.all_edges().bits, [&](Mask k) {
        const auto [orig, rec] = mobius_inversion_check<Rational>(t, [&](EdgeSet h) { return Rational(f[h.bits]); }, EdgeSet{k});
        g.deviation(orig == rec ? 0.0 : 1.0);
      });
    }
    rep.groups.push_back(g.finish());
  }

  {
    GroupBuilder g("fragmentation_tree_counts", 0.0);
    const LinkSet links(cfg.n);
    for_each_subset(links.mask(), [&](Mask gm) {
      const auto trees = enumerate_fragmentation_trees(gm, links);
      g.deviation(std::fabs(static_cast<double>(trees.size()) - static_cast<double>(catalan(popcount(gm)))));
      for (std::size_t i = 0; i < trees.size(); ++i)
        for (std::size_t j = i + 1; j < trees.size(); ++j) g.deviation(trees[i] == trees[j] ? 1.0 : 0.0);
    });
    rep.groups.push_back(g.finish());
  }

  // Discrete time against the transition-matrix oracle.
  std::vector<RateSpec<Rational>> disc_q;
  for (int i = 0; i < cfg.rate_vectors; ++i)
    disc_q.push_back(rates_from_text<Rational>(TimeMode::discrete, random_rate_text(cfg.n, i % 2 == 0 ? 500 : 1000, rng)));
  {
    GroupBuilder g("discrete_vs_transition_matrix", cfg.tolerance);
    GroupBuilder norm("discrete_normalization", cfg.tolerance);
    for (const auto& rq : disc_q) {
      const auto r = convert_rates<double>(rq);
      const auto oracle_rates = detail::perturb_discrete(r, cfg.perturb);
      for (long long t : cfg.discrete_times) {
        const auto d = dist_discrete_table(r, t);
        const auto m = transition_matrix_dist(oracle_rates, t);
        for (std::size_t s = 0; s < d.p.size(); ++s) g.deviation(std::fabs(d.p[s] - m.p[s]));
        norm.deviation(std::fabs(d.total() - 1.0));
      }
    }
    rep.groups.push_back(g.finish());
    rep.groups.push_back(norm.finish());
  }

  {
    GroupBuilder g("discrete_rational_exact", 0.0);
    const auto& rq = disc_q.front();
    const auto oracle_rates = detail::perturb_discrete(rq, cfg.perturb);
    for (long long t : cfg.discrete_times) {
      const auto d = dist_discrete_table(rq, t);
      const auto m = transition_matrix_dist(oracle_rates, t);
      for (std::size_t s = 0; s < d.p.size(); ++s) g.deviation(detail::exact_gap(d.p[s], m.p[s]));
      g.deviation(detail::exact_gap(d.total(), Rational(1)));
    }
    rep.groups.push_back(g.finish());
  }

  {
    GroupBuilder g("endpoint_shortcut", std::max(cfg.tolerance * 1e-2, 1e-12));
    const Mask ends = link_bit(1) | link_bit(cfg.n);
    for (const auto& rq : disc_q) {
      const auto r = convert_rates<double>(rq);
      const auto other = detail::perturb_discrete(r, cfg.perturb);
      for (long long t : cfg.discrete_times)
        for_each_subset(ends, [&](Mask gm) {
          if (gm != 0) g.deviation(std::fabs(dist_discrete_endpoints(gm, r, t) - dist_discrete(gm, other, t)));
        });
    }
    rep.groups.push_back(g.finish());
  }

  {
    GroupBuilder g("eigenvalues_triangular", 0.0);
    const auto& rq = disc_q.front();
    const auto m = transition_matrix(detail::perturb_discrete(rq, cfg.perturb));
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) {
        if (i == j)
          g.deviation(detail::exact_gap(m[i][i], lambda(rq, static_cast<Mask>(i))));
        else if (!is_subset(static_cast<Mask>(i), static_cast<Mask>(j)))
          g.deviation(detail::exact_gap(m[i][j], Rational(0)));
      }
    rep.groups.push_back(g.finish());
  }

  std::vector<RateSpec<double>> cont;
  for (int i = 0; i < cfg.rate_vectors; ++i) cont.push_back(random_continuous_rates(cfg.n, rng));
  {
    GroupBuilder g("continuous_tree_sum", cfg.tolerance);
    GroupBuilder gen("continuous_vs_generator", cfg.tolerance);
    GroupBuilder norm("continuous_normalization", cfg.tolerance);
    for (const auto& r : cont) {
      const auto oracle_rates = detail::perturb_continuous(r, cfg.perturb);
      for (double t : cfg.continuous_times) {
        const auto m = generator_dist(oracle_rates, t);
        double total = 0.0;
        for (Mask gm = 0; gm < (Mask{1} << cfg.n); ++gm) {
          const double closed = dist_continuous(gm, oracle_rates, t);
          const double trees = dist_continuous_by_trees(gm, r, t);
          g.deviation(std::fabs(trees - closed));
          gen.deviation(std::fabs(dist_continuous(gm, r, t) - m.p[gm]));
          total += trees;
        }
        norm.deviation(std::fabs(total - 1.0));
      }
    }
    rep.groups.push_back(g.finish());
    rep.groups.push_back(gen.finish());
    rep.groups.push_back(norm.finish());
  }

  if (cfg.samples == 0) {
    for (const char* name : {"monte_carlo_trees", "aux_marginals", "aux_consistency", "coupling"})
      rep.groups.push_back(GroupBuilder::skipped(name, "--samples 0"));
    return rep;
  }

  {
    GroupBuilder g("monte_carlo_trees", cfg.sigma);
    const LinkSet links(cfg.n);
    std::vector<FragTree> all;
    for_each_subset(links.mask(), [&](Mask gm) {
      for (auto& t : enumerate_fragmentation_trees(gm, links)) all.push_back(std::move(t));
    });
    const auto rd = convert_rates<double>(disc_q.front());
    const long long td = 5;
    const auto est_d = estimate_tree_probs(all, detail::perturb_discrete(rd, cfg.perturb), static_cast<double>(td),
                                           cfg.samples, cfg.seed, cfg.threads);
    const auto& rc = cont.front();
    const double tc = 1.0;
    const auto est_c = estimate_tree_probs(all, detail::perturb_continuous(rc, cfg.perturb), tc, cfg.samples,
                                           cfg.seed + 1, cfg.threads);
    long long used = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
      for (int mode = 0; mode < 2; ++mode) {
        const double exact = mode == 0 ? tree_prob_discrete(all[k], rd, td) : tree_prob_continuous(all[k], rc, tc);
        if (exact < 1e-3) continue;
        const McEstimate& e = mode == 0 ? est_d[k] : est_c[k];
        const double sd = std::sqrt(exact * (1.0 - exact) / static_cast<double>(e.samples));
        g.deviation(std::fabs(e.estimate() - exact) / sd);
        ++used;
      }
    }
    g.note("deviation in binomial standard deviations; " + std::to_string(used) + " trees with p >= 1e-3");
    rep.groups.push_back(g.finish());
  }

  {
    GroupBuilder g("aux_marginals", cfg.sigma);
    GroupBuilder c("aux_consistency", 0.0);
    const auto rd = convert_rates<double>(disc_q.front());
    for (int i = 0; i < 3; ++i) {
      const FragTree tree = random_frag_tree(cfg.n, 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n)), rng);
      const auto marg = aux_marginals(tree, rd);
      std::vector<std::vector<std::uint64_t>> counts(marg.size(), std::vector<std::uint64_t>(5, 0));
      Rng arng(cfg.seed + 2, static_cast<std::uint64_t>(i));
      const auto oracle = detail::perturb_discrete(rd, cfg.perturb);
      for (std::uint64_t s = 0; s < cfg.samples; ++s) {
        const AuxState x = sample_aux(tree, oracle, arng);
        c.deviation(aux_consistent(tree, x) ? 0.0 : 1.0);
        for (std::size_t m = 0; m < marg.size(); ++m) ++counts[m][static_cast<std::size_t>(aux_symbol_of(x, m))];
      }
      for (std::size_t m = 0; m < marg.size(); ++m)
        for (const auto& [sym, p] : marg[m].law) {
          const double ph = static_cast<double>(counts[m][static_cast<std::size_t>(sym)]) / static_cast<double>(cfg.samples);
          const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.samples));
          g.deviation(sd > 0.0 ? std::fabs(ph - p) / sd : (ph == p ? 0.0 : INFINITY));
        }
    }
    rep.groups.push_back(g.finish());
    rep.groups.push_back(c.finish());
  }

  {
    GroupBuilder g("coupling", cfg.sigma);
    const auto rd = convert_rates<double>(disc_q.front());
    for (int i = 0; i < 3; ++i) {
      const FragTree tree = random_frag_tree(cfg.n, 1 + static_cast<int>(rng() % 3), rng);
      const long long t = 1 + static_cast<long long>(rng() % 6);
      const auto direct = estimate_tree_prob(tree, detail::perturb_discrete(rd, cfg.perturb), static_cast<double>(t),
                                             cfg.samples, cfg.seed + 3 + static_cast<std::uint64_t>(i), cfg.threads);
      const auto coupled = estimate_tree_prob_coupled(tree, rd, t, cfg.samples, cfg.seed + 100 + static_cast<std::uint64_t>(i), cfg.threads);
      const double se = std::hypot(direct.std_error(), coupled.std_error());
      const double diff = std::fabs(direct.estimate() - coupled.estimate());
      g.deviation(se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY));
    }
    g.note("difference of the two estimators in standard errors");
    rep.groups.push_back(g.finish());
  }
  return rep;
}

}  // namespace chainfrag
