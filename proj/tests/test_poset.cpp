#include <gtest/gtest.h>

#include <set>

#include "chainfrag/pruning_poset.hpp"
#include "chainfrag/rational.hpp"
#include "chainfrag/simulation.hpp"
#include "chainfrag/tree_catalog.hpp"
#include "oracles.hpp"

using namespace chainfrag;

namespace {

// e3, e4 hang off the root 0; e1, e2 hang below e3.
RootedTree fig3_tree() { return RootedTree::from_edges(0, {{0, 3}, {0, 4}, {3, 1}, {3, 2}}); }

EdgeSet edges(const RootedTree& t, std::initializer_list<int> labels) {
  Mask m = 0;
  for (int l : labels) m |= bit(t.index_of(l));
  return {m};
}

std::vector<RootedTree> small_shapes(int max_edges) { return rooted_tree_shapes(max_edges + 1); }

}  // namespace

TEST(Order, Examples) {
  const auto t = fig3_tree();
  EXPECT_TRUE(leq_p(t, edges(t, {1, 2, 3, 4}), {}));
  EXPECT_FALSE(leq_p(t, edges(t, {1, 3}), edges(t, {3})));
  EXPECT_TRUE(leq_p(t, edges(t, {1, 2, 3}), edges(t, {1, 2})));
}

TEST(Order, MatchesDefinitionOracle) {
  for (const auto& t : small_shapes(5)) {
    const Mask all = t.all_edges().bits;
    for_each_subset(all, [&](Mask h) {
      for_each_subset(all, [&](Mask k) {
        EXPECT_EQ(leq_p(t, {h}, {k}), oracle::leq(t.parents(), t.root(), h, k));
      });
    });
  }
}

TEST(Order, IsPartialOrderWithMaximumEmptySet) {
  for (const auto& t : small_shapes(5)) {
    const Mask all = t.all_edges().bits;
    for_each_subset(all, [&](Mask a) {
      EXPECT_TRUE(leq_p(t, {a}, {a}));
      EXPECT_TRUE(leq_p(t, {a}, {}));
      for_each_subset(all, [&](Mask b) {
        if (a != b && leq_p(t, {a}, {b})) {
          EXPECT_FALSE(leq_p(t, {b}, {a}));
        }
        if (!leq_p(t, {a}, {b})) return;
        for_each_subset(all, [&](Mask c) {
          if (leq_p(t, {b}, {c})) {
            EXPECT_TRUE(leq_p(t, {a}, {c}));
          }
        });
      });
    });
  }
}

TEST(Interval, Trivial) {
  const auto t = fig3_tree();
  const EdgeSet h = edges(t, {1, 3});
  EXPECT_EQ(interval(t, h, h), std::vector<EdgeSet>{h});
}

TEST(Interval, Fig4HasTenElements) {
  const auto t = fig3_tree();
  const auto iv = interval(t, t.all_edges(), {});
  EXPECT_EQ(iv.size(), 10u);
  // Elements K with H <= K, by brute force over all 16 subsets.
  std::vector<EdgeSet> expect;
  for_each_subset(t.all_edges().bits, [&](Mask k) {
    if (oracle::leq(t.parents(), t.root(), t.all_edges().bits, k)) expect.push_back({k});
  });
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(iv, expect);
}

TEST(Interval, PathTree) {
  const auto t = RootedTree::from_edges(0, {{0, 1}, {1, 2}});
  EXPECT_EQ(interval(t, {bit(1) | bit(2)}, {}), (std::vector<EdgeSet>{{0}, {bit(2)}, {bit(1) | bit(2)}}));
}

TEST(Interval, RejectsIncomparableBounds) {
  const auto t = fig3_tree();
  EXPECT_THROW(interval(t, edges(t, {1, 3}), edges(t, {3})), invalid_input);
}

TEST(Interval, IsomorphicToShiftedInterval) {
  for (const auto& t : small_shapes(5)) {
    const Mask all = t.all_edges().bits;
    for_each_subset(all, [&](Mask h) {
      for_each_subset(h, [&](Mask k) {
        if (!leq_p(t, {h}, {k})) return;
        const auto a = interval(t, {h}, {k});
        const auto b = interval(t, {h & ~k}, {});
        ASSERT_EQ(a.size(), b.size());
        std::set<Mask> shifted;
        for (EdgeSet i : a) shifted.insert(i.bits & ~k);
        std::set<Mask> target;
        for (EdgeSet i : b) target.insert(i.bits);
        EXPECT_EQ(shifted, target);
        for (EdgeSet x : a)
          for (EdgeSet y : a) EXPECT_EQ(leq_p(t, x, y), leq_p(t, {x.bits & ~k}, {y.bits & ~k}));
      });
    });
  }
}

TEST(Product, Fig4Factors) {
  const auto t = fig3_tree();
  const auto f = product_factorization(t, t.all_edges());
  std::set<Mask> got;
  for (EdgeSet e : f) got.insert(e.bits);
  EXPECT_EQ(got, (std::set<Mask>{edges(t, {1, 2, 3}).bits, edges(t, {4}).bits}));
}

TEST(Product, AntichainAndEmpty) {
  const auto t = fig3_tree();
  EXPECT_TRUE(product_factorization(t, {}).empty());
  EXPECT_EQ(product_factorization(t, edges(t, {1, 2, 4})).size(), 3u);
}

TEST(Product, SizeIsMultiplicative) {
  for (const auto& t : small_shapes(6)) {
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      std::size_t prod = 1;
      Mask cover = 0;
      for (EdgeSet f : product_factorization(t, {h})) {
        EXPECT_EQ(cover & f.bits, 0u);
        cover |= f.bits;
        prod *= interval(t, f, {}).size();
      }
      EXPECT_EQ(cover, h);
      EXPECT_EQ(interval(t, {h}, {}).size(), prod);
    });
  }
}

TEST(Mobius, Examples) {
  const auto t = fig3_tree();
  const EdgeSet h = edges(t, {1, 3});
  EXPECT_EQ(mobius(t, h, h), (MobiusValue{1, true}));
  EXPECT_EQ(mobius(t, edges(t, {1, 2}), {}).value, 1);
  EXPECT_EQ(mobius(t, edges(t, {1, 2, 3}), {}).value, 0);
  EXPECT_EQ(mobius_recursive(t, edges(t, {1}), {}).value, -1);
  EXPECT_EQ(mobius_recursive(t, t.all_edges(), {}).value, 0);
  EXPECT_EQ(mobius_recursive(t, h, h).value, 1);
}

TEST(Mobius, IncomparablePairIsFlagged) {
  const auto t = fig3_tree();
  const MobiusValue m = mobius(t, edges(t, {1, 3}), edges(t, {3}));
  EXPECT_FALSE(m.comparable);
  EXPECT_EQ(m.value, 0);
  EXPECT_THROW(mobius_recursive(t, edges(t, {1, 3}), edges(t, {3})), invalid_input);
}

TEST(Mobius, ClosedFormEqualsZetaInverse) {
  for (const auto& t : small_shapes(5)) {
    const auto mu = oracle::mobius_by_inversion(t.parents(), t.root());
    for (const auto& [pair, value] : mu) {
      const MobiusValue m = mobius(t, {pair.first}, {pair.second});
      EXPECT_EQ(m.value, value);
      EXPECT_EQ(m.comparable, oracle::leq(t.parents(), t.root(), pair.first, pair.second));
    }
  }
}

TEST(Mobius, ClosedFormEqualsRecursionOnRandomTrees) {
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_rooted_tree(2 + static_cast<int>(rng() % 10), rng);
    for (int j = 0; j < 20; ++j) {
      const Mask h = rng() & t.all_edges().bits;
      const Mask k = h & rng();
      if (!leq_p(t, {h}, {k})) continue;
      EXPECT_EQ(mobius(t, {h}, {k}), mobius_recursive(t, {h}, {k}));
    }
  }
}

TEST(Mobius, DefiningIdentityAndSupport) {
  for (const auto& t : small_shapes(5)) {
    const Mask all = t.all_edges().bits;
    for_each_subset(all, [&](Mask h) {
      for_each_subset(h, [&](Mask k) {
        if (!leq_p(t, {h}, {k})) return;
        long long s = 0;
        for (EdgeSet i : interval(t, {h}, {k})) s += mobius(t, i, {k}).value;
        EXPECT_EQ(s, h == k ? 1 : 0);
        const MobiusValue m = mobius(t, {h}, {k});
        if (m.value != 0) {
          EXPECT_TRUE(is_stump_cut_set(t, {h & ~k}));
          EXPECT_EQ(m.value, popcount(h & ~k) % 2 == 0 ? 1 : -1);
        }
      });
    });
  }
}

TEST(Inversion, RecoversValues) {
  const auto t = fig3_tree();
  auto zero = [](EdgeSet) { return 0; };
  EXPECT_EQ(mobius_inversion_check<Rational>(t, zero, {}), std::make_pair(Rational(0), Rational(0)));
  const EdgeSet k = edges(t, {4});
  auto point = [&](EdgeSet h) { return h == k ? 1 : 0; };
  EXPECT_EQ(mobius_inversion_check<Rational>(t, point, k), std::make_pair(Rational(1), Rational(1)));
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<long> values(64);
    for (auto& v : values) v = static_cast<long>(rng() % 201) - 100;
    auto f = [&](EdgeSet h) { return values[static_cast<std::size_t>(h.bits)]; };
    for_each_subset(t.all_edges().bits, [&](Mask km) {
      const auto [orig, rec] = mobius_inversion_check<Rational>(t, f, {km});
      EXPECT_EQ(orig, rec);
    });
  }
}

TEST(Hasse, SingleEdge) {
  const auto t = RootedTree::from_edges(0, {{0, 1}});
  EXPECT_EQ(hasse_edges(t), (std::vector<std::pair<EdgeSet, EdgeSet>>{{{bit(1)}, {0}}}));
}

TEST(Hasse, Fig3CoversMatchBruteForce) {
  const auto t = fig3_tree();
  const Mask all = t.all_edges().bits;
  std::vector<std::pair<EdgeSet, EdgeSet>> expect;
  for_each_subset(all, [&](Mask x) {
    for_each_subset(all, [&](Mask y) {
      if (x == y || !oracle::leq(t.parents(), t.root(), x, y)) return;
      bool between = false;
      for_each_subset(all, [&](Mask z) {
        if (z != x && z != y && oracle::leq(t.parents(), t.root(), x, z) && oracle::leq(t.parents(), t.root(), z, y))
          between = true;
      });
      if (!between) expect.push_back({{x}, {y}});
    });
  });
  std::sort(expect.begin(), expect.end());
  const auto got = hasse_edges(t);
  EXPECT_EQ(got, expect);
  EXPECT_EQ(got.size(), 24u);
}

TEST(Hasse, SizeBound) {
  Rng rng(3);
  const auto t = random_rooted_tree(18, rng);
  EXPECT_THROW(hasse_edges(t), invalid_input);
}

TEST(Hasse, AtomsAreCoversOfH) {
  for (const auto& t : small_shapes(5)) {
    const auto covers = hasse_edges(t);
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      std::vector<EdgeSet> expect;
      for (const auto& [lo, hi] : covers)
        if (lo.bits == h) expect.push_back(hi);
      auto atoms = interval_atoms(t, {h});
      std::sort(atoms.begin(), atoms.end());
      std::sort(expect.begin(), expect.end());
      EXPECT_EQ(atoms, expect);
    });
  }
}
