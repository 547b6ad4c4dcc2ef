#include <gtest/gtest.h>

#include <set>

#include "chainfrag/frag_tree.hpp"
#include "chainfrag/simulation.hpp"
#include "chainfrag/tree_catalog.hpp"
#include "oracles.hpp"

using namespace chainfrag;

namespace {

// Root 1; vertex 2 has three children 4, 5, 6; 4 has child 8; 3 has child 7.
RootedTree fig1_tree() {
  return RootedTree::from_edges(1, {{1, 2}, {1, 3}, {2, 4}, {2, 5}, {2, 6}, {4, 8}, {3, 7}});
}

// Edge e_i is the parent edge of vertex i: e3, e4 hang off the root, e1, e2 off e3.
RootedTree fig3_tree() { return RootedTree::from_edges(0, {{0, 3}, {0, 4}, {3, 1}, {3, 2}}); }

Mask by_labels(const RootedTree& t, std::initializer_list<int> labels) {
  Mask m = 0;
  for (int l : labels) m |= bit(t.index_of(l));
  return m;
}

EdgeSet edges(const RootedTree& t, std::initializer_list<int> labels) { return {by_labels(t, labels)}; }
VertexSet vertices(const RootedTree& t, std::initializer_list<int> labels) { return {by_labels(t, labels)}; }

Mask links_of(std::initializer_list<int> ls) {
  Mask m = 0;
  for (int a : ls) m |= link_bit(a);
  return m;
}

// Root 3, left child 1, right child 4 on L = {1..6}.
FragTree fig5_tree() { return FragTree(LinkSet(6), links_of({1, 3, 4}), 1, {-1, 0, -1}, {-1, 2, -1}); }

// Root 3 with right child 4 on L = {1..5}.
FragTree fig7_tree() { return FragTree(LinkSet(5), links_of({3, 4}), 0, {-1, -1}, {1, -1}); }

// Tree as a set of (parent label, child label) pairs plus the root label.
std::pair<int, std::set<std::pair<int, int>>> shape(const RootedTree& t) {
  std::set<std::pair<int, int>> e;
  for (int v = 0; v < t.size(); ++v)
    if (v != t.root()) e.insert({t.label(t.parent(v)), t.label(v)});
  return {t.label(t.root()), e};
}

std::vector<RootedTree> random_trees(int count, int max_vertices, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RootedTree> out;
  for (int i = 0; i < count; ++i) out.push_back(random_rooted_tree(1 + static_cast<int>(rng() % max_vertices), rng));
  return out;
}

}  // namespace

TEST(Fragments, EmptyMiddleFragment) {
  const auto f = fragments_of(links_of({2, 3}), LinkSet(5));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].mask(), links_of({1}));
  EXPECT_TRUE(f[1].empty());
  EXPECT_EQ(f[2].mask(), links_of({4, 5}));
}

TEST(Fragments, EmptySetGivesWholeChain) {
  const auto f = fragments_of(0, LinkSet(5));
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0], Fragment::whole(LinkSet(5)));
}

TEST(Fragments, BothEnds) {
  const auto f = fragments_of(links_of({1, 5}), LinkSet(5));
  ASSERT_EQ(f.size(), 3u);
  EXPECT_TRUE(f[0].empty());
  EXPECT_EQ(f[1].mask(), links_of({2, 3, 4}));
  EXPECT_TRUE(f[2].empty());
  EXPECT_NE(f[0], f[2]);
}

TEST(Fragments, FullSetGivesOnlyEmptyPieces) {
  const auto f = fragments_of(LinkSet(4).mask(), LinkSet(4));
  ASSERT_EQ(f.size(), 5u);
  for (const auto& j : f) EXPECT_TRUE(j.empty());
}

TEST(Fragments, PartitionOfComplement) {
  const LinkSet l(7);
  for_each_subset(l.mask(), [&](Mask g) {
    const auto f = fragments_of(g, l);
    ASSERT_EQ(f.size(), static_cast<std::size_t>(popcount(g) + 1));
    Mask seen = 0;
    for (const auto& j : f) {
      EXPECT_EQ(seen & j.mask(), 0u);
      seen |= j.mask();
    }
    EXPECT_EQ(seen, l.mask() & ~g);
  });
}

TEST(Subsets, ParseAndFormat) {
  const LinkSet l(6);
  EXPECT_EQ(parse_subset("", l), 0u);
  EXPECT_EQ(parse_subset("1,3,4", l), links_of({1, 3, 4}));
  EXPECT_EQ(parse_subset("1;3;4", l), links_of({1, 3, 4}));
  EXPECT_EQ(format_subset(links_of({1, 3, 4})), "1;3;4");
  EXPECT_EQ(format_subset(0), "");
}

TEST(Subsets, ParseRejectsBadInput) {
  const LinkSet l(6);
  EXPECT_THROW(parse_subset("3,1", l), invalid_input);
  EXPECT_THROW(parse_subset("1,1", l), invalid_input);
  EXPECT_THROW(parse_subset("0", l), invalid_input);
  EXPECT_THROW(parse_subset("7", l), invalid_input);
  EXPECT_THROW(parse_subset("1,", l), invalid_input);
  EXPECT_THROW(parse_subset("1,,2", l), invalid_input);
  EXPECT_THROW(parse_subset("x", l), invalid_input);
  EXPECT_THROW(parse_subset("2a", l), invalid_input);
  EXPECT_THROW(LinkSet(0), invalid_input);
  EXPECT_THROW(LinkSet(65), invalid_input);
}

TEST(StumpSet, Fig1CutAtTwoAndFour) {
  const auto t = fig1_tree();
  EXPECT_EQ(stump_set(t, edges(t, {2, 4})), vertices(t, {1, 3, 7}));
}

TEST(StumpSet, NoCutKeepsEverything) {
  const auto t = fig1_tree();
  EXPECT_EQ(stump_set(t, {}), t.all_vertices());
}

TEST(StumpSet, Fig1CutAtThree) {
  const auto t = fig1_tree();
  EXPECT_EQ(stump_set(t, edges(t, {3})), vertices(t, {1, 2, 4, 5, 6, 8}));
}

TEST(StumpSet, MatchesReachabilityOnRandomTrees) {
  for (const auto& t : random_trees(60, 9, 11)) {
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      EXPECT_EQ(stump_set(t, {h}).bits, oracle::reachable(t.parents(), t.root(), h));
    });
  }
}

TEST(Subtree, Fig1ComponentOfFour) {
  const auto t = fig1_tree();
  const auto s = subtree(t, t.index_of(4), edges(t, {2, 4}));
  EXPECT_EQ(shape(s).first, 4);
  EXPECT_EQ(shape(s).second, (std::set<std::pair<int, int>>{{4, 8}}));
}

TEST(Subtree, LeafIsSingleVertex) {
  const auto t = fig1_tree();
  const auto s = subtree(t, t.index_of(8), edges(t, {3}));
  EXPECT_EQ(s.size(), 1);
  EXPECT_EQ(s.label(s.root()), 8);
}

TEST(Subtree, Fig1TwoWithoutFour) {
  const auto t = fig1_tree();
  const auto s = subtree(t, t.index_of(2), edges(t, {4}));
  EXPECT_EQ(shape(s).first, 2);
  EXPECT_EQ(shape(s).second, (std::set<std::pair<int, int>>{{2, 5}, {2, 6}}));
}

TEST(Subtree, CompositionLaw) {
  // subtree(subtree(T, root, H), a, K) = subtree(T, a, H u K) for K in E_root(H).
  for (const auto& t : random_trees(40, 7, 12)) {
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      const RootedTree stump = subtree(t, t.root(), {h});
      const Mask stump_edges_mask = stump_edges(t, {h}).bits;
      for_each_subset(stump_edges_mask, [&](Mask k) {
        Mask k_in_stump = 0;
        for_each_bit(k, [&](int v) { k_in_stump |= bit(stump.index_of(t.label(v))); });
        for_each_bit(stump_set(t, {h}).bits, [&](int a) {
          const auto lhs = subtree(stump, stump.index_of(t.label(a)), {k_in_stump});
          const auto rhs = subtree(t, a, {h | k});
          EXPECT_EQ(shape(lhs), shape(rhs));
        });
      });
    });
  }
}

TEST(Subtree, ExtraStumpCutsDoNotChangeLowerComponents) {
  // For C a stump cut set of T_root(H) and a outside V_root(H u C):
  // subtree(T, a, H) = subtree(T, a, H u C).
  for (const auto& t : random_trees(40, 7, 13)) {
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      const EdgeSet se = stump_edges(t, {h});
      for_each_subset(se.bits, [&](Mask c) {
        if (!is_stump_cut_set(t, {c})) return;
        const Mask outside = t.all_vertices().bits & ~stump_set(t, {h | c}).bits;
        for_each_bit(outside, [&](int a) {
          EXPECT_EQ(shape(subtree(t, a, {h})), shape(subtree(t, a, {h | c})));
        });
      });
    });
  }
}

TEST(MinimalEdges, Examples) {
  const auto t = fig3_tree();
  EXPECT_EQ(minimal_edges(t, {}), EdgeSet{});
  EXPECT_EQ(minimal_edges(t, edges(t, {1, 2, 3, 4})), edges(t, {3, 4}));
  EXPECT_EQ(minimal_edges(t, edges(t, {1, 2, 4})), edges(t, {1, 2, 4}));
}

TEST(StumpCutSet, Examples) {
  const auto t = fig3_tree();
  EXPECT_TRUE(is_stump_cut_set(t, {}));
  EXPECT_TRUE(is_stump_cut_set(t, edges(t, {1, 2})));
  EXPECT_FALSE(is_stump_cut_set(t, edges(t, {1, 3})));
}

TEST(StumpCutSet, AntichainEquivalence) {
  for (const auto& t : random_trees(60, 9, 14)) {
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      bool antichain = true;
      for_each_bit(h, [&](int a) {
        for_each_bit(h, [&](int b) {
          if (a != b && oracle::is_ancestor(t.parents(), a, b)) antichain = false;
        });
      });
      EXPECT_EQ(is_stump_cut_set(t, {h}), antichain);
    });
  }
}

TEST(StumpCutSet, Fig1Boundaries) {
  const auto t = fig1_tree();
  EXPECT_EQ(stump_cut_set(t, vertices(t, {1, 3, 7})), edges(t, {2}));
  EXPECT_EQ(stump_cut_set(t, t.all_vertices()), EdgeSet{});
  EXPECT_EQ(stump_cut_set(t, vertices(t, {1})), edges(t, {2, 3}));
}

TEST(StumpCutSet, RejectsNonIdeals) {
  const auto t = fig1_tree();
  EXPECT_THROW(stump_cut_set(t, vertices(t, {1, 4})), invalid_input);
  EXPECT_THROW(stump_cut_set(t, vertices(t, {2})), invalid_input);
  EXPECT_THROW(stump_cut_set(t, {}), invalid_input);
}

TEST(StumpCutSet, RoundTripsExhaustive) {
  for (const auto& t : rooted_tree_shapes(9)) {
    int ideals = 0;
    for_each_subset(t.all_vertices().bits, [&](Mask r) {
      if (!is_stump_set(t, {r})) return;
      ++ideals;
      // Stump sets are order ideals: closed under taking ancestors.
      for_each_bit(r, [&](int v) { EXPECT_TRUE(is_subset(t.ancestors(v), r)); });
      EXPECT_EQ(stump_set(t, stump_cut_set(t, {r})).bits, r);
    });
    const auto antichains = enumerate_stump_cut_sets(t);
    EXPECT_EQ(static_cast<int>(antichains.size()), ideals);
    for (EdgeSet c : antichains) EXPECT_EQ(stump_cut_set(t, stump_set(t, c)), c);
  }
}

TEST(StumpCutSet, EnumerationSmallCases) {
  const auto one = RootedTree::from_edges(0, {{0, 1}});
  EXPECT_EQ(enumerate_stump_cut_sets(one), (std::vector<EdgeSet>{{0}, {bit(1)}}));
  const auto path = RootedTree::from_edges(0, {{0, 1}, {1, 2}});
  EXPECT_EQ(enumerate_stump_cut_sets(path), (std::vector<EdgeSet>{{0}, {bit(1)}, {bit(2)}}));
  const auto star = RootedTree::from_edges(0, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EXPECT_EQ(enumerate_stump_cut_sets(star).size(), 16u);
}

TEST(StumpCutSet, EnumerationMatchesFilter) {
  for (const auto& t : random_trees(40, 9, 15)) {
    std::vector<EdgeSet> expect;
    for_each_subset(t.all_edges().bits, [&](Mask h) {
      if (is_stump_cut_set(t, {h})) expect.push_back({h});
    });
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(enumerate_stump_cut_sets(t), expect);
  }
}

TEST(RootedTree, RejectsMalformedInput) {
  EXPECT_THROW(RootedTree::from_edges(0, {{0, 1}, {2, 1}}), invalid_input);
  EXPECT_THROW(RootedTree::from_edges(0, {{1, 0}}), invalid_input);
  EXPECT_THROW(RootedTree({0, 1}, {-1, -1}), invalid_input);
  EXPECT_THROW(RootedTree({0, 1, 2}, {-1, 2, 1}), invalid_input);
  EXPECT_THROW(RootedTree({0, 0}, {-1, 0}), invalid_input);
}

TEST(RootedTree, EdgeNames) {
  const auto t = fig3_tree();
  EXPECT_EQ(parse_edges(t, "e1,e2"), edges(t, {1, 2}));
  EXPECT_EQ(parse_edges(t, "1;2"), edges(t, {1, 2}));
  EXPECT_EQ(parse_edges(t, ""), EdgeSet{});
  EXPECT_EQ(format_edges(t, edges(t, {4, 1})), "1,4");
  EXPECT_THROW(parse_edges(t, "e0"), invalid_input);
  EXPECT_THROW(parse_edges(t, "e9"), invalid_input);
  EXPECT_THROW(parse_edges(t, "e1,"), invalid_input);
  EXPECT_THROW(parse_edges(t, "ex"), invalid_input);
}

TEST(Catalog, ShapeCountsMatchKnownSequence) {
  // Unordered rooted trees with n vertices: 1, 1, 2, 4, 9, 20, 48.
  const std::vector<int> expect{1, 1, 2, 4, 9, 20, 48};
  const auto shapes = rooted_tree_shapes(7);
  std::vector<int> counts(8, 0);
  for (const auto& t : shapes) ++counts[static_cast<std::size_t>(t.size())];
  for (int n = 1; n <= 7; ++n) EXPECT_EQ(counts[static_cast<std::size_t>(n)], expect[static_cast<std::size_t>(n - 1)]);
}

TEST(FragTree, Fig5Fragments) {
  const auto t = fig5_tree();
  const int v3 = t.vertex_of_link(3), v1 = t.vertex_of_link(1), v4 = t.vertex_of_link(4);
  EXPECT_EQ(t.root(), v3);
  EXPECT_EQ(t.internal(v3).mask(), LinkSet(6).mask());
  EXPECT_EQ(t.internal(v1).mask(), links_of({1, 2}));
  EXPECT_EQ(t.internal(v4).mask(), links_of({4, 5, 6}));
  EXPECT_EQ(t.to_string(), "3(1,4)");
}

TEST(FragTree, EnumerationContainsFig5) {
  const auto trees = enumerate_fragmentation_trees(links_of({1, 3, 4}), LinkSet(6));
  EXPECT_EQ(trees.size(), 5u);
  EXPECT_EQ(std::count(trees.begin(), trees.end(), fig5_tree()), 1);
}

TEST(FragTree, EmptyTreeIsUnique) {
  const auto trees = enumerate_fragmentation_trees(0, LinkSet(4));
  ASSERT_EQ(trees.size(), 1u);
  EXPECT_TRUE(trees[0].empty());
  EXPECT_EQ(trees[0].to_string(), "()");
  EXPECT_EQ(all_fragments(trees[0]).size(), 1u);
}

TEST(FragTree, CountsAreCatalan) {
  const LinkSet l(12);
  for (int k = 0; k <= 10; ++k) {
    const Mask g = low_bits(k) << 1;
    const auto trees = enumerate_fragmentation_trees(g, l);
    EXPECT_EQ(trees.size(), oracle::catalan(k));
    EXPECT_EQ(catalan(k), oracle::catalan(k));
    if (k <= 7) {
      std::set<std::string> names;
      for (const auto& t : trees) names.insert(t.to_string());
      EXPECT_EQ(names.size(), trees.size());
    }
  }
}

TEST(FragTree, InternalFragmentsMatchRemovalOrder) {
  // Removing links in order of depth yields, for every vertex, the fragment
  // it was removed from.
  const LinkSet l(7);
  for_each_subset(l.mask(), [&](Mask g) {
    if (popcount(g) > 5) return;
    for (const auto& t : enumerate_fragmentation_trees(g, l)) {
      std::vector<double> time(7, 100.0);
      for (int v : t.empty() ? std::vector<int>{} : t.tree().preorder())
        time[static_cast<std::size_t>(t.link(v) - 1)] = static_cast<double>(popcount(t.tree().ancestors(v)));
      for (int v = 0; v < t.size(); ++v) {
        const auto [lo, hi] = oracle::removal_fragment(time, t.link(v));
        EXPECT_EQ(t.internal(v).left_cut, lo);
        EXPECT_EQ(t.internal(v).right_cut, hi);
        // I = I' u {alpha} u I''.
        EXPECT_EQ(t.internal(v).mask(),
                  t.left_fragment(v).mask() | link_bit(t.link(v)) | t.right_fragment(v).mask());
      }
    }
  });
}

TEST(FragTree, RejectsInvalidShapes) {
  const LinkSet l(5);
  EXPECT_THROW(FragTree(l, links_of({3, 4}), 0, {1, -1}, {-1, -1}), invalid_input);
  EXPECT_THROW(FragTree(l, links_of({3, 4}), 0, {-1, -1}, {-1, -1}), invalid_input);
  EXPECT_THROW(FragTree(l, links_of({6}), 0, {-1}, {-1}), invalid_input);
}

TEST(FragTree, BudgetIsEnforced) {
  EXPECT_THROW(enumerate_fragmentation_trees(low_bits(12), LinkSet(12)), budget_exceeded);
  EXPECT_THROW(enumerate_fragmentation_trees(low_bits(4), LinkSet(6), 10.0), budget_exceeded);
}

TEST(FragmentFamily, Fig7LeafVertex) {
  const auto t = fig7_tree();
  const auto f = fragment_family(t, t.vertex_of_link(4), {});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0], t.left_fragment(t.vertex_of_link(4)));
  EXPECT_TRUE(f[0].empty());
  EXPECT_EQ(f[1].mask(), links_of({5}));
}

TEST(FragmentFamily, Fig5RootWithoutRightSubtree) {
  const auto t = fig5_tree();
  const int v4 = t.vertex_of_link(4);
  const auto f = fragment_family(t, t.root(), {bit(v4)});
  ASSERT_EQ(f.size(), 3u);
  EXPECT_TRUE(f[0].empty());
  EXPECT_EQ(f[1].mask(), links_of({2}));
  EXPECT_EQ(f[2].mask(), links_of({4, 5, 6}));
}

TEST(FragmentFamily, ExternalFragmentsPartitionComplement) {
  const auto t = fig5_tree();
  const auto ext = t.external_fragments();
  EXPECT_EQ(ext.size(), 4u);
  Mask seen = 0;
  for (const auto& j : ext) seen |= j.mask();
  EXPECT_EQ(seen, LinkSet(6).mask() & ~t.vertex_links());
  EXPECT_EQ(all_fragments(t).size(), 7u);
}
