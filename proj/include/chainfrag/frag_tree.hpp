#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "chainfrag/links.hpp"
#include "chainfrag/rooted_tree.hpp"

namespace chainfrag {

/// A fragmentation tree T^L = (gamma, G, E, L).
///
/// Vertex i of the underlying RootedTree is the i-th smallest link of G and
/// carries that link as its label. Every vertex has two lines: a left one
/// carrying I'_alpha and a right one carrying I''_alpha. A line is an edge
/// when the corresponding child exists, otherwise a branch whose fragment is
/// external. The phantom root line carries I_gamma = L.
class FragTree {
 public:
  /// The empty planted tree for G = {}.
  explicit FragTree(LinkSet links) : links_(links) {}

  /// left[i] / right[i] are child vertex indices (or -1); vertex i is the
  /// i-th smallest link of g. Throws unless the shape is a valid
  /// fragmentation tree (left subtree links < alpha < right subtree links).
  FragTree(LinkSet links, Mask g, int root, std::vector<int> left, std::vector<int> right)
      : links_(links), g_(g), link_(bits_of(g)), left_(std::move(left)), right_(std::move(right)) {
    CHAINFRAG_REQUIRE(links_.contains_all(g), "vertex set is not a subset of L");
    for (int& l : link_) ++l;
    const std::size_t k = link_.size();
    CHAINFRAG_REQUIRE(k >= 1, "use FragTree(LinkSet) for the empty tree");
    CHAINFRAG_REQUIRE(left_.size() == k && right_.size() == k, "child arrays have wrong length");
    CHAINFRAG_REQUIRE(root >= 0 && root < static_cast<int>(k), "root index out of range");
    std::vector<int> parent(k, -1);
    for (std::size_t v = 0; v < k; ++v)
      for (int c : {left_[v], right_[v]}) {
        if (c < 0) continue;
        CHAINFRAG_REQUIRE(c < static_cast<int>(k), "child index out of range");
        CHAINFRAG_REQUIRE(parent[static_cast<std::size_t>(c)] < 0, "vertex has two parents");
        parent[static_cast<std::size_t>(c)] = static_cast<int>(v);
      }
    CHAINFRAG_REQUIRE(parent[static_cast<std::size_t>(root)] < 0, "root has a parent");
    tree_ = RootedTree(link_, parent);
    CHAINFRAG_REQUIRE(tree_.root() == root, "vertex other than the root has no parent");
    // RootedTree orders children by index, which is left-to-right here.
    internal_.assign(k, Fragment{});
    internal_[static_cast<std::size_t>(root)] = Fragment::whole(links_);
    for (int v : tree_.preorder()) {
      const Fragment iv = internal_[static_cast<std::size_t>(v)];
      const int a = link_[static_cast<std::size_t>(v)];
      CHAINFRAG_REQUIRE(iv.contains(a), "vertex " + std::to_string(a) + " lies outside its fragment");
      if (left_[static_cast<std::size_t>(v)] >= 0) {
        CHAINFRAG_REQUIRE(left_[static_cast<std::size_t>(v)] < v, "left child must be a smaller link");
        internal_[static_cast<std::size_t>(left_[static_cast<std::size_t>(v)])] = {iv.left_cut, a};
      }
      if (right_[static_cast<std::size_t>(v)] >= 0) {
        CHAINFRAG_REQUIRE(right_[static_cast<std::size_t>(v)] > v, "right child must be a larger link");
        internal_[static_cast<std::size_t>(right_[static_cast<std::size_t>(v)])] = {a, iv.right_cut};
      }
    }
  }

  const LinkSet& links() const noexcept { return links_; }
  Mask vertex_links() const noexcept { return g_; }
  bool empty() const noexcept { return link_.empty(); }
  int size() const noexcept { return static_cast<int>(link_.size()); }

  /// Underlying rooted tree (only meaningful when !empty()).
  const RootedTree& tree() const noexcept { return tree_; }
  int root() const noexcept { return empty() ? -1 : tree_.root(); }
  int link(int v) const { return link_.at(static_cast<std::size_t>(v)); }
  int vertex_of_link(int alpha) const {
    for (std::size_t i = 0; i < link_.size(); ++i)
      if (link_[i] == alpha) return static_cast<int>(i);
    throw invalid_input("link " + std::to_string(alpha) + " is not a vertex of the tree");
  }
  int left_child(int v) const { return left_.at(static_cast<std::size_t>(v)); }
  int right_child(int v) const { return right_.at(static_cast<std::size_t>(v)); }

  /// I_alpha: the fragment from which vertex v's link is removed.
  const Fragment& internal(int v) const { return internal_.at(static_cast<std::size_t>(v)); }
  /// I'_alpha and I''_alpha.
  Fragment left_fragment(int v) const { return {internal(v).left_cut, link(v)}; }
  Fragment right_fragment(int v) const { return {link(v), internal(v).right_cut}; }

  /// L_G: fragments on branches, left to right (|G|+1 of them).
  std::vector<Fragment> external_fragments() const { return fragments_of(g_, links_); }

  /// Link mask of a vertex set of the underlying tree.
  Mask to_links(VertexSet s) const {
    Mask m = 0;
    for_each_bit(s.bits, [&](int v) { m |= link_bit(link(v)); });
    return m;
  }

  /// Link mask of G_alpha(H).
  Mask subtree_links(int v, EdgeSet h) const { return to_links(subtree_vertices(tree_, v, h)); }

  /// Canonical text form, e.g. "3(1,4)" for root 3 with children 1 and 4;
  /// a missing child is written as "-": "3(-,4)". The empty tree is "()".
  std::string to_string() const {
    if (empty()) return "()";
    auto rec = [&](auto&& self, int v) -> std::string {
      std::string s = std::to_string(link(v));
      if (left_child(v) < 0 && right_child(v) < 0) return s;
      s += "(";
      s += left_child(v) < 0 ? "-" : self(self, left_child(v));
      s += ",";
      s += right_child(v) < 0 ? "-" : self(self, right_child(v));
      return s + ")";
    };
    return rec(rec, root());
  }

  friend bool operator==(const FragTree& a, const FragTree& b) {
    return a.links_ == b.links_ && a.g_ == b.g_ && a.root() == b.root() && a.left_ == b.left_ &&
           a.right_ == b.right_;
  }

 private:
  LinkSet links_;
  Mask g_ = 0;
  std::vector<int> link_;
  std::vector<int> left_;
  std::vector<int> right_;
  RootedTree tree_;
  std::vector<Fragment> internal_;
};

/// Catalan number C_k, or 0 when it does not fit into 64 bits.
inline std::uint64_t catalan(int k) {
  if (k < 0) return 0;
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) {
    // C_{i+1} = C_i * 2(2i+1) / (i+2); dividing out gcd(C_i, i+2) first keeps it exact.
    const std::uint64_t d = static_cast<std::uint64_t>(i + 2);
    const std::uint64_t g = std::gcd(c, d);
    const std::uint64_t m = static_cast<std::uint64_t>(2 * (2 * i + 1)) / (d / g);
    if (__builtin_mul_overflow(c / g, m, &c)) return 0;
  }
  return c;
}

inline constexpr double kDefaultTermBudget = 1e7;

/// Number of (tree, H) terms an exact evaluation over tau(G, L) touches:
/// C_{|G|} * 2^{|G|-1}. Returns +inf on overflow.
inline double enumeration_terms(int k) {
  const std::uint64_t c = catalan(k);
  if (c == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(c) * (k >= 1 ? static_cast<double>(bit(k - 1)) : 1.0);
}

inline void check_budget(int k, double budget) {
  if (enumeration_terms(k) > budget)
    throw budget_exceeded("|G| = " + std::to_string(k) + " needs " + std::to_string(enumeration_terms(k)) +
                          " terms, more than the budget of " + std::to_string(budget));
}

/// All C_{|G|} fragmentation trees with vertex set G, in canonical order:
/// root ascending, then left subtree, then right subtree.
inline std::vector<FragTree> enumerate_fragmentation_trees(Mask g, const LinkSet& links,
                                                           double budget = kDefaultTermBudget) {
  CHAINFRAG_REQUIRE(links.contains_all(g), "subset contains links outside L");
  const int k = popcount(g);
  check_budget(k, budget);
  if (k == 0) return {FragTree(links)};

  struct Shape {
    int root;
    std::vector<int> left, right;  // indexed by absolute vertex index
  };
  // Shapes over the index range [lo, hi), children arrays sized k.
  auto build = [&](auto&& self, int lo, int hi) -> std::vector<Shape> {
    if (lo >= hi) return {Shape{-1, {}, {}}};
    std::vector<Shape> out;
    for (int r = lo; r < hi; ++r) {
      const auto ls = self(self, lo, r);
      const auto rs = self(self, r + 1, hi);
      for (const auto& a : ls)
        for (const auto& b : rs) {
          Shape s{r, std::vector<int>(static_cast<std::size_t>(k), -1), std::vector<int>(static_cast<std::size_t>(k), -1)};
          for (int i = lo; i < hi; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (i < r && !a.left.empty()) {
              s.left[ui] = a.left[ui];
              s.right[ui] = a.right[ui];
            }
            if (i > r && !b.left.empty()) {
              s.left[ui] = b.left[ui];
              s.right[ui] = b.right[ui];
            }
          }
          s.left[static_cast<std::size_t>(r)] = a.root;
          s.right[static_cast<std::size_t>(r)] = b.root;
          out.push_back(std::move(s));
        }
    }
    return out;
  };
  std::vector<FragTree> trees;
  for (auto& s : build(build, 0, k)) trees.emplace_back(links, g, s.root, std::move(s.left), std::move(s.right));
  return trees;
}

/// L^{I_alpha}_{G_alpha(H)}: the pieces of I_alpha left after removing the
/// vertex links of the component T_alpha(H).
inline std::vector<Fragment> fragment_family(const FragTree& t, int v, EdgeSet h) {
  return fragments_of(t.subtree_links(v, h), t.internal(v));
}

/// Every fragment the tree can produce, S = {I_alpha} together with L_G:
/// internal fragments by vertex index first, then external ones.
inline std::vector<Fragment> all_fragments(const FragTree& t) {
  std::vector<Fragment> out;
  if (t.empty()) return {Fragment::whole(t.links())};
  for (int v = 0; v < t.size(); ++v) out.push_back(t.internal(v));
  for (const auto& f : t.external_fragments()) out.push_back(f);
  return out;
}

}  // namespace chainfrag
