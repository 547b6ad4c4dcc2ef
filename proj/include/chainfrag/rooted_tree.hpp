#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "chainfrag/bits.hpp"
#include "chainfrag/error.hpp"

namespace chainfrag {

inline constexpr int kMaxVertices = 64;

/// Set of vertices of a RootedTree, by vertex index.
struct VertexSet {
  Mask bits = 0;
  friend bool operator==(VertexSet, VertexSet) = default;
  friend auto operator<=>(VertexSet, VertexSet) = default;
};

/// Set of edges of a RootedTree. Every non-root vertex has exactly one
/// parent edge, so an edge is stored as the index of its upper end.
struct EdgeSet {
  Mask bits = 0;

  bool empty() const noexcept { return bits == 0; }
  int size() const noexcept { return popcount(bits); }
  bool contains(int upper) const noexcept { return (bits >> upper) & 1U; }

  friend EdgeSet operator|(EdgeSet a, EdgeSet b) noexcept { return {a.bits | b.bits}; }
  friend EdgeSet operator&(EdgeSet a, EdgeSet b) noexcept { return {a.bits & b.bits}; }
  friend EdgeSet operator-(EdgeSet a, EdgeSet b) noexcept { return {a.bits & ~b.bits}; }
  friend bool operator==(EdgeSet, EdgeSet) = default;
  friend auto operator<=>(EdgeSet, EdgeSet) = default;
};

/// A finite rooted tree with ordered children and arbitrary arity.
///
/// Vertices are indices 0..size()-1, each carrying an integer label used for
/// input/output. The order alpha <= beta holds when alpha lies on the path
/// from the root to beta.
class RootedTree {
 public:
  RootedTree() = default;

  /// parent[v] is the parent index of v, -1 for exactly one root. Children
  /// are ordered by increasing index unless `children` is supplied.
  RootedTree(std::vector<int> labels, std::vector<int> parent)
      : labels_(std::move(labels)), parent_(std::move(parent)) {
    CHAINFRAG_REQUIRE(labels_.size() == parent_.size(), "labels and parents differ in length");
    children_.assign(parent_.size(), {});
    for (std::size_t v = 0; v < parent_.size(); ++v)
      if (parent_[v] >= 0) children_.at(static_cast<std::size_t>(parent_[v])).push_back(static_cast<int>(v));
    finish();
  }

  /// Builds from a root label and (parent, child) label pairs. Children keep
  /// the order in which their edges appear.
  static RootedTree from_edges(int root_label, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> labels{root_label};
    auto index_of = [&](int label) {
      auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) {
        labels.push_back(label);
        return static_cast<int>(labels.size()) - 1;
      }
      return static_cast<int>(it - labels.begin());
    };
    std::vector<std::pair<int, int>> idx;
    for (auto [p, c] : edges) idx.emplace_back(index_of(p), index_of(c));
    RootedTree t;
    t.labels_ = labels;
    t.parent_.assign(labels.size(), -1);
    t.children_.assign(labels.size(), {});
    for (auto [p, c] : idx) {
      CHAINFRAG_REQUIRE(c != 0, "the root cannot have a parent");
      CHAINFRAG_REQUIRE(t.parent_[static_cast<std::size_t>(c)] == -1,
                        "vertex " + std::to_string(labels[static_cast<std::size_t>(c)]) + " has two parents");
      t.parent_[static_cast<std::size_t>(c)] = p;
      t.children_[static_cast<std::size_t>(p)].push_back(c);
    }
    t.finish();
    return t;
  }

  int size() const noexcept { return static_cast<int>(parent_.size()); }
  int root() const noexcept { return root_; }
  int parent(int v) const { return parent_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& children(int v) const { return children_.at(static_cast<std::size_t>(v)); }
  int label(int v) const { return labels_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<int>& parents() const noexcept { return parent_; }

  int index_of(int label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    CHAINFRAG_REQUIRE(it != labels_.end(), "no vertex labelled " + std::to_string(label));
    return static_cast<int>(it - labels_.begin());
  }

  VertexSet all_vertices() const noexcept { return {low_bits(size())}; }
  EdgeSet all_edges() const noexcept { return {low_bits(size()) & ~bit(root_)}; }
  int edge_count() const noexcept { return size() - 1; }

  /// v together with all its descendants in T.
  Mask descendants(int v) const { return desc_.at(static_cast<std::size_t>(v)); }
  /// All vertices on the path from the root to v, both ends included.
  Mask ancestors(int v) const { return anc_.at(static_cast<std::size_t>(v)); }

  /// alpha <= beta in the tree order.
  bool precedes_or_equal(int alpha, int beta) const { return (ancestors(beta) >> alpha) & 1U; }

  /// Vertices in an order where every parent comes before its children.
  const std::vector<int>& preorder() const noexcept { return preorder_; }

 private:
  void finish() {
    const std::size_t n = parent_.size();
    CHAINFRAG_REQUIRE(n >= 1, "a tree needs at least one vertex");
    CHAINFRAG_REQUIRE(n <= static_cast<std::size_t>(kMaxVertices), "trees are limited to 64 vertices");
    root_ = -1;
    for (std::size_t v = 0; v < n; ++v) {
      if (parent_[v] < 0) {
        CHAINFRAG_REQUIRE(root_ < 0, "tree has more than one root");
        root_ = static_cast<int>(v);
      } else {
        CHAINFRAG_REQUIRE(parent_[v] < static_cast<int>(n), "parent index out of range");
      }
    }
    CHAINFRAG_REQUIRE(root_ >= 0, "tree has no root");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        CHAINFRAG_REQUIRE(labels_[a] != labels_[b], "duplicate vertex label " + std::to_string(labels_[a]));

    preorder_.clear();
    std::vector<int> stack{root_};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      preorder_.push_back(v);
      const auto& ch = children_[static_cast<std::size_t>(v)];
      for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    CHAINFRAG_REQUIRE(preorder_.size() == n, "tree is not connected (or contains a cycle)");

    anc_.assign(n, 0);
    desc_.assign(n, 0);
    for (int v : preorder_) {
      const int p = parent_[static_cast<std::size_t>(v)];
      anc_[static_cast<std::size_t>(v)] = (p < 0 ? 0 : anc_[static_cast<std::size_t>(p)]) | bit(v);
    }
    for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) {
      const int v = *it;
      desc_[static_cast<std::size_t>(v)] |= bit(v);
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0) desc_[static_cast<std::size_t>(p)] |= desc_[static_cast<std::size_t>(v)];
    }
  }

  std::vector<int> labels_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> preorder_;
  std::vector<Mask> anc_;
  std::vector<Mask> desc_;
  int root_ = -1;
};

// ---------------------------------------------------------------------------
// Stump sets, subtrees and stump cut sets.

/// Vertex set of T_alpha(H): alpha and everything still reachable from it
/// downwards after deleting the edges H.
inline VertexSet subtree_vertices(const RootedTree& t, int alpha, EdgeSet h) {
  Mask removed = 0;
  for_each_bit(h.bits & ~bit(alpha), [&](int beta) {
    if (t.precedes_or_equal(alpha, beta)) removed |= t.descendants(beta);
  });
  return {t.descendants(alpha) & ~removed};
}

/// The stump set V_gamma(H): vertices still connected to the root.
inline VertexSet stump_set(const RootedTree& t, EdgeSet h) {
  return subtree_vertices(t, t.root(), h);
}

/// Edges of T_gamma(H), i.e. non-root vertices of the stump set.
inline EdgeSet stump_edges(const RootedTree& t, EdgeSet h) {
  return {stump_set(t, h).bits & ~bit(t.root())};
}

/// T_alpha(H) as a stand-alone tree rooted at alpha. Labels are preserved;
/// vertex order follows the original indices.
inline RootedTree subtree(const RootedTree& t, int alpha, EdgeSet h) {
  const Mask keep = subtree_vertices(t, alpha, h).bits;
  std::vector<int> map(static_cast<std::size_t>(t.size()), -1);
  std::vector<int> labels;
  for_each_bit(keep, [&](int v) {
    map[static_cast<std::size_t>(v)] = static_cast<int>(labels.size());
    labels.push_back(t.label(v));
  });
  std::vector<int> parent(labels.size(), -1);
  for_each_bit(keep, [&](int v) {
    if (v != alpha) parent[static_cast<std::size_t>(map[static_cast<std::size_t>(v)])] =
        map[static_cast<std::size_t>(t.parent(v))];
  });
  return RootedTree(std::move(labels), std::move(parent));
}

/// M(H): the edges of H that have no other edge of H below them.
inline EdgeSet minimal_edges(const RootedTree& t, EdgeSet h) {
  Mask out = 0;
  for_each_bit(h.bits, [&](int e) {
    if ((t.ancestors(e) & h.bits) == bit(e)) out |= bit(e);
  });
  return {out};
}

/// Vertex counterpart of minimal_edges: the <=-minimal vertices of a set.
inline VertexSet minimal_vertices(const RootedTree& t, VertexSet s) {
  return {minimal_edges(t, EdgeSet{s.bits}).bits};
}

/// H is a stump cut set iff H = M(H), i.e. H is an antichain of (E, <=).
inline bool is_stump_cut_set(const RootedTree& t, EdgeSet h) {
  return minimal_edges(t, h) == h;
}

/// An order ideal of (V, <=) that contains the root.
inline bool is_stump_set(const RootedTree& t, VertexSet r) {
  if (!is_subset(r.bits, t.all_vertices().bits) || !((r.bits >> t.root()) & 1U)) return false;
  bool ok = true;
  for_each_bit(r.bits, [&](int v) { ok = ok && is_subset(t.ancestors(v), r.bits); });
  return ok;
}

/// The stump cut set of R: edges leaving R.
inline EdgeSet stump_cut_set(const RootedTree& t, VertexSet r) {
  CHAINFRAG_REQUIRE(is_stump_set(t, r), "vertex set is not an order ideal containing the root");
  Mask out = 0;
  for (int v = 0; v < t.size(); ++v)
    if (v != t.root() && !((r.bits >> v) & 1U) && ((r.bits >> t.parent(v)) & 1U)) out |= bit(v);
  return {out};
}

/// All antichains of (E, <=), each once, in order of increasing bit value.
inline std::vector<EdgeSet> enumerate_stump_cut_sets(const RootedTree& t) {
  std::vector<EdgeSet> out;
  // Recursive include/exclude over edges in preorder; including an edge
  // forbids its whole subtree.
  const std::vector<int> order = [&] {
    std::vector<int> o;
    for (int v : t.preorder())
      if (v != t.root()) o.push_back(v);
    return o;
  }();
  auto rec = [&](auto&& self, std::size_t i, Mask chosen, Mask blocked) -> void {
    if (i == order.size()) {
      out.push_back({chosen});
      return;
    }
    const int e = order[i];
    self(self, i + 1, chosen, blocked);
    if (!((blocked >> e) & 1U)) self(self, i + 1, chosen | bit(e), blocked | t.descendants(e));
  };
  rec(rec, 0, 0, 0);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Text helpers for edge sets named by the labels of their upper ends.

/// Upper-end labels of H in increasing order.
inline std::vector<int> edge_labels(const RootedTree& t, EdgeSet h) {
  std::vector<int> labels;
  for_each_bit(h.bits, [&](int v) { labels.push_back(t.label(v)); });
  std::sort(labels.begin(), labels.end());
  return labels;
}

inline std::string format_edges(const RootedTree& t, EdgeSet h, char sep = ',') {
  std::string s;
  for (int l : edge_labels(t, h)) {
    if (!s.empty()) s += sep;
    s += std::to_string(l);
  }
  return s;
}

inline EdgeSet parse_edges(const RootedTree& t, const std::string& text) {
  Mask m = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find_first_of(",;", pos);
    if (end == std::string::npos) end = text.size();
    std::string tok = text.substr(pos, end - pos);
    if (!tok.empty() && (tok[0] == 'e' || tok[0] == 'E')) tok.erase(0, 1);
    CHAINFRAG_REQUIRE(!tok.empty(), "empty entry in edge list '" + text + "'");
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(tok, &used);
      CHAINFRAG_REQUIRE(used == tok.size(), "bad edge name '" + tok + "'");
    } catch (const std::logic_error&) {
      throw invalid_input("bad edge name '" + tok + "'");
    }
    const int v = t.index_of(label);
    CHAINFRAG_REQUIRE(v != t.root(), "the root has no parent edge");
    m |= bit(v);
    if (end == text.size()) break;
    pos = end + 1;
    CHAINFRAG_REQUIRE(pos < text.size(), "trailing separator in edge list '" + text + "'");
  }
  return {m};
}

}  // namespace chainfrag
