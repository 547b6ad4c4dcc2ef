#pragma once

// JSON schemas, CSV tables and Graphviz DOT export.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "chainfrag/frag_tree.hpp"
#include "chainfrag/probabilities.hpp"
#include "chainfrag/pruning_poset.hpp"
#include "chainfrag/rates.hpp"
#include "chainfrag/rational.hpp"
#include "chainfrag/rooted_tree.hpp"
#include "chainfrag/simulation.hpp"

namespace chainfrag {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  CHAINFRAG_REQUIRE(in.good(), "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw invalid_input("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// "%.17g".
inline std::string format_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

inline std::string format_probability(const Rational& p) { return p.get_str(); }

// ---------------------------------------------------------------------------
// Trees: {"links": [1, n], "root": gamma, "edges": [[parent, child], ...]}.

inline int json_int(const json& j, const char* what) {
  CHAINFRAG_REQUIRE(j.is_number_integer(), std::string(what) + " must be an integer");
  return j.get<int>();
}

inline std::vector<std::pair<int, int>> json_edges(const json& j) {
  CHAINFRAG_REQUIRE(j.is_object(), "tree JSON must be an object");
  CHAINFRAG_REQUIRE(j.contains("root"), "tree JSON needs \"root\"");
  std::vector<std::pair<int, int>> edges;
  if (!j.contains("edges")) return edges;
  CHAINFRAG_REQUIRE(j["edges"].is_array(), "\"edges\" must be an array");
  for (const auto& e : j["edges"]) {
    CHAINFRAG_REQUIRE(e.is_array() && e.size() == 2, "every edge must be a [parent, child] pair");
    edges.emplace_back(json_int(e[0], "edge parent"), json_int(e[1], "edge child"));
  }
  return edges;
}

/// General rooted tree; "links" is ignored if present.
inline RootedTree rooted_tree_from_json(const json& j) {
  return RootedTree::from_edges(json_int(j.at("root"), "root"), json_edges(j));
}

inline json rooted_tree_to_json(const RootedTree& t) {
  json edges = json::array();
  for (int v : t.preorder())
    for (int c : t.children(v)) edges.push_back({t.label(v), t.label(c)});
  return {{"root", t.label(t.root())}, {"edges", edges}};
}

inline LinkSet links_from_json(const json& j) {
  CHAINFRAG_REQUIRE(j.contains("links"), "fragmentation tree JSON needs \"links\": [1, n]");
  const json& l = j["links"];
  CHAINFRAG_REQUIRE(l.is_array() && l.size() == 2 && json_int(l[0], "links[0]") == 1,
                    "\"links\" must be [1, n]");
  const int n = json_int(l[1], "links[1]");
  CHAINFRAG_REQUIRE(n >= 1 && n <= kMaxLinks, "n must lie in [1, 64]");
  return LinkSet(n);
}

/// Fragmentation tree. A child smaller than its parent is the left child,
/// a larger one the right child. "root": null (or no "root") with no edges
/// is the empty planted tree.
inline FragTree frag_tree_from_json(const json& j) {
  const LinkSet links = links_from_json(j);
  if (!j.contains("root") || j["root"].is_null()) {
    CHAINFRAG_REQUIRE(!j.contains("edges") || j["edges"].empty(), "empty tree cannot have edges");
    return FragTree(links);
  }
  const int root = json_int(j["root"], "root");
  const auto edges = json_edges(j);
  Mask g = links.contains(root) ? link_bit(root) : 0;
  CHAINFRAG_REQUIRE(g != 0, "root " + std::to_string(root) + " is not a link in [1, n]");
  for (const auto& [p, c] : edges) {
    CHAINFRAG_REQUIRE(links.contains(p) && links.contains(c), "edge endpoints must be links in [1, n]");
    g |= link_bit(p) | link_bit(c);
  }
  const auto verts = bits_of(g);  // 0-based link indices, ascending
  auto rank = [&](int alpha) {
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (verts[i] == alpha - 1) return static_cast<int>(i);
    return -1;
  };
  std::vector<int> left(verts.size(), -1), right(verts.size(), -1);
  for (const auto& [p, c] : edges) {
    CHAINFRAG_REQUIRE(p != c, "self-loop in tree");
    auto& slot = c < p ? left[static_cast<std::size_t>(rank(p))] : right[static_cast<std::size_t>(rank(p))];
    CHAINFRAG_REQUIRE(slot < 0, "vertex " + std::to_string(p) + " has two children on the same side");
    slot = rank(c);
  }
  return FragTree(links, g, rank(root), std::move(left), std::move(right));
}

inline json frag_tree_to_json(const FragTree& t) {
  json j = {{"links", {1, t.links().n}}};
  if (t.empty()) {
    j["root"] = nullptr;
    j["edges"] = json::array();
    return j;
  }
  j["root"] = t.link(t.root());
  json edges = json::array();
  for (int v : t.tree().preorder())
    for (int c : {t.left_child(v), t.right_child(v)})
      if (c >= 0) edges.push_back({t.link(v), t.link(c)});
  j["edges"] = edges;
  return j;
}

// ---------------------------------------------------------------------------
// Rates: {"mode": "discrete"|"continuous", "n": 5, "rho": {"1": 0.1, ...}}.
// Values may be numbers or strings ("1/10", "0.1"); an array is accepted too.

inline TimeMode time_mode_from_string(const std::string& s) {
  if (s == "discrete") return TimeMode::discrete;
  if (s == "continuous") return TimeMode::continuous;
  throw invalid_input("mode must be \"discrete\" or \"continuous\", got \"" + s + "\"");
}

/// Text of every rho value in link order.
inline std::pair<TimeMode, std::vector<std::string>> rate_text_from_json(const json& j) {
  CHAINFRAG_REQUIRE(j.is_object(), "rates JSON must be an object");
  CHAINFRAG_REQUIRE(j.contains("mode") && j["mode"].is_string(), "rates JSON needs a string \"mode\"");
  const TimeMode mode = time_mode_from_string(j["mode"].get<std::string>());
  CHAINFRAG_REQUIRE(j.contains("rho"), "rates JSON needs \"rho\"");
  const json& rho = j["rho"];
  auto text = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    CHAINFRAG_REQUIRE(v.is_number(), "rate values must be numbers or strings");
    return shortest_decimal(v.get<double>());
  };
  std::vector<std::string> out;
  if (rho.is_array()) {
    for (const auto& v : rho) out.push_back(text(v));
  } else {
    CHAINFRAG_REQUIRE(rho.is_object(), "\"rho\" must be an object keyed by link or an array");
    std::map<int, std::string> by_link;
    for (const auto& [key, v] : rho.items()) {
      int alpha = 0;
      try {
        std::size_t used = 0;
        alpha = std::stoi(key, &used);
        CHAINFRAG_REQUIRE(used == key.size(), "bad link key");
      } catch (const std::exception&) {
        throw invalid_input("rho key '" + key + "' is not a link number");
      }
      by_link[alpha] = text(v);
    }
    int expect = 1;
    for (const auto& [alpha, v] : by_link) {
      CHAINFRAG_REQUIRE(alpha == expect, "rho must give every link 1..n exactly once");
      out.push_back(v);
      ++expect;
    }
  }
  if (j.contains("n")) {
    CHAINFRAG_REQUIRE(json_int(j["n"], "n") == static_cast<int>(out.size()),
                      "\"n\" disagrees with the number of rho entries");
  }
  return {mode, out};
}

template <class T>
RateSpec<T> rates_from_json(const json& j) {
  auto [mode, text] = rate_text_from_json(j);
  std::vector<T> v;
  for (const auto& s : text) v.push_back(scalar_traits<T>::from_string(s));
  return RateSpec<T>(mode, std::move(v));
}

template <class T>
json rates_to_json(const RateSpec<T>& r) {
  json rho = json::object();
  for (int a = 1; a <= r.n(); ++a) {
    if constexpr (scalar_traits<T>::exact)
      rho[std::to_string(a)] = r[a].get_str();
    else
      rho[std::to_string(a)] = r[a];
  }
  return {{"mode", to_string(r.mode())}, {"n", r.n()}, {"rho", rho}};
}

// ---------------------------------------------------------------------------
// Distribution tables.

template <class T>
std::string dist_table_csv(const DistTable<T>& d) {
  std::string s = "subset,probability\n";
  for (std::size_t g = 0; g < d.p.size(); ++g) s += format_subset(g) + "," + format_probability(d.p[g]) + "\n";
  return s;
}

template <class T>
json dist_table_json(const DistTable<T>& d) {
  json rows = json::array();
  for (std::size_t g = 0; g < d.p.size(); ++g) {
    json row = {{"subset", format_subset(g)}, {"probability", to_double(d.p[g])}};
    if constexpr (scalar_traits<T>::exact) row["exact"] = d.p[g].get_str();
    rows.push_back(row);
  }
  return {{"mode", to_string(d.mode)}, {"t", d.time}, {"n", d.n}, {"entries", rows}};
}

// ---------------------------------------------------------------------------
// Simulation report.

inline json simulation_report(const std::string& target, double t, const McEstimate& e, std::optional<double> exact,
                              std::uint64_t seed) {
  json j = {{"target", target}, {"t", t},   {"samples", e.samples}, {"estimate", e.estimate()},
            {"stderr", e.std_error()}, {"seed", seed}};
  j["exact"] = exact ? json(*exact) : json(nullptr);
  if (exact && e.std_error() > 0.0)
    j["z"] = (e.estimate() - *exact) / e.std_error();
  else
    j["z"] = nullptr;
  return j;
}

// ---------------------------------------------------------------------------
// DOT.

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

/// The forest T - H: edges of H dashed, vertices of the stump set filled.
inline std::string rooted_tree_dot(const RootedTree& t, EdgeSet cut = {}) {
  std::ostringstream o;
  const Mask stump = stump_set(t, cut).bits;
  o << "digraph tree {\n  node [shape=circle];\n";
  for (int v = 0; v < t.size(); ++v) {
    o << "  v" << v << " [label=\"" << t.label(v) << "\"";
    if (!cut.empty() && ((stump >> v) & 1U)) o << ", style=filled, fillcolor=lightgray";
    o << "];\n";
  }
  for (int v : t.preorder())
    for (int c : t.children(v)) {
      o << "  v" << v << " -> v" << c << " [label=\"e" << t.label(c) << "\"";
      if (cut.contains(c)) o << ", style=dashed";
      o << "];\n";
    }
  o << "}\n";
  return o.str();
}

/// Fragmentation tree: vertices carry their link and I_alpha; every branch
/// ends in a box holding its external fragment. A planted stem leads to the root.
inline std::string frag_tree_dot(const FragTree& t, const std::string& name = "fragtree") {
  std::ostringstream o;
  o << "digraph " << name << " {\n  node [shape=circle];\n  plant [shape=point];\n";
  if (t.empty()) {
    o << "  x0 [shape=box, label=\"" << Fragment::whole(t.links()).to_string() << "\"];\n  plant -> x0;\n}\n";
    return o.str();
  }
  for (int v = 0; v < t.size(); ++v)
    o << "  v" << v << " [label=\"" << t.link(v) << "\", xlabel=\"I=" << t.internal(v).to_string() << "\"];\n";
  o << "  plant -> v" << t.root() << ";\n";
  int ext = 0;
  for (int v : t.tree().preorder()) {
    for (int side = 0; side < 2; ++side) {
      const int c = side == 0 ? t.left_child(v) : t.right_child(v);
      const Fragment f = side == 0 ? t.left_fragment(v) : t.right_fragment(v);
      if (c >= 0) {
        o << "  v" << v << " -> v" << c << ";\n";
      } else {
        o << "  x" << ext << " [shape=box, label=\"" << f.to_string() << "\"];\n";
        o << "  v" << v << " -> x" << ext << " [style=dotted];\n";
        ++ext;
      }
    }
  }
  o << "}\n";
  return o.str();
}

/// Hasse diagram of P(T), the maximum {} on top. With `highlight`, the
/// interval [highlight, {}] is drawn bold.
inline std::string hasse_dot(const RootedTree& t, std::optional<EdgeSet> highlight = std::nullopt,
                             int max_edges = kDefaultHasseEdgeBound) {
  const auto covers = hasse_edges(t, max_edges);
  auto name = [&](EdgeSet h) {
    std::string s;
    for (int l : edge_labels(t, h)) s += (s.empty() ? "e" : ",e") + std::to_string(l);
    return "{" + s + "}";
  };
  auto in_interval = [&](EdgeSet x) { return highlight && leq_p(t, *highlight, x); };
  std::ostringstream o;
  o << "digraph hasse {\n  rankdir=BT;\n  node [shape=plaintext];\n";
  for_each_subset(t.all_edges().bits, [&](Mask m) {
    const EdgeSet h{m};
    o << "  s" << m << " [label=\"" << dot_escape(name(h)) << "\"";
    if (in_interval(h)) o << ", fontname=\"bold\", shape=box";
    o << "];\n";
  });
  for (const auto& [lower, upper] : covers) {
    o << "  s" << lower.bits << " -> s" << upper.bits << " [arrowhead=none";
    if (in_interval(lower) && in_interval(upper)) o << ", penwidth=3";
    o << "];\n";
  }
  o << "}\n";
  return o.str();
}

}  // namespace chainfrag
