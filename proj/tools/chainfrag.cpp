// chainfrag: exact laws of the single-crossover fragmentation process.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error, 3 enumeration budget exceeded.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "chainfrag/io.hpp"
#include "chainfrag/probabilities.hpp"
#include "chainfrag/pruning_poset.hpp"
#include "chainfrag/rational.hpp"
#include "chainfrag/simulation.hpp"
#include "chainfrag/verify.hpp"

namespace cf = chainfrag;

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Options {
  std::string rates_path;
  std::string tree_path;
  std::string time_text;
  std::string subset;
  bool subset_given = false;
  bool all = false;
  std::string format = "csv";
  std::uint64_t seed = cf::kDefaultSeed;
  std::uint64_t samples = 100000;
  double tolerance = 1e-10;
  int threads = 1;
  bool rational = false;
  bool by_trees = false;
  std::string from, to;
  bool poset_verify = false;
  std::optional<std::string> highlight;
  std::optional<int> index;
  int n = 4;
  double budget = cf::kDefaultTermBudget;
  double perturb = 0.0;
  std::string output;
};

std::ostream* g_out = &std::cout;

void emit(const std::string& s) { *g_out << s; }
void emit_json(const cf::json& j) { *g_out << j.dump(2) << "\n"; }

double parse_time(const std::string& text, cf::TimeMode mode) {
  CHAINFRAG_REQUIRE(!text.empty(), "--time is required");
  const double t = cf::scalar_traits<double>::from_string(text);
  cf::require_time(t);
  if (mode == cf::TimeMode::discrete)
    CHAINFRAG_REQUIRE(t == std::floor(t) && t < 9.0e15, "discrete time must be a nonnegative integer");
  return t;
}

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (o.format == a) return;
  throw cf::invalid_input("format '" + o.format + "' is not available for this command");
}

// ---------------------------------------------------------------------------

template <class T>
void print_single(const Options& o, cf::Mask g, const T& p, const cf::RateSpec<T>& r, double t) {
  if (o.format == "json") {
    cf::json j = {{"mode", cf::to_string(r.mode())}, {"t", t}, {"subset", cf::format_subset(g)},
                  {"probability", cf::to_double(p)}};
    if constexpr (cf::scalar_traits<T>::exact) j["exact"] = p.get_str();
    emit_json(j);
  } else {
    emit("subset,probability\n" + cf::format_subset(g) + "," + cf::format_probability(p) + "\n");
  }
}

template <class T>
void print_table(const Options& o, const cf::DistTable<T>& d) {
  if (o.format == "json")
    emit_json(cf::dist_table_json(d));
  else
    emit(cf::dist_table_csv(d));
}

int cmd_dist(const Options& o) {
  require_format(o, {"csv", "json"});
  CHAINFRAG_REQUIRE(o.all != o.subset_given, "give exactly one of --subset and --all");
  const cf::json rj = cf::read_json_file(o.rates_path);
  if (o.rational) {
    const auto r = cf::rates_from_json<cf::Rational>(rj);
    r.require(cf::TimeMode::discrete);
    const auto t = static_cast<long long>(parse_time(o.time_text, r.mode()));
    if (o.all) {
      print_table(o, cf::dist_discrete_table(r, t, o.budget));
    } else {
      const cf::Mask g = cf::parse_subset(o.subset, r.links());
      print_single(o, g, cf::dist_discrete(g, r, t, o.budget), r, static_cast<double>(t));
    }
    return 0;
  }
  const auto r = cf::rates_from_json<double>(rj);
  const double t = parse_time(o.time_text, r.mode());
  auto one = [&](cf::Mask g) {
    if (r.mode() == cf::TimeMode::discrete) return cf::dist_discrete(g, r, static_cast<long long>(t), o.budget);
    return o.by_trees ? cf::dist_continuous_by_trees(g, r, t, o.budget) : cf::dist_continuous(g, r, t);
  };
  if (o.all) {
    if (r.mode() == cf::TimeMode::discrete) {
      print_table(o, cf::dist_discrete_table(r, static_cast<long long>(t), o.budget));
    } else {
      CHAINFRAG_REQUIRE(r.n() <= 24, "--all is limited to n <= 24");
      cf::DistTable<double> d{r.mode(), t, r.n(), {}};
      for (cf::Mask g = 0; g < (cf::Mask{1} << r.n()); ++g) d.p.push_back(one(g));
      print_table(o, d);
    }
  } else {
    const cf::Mask g = cf::parse_subset(o.subset, r.links());
    print_single(o, g, one(g), r, t);
  }
  return 0;
}

int cmd_treeprob(const Options& o) {
  require_format(o, {"csv", "json"});
  const cf::FragTree tree = cf::frag_tree_from_json(cf::read_json_file(o.tree_path));
  const cf::json rj = cf::read_json_file(o.rates_path);
  auto print = [&](const std::string& value, double approx, cf::TimeMode mode, double t) {
    if (o.format == "json") {
      cf::json j = {{"tree", cf::frag_tree_to_json(tree)}, {"mode", cf::to_string(mode)}, {"t", t},
                    {"probability", approx}};
      if (value != cf::format_probability(approx)) j["exact"] = value;
      emit_json(j);
    } else {
      emit("tree,probability\n" + tree.to_string() + "," + value + "\n");
    }
  };
  if (o.rational) {
    const auto r = cf::rates_from_json<cf::Rational>(rj);
    r.require(cf::TimeMode::discrete);
    const auto t = static_cast<long long>(parse_time(o.time_text, r.mode()));
    const cf::Rational p = cf::tree_prob_discrete(tree, r, t);
    print(p.get_str(), p.get_d(), r.mode(), static_cast<double>(t));
    return 0;
  }
  const auto r = cf::rates_from_json<double>(rj);
  const double t = parse_time(o.time_text, r.mode());
  const double p = r.mode() == cf::TimeMode::discrete ? cf::tree_prob_discrete(tree, r, static_cast<long long>(t))
                                                      : cf::tree_prob_continuous(tree, r, t);
  print(cf::format_probability(p), p, r.mode(), t);
  return 0;
}

int cmd_trees(const Options& o) {
  require_format(o, {"csv", "json", "dot"});
  CHAINFRAG_REQUIRE(o.n >= 1 && o.n <= cf::kMaxLinks, "--n must lie in [1, 64]");
  const cf::LinkSet links(o.n);
  const cf::Mask g = cf::parse_subset(o.subset, links);
  const auto trees = cf::enumerate_fragmentation_trees(g, links, o.budget);
  if (o.index) CHAINFRAG_REQUIRE(*o.index >= 0 && *o.index < static_cast<int>(trees.size()), "--index out of range");
  auto selected = [&](std::size_t i) { return !o.index || static_cast<std::size_t>(*o.index) == i; };
  if (o.format == "json") {
    cf::json arr = cf::json::array();
    for (std::size_t i = 0; i < trees.size(); ++i)
      if (selected(i)) arr.push_back(cf::frag_tree_to_json(trees[i]));
    emit_json({{"subset", cf::format_subset(g)}, {"count", trees.size()}, {"trees", arr}});
  } else if (o.format == "dot") {
    for (std::size_t i = 0; i < trees.size(); ++i)
      if (selected(i)) emit(cf::frag_tree_dot(trees[i], "tree" + std::to_string(i)));
  } else {
    emit("index,tree\n");
    for (std::size_t i = 0; i < trees.size(); ++i)
      if (selected(i)) emit(std::to_string(i) + "," + trees[i].to_string() + "\n");
  }
  return 0;
}

int cmd_poset(const Options& o) {
  const cf::RootedTree t = cf::rooted_tree_from_json(cf::read_json_file(o.tree_path));
  if (o.poset_verify) {
    long long pairs = 0, mismatches = 0;
    cf::for_each_subset(t.all_edges().bits, [&](cf::Mask k) {
      for (cf::EdgeSet h : cf::down_set(t, cf::EdgeSet{k})) {
        ++pairs;
        if (cf::mobius(t, h, cf::EdgeSet{k}) != cf::mobius_recursive(t, h, cf::EdgeSet{k})) ++mismatches;
      }
    });
    const bool ok = mismatches == 0;
    emit_json({{"comparable_pairs", pairs},
               {"mismatches", mismatches},
               {"passed", ok},
               {"report", ok ? "closed-form = recursive on all pairs" : "closed-form and recursive disagree"}});
    return ok ? 0 : kExitVerifyFailed;
  }
  std::optional<cf::EdgeSet> hl;
  if (o.highlight) hl = cf::parse_edges(t, *o.highlight);
  if (o.format == "json") {
    cf::json covers = cf::json::array();
    for (const auto& [lo, up] : cf::hasse_edges(t))
      covers.push_back({cf::format_edges(t, lo, ';'), cf::format_edges(t, up, ';')});
    emit_json({{"edges", t.edge_count()}, {"covers", covers}});
    return 0;
  }
  require_format(o, {"dot", "csv"});
  emit(cf::hasse_dot(t, hl));
  return 0;
}

int cmd_mobius(const Options& o) {
  const cf::RootedTree t = cf::rooted_tree_from_json(cf::read_json_file(o.tree_path));
  const cf::EdgeSet h = cf::parse_edges(t, o.from);
  const cf::EdgeSet k = cf::parse_edges(t, o.to);
  const cf::MobiusValue mu = cf::mobius(t, h, k);
  if (o.format == "json") {
    cf::json j = {{"from", cf::format_edges(t, h, ';')}, {"to", cf::format_edges(t, k, ';')}, {"mu", mu.value},
                  {"comparable", mu.comparable}};
    if (mu.comparable) j["recursive"] = cf::mobius_recursive(t, h, k).value;
    emit_json(j);
  } else {
    emit(std::to_string(mu.value) + (mu.comparable ? "" : " (incomparable)") + "\n");
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  require_format(o, {"json", "csv"});
  const auto r = cf::rates_from_json<double>(cf::read_json_file(o.rates_path));
  const double t = parse_time(o.time_text, r.mode());
  CHAINFRAG_REQUIRE(o.samples >= 1, "--samples must be at least 1");
  CHAINFRAG_REQUIRE(o.tree_path.empty() == o.subset_given, "give exactly one of --tree and --subset");
  std::string target;
  cf::McEstimate e;
  std::optional<double> exact;
  if (!o.tree_path.empty()) {
    const cf::FragTree tree = cf::frag_tree_from_json(cf::read_json_file(o.tree_path));
    target = tree.to_string();
    e = cf::estimate_tree_prob(tree, r, t, o.samples, o.seed, o.threads);
    try {
      exact = r.mode() == cf::TimeMode::discrete ? cf::tree_prob_discrete(tree, r, static_cast<long long>(t))
                                                 : cf::tree_prob_continuous(tree, r, t);
    } catch (const cf::budget_exceeded&) {
    }
  } else {
    const cf::Mask g = cf::parse_subset(o.subset, r.links());
    target = "{" + cf::format_subset(g, ',') + "}";
    e.samples = o.samples;
    std::vector<std::uint64_t> hits(static_cast<std::size_t>(std::max(1, o.threads)), 0);
    cf::parallel_for_blocks(o.samples, o.threads, [&](std::uint64_t i, int w) {
      cf::Rng rng(o.seed, i);
      if (cf::simulate(r, t, rng).state_at(t) == g) ++hits[static_cast<std::size_t>(w)];
    });
    for (auto h : hits) e.hits += h;
    try {
      exact = r.mode() == cf::TimeMode::discrete ? cf::dist_discrete(g, r, static_cast<long long>(t), o.budget)
                                                 : cf::dist_continuous(g, r, t);
    } catch (const cf::budget_exceeded&) {
    }
  }
  const cf::json rep = cf::simulation_report(target, t, e, exact, o.seed);
  if (o.format == "csv") {
    emit("target,t,samples,estimate,stderr,exact,seed\n" + target + "," + cf::format_probability(t) + "," +
         std::to_string(e.samples) + "," + cf::format_probability(e.estimate()) + "," +
         cf::format_probability(e.std_error()) + "," + (exact ? cf::format_probability(*exact) : "") + "," +
         std::to_string(o.seed) + "\n");
  } else {
    emit_json(rep);
  }
  return 0;
}

int cmd_verify(const Options& o) {
  cf::VerifyConfig cfg;
  cfg.n = o.n;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.tolerance = o.tolerance;
  cfg.perturb = o.perturb;
  cfg.threads = o.threads;
  const cf::VerifyReport rep = cf::run_verify(cfg);
  emit_json(rep.to_json());
  return rep.passed() ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact laws of the single-crossover fragmentation process"};
  app.require_subcommand(1);
  Options o;

  auto add_output = [&](CLI::App* c) {
    c->add_option("--output,-o", o.output, "Write to this file instead of stdout");
  };
  auto add_budget = [&](CLI::App* c) {
    c->add_option("--budget", o.budget, "Maximum C_|G| * 2^(|G|-1) terms to enumerate")->capture_default_str();
  };

  auto* dist = app.add_subcommand("dist", "P(F_t = G) for one subset or all subsets");
  dist->add_option("--rates", o.rates_path, "Rates JSON file")->required();
  dist->add_option("--time,-t", o.time_text, "Time (integer steps in discrete mode)")->required();
  dist->add_option("--subset", o.subset, "Subset G as strictly increasing links, e.g. 1,3,4");
  dist->add_flag("--all", o.all, "Tabulate every subset");
  dist->add_option("--format", o.format, "csv or json")->capture_default_str();
  dist->add_flag("--rational", o.rational, "Exact rational arithmetic (discrete mode)");
  dist->add_flag("--by-trees", o.by_trees, "Continuous mode: sum tree probabilities instead of the closed form");
  add_budget(dist);
  add_output(dist);

  auto* treeprob = app.add_subcommand("treeprob", "Probability that the process matches a fragmentation tree");
  treeprob->add_option("--rates", o.rates_path, "Rates JSON file")->required();
  treeprob->add_option("--tree", o.tree_path, "Fragmentation tree JSON file")->required();
  treeprob->add_option("--time,-t", o.time_text, "Time")->required();
  treeprob->add_option("--format", o.format, "csv or json")->capture_default_str();
  treeprob->add_flag("--rational", o.rational, "Exact rational arithmetic (discrete mode)");
  add_output(treeprob);

  auto* trees = app.add_subcommand("trees", "Enumerate the fragmentation trees with vertex set G");
  trees->add_option("--n", o.n, "Number of links")->required();
  trees->add_option("--subset", o.subset, "Vertex set G (empty for the planted tree)");
  trees->add_option("--format", o.format, "csv, json or dot")->capture_default_str();
  trees->add_option("--index", o.index, "Only the tree with this index");
  add_budget(trees);
  add_output(trees);

  auto* poset = app.add_subcommand("poset", "Hasse diagram of the pruning poset, or a Mobius self-check");
  poset->add_option("--tree", o.tree_path, "Rooted tree JSON file")->required();
  poset->add_option("--format", o.format, "dot or json")->default_str("dot");
  poset->add_option("--highlight", o.highlight, "Edge set H; draws the interval [H, {}] bold");
  poset->add_flag("--verify", o.poset_verify, "Compare closed-form and recursive Mobius values on all pairs");
  add_output(poset);

  auto* mobius = app.add_subcommand("mobius", "Mobius function mu(H, K) of the pruning poset");
  mobius->add_option("--tree", o.tree_path, "Rooted tree JSON file")->required();
  mobius->add_option("--from", o.from, "Edge set H (labels of upper ends, e.g. e1,e2)")->required();
  mobius->add_option("--to", o.to, "Edge set K")->required();
  mobius->add_option("--format", o.format, "csv or json")->capture_default_str();
  add_output(mobius);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate for a tree or a subset");
  simulate->add_option("--rates", o.rates_path, "Rates JSON file")->required();
  simulate->add_option("--time,-t", o.time_text, "Time")->required();
  simulate->add_option("--tree", o.tree_path, "Fragmentation tree JSON file");
  simulate->add_option("--subset", o.subset, "Subset G");
  simulate->add_option("--samples", o.samples, "Number of trajectories")->capture_default_str();
  simulate->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  simulate->add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--format", o.format, "json or csv")->default_str("json");
  add_budget(simulate);
  add_output(simulate);

  auto* verify = app.add_subcommand("verify", "Run every invariant group and report as JSON");
  verify->add_option("--n", o.n, "Number of links")->capture_default_str();
  verify->add_option("--samples", o.samples, "Monte Carlo samples per check (0 skips simulation groups)")
      ->default_str("20000");
  verify->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  verify->add_option("--tolerance", o.tolerance, "Absolute tolerance for exact comparisons")->capture_default_str();
  verify->add_option("--perturb", o.perturb, "Relative rate change on the oracle side (negative control)");
  verify->add_option("--threads", o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  add_output(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  o.subset_given = (dist->parsed() && dist->count("--subset") > 0) || (simulate->parsed() && simulate->count("--subset") > 0);
  if (poset->parsed() && o.format == "csv") o.format = "dot";
  if (simulate->parsed() && o.format == "csv" && simulate->count("--format") == 0) o.format = "json";
  if (verify->parsed() && verify->count("--samples") == 0) o.samples = 20000;

  std::ofstream file;
  if (!o.output.empty()) {
    file.open(o.output);
    if (!file) {
      std::cerr << "error: cannot write '" << o.output << "'\n";
      return kExitConfig;
    }
    g_out = &file;
  }

  try {
    if (dist->parsed()) return cmd_dist(o);
    if (treeprob->parsed()) return cmd_treeprob(o);
    if (trees->parsed()) return cmd_trees(o);
    if (poset->parsed()) return cmd_poset(o);
    if (mobius->parsed()) return cmd_mobius(o);
    if (simulate->parsed()) return cmd_simulate(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const cf::budget_exceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const cf::consistency_error& e) {
    std::cerr << "internal consistency failure: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
