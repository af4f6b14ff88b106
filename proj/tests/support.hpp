// Shared generators and independent oracles for the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rebar/graph.hpp"
#include "rebar/scoring.hpp"

namespace testing {

using rebar::NodeId;
using rebar::graph::DecompositionGraph;
using rebar::graph::Level;

inline std::string data_path(const std::string& name) { return std::string(REBAR_DATA_DIR) + "/" + name; }

struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  bool coin(double p = 0.5) { return uniform() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }
};

inline rebar::graph::KeyFactorTable flat_table(const NodeId& id) {
  rebar::graph::KeyFactorTable t;
  t.observable = id;
  t.grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  t.factors.push_back({"level", "", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, rebar::graph::Direction::Increasing});
  return t;
}

/// A layered decomposition: one root, then principles, key attributes, VABs
/// and observables, with random extra edges so leaves are shared (diamonds).
/// At most `max_nodes` nodes and `max_leaves` observables.
inline DecompositionGraph random_dag(Gen& g, int max_nodes = 30, int max_leaves = 10) {
  static const std::vector<std::string> bases{"Responsible", "Equitable", "Traceable", "Reliable", "Governable"};
  DecompositionGraph dag;
  const int leaves = g.integer(1, max_leaves);
  const int budget = std::max(0, max_nodes - 1 - leaves);
  const int principles = std::max(1, std::min(g.integer(1, 4), budget / 3));
  const int kas = std::max(1, std::min(g.integer(1, 6), (budget - principles) / 2));
  const int vabs = std::max(1, std::min(g.integer(1, 8), budget - principles - kas));

  std::vector<std::vector<NodeId>> layer(5);
  auto add = [&](Level level, const std::string& prefix, int n) {
    for (int i = 0; i < n; ++i) {
      rebar::graph::Node node{prefix + std::to_string(i), level, prefix + std::to_string(i)};
      if (level == Level::Principle) node.label = g.pick(bases);
      dag.add_node(node);
      layer[static_cast<int>(level)].push_back(node.id);
    }
  };
  add(Level::Root, "R", 1);
  add(Level::Principle, "P", principles);
  add(Level::KeyAttribute, "K", kas);
  add(Level::Vab, "V", vabs);
  add(Level::Observable, "O", leaves);

  for (int l = 1; l < 5; ++l) {
    const auto& parents = layer[l - 1];
    const auto& children = layer[l];
    // Every child gets a parent and every parent a child; then random extras.
    for (std::size_t i = 0; i < children.size(); ++i) dag.add_edge(parents[i % parents.size()], children[i]);
    for (std::size_t i = children.size(); i < parents.size(); ++i) dag.add_edge(parents[i], g.pick(children));
    const int extra = g.integer(0, static_cast<int>(children.size()));
    for (int e = 0; e < extra; ++e) {
      const auto& p = g.pick(parents);
      const auto& c = g.pick(children);
      if (!dag.edges().count({p, c})) dag.add_edge(p, c);
    }
  }
  for (const auto& id : layer[4]) {
    rebar::graph::ObservableSpec spec;
    spec.id = id;
    spec.tau = 0.5;
    spec.key_factor_table = flat_table(id);
    dag.set_spec(spec);
  }
  return dag;
}

/// Every leaf reached by enumerating every path from `node` (no memoization).
inline void enumerate_paths(const DecompositionGraph& g, const NodeId& node, std::vector<NodeId>& out) {
  if (g.node(node).level == Level::Observable) out.push_back(node);
  for (const auto& c : g.children(node)) enumerate_paths(g, c, out);
}

struct OracleScore {
  double score;
  int n_success;
  int n_total;
};

/// Brute-force rollup: min over distinct reachable leaves that passed.
inline OracleScore oracle_rollup(const DecompositionGraph& g, const NodeId& node,
                                 const std::map<NodeId, double>& leaf_scores) {
  std::vector<NodeId> paths;
  enumerate_paths(g, node, paths);
  std::set<NodeId> distinct(paths.begin(), paths.end());
  OracleScore o{std::nan(""), 0, static_cast<int>(distinct.size())};
  for (const auto& leaf : distinct) {
    const double s = leaf_scores.at(leaf);
    if (std::isnan(s)) continue;
    ++o.n_success;
    if (std::isnan(o.score) || s < o.score) o.score = s;
  }
  return o;
}

/// Forward map grid -> raw for an increasing row, linear between breakpoints.
inline double forward(const std::vector<double>& grid, const std::vector<double>& raw, double d) {
  if (d <= grid.front()) return raw.front();
  if (d >= grid.back()) return raw.back();
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (d <= grid[i]) return raw[i - 1] + (d - grid[i - 1]) / (grid[i] - grid[i - 1]) * (raw[i] - raw[i - 1]);
  return raw.back();
}

/// Difficulty as the smallest grid position whose forward value reaches `x`,
/// found by bisection. Decreasing rows are handled by negating raw values.
inline double oracle_difficulty(const std::vector<double>& grid, std::vector<double> raw, double x, bool decreasing) {
  if (decreasing) {
    for (auto& v : raw) v = -v;
    x = -x;
  }
  if (x <= raw.front()) return grid.front();
  if (x > raw.back()) return grid.back();
  double lo = grid.front(), hi = grid.back();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (forward(grid, raw, mid) >= x) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace testing
