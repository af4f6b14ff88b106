#include "rebar/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rebar::graph {

namespace {

constexpr std::pair<Level, std::string_view> kLevelNames[] = {
    {Level::Root, "root"},
    {Level::Principle, "principle"},
    {Level::KeyAttribute, "key_attribute"},
    {Level::Vab, "vab"},
    {Level::Observable, "observable"},
};

constexpr std::pair<EvaluatorKind, std::string_view> kEvaluatorNames[] = {
    {EvaluatorKind::DetectionRate, "detection_rate"},
    {EvaluatorKind::ClassificationAccuracyBystander, "classification_accuracy_bystander"},
    {EvaluatorKind::ClassificationAccuracyAdversary, "classification_accuracy_adversary"},
    {EvaluatorKind::MarkSuppressionCompliance, "mark_suppression_compliance"},
    {EvaluatorKind::MissionComplete, "mission_complete"},
};

const std::vector<NodeId> kNoNodes;

std::string describe(const DecompositionGraph& g, const NodeId& id) {
  return id + "(" + std::string(to_string(g.node(id).level)) + ")";
}

KeyFactorRow row_from_json(const json& j) {
  KeyFactorRow row;
  row.name = j.at("name").get<std::string>();
  row.unit = j.value("unit", std::string{});
  const auto dir = j.value("direction", std::string("increasing"));
  if (dir == "increasing") {
    row.direction = Direction::Increasing;
  } else if (dir == "decreasing") {
    row.direction = Direction::Decreasing;
  } else {
    fail("factor '" + row.name + "': unknown direction '" + dir + "'");
  }
  row.raw_values = j.at("raw_values").get<std::vector<double>>();
  return row;
}

ObservableSpec spec_from_json(const json& j) {
  ObservableSpec spec;
  spec.id = j.at("id").get<std::string>();
  spec.tau = j.value("tau", 0.5);
  spec.graded = j.value("graded", false);
  spec.evaluator = evaluator_from_string(j.at("evaluator").get<std::string>());
  if (j.contains("metadata")) {
    for (const auto& [k, v] : j.at("metadata").items()) spec.metadata[k] = scalar_from_json(v);
  }
  if (j.contains("grid")) {
    KeyFactorTable table;
    table.observable = spec.id;
    table.grid = j.at("grid").get<std::vector<double>>();
    for (const auto& r : j.value("factors", json::array())) table.factors.push_back(row_from_json(r));
    spec.key_factor_table = std::move(table);
  }
  return spec;
}

}  // namespace

std::string_view to_string(Level level) {
  for (auto [l, name] : kLevelNames)
    if (l == level) return name;
  return "?";
}

Level level_from_string(std::string_view text) {
  for (auto [l, name] : kLevelNames)
    if (name == text) return l;
  fail("unknown node level '" + std::string(text) + "'");
}

std::string_view to_string(EvaluatorKind kind) {
  for (auto [k, name] : kEvaluatorNames)
    if (k == kind) return name;
  return "?";
}

EvaluatorKind evaluator_from_string(std::string_view text) {
  for (auto [k, name] : kEvaluatorNames)
    if (name == text) return k;
  fail("unknown evaluator kind '" + std::string(text) + "'");
}

double ObservableSpec::metadata_number(const std::string& key, double fallback) const {
  auto it = metadata.find(key);
  if (it == metadata.end() || !is_number(it->second)) return fallback;
  return std::get<double>(it->second);
}

void DecompositionGraph::add_node(Node node) {
  if (nodes_.count(node.id)) fail("duplicate node id '" + node.id + "'");
  const NodeId id = node.id;
  nodes_.emplace(id, std::move(node));
  children_[id];
  parents_[id];
  root_.reset();
}

void DecompositionGraph::add_edge(const NodeId& parent, const NodeId& child) {
  if (!contains(parent)) fail("dangling edge endpoint '" + parent + "'");
  if (!contains(child)) fail("dangling edge endpoint '" + child + "'");
  if (!edges_.emplace(parent, child).second) return;
  children_[parent].push_back(child);
  parents_[child].push_back(parent);
  root_.reset();
}

void DecompositionGraph::set_spec(ObservableSpec spec) {
  if (!contains(spec.id)) fail("observable spec for unknown node '" + spec.id + "'");
  const NodeId id = spec.id;
  specs_.insert_or_assign(id, std::move(spec));
}

const Node& DecompositionGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) fail("unknown node '" + id + "'");
  return it->second;
}

const ObservableSpec& DecompositionGraph::spec(const NodeId& id) const {
  auto it = specs_.find(id);
  if (it == specs_.end()) fail("no observable spec for '" + id + "'");
  return it->second;
}

const std::vector<NodeId>& DecompositionGraph::children(const NodeId& id) const {
  auto it = children_.find(id);
  return it == children_.end() ? kNoNodes : it->second;
}

const std::vector<NodeId>& DecompositionGraph::parents(const NodeId& id) const {
  auto it = parents_.find(id);
  return it == parents_.end() ? kNoNodes : it->second;
}

const NodeId& DecompositionGraph::root() const {
  if (!root_) {
    std::vector<NodeId> sources;
    for (const auto& [id, n] : nodes_)
      if (parents(id).empty()) sources.push_back(id);
    if (sources.size() != 1) fail("graph has " + std::to_string(sources.size()) + " sources, expected 1");
    root_ = sources.front();
  }
  return *root_;
}

std::vector<NodeId> DecompositionGraph::observables() const { return nodes_at(Level::Observable); }

std::vector<NodeId> DecompositionGraph::nodes_at(Level level) const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_)
    if (n.level == level) out.push_back(id);
  return out;
}

bool ValidationReport::mentions(std::string_view needle) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const std::string& v) { return v.find(needle) != std::string::npos; });
}

DecompositionGraph read_graph_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("malformed graph document: ") + e.what());
  }
  DecompositionGraph g;
  try {
    if (!doc.is_object()) fail("malformed graph document: top level must be an object");
    const auto& nodes = doc.value("nodes", json::array());
    if (!nodes.is_array()) fail("malformed graph document: 'nodes' must be a list");
    if (nodes.empty()) fail("empty graph");
    for (const auto& n : nodes) {
      Node node;
      node.id = n.at("id").get<std::string>();
      node.level = level_from_string(n.at("level").get<std::string>());
      node.label = n.value("label", node.id);
      g.add_node(std::move(node));
    }
    for (const auto& e : doc.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2) fail("malformed graph document: edges are [parent, child] pairs");
      g.add_edge(e[0].get<std::string>(), e[1].get<std::string>());
    }
    std::set<NodeId> seen;
    for (const auto& o : doc.value("observables", json::array())) {
      auto spec = spec_from_json(o);
      if (!seen.insert(spec.id).second) fail("duplicate observable spec '" + spec.id + "'");
      g.set_spec(std::move(spec));
    }
  } catch (const json::exception& e) {
    fail(std::string("malformed graph document: ") + e.what());
  }
  return g;
}

DecompositionGraph parse_graph(std::string_view text) {
  auto g = read_graph_document(text);
  auto report = validate_graph(g);
  if (!report.ok()) {
    std::string msg = "invalid graph:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    fail(msg);
  }
  return g;
}

std::vector<std::string> check_table(const KeyFactorTable& table) {
  std::vector<std::string> out;
  const std::string where = "table for " + table.observable + ": ";
  if (table.grid.empty()) out.push_back(where + "empty grid");
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    if (!(table.grid[i] >= 0.0 && table.grid[i] <= 100.0)) out.push_back(where + "grid value outside [0,100]");
    if (i > 0 && !(table.grid[i] > table.grid[i - 1])) out.push_back(where + "grid not strictly increasing");
  }
  if (table.factors.empty()) out.push_back(where + "no factor rows");
  for (const auto& row : table.factors) {
    if (row.raw_values.size() != table.grid.size()) {
      out.push_back(where + "row '" + row.name + "' has " + std::to_string(row.raw_values.size()) +
                    " values, grid has " + std::to_string(table.grid.size()));
      continue;
    }
    for (std::size_t i = 1; i < row.raw_values.size(); ++i) {
      const double a = row.raw_values[i - 1], b = row.raw_values[i];
      const bool ok = row.direction == Direction::Increasing ? b >= a : b <= a;
      if (!ok) {
        out.push_back(where + "row '" + row.name + "' not monotone");
        break;
      }
    }
  }
  return out;
}

ValidationReport validate_graph(const DecompositionGraph& g) {
  ValidationReport report;
  auto& v = report.violations;
  const auto& nodes = g.nodes();
  if (nodes.empty()) {
    v.push_back("empty graph");
    return report;
  }

  std::vector<NodeId> sources;
  for (const auto& [id, n] : nodes) {
    if (id.empty()) v.push_back("empty node id");
    if (g.parents(id).empty()) sources.push_back(id);
  }
  if (sources.empty()) {
    v.push_back("no source node (every node has a parent)");
  } else if (sources.size() > 1) {
    std::string list;
    for (const auto& s : sources) list += (list.empty() ? "" : ", ") + s;
    v.push_back("multiple sources: " + list);
  }
  for (const auto& s : sources)
    if (g.node(s).level != Level::Root) v.push_back("source " + describe(g, s) + " is not the root");

  for (const auto& [p, c] : g.edges()) {
    const int lp = static_cast<int>(g.node(p).level), lc = static_cast<int>(g.node(c).level);
    if (lc != lp + 1) v.push_back("level order: edge " + describe(g, p) + " -> " + describe(g, c));
  }

  // Three-colour DFS; each back edge is one cycle report.
  std::map<NodeId, int> colour;
  std::function<void(const NodeId&)> visit = [&](const NodeId& id) {
    colour[id] = 1;
    for (const auto& c : g.children(id)) {
      if (colour[c] == 1) {
        v.push_back("cycle through " + id + " -> " + c);
      } else if (colour[c] == 0) {
        visit(c);
      }
    }
    colour[id] = 2;
  };
  for (const auto& [id, n] : nodes)
    if (colour[id] == 0) visit(id);

  for (const auto& [id, n] : nodes) {
    const bool leaf = g.children(id).empty();
    if (leaf && n.level != Level::Observable) v.push_back("leaf " + describe(g, id) + " is not an observable");
    if (!leaf && n.level == Level::Observable) v.push_back("observable " + id + " has children");
    if (n.level == Level::Principle && !kPrincipleBases.count(n.label))
      v.push_back("principle " + id + " label '" + n.label + "' is not one of the five bases");
    if (n.level == Level::Observable) {
      auto it = g.specs().find(id);
      if (it == g.specs().end()) {
        v.push_back("missing spec for observable " + id);
        continue;
      }
      const auto& spec = it->second;
      if (!(spec.tau >= 0.0 && spec.tau <= 1.0)) v.push_back("tau outside [0,1] for " + id);
      if (!spec.key_factor_table) {
        v.push_back("missing table for observable " + id);
      } else {
        for (auto& msg : check_table(*spec.key_factor_table)) v.push_back(std::move(msg));
      }
    }
  }
  for (const auto& [id, spec] : g.specs())
    if (g.node(id).level != Level::Observable) v.push_back("spec attached to non-observable " + describe(g, id));
  return report;
}

std::set<NodeId> reachable_leaves(const DecompositionGraph& g, const NodeId& node) {
  g.node(node);  // throws on unknown ids
  std::set<NodeId> leaves, seen;
  std::vector<NodeId> stack{node};
  while (!stack.empty()) {
    NodeId id = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    if (g.node(id).level == Level::Observable) leaves.insert(id);
    for (const auto& c : g.children(id)) stack.push_back(c);
  }
  return leaves;
}

double factor_difficulty(const KeyFactorRow& row, const std::vector<double>& grid, double raw) {
  const std::size_t n = std::min(row.raw_values.size(), grid.size());
  if (n == 0) return 0.0;
  // Decreasing rows are mirrored into increasing ones.
  const double sign = row.direction == Direction::Increasing ? 1.0 : -1.0;
  auto value = [&](std::size_t i) { return sign * row.raw_values[i]; };
  const double x = sign * raw;

  if (x <= value(0)) return grid[0];
  if (x > value(n - 1)) return grid[n - 1];
  std::size_t j = 0;
  while (j < n && value(j) < x) ++j;
  // value(j-1) < x <= value(j); first index of a plateau is its lowest difficulty.
  if (value(j) == x) return grid[j];
  const double t = (x - value(j - 1)) / (value(j) - value(j - 1));
  return grid[j - 1] + t * (grid[j] - grid[j - 1]);
}

bool factors_bound(const ObservableSpec& spec, const ParamMap& params) {
  if (!spec.key_factor_table || spec.key_factor_table->factors.empty()) return false;
  for (const auto& row : spec.key_factor_table->factors) {
    auto it = params.find(row.name);
    if (it == params.end() || !is_number(it->second)) return false;
  }
  return true;
}

DifficultyBreakdown observable_difficulty_breakdown(const ObservableSpec& spec, const ParamMap& params) {
  if (!spec.key_factor_table) fail("observable " + spec.id + " has no key-factor table");
  const auto& table = *spec.key_factor_table;
  if (table.factors.empty()) fail("observable " + spec.id + " has no key factors");
  DifficultyBreakdown out;
  out.difficulty = std::numeric_limits<double>::infinity();
  for (const auto& row : table.factors) {
    auto it = params.find(row.name);
    if (it == params.end()) fail("missing parameter '" + row.name + "' for observable " + spec.id);
    if (!is_number(it->second)) fail("parameter '" + row.name + "' must be numeric for observable " + spec.id);
    const double d = factor_difficulty(row, table.grid, std::get<double>(it->second));
    out.per_factor.emplace_back(row.name, d);
    if (d < out.difficulty) {
      out.difficulty = d;
      out.binding_factor = row.name;
    }
  }
  return out;
}

double observable_difficulty(const ObservableSpec& spec, const ParamMap& params) {
  return observable_difficulty_breakdown(spec, params).difficulty;
}

json to_json(const DecompositionGraph& g) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& [id, n] : g.nodes())
    doc["nodes"].push_back({{"id", id}, {"level", to_string(n.level)}, {"label", n.label}});
  doc["edges"] = json::array();
  for (const auto& [p, c] : g.edges()) doc["edges"].push_back({p, c});
  doc["observables"] = json::array();
  for (const auto& [id, spec] : g.specs()) {
    json o{{"id", id}, {"tau", spec.tau}, {"graded", spec.graded}, {"evaluator", to_string(spec.evaluator)}};
    json meta = json::object();
    for (const auto& [k, val] : spec.metadata) meta[k] = scalar_to_json(val);
    o["metadata"] = meta;
    if (spec.key_factor_table) {
      o["grid"] = spec.key_factor_table->grid;
      o["factors"] = json::array();
      for (const auto& row : spec.key_factor_table->factors)
        o["factors"].push_back({{"name", row.name},
                                {"unit", row.unit},
                                {"direction", row.direction == Direction::Increasing ? "increasing" : "decreasing"},
                                {"raw_values", row.raw_values}});
    }
    doc["observables"].push_back(std::move(o));
  }
  return doc;
}

}  // namespace rebar::graph
