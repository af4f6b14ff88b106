#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rebar/common.hpp"

namespace rebar::graph {

enum class Level { Root = 0, Principle = 1, KeyAttribute = 2, Vab = 3, Observable = 4 };

std::string_view to_string(Level level);
Level level_from_string(std::string_view text);

/// The five bases a Principle node may be labeled with.
inline const std::set<std::string, std::less<>> kPrincipleBases = {
    "Responsible", "Equitable", "Traceable", "Reliable", "Governable"};

struct Node {
  NodeId id;
  Level level = Level::Observable;
  std::string label;
};

enum class Direction { Increasing, Decreasing };

/// One scenario parameter with its raw values aligned to the difficulty grid.
struct KeyFactorRow {
  std::string name;
  std::string unit;
  std::vector<double> raw_values;
  Direction direction = Direction::Increasing;
};

struct KeyFactorTable {
  NodeId observable;
  std::vector<double> grid;  // difficulty breakpoints, strictly increasing in [0,100]
  std::vector<KeyFactorRow> factors;
};

enum class EvaluatorKind {
  DetectionRate,
  ClassificationAccuracyBystander,
  ClassificationAccuracyAdversary,
  MarkSuppressionCompliance,
  MissionComplete,
};

std::string_view to_string(EvaluatorKind kind);
EvaluatorKind evaluator_from_string(std::string_view text);

struct ObservableSpec {
  NodeId id;
  double tau = 0.5;
  bool graded = false;
  std::map<std::string, Scalar> metadata;
  EvaluatorKind evaluator = EvaluatorKind::DetectionRate;
  std::optional<KeyFactorTable> key_factor_table;

  /// Numeric metadata entry, or `fallback` when absent.
  double metadata_number(const std::string& key, double fallback) const;
};

/// The Root -> Principle -> KeyAttribute -> VAB -> Observable decomposition.
///
/// Construction never rejects structurally odd graphs (cycles, level skips);
/// those are reported by validate_graph so they can be inspected as data.
class DecompositionGraph {
 public:
  void add_node(Node node);
  void add_edge(const NodeId& parent, const NodeId& child);
  void set_spec(ObservableSpec spec);

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::set<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  const std::map<NodeId, ObservableSpec>& specs() const { return specs_; }

  bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }
  const Node& node(const NodeId& id) const;
  const ObservableSpec& spec(const NodeId& id) const;
  const std::vector<NodeId>& children(const NodeId& id) const;
  const std::vector<NodeId>& parents(const NodeId& id) const;

  /// The unique node without parents; throws if there is not exactly one.
  const NodeId& root() const;
  std::vector<NodeId> observables() const;
  std::vector<NodeId> nodes_at(Level level) const;

 private:
  std::map<NodeId, Node> nodes_;
  std::set<std::pair<NodeId, NodeId>> edges_;
  std::map<NodeId, std::vector<NodeId>> children_;
  std::map<NodeId, std::vector<NodeId>> parents_;
  std::map<NodeId, ObservableSpec> specs_;
  mutable std::optional<NodeId> root_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  /// True if some violation message contains `needle`.
  bool mentions(std::string_view needle) const;
};

/// Reads a graph-config document without checking graph invariants.
/// Throws on malformed documents, duplicate ids, dangling edges and empty graphs.
DecompositionGraph read_graph_document(std::string_view text);

/// read_graph_document followed by validate_graph; any violation throws.
DecompositionGraph parse_graph(std::string_view text);

ValidationReport validate_graph(const DecompositionGraph& g);

/// Every violation of a key-factor table's own invariants.
std::vector<std::string> check_table(const KeyFactorTable& table);

std::set<NodeId> reachable_leaves(const DecompositionGraph& g, const NodeId& node);

/// Difficulty of one key factor at `raw`: piecewise-linear between the
/// (raw_values, grid) breakpoints, clamped to the grid endpoints. On a plateau
/// of repeated raw values the lowest difficulty of the plateau is returned.
double factor_difficulty(const KeyFactorRow& row, const std::vector<double>& grid, double raw);

struct DifficultyBreakdown {
  double difficulty = 0.0;
  std::string binding_factor;                  // the row attaining the minimum (first on ties)
  std::vector<std::pair<std::string, double>> per_factor;
};

/// Minimum over factor rows. Depends only on scenario parameters.
DifficultyBreakdown observable_difficulty_breakdown(const ObservableSpec& spec, const ParamMap& params);
double observable_difficulty(const ObservableSpec& spec, const ParamMap& params);

/// True when every factor row of the spec's table has a numeric entry in params.
bool factors_bound(const ObservableSpec& spec, const ParamMap& params);

json to_json(const DecompositionGraph& g);

}  // namespace rebar::graph
