#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/graph.hpp"
#include "rebar/orchestrator.hpp"
#include "rebar/sim.hpp"

namespace rebar::scoring {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ObservableOutcome {
  NodeId observable;
  double x = 0.0;
  double tau = 0.5;
  bool graded = false;
  bool passed = false;
  double d = 0.0;
  double delta = 0.0;
  double s = kNaN;
};

struct NodeScore {
  NodeId node;
  std::string run_id;
  double score = kNaN;
  double confidence = 0.0;
  int n_success = 0;
  int n_total = 0;
};

using RunScores = std::map<NodeId, NodeScore>;

struct ArlAggregate {
  NodeId node;
  int runs = 0;
  double arl_score = kNaN;
  double arl_confidence = 0.0;
  std::vector<double> score_distribution;  // in run order
  std::string bucket;
};

/// Measured value x in [0,1] for the observable's evaluator.
double evaluate(const graph::ObservableSpec& spec, const sim::RunLog& log);

/// Threshold and partial-credit rule applied to a measured value.
ObservableOutcome grade(const NodeId& observable, double x, double tau, bool graded, double d);

/// Evaluates and grades. Throws on an incomplete log.
ObservableOutcome evaluate_observable(const graph::ObservableSpec& spec, const sim::RunLog& log, double d);

/// Outcomes for every observable of `graph`; difficulty from the signature, 0 if absent.
std::vector<ObservableOutcome> evaluate_run(const graph::DecompositionGraph& graph, const sim::RunLog& log,
                                            const orchestrator::Signature& signature);

/// Min-propagation over reachable leaves with distinct-leaf confidence.
RunScores score_run(const graph::DecompositionGraph& graph, const std::vector<ObservableOutcome>& outcomes,
                    const std::string& run_id);

/// Per-node means across runs. Runs are taken in run_id order.
std::map<NodeId, ArlAggregate> aggregate(const std::vector<RunScores>& per_run, const std::string& bucket = "");

json to_json(const ObservableOutcome& o);
/// Reads x, tau, d and graded; pass state and score are recomputed.
ObservableOutcome outcome_from_json(const NodeId& id, const json& j);
json outcomes_to_json(const std::vector<ObservableOutcome>& outcomes);
std::vector<ObservableOutcome> outcomes_from_json(const json& j);

json to_json(const NodeScore& s);
json to_json(const RunScores& scores);
RunScores run_scores_from_json(const std::string& run_id, const json& j);
json to_json(const ArlAggregate& a);

}  // namespace rebar::scoring
