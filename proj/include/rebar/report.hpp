#pragma once

#include <map>
#include <string>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/graph.hpp"
#include "rebar/orchestrator.hpp"
#include "rebar/scoring.hpp"

namespace rebar::report {

/// Type-7 quantiles over the non-NaN entries; all NaN when there are none.
struct Quantiles {
  double min = scoring::kNaN, q25 = scoring::kNaN, median = scoring::kNaN, q75 = scoring::kNaN,
         max = scoring::kNaN;
};

Quantiles quantiles(const std::vector<double>& values);

struct NodeSummary {
  double difficulty = 0.0;  // min signature difficulty over reachable observables
  double arl_score = scoring::kNaN;
  double arl_confidence = 0.0;
  Quantiles distribution;
};

struct BucketReport {
  std::string bucket_key;
  int n_runs = 0;
  orchestrator::Signature signature;
  std::map<NodeId, NodeSummary> per_node;
};

using BucketAggregates = std::map<std::string, std::map<NodeId, scoring::ArlAggregate>>;

/// One report per bucket of the campaign, in bucket key order.
std::vector<BucketReport> build_report(const orchestrator::Campaign& campaign, const graph::DecompositionGraph& graph,
                                       const BucketAggregates& aggregates);

/// "all", or "top:k" for the k buckets with the most runs (ties by key).
std::vector<BucketReport> filter_buckets(const std::vector<BucketReport>& reports, std::string_view filter);

json to_json(const std::vector<BucketReport>& reports);

/// One panel per node in `nodes` (all nodes when empty). Throws if nothing matches.
std::string render_svg(const std::vector<BucketReport>& reports, const std::vector<NodeId>& nodes);

}  // namespace rebar::report
