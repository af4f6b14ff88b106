#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/orchestrator.hpp"
#include "rebar/report.hpp"
#include "rebar/scoring.hpp"

namespace rebar::pipeline {

/// Campaign configuration. Relative paths resolve against the manifest's directory.
struct Manifest {
  std::string graph;
  std::string scenario;
  std::optional<std::string> roles;
  std::string strategy = "full";
  std::optional<int> range_steps;
  std::uint64_t seed = 0;
  json sim = json::object();  // partial sim config overrides
  std::string out = "out";
  int jobs = 1;
  std::string buckets = "all";
  std::vector<NodeId> nodes;  // report panels; empty means every node

  void validate() const;
};

Manifest load_manifest(const std::string& path);

/// Runs fn(0..n-1) on `jobs` workers. Rethrows the error of the lowest failing index.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Output layout under a campaign directory.
struct Layout {
  std::string root;
  std::string base() const { return root + "/base.json"; }
  std::string campaign() const { return root + "/campaign.json"; }
  std::string simspec(const std::string& id) const { return root + "/simspecs/" + id + ".json"; }
  std::string log(const std::string& id) const { return root + "/logs/" + id + ".jsonl"; }
  std::string scores(const std::string& id) const { return root + "/scores/" + id + ".json"; }
  std::string report() const { return root + "/report.json"; }
  std::string svg() const { return root + "/report.svg"; }
};

std::string dump(const json& j);

graph::DecompositionGraph load_graph(const std::string& path);

void stage_parse(const std::string& scenario_path, const std::optional<std::string>& roles_path, const Layout& out);

/// Expands, places a scene for every realization, and writes campaign.json plus one SimSpec per realization.
orchestrator::Campaign stage_expand(const std::string& base_path, const std::string& graph_path,
                                    const orchestrator::Strategy& strategy, std::uint64_t seed, const Layout& out);

struct SimulateStats {
  std::size_t simulated = 0;
  std::size_t reused = 0;
};

/// Writes a log per realization. Existing logs are kept when they carry a
/// footer and match the realization id, seed and config.
SimulateStats stage_simulate(const std::string& campaign_path, const json& sim_overrides, int jobs, const Layout& out);

void stage_score(const std::string& campaign_path, const std::string& graph_path, int jobs, const Layout& out);

std::vector<report::BucketReport> stage_report(const std::string& campaign_path, const std::string& graph_path,
                                               const std::string& bucket_filter, const std::vector<NodeId>& nodes,
                                               const Layout& out);

/// All stages in order.
SimulateStats run(const Manifest& manifest);

/// Scores a document of synthetic per-run outcomes
/// `{"runs": {run_id: {observable: {x, tau, d, graded}}}}`.
json score_outcomes(const graph::DecompositionGraph& graph, const json& outcomes_doc);

}  // namespace rebar::pipeline
