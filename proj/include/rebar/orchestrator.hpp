#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rebar/common.hpp"
#include "rebar/graph.hpp"
#include "rebar/scenario.hpp"
#include "rebar/scene.hpp"

namespace rebar::orchestrator {

using Signature = std::map<NodeId, double>;

struct Realization {
  std::string id;
  std::string base_id;
  ParamMap params;
  std::uint64_t seed = 0;
  Signature difficulty_signature;
  int tension = 1;
  std::string bucket;
  std::map<std::string, std::string> roles;
  std::vector<PlacementConstraint> constraints;  // carried from the base spec
  std::optional<scene::Scene> scene;
};

struct Strategy {
  enum class Kind { FullFactorial, RandomSample, GridSample };
  Kind kind = Kind::FullFactorial;
  std::uint64_t sample_count = 0;      // random_sample(k)
  std::optional<int> range_steps;      // discretization of range slots

  /// "full", "random:<k>" or "grid:<n>".
  static Strategy parse(std::string_view text, std::optional<int> range_steps = std::nullopt);
  std::string to_string() const;
};

struct Campaign {
  scenario::BaseSimSpec base;
  Strategy strategy;
  std::uint64_t campaign_seed = 0;
  std::vector<Realization> realizations;
  std::map<std::string, std::vector<std::string>> buckets;

  const Realization& find(std::string_view id) const;
};

/// Expands the base spec into realizations in mixed-radix order (last slot
/// fastest). random_sample draws k distinct combination indices without
/// replacement from campaign_seed (Floyd's algorithm) and keeps them in
/// ascending index order.
Campaign expand(const scenario::BaseSimSpec& base, const Strategy& strategy, std::uint64_t campaign_seed,
                const graph::DecompositionGraph& graph);

/// Per-observable difficulty for every observable whose factor rows are all
/// bound to numeric parameters.
Signature difficulty_signature(const graph::DecompositionGraph& graph, const ParamMap& params);

/// ceil(difficulty / 20) clamped to [1, 5].
int to_tension(double difficulty);

/// Canonical bucket key for a signature: "sig-" + FNV-1a of the sorted
/// `observable=difficulty` list (difficulties at 4 decimals).
std::string signature_key(const Signature& signature);

std::map<std::string, std::vector<std::string>> bucket_by_signature(const Campaign& campaign);

json to_json(const Realization& r);
Realization realization_from_json(const json& j);
json to_json(const Campaign& c);
Campaign campaign_from_json(const json& j);

}  // namespace rebar::orchestrator
