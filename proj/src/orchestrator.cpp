#include "rebar/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rebar/rng.hpp"

namespace rebar::orchestrator {

namespace {

std::string pad_index(std::size_t i, std::size_t width) {
  std::string s = std::to_string(i);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::vector<std::uint64_t> sample_indices(std::uint64_t total, std::uint64_t k, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = total - k; j < total; ++j) {
    const std::uint64_t t = gen.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

Strategy Strategy::parse(std::string_view text, std::optional<int> range_steps) {
  Strategy s;
  s.range_steps = range_steps;
  auto number_after = [&](std::size_t prefix) {
    double v = 0;
    if (!parse_number(text.substr(prefix), v) || v < 1 || v != std::floor(v))
      fail("strategy '" + std::string(text) + "' needs a positive integer");
    return static_cast<std::uint64_t>(v);
  };
  if (text == "full") {
    s.kind = Kind::FullFactorial;
  } else if (text.rfind("random:", 0) == 0) {
    s.kind = Kind::RandomSample;
    s.sample_count = number_after(7);
  } else if (text.rfind("grid:", 0) == 0) {
    s.kind = Kind::GridSample;
    const auto n = number_after(5);
    if (n < 2) fail("grid strategy needs at least 2 steps");
    s.range_steps = static_cast<int>(n);
  } else {
    fail("unknown strategy '" + std::string(text) + "' (expected full, random:k or grid:n)");
  }
  if (s.range_steps && *s.range_steps < 2) fail("range steps must be at least 2");
  return s;
}

std::string Strategy::to_string() const {
  switch (kind) {
    case Kind::FullFactorial:
      return "full";
    case Kind::RandomSample:
      return "random:" + std::to_string(sample_count);
    case Kind::GridSample:
      return "grid:" + std::to_string(range_steps.value_or(2));
  }
  return "full";
}

const Realization& Campaign::find(std::string_view id) const {
  for (const auto& r : realizations)
    if (r.id == id) return r;
  fail("unknown realization '" + std::string(id) + "'");
}

int to_tension(double difficulty) {
  if (!(difficulty > 0.0)) return 1;
  const int t = static_cast<int>(std::ceil(difficulty / 20.0));
  return std::clamp(t, 1, 5);
}

Signature difficulty_signature(const graph::DecompositionGraph& graph, const ParamMap& params) {
  Signature sig;
  for (const auto& [id, spec] : graph.specs())
    if (graph::factors_bound(spec, params)) sig[id] = graph::observable_difficulty(spec, params);
  return sig;
}

std::string signature_key(const Signature& signature) {
  std::string canonical;
  for (const auto& [id, d] : signature) canonical += id + "=" + format_fixed(d, 4) + ";";
  return "sig-" + hex64(fnv1a64(canonical));
}

std::map<std::string, std::vector<std::string>> bucket_by_signature(const Campaign& campaign) {
  std::map<std::string, std::vector<std::string>> buckets;
  for (const auto& r : campaign.realizations) buckets[signature_key(r.difficulty_signature)].push_back(r.id);
  return buckets;
}

Campaign expand(const scenario::BaseSimSpec& base, const Strategy& strategy, std::uint64_t campaign_seed,
                const graph::DecompositionGraph& graph) {
  Campaign campaign;
  campaign.base = base;
  campaign.strategy = strategy;
  campaign.campaign_seed = campaign_seed;

  std::vector<std::vector<Scalar>> levels;
  for (const auto& slot : base.slots) {
    if (slot.kind == scenario::SlotKind::Range && !strategy.range_steps)
      fail("range slot '" + slot.name + "' has no binding strategy (use grid:n or set range steps)");
    auto values = slot.levels(strategy.range_steps.value_or(2));
    if (values.empty()) fail("slot '" + slot.name + "' has no values");
    for (std::size_t i = 0; i < values.size(); ++i)
      for (std::size_t j = i + 1; j < values.size(); ++j)
        if (values[i] == values[j]) fail("slot '" + slot.name + "' repeats value " + to_text(values[i]));
    levels.push_back(std::move(values));
  }
  const std::uint64_t total = scenario::slot_cardinality(base, strategy.range_steps.value_or(2));

  std::vector<std::uint64_t> indices;
  if (strategy.kind == Strategy::Kind::RandomSample) {
    if (strategy.sample_count > total)
      fail("random sample of " + std::to_string(strategy.sample_count) + " exceeds the " + std::to_string(total) +
           " distinct combinations");
    indices = sample_indices(total, strategy.sample_count, campaign_seed);
  } else {
    indices.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) indices[i] = i;
  }

  const std::size_t width = std::max<std::size_t>(5, std::to_string(indices.empty() ? 0 : indices.size() - 1).size());
  campaign.realizations.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    Realization r;
    r.id = base.id + "-" + pad_index(i, width);
    r.base_id = base.id;
    r.params = base.fixed;
    std::uint64_t rest = indices[i];
    for (std::size_t s = base.slots.size(); s-- > 0;) {
      const auto& values = levels[s];
      r.params[base.slots[s].name] = values[rest % values.size()];
      rest /= values.size();
    }
    r.seed = rng::realization_seed(campaign_seed, i);
    r.difficulty_signature = difficulty_signature(graph, r.params);
    double lowest = 0.0;
    if (!r.difficulty_signature.empty()) {
      lowest = r.difficulty_signature.begin()->second;
      for (const auto& [id, d] : r.difficulty_signature) lowest = std::min(lowest, d);
    }
    r.tension = to_tension(lowest);
    r.bucket = signature_key(r.difficulty_signature);
    r.roles = base.roles;
    r.constraints = base.constraints;
    campaign.realizations.push_back(std::move(r));
  }
  campaign.buckets = bucket_by_signature(campaign);
  return campaign;
}

json to_json(const Realization& r) {
  json constraints = json::array();
  for (const auto& c : r.constraints) constraints.push_back(rebar::to_json(c));
  json j{{"id", r.id},
         {"base_id", r.base_id},
         {"seed", r.seed},
         {"params", params_to_json(r.params)},
         {"difficulty_signature", r.difficulty_signature},
         {"tension", r.tension},
         {"bucket", r.bucket},
         {"roles", r.roles},
         {"constraints", constraints}};
  j["scene"] = r.scene ? scene::to_json(*r.scene) : json(nullptr);
  return j;
}

Realization realization_from_json(const json& j) {
  Realization r;
  try {
    r.id = j.at("id").get<std::string>();
    r.base_id = j.value("base_id", std::string{});
    r.seed = j.at("seed").get<std::uint64_t>();
    r.params = params_from_json(j.at("params"));
    r.difficulty_signature = j.value("difficulty_signature", Signature{});
    r.tension = j.value("tension", 1);
    r.bucket = j.value("bucket", signature_key(r.difficulty_signature));
    r.roles = j.value("roles", std::map<std::string, std::string>{});
    for (const auto& c : j.value("constraints", json::array())) r.constraints.push_back(constraint_from_json(c));
    if (j.contains("scene") && !j.at("scene").is_null()) r.scene = scene::scene_from_json(j.at("scene"));
  } catch (const json::exception& e) {
    fail(std::string("malformed SimSpec: ") + e.what());
  }
  return r;
}

json to_json(const Campaign& c) {
  json realizations = json::array();
  for (const auto& r : c.realizations) realizations.push_back(to_json(r));
  json j{{"base", scenario::to_json(c.base)},
         {"strategy", c.strategy.to_string()},
         {"campaign_seed", c.campaign_seed},
         {"realizations", realizations},
         {"buckets", c.buckets},
         {"bucket_count", c.buckets.size()}};
  j["range_steps"] = c.strategy.range_steps ? json(*c.strategy.range_steps) : json(nullptr);
  return j;
}

Campaign campaign_from_json(const json& j) {
  Campaign c;
  try {
    c.base = scenario::base_from_json(j.at("base"));
    std::optional<int> steps;
    if (j.contains("range_steps") && !j.at("range_steps").is_null()) steps = j.at("range_steps").get<int>();
    c.strategy = Strategy::parse(j.at("strategy").get<std::string>(), steps);
    c.campaign_seed = j.at("campaign_seed").get<std::uint64_t>();
    for (const auto& r : j.at("realizations")) c.realizations.push_back(realization_from_json(r));
    c.buckets = j.value("buckets", std::map<std::string, std::vector<std::string>>{});
  } catch (const json::exception& e) {
    fail(std::string("malformed campaign document: ") + e.what());
  }
  return c;
}

}  // namespace rebar::orchestrator
