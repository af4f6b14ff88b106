#include "rebar/pipeline.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "rebar/scenario.hpp"
#include "rebar/scene.hpp"
#include "rebar/sim.hpp"

namespace rebar::pipeline {

namespace fs = std::filesystem;

namespace {

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail("malformed JSON in " + path + ": " + e.what());
  }
}

// Re-throws with the stage and realization prepended, keeping the error kind.
template <typename F>
void in_stage(std::string_view stage, const std::string& id, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + " [" + id + "]: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Validation, std::string(stage) + " [" + id + "]: " + e.what());
  }
}

bool log_reusable(const std::string& path, const orchestrator::Realization& r, const json& config) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return false;
  try {
    const auto log = sim::parse_run_log(read_file(path));
    return log.outcome && log.realization_id == r.id && log.seed == r.seed && log.config &&
           sim::to_json(*log.config) == config;
  } catch (const Error&) {
    return false;
  }
}

std::string resolve(const fs::path& dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path.string() : (dir / path).lexically_normal().string();
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void Manifest::validate() const {
  if (jobs < 1) fail("manifest jobs must be at least 1");
  for (const auto* p : {&graph, &scenario}) {
    std::error_code ec;
    if (p->empty() || !fs::exists(*p, ec)) fail_io("manifest references a missing file: " + *p);
  }
  if (roles) {
    std::error_code ec;
    if (!fs::exists(*roles, ec)) fail_io("manifest references a missing file: " + *roles);
  }
  orchestrator::Strategy::parse(strategy, range_steps);
  if (!sim.is_object()) fail("manifest sim overrides must be an object");
  sim::apply_overrides({}, sim);
}

Manifest load_manifest(const std::string& path) {
  const json j = read_json(path);
  const fs::path dir = fs::path(path).parent_path();
  Manifest m;
  try {
    m.graph = resolve(dir, j.at("graph").get<std::string>());
    m.scenario = resolve(dir, j.at("scenario").get<std::string>());
    if (j.contains("roles")) m.roles = resolve(dir, j.at("roles").get<std::string>());
    m.strategy = j.value("strategy", m.strategy);
    if (j.contains("range_steps")) m.range_steps = j.at("range_steps").get<int>();
    m.seed = j.value("seed", m.seed);
    m.sim = j.value("sim", json::object());
    m.out = resolve(dir, j.value("out", m.out));
    m.jobs = j.value("jobs", m.jobs);
    m.buckets = j.value("buckets", m.buckets);
    m.nodes = j.value("nodes", m.nodes);
  } catch (const json::exception& e) {
    fail("malformed manifest " + path + ": " + e.what());
  }
  return m;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs < 1) fail("jobs must be at least 1");
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

graph::DecompositionGraph load_graph(const std::string& path) { return graph::parse_graph(read_file(path)); }

void stage_parse(const std::string& scenario_path, const std::optional<std::string>& roles_path, const Layout& out) {
  auto base = scenario::parse_scenario(read_file(scenario_path));
  if (roles_path) scenario::apply_roles(base, read_file(*roles_path));
  write_file_atomic(out.base(), dump(scenario::to_json(base)));
}

orchestrator::Campaign stage_expand(const std::string& base_path, const std::string& graph_path,
                                    const orchestrator::Strategy& strategy, std::uint64_t seed, const Layout& out) {
  const auto graph = load_graph(graph_path);
  const auto base = scenario::base_from_json(read_json(base_path));
  auto campaign = orchestrator::expand(base, strategy, seed, graph);
  for (auto& r : campaign.realizations) in_stage("place", r.id, [&] { r.scene = scene::place(r, r.constraints); });
  for (const auto& r : campaign.realizations) write_file_atomic(out.simspec(r.id), dump(orchestrator::to_json(r)));
  write_file_atomic(out.campaign(), dump(orchestrator::to_json(campaign)));
  return campaign;
}

SimulateStats stage_simulate(const std::string& campaign_path, const json& sim_overrides, int jobs, const Layout& out) {
  const auto campaign = orchestrator::campaign_from_json(read_json(campaign_path));
  std::atomic<std::size_t> simulated{0}, reused{0};
  parallel_for(campaign.realizations.size(), jobs, [&](std::size_t i) {
    const auto& r = campaign.realizations[i];
    in_stage("simulate", r.id, [&] {
      if (!r.scene) fail("realization has no placed scene");
      const auto config = sim::config_for(r, sim_overrides);
      const auto path = out.log(r.id);
      if (log_reusable(path, r, sim::to_json(config))) {
        ++reused;
        return;
      }
      auto log = sim::run(*r.scene, config, r.seed, r.id);
      log.params = r.params;
      write_file_atomic(path, sim::serialize(log));
      ++simulated;
    });
  });
  return {simulated.load(), reused.load()};
}

void stage_score(const std::string& campaign_path, const std::string& graph_path, int jobs, const Layout& out) {
  const auto graph = load_graph(graph_path);
  const auto campaign = orchestrator::campaign_from_json(read_json(campaign_path));
  parallel_for(campaign.realizations.size(), jobs, [&](std::size_t i) {
    const auto& r = campaign.realizations[i];
    in_stage("score", r.id, [&] {
      const auto log = sim::parse_run_log(read_file(out.log(r.id)));
      if (log.realization_id != r.id) fail("log belongs to '" + log.realization_id + "'");
      const auto outcomes = scoring::evaluate_run(graph, log, r.difficulty_signature);
      const auto scores = scoring::score_run(graph, outcomes, r.id);
      json doc{{"run_id", r.id},
               {"bucket", r.bucket},
               {"outcomes", scoring::outcomes_to_json(outcomes)},
               {"nodes", scoring::to_json(scores)}};
      write_file_atomic(out.scores(r.id), dump(doc));
    });
  });
}

std::vector<report::BucketReport> stage_report(const std::string& campaign_path, const std::string& graph_path,
                                               const std::string& bucket_filter, const std::vector<NodeId>& nodes,
                                               const Layout& out) {
  const auto graph = load_graph(graph_path);
  const auto campaign = orchestrator::campaign_from_json(read_json(campaign_path));
  report::BucketAggregates aggregates;
  for (const auto& [key, members] : campaign.buckets) {
    std::vector<scoring::RunScores> runs;
    for (const auto& id : members)
      in_stage("report", id, [&] {
        const json doc = read_json(out.scores(id));
        runs.push_back(scoring::run_scores_from_json(id, doc.at("nodes")));
      });
    aggregates[key] = scoring::aggregate(runs, key);
  }
  const auto reports = report::filter_buckets(report::build_report(campaign, graph, aggregates), bucket_filter);
  write_file_atomic(out.report(), dump(report::to_json(reports)));
  write_file_atomic(out.svg(), report::render_svg(reports, nodes));
  return reports;
}

SimulateStats run(const Manifest& m) {
  m.validate();
  const Layout out{m.out};
  stage_parse(m.scenario, m.roles, out);
  stage_expand(out.base(), m.graph, orchestrator::Strategy::parse(m.strategy, m.range_steps), m.seed, out);
  const auto stats = stage_simulate(out.campaign(), m.sim, m.jobs, out);
  stage_score(out.campaign(), m.graph, m.jobs, out);
  stage_report(out.campaign(), m.graph, m.buckets, m.nodes, out);
  return stats;
}

json score_outcomes(const graph::DecompositionGraph& graph, const json& doc) {
  if (!doc.is_object() || !doc.contains("runs") || !doc.at("runs").is_object())
    fail("outcome fixture must have a 'runs' object");
  std::vector<scoring::RunScores> runs;
  json per_run = json::object();
  for (const auto& [run_id, outcomes] : doc.at("runs").items()) {
    auto scores = scoring::score_run(graph, scoring::outcomes_from_json(outcomes), run_id);
    per_run[run_id] = scoring::to_json(scores);
    runs.push_back(std::move(scores));
  }
  json agg = json::object();
  for (const auto& [id, a] : scoring::aggregate(runs)) agg[id] = scoring::to_json(a);
  return {{"runs", per_run}, {"aggregate", agg}};
}

}  // namespace rebar::pipeline
