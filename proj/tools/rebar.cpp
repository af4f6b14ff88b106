// rebar: command-line driver for the campaign pipeline.

#include <CLI11.hpp>
#include <iostream>

#include "rebar/pipeline.hpp"
#include "rebar/scenario.hpp"

namespace {

using namespace rebar;

std::vector<NodeId> split_nodes(const std::string& csv) {
  std::vector<NodeId> out;
  if (csv.empty()) return out;
  for (auto& s : split(csv, ','))
    if (auto t = trim(s); !t.empty()) out.push_back(t);
  return out;
}

json load_overrides(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail("malformed sim overrides in " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based evaluation campaigns for autonomous agents"};
  app.require_subcommand(1);

  std::string graph_path, scenario_path, roles_path, base_path, campaign_path, out_dir = "out";
  std::string strategy = "full", sim_path, buckets = "all", nodes, manifest_path, outcomes_path;
  int range_steps = 0, jobs = 1;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "Check a decomposition graph");
  validate->add_option("--graph", graph_path, "Graph document")->required();

  auto* parse = app.add_subcommand("parse", "Parse scenario text into base.json");
  parse->add_option("--scenario", scenario_path, "Scenario text")->required();
  parse->add_option("--roles", roles_path, "Role-binding sidecar");
  parse->add_option("--out", out_dir, "Output directory");

  auto* expand = app.add_subcommand("expand", "Expand and place realizations");
  expand->add_option("--base", base_path, "base.json (default <out>/base.json)");
  expand->add_option("--graph", graph_path, "Graph document")->required();
  expand->add_option("--strategy", strategy, "full | random:k | grid:n");
  expand->add_option("--range-steps", range_steps, "Discretization of range slots");
  expand->add_option("--seed", seed, "Campaign seed");
  expand->add_option("--out", out_dir, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Run the surrogate agent on every realization");
  simulate->add_option("--campaign", campaign_path, "campaign.json (default <out>/campaign.json)");
  simulate->add_option("--sim", sim_path, "Sim override document");
  simulate->add_option("--jobs", jobs, "Worker count")->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_dir, "Output directory");

  auto* score = app.add_subcommand("score", "Score run logs, or a document of synthetic outcomes");
  score->add_option("--campaign", campaign_path, "campaign.json (default <out>/campaign.json)");
  score->add_option("--graph", graph_path, "Graph document")->required();
  score->add_option("--outcomes", outcomes_path, "Synthetic outcome document; result goes to stdout");
  score->add_option("--jobs", jobs, "Worker count")->check(CLI::PositiveNumber);
  score->add_option("--out", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Aggregate per bucket and render");
  report->add_option("--campaign", campaign_path, "campaign.json (default <out>/campaign.json)");
  report->add_option("--graph", graph_path, "Graph document")->required();
  report->add_option("--buckets", buckets, "all | top:k");
  report->add_option("--nodes", nodes, "Comma-separated node ids to render");
  report->add_option("--out", out_dir, "Output directory");

  auto* run = app.add_subcommand("run", "Run every stage from a manifest");
  run->add_option("manifest", manifest_path, "Campaign manifest")->required();
  auto* run_seed = run->add_option("--seed", seed, "Override the manifest seed");
  auto* run_jobs = run->add_option("--jobs", jobs, "Override the manifest worker count");
  auto* run_out = run->add_option("--out", out_dir, "Override the manifest output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const pipeline::Layout out{out_dir};
    if (*validate) {
      const auto g = pipeline::load_graph(graph_path);
      std::cout << "ok: " << g.nodes().size() << " nodes, " << g.observables().size() << " observables\n";
    } else if (*parse) {
      pipeline::stage_parse(scenario_path, roles_path.empty() ? std::nullopt : std::optional(roles_path), out);
      std::cout << out.base() << "\n";
    } else if (*expand) {
      const auto steps = range_steps > 0 ? std::optional(range_steps) : std::nullopt;
      const auto c = pipeline::stage_expand(base_path.empty() ? out.base() : base_path, graph_path,
                                            orchestrator::Strategy::parse(strategy, steps), seed, out);
      std::cout << c.realizations.size() << " realizations, " << c.buckets.size() << " buckets\n";
    } else if (*simulate) {
      const auto stats = pipeline::stage_simulate(campaign_path.empty() ? out.campaign() : campaign_path,
                                                  load_overrides(sim_path), jobs, out);
      std::cout << stats.simulated << " simulated, " << stats.reused << " reused\n";
    } else if (*score) {
      if (!outcomes_path.empty()) {
        const auto g = pipeline::load_graph(graph_path);
        std::cout << pipeline::dump(pipeline::score_outcomes(g, json::parse(read_file(outcomes_path))));
      } else {
        pipeline::stage_score(campaign_path.empty() ? out.campaign() : campaign_path, graph_path, jobs, out);
      }
    } else if (*report) {
      const auto r = pipeline::stage_report(campaign_path.empty() ? out.campaign() : campaign_path, graph_path,
                                            buckets, split_nodes(nodes), out);
      std::cout << r.size() << " buckets reported\n";
    } else if (*run) {
      auto m = pipeline::load_manifest(manifest_path);
      if (*run_seed) m.seed = seed;
      if (*run_jobs) m.jobs = jobs;
      if (*run_out) m.out = out_dir;
      const auto stats = pipeline::run(m);
      std::cout << stats.simulated << " simulated, " << stats.reused << " reused; report at " << m.out
                << "/report.json\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::Validation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
