#include <doctest.h>

#include <regex>

#include "rebar/report.hpp"
#include "support.hpp"

using namespace rebar;
using namespace rebar::report;

namespace {

graph::DecompositionGraph two_run_graph() { return graph::parse_graph(read_file(testing::data_path("two_run_graph.json"))); }

// One bucket per signature, `sizes[i]` runs in bucket i.
orchestrator::Campaign synthetic_campaign(const std::vector<int>& sizes) {
  orchestrator::Campaign c;
  int n = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const orchestrator::Signature sig{{"OBS1", 10.0 + b}, {"OBS2", 80.0}, {"OBS3", 50.0}};
    for (int i = 0; i < sizes[b]; ++i) {
      orchestrator::Realization r;
      r.id = "r" + std::to_string(n++);
      r.difficulty_signature = sig;
      r.bucket = orchestrator::signature_key(sig);
      c.buckets[r.bucket].push_back(r.id);
      c.realizations.push_back(r);
    }
  }
  return c;
}

// Scores every run of every bucket with all leaves passing at x.
BucketAggregates aggregates_for(const orchestrator::Campaign& c, const graph::DecompositionGraph& g, double x) {
  BucketAggregates out;
  for (const auto& [key, ids] : c.buckets) {
    std::vector<scoring::RunScores> runs;
    for (const auto& id : ids) {
      const auto& sig = c.find(id).difficulty_signature;
      std::vector<scoring::ObservableOutcome> o;
      for (const auto& [leaf, d] : sig) o.push_back(scoring::grade(leaf, x, 0.5, false, d));
      runs.push_back(scoring::score_run(g, o, id));
    }
    out[key] = scoring::aggregate(runs, key);
  }
  return out;
}

std::map<std::string, double> confidence_bar_heights(const std::string& svg) {
  std::map<std::string, double> out;
  const std::regex panel(R"re(<g class="panel" data-node="([^"]+)">([\s\S]*?)</g>)re");
  const std::regex bar(R"re(<rect class="confidence"[^>]*height="([0-9.]+)")re");
  for (std::sregex_iterator it(svg.begin(), svg.end(), panel), end; it != end; ++it) {
    const std::string body = (*it)[2];
    std::smatch m;
    if (std::regex_search(body, m, bar)) out[(*it)[1]] = std::stod(m[1]);
  }
  return out;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  const auto q = quantiles({1, 2, 3, 4});
  CHECK(q.min == 1);
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q75 == doctest::Approx(3.25));
  CHECK(q.max == 4);
  const auto one = quantiles({7, scoring::kNaN});
  CHECK(one.min == 7);
  CHECK(one.q25 == 7);
  CHECK(one.max == 7);
  CHECK(std::isnan(quantiles({scoring::kNaN}).median));
  CHECK(std::isnan(quantiles({}).min));
}

TEST_CASE("bucket report carries the aggregate and the binding difficulty") {
  const auto g = two_run_graph();
  const auto doc = json::parse(read_file(testing::data_path("two_run_outcomes.json")));
  orchestrator::Campaign c;
  const orchestrator::Signature sig{{"OBS1", 30.0}, {"OBS2", 80.0}, {"OBS3", 50.0}};
  const auto key = orchestrator::signature_key(sig);
  std::vector<scoring::RunScores> runs;
  for (const auto& [id, outcomes] : doc.at("runs").items()) {
    orchestrator::Realization r;
    r.id = id;
    r.difficulty_signature = sig;
    r.bucket = key;
    c.realizations.push_back(r);
    c.buckets[key].push_back(id);
    runs.push_back(scoring::score_run(g, scoring::outcomes_from_json(outcomes), id));
  }
  const auto reports = build_report(c, g, {{key, scoring::aggregate(runs, key)}});
  REQUIRE(reports.size() == 1);
  const auto& ka = reports[0].per_node.at("KA1");
  CHECK(reports[0].n_runs == 2);
  CHECK(ka.arl_score == 40);
  CHECK(ka.arl_confidence == doctest::Approx(0.8333).epsilon(1e-4));
  CHECK(ka.difficulty == 30);
  CHECK(reports[0].per_node.at("VAB2").difficulty == 50);
  CHECK(ka.distribution.min == 30);
  CHECK(ka.distribution.max == 50);
  const auto j = to_json(reports);
  CHECK(j.at("bucket_count") == 1);
  CHECK(j.at("buckets")[0].at("nodes").at("KA1").at("arl_confidence") == 0.8333);
}

TEST_CASE("zero variance collapses the box") {
  const auto g = two_run_graph();
  const auto c = synthetic_campaign({3});
  const auto reports = build_report(c, g, aggregates_for(c, g, 0.9));
  const auto& d = reports[0].per_node.at("KA1").distribution;
  CHECK(d.min == d.max);
  CHECK(d.q25 == d.q75);
  const auto svg = render_svg(reports, {"KA1"});
  CHECK(svg.find("class=\"box\"") != std::string::npos);
  CHECK(std::regex_search(svg, std::regex(R"(class="box"[^>]*height="0.00")")));
}

TEST_CASE("missing or foreign buckets are errors") {
  const auto g = two_run_graph();
  const auto c = synthetic_campaign({1, 1});
  auto agg = aggregates_for(c, g, 0.9);
  auto missing = agg;
  missing.erase(missing.begin());
  CHECK_THROWS_AS(build_report(c, g, missing), Error);
  auto extra = agg;
  extra["nowhere"] = agg.begin()->second;
  CHECK_THROWS_AS(build_report(c, g, extra), Error);
}

TEST_CASE("top:k keeps the most populated buckets in key order") {
  const auto g = two_run_graph();
  const std::vector<int> sizes{1, 5, 2, 5, 3, 1, 4, 2, 6, 1, 2, 3};
  const auto c = synthetic_campaign(sizes);
  const auto reports = build_report(c, g, aggregates_for(c, g, 0.9));
  REQUIRE(reports.size() == 12);
  const auto top = filter_buckets(reports, "top:8");
  REQUIRE(top.size() == 8);
  // Sizes sorted: 6 5 5 4 3 3 2 2 | 2 1 1 1; the third 2 loses on key order.
  int min_kept = 100;
  for (const auto& r : top) min_kept = std::min(min_kept, r.n_runs);
  CHECK(min_kept == 2);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].bucket_key < top[i].bucket_key);
  CHECK(filter_buckets(reports, "top:50").size() == 12);
  CHECK(filter_buckets(reports, "all").size() == 12);
  CHECK_THROWS_AS(filter_buckets(reports, "top:0"), Error);
  CHECK_THROWS_AS(filter_buckets(reports, "best"), Error);
}

TEST_CASE("svg is byte-stable and panels follow the node filter") {
  const auto g = two_run_graph();
  const auto c = synthetic_campaign({2, 3});
  const auto reports = build_report(c, g, aggregates_for(c, g, 0.9));
  const auto a = render_svg(reports, {"VAB2", "KA1"});
  CHECK(a == render_svg(reports, {"VAB2", "KA1"}));
  CHECK(a.find("data-node=\"VAB2\"") < a.find("data-node=\"KA1\""));
  CHECK(a.find("data-node=\"ROOT\"") == std::string::npos);
  CHECK(a.find("N=3") != std::string::npos);
  CHECK(render_svg(reports, {}).find("data-node=\"ROOT\"") != std::string::npos);
  CHECK_THROWS_AS(render_svg(reports, {"nope"}), Error);
  CHECK_THROWS_AS(render_svg({}, {}), Error);
}

TEST_CASE("confidence bar height tracks confidence") {
  const auto g = two_run_graph();
  const auto c = synthetic_campaign({4});
  auto agg = aggregates_for(c, g, 0.9);
  auto& nodes = agg.begin()->second;
  nodes.at("VAB1").arl_confidence = 0.2;
  nodes.at("VAB2").arl_confidence = 0.9;
  const auto svg = render_svg(build_report(c, g, agg), {"VAB1", "VAB2"});
  const auto h = confidence_bar_heights(svg);
  REQUIRE(h.size() == 2);
  CHECK(h.at("VAB1") < h.at("VAB2"));
  CHECK(h.at("VAB2") / h.at("VAB1") == doctest::Approx(4.5).epsilon(0.01));
}

TEST_CASE("report json re-derives from the aggregates") {
  const auto g = two_run_graph();
  const auto c = synthetic_campaign({2, 1, 3});
  const auto agg = aggregates_for(c, g, 0.7);
  const auto j = to_json(build_report(c, g, agg));
  for (const auto& b : j.at("buckets")) {
    const auto& a = agg.at(b.at("bucket").get<std::string>());
    for (const auto& [id, node] : b.at("nodes").items()) {
      CHECK(node.at("arl_score") == score_to_json(a.at(id).arl_score));
      CHECK(b.at("n_runs") == a.at(id).runs);
    }
  }
}
