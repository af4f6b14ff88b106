#include "rebar/scoring.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace rebar::scoring {

namespace {

const scene::Scene& require_scene(const sim::RunLog& log, std::string_view evaluator) {
  if (!log.scene) fail(std::string(evaluator) + " needs the scene recorded in the run log header");
  return *log.scene;
}

std::string metadata_text(const graph::ObservableSpec& spec, const std::string& key, std::string fallback) {
  auto it = spec.metadata.find(key);
  if (it == spec.metadata.end()) return fallback;
  return to_text(it->second);
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double detection_rate(const graph::ObservableSpec& spec, const sim::RunLog& log) {
  const auto& scene = require_scene(log, "detection_rate");
  const auto role = scene::role_from_string(metadata_text(spec, "role", "target"));
  const double floor = spec.metadata_number("conf_floor", 0.35);
  std::size_t frames = 0, hits = 0;
  for (const auto& t : log.ticks) {
    for (const auto& id : t.in_view) {
      const auto* actor = scene.find(id);
      if (!actor || actor->role != role) continue;
      ++frames;
      const bool hit = std::any_of(t.detections.begin(), t.detections.end(), [&](const sim::DetectionEvent& d) {
        return d.actor_id == id && d.confidence >= floor;
      });
      if (hit) ++hits;
    }
  }
  return ratio(hits, frames);
}

double classification_accuracy(const graph::ObservableSpec& spec, const sim::RunLog& log, scene::Role role,
                               std::string_view correct) {
  const double floor = spec.metadata_number("conf_floor", 0.0);
  std::size_t events = 0, right = 0;
  for (const auto& t : log.ticks)
    for (const auto& d : t.detections) {
      if (d.true_role != role || d.confidence < floor) continue;
      ++events;
      if (d.reported_label == correct) ++right;
    }
  return ratio(right, events);
}

double mark_suppression_compliance(const graph::ObservableSpec& spec, const sim::RunLog& log) {
  const auto& scene = require_scene(log, "mark_suppression_compliance");
  const double radius = spec.metadata_number("safety_radius_m", 50.0);
  std::size_t marks = 0, violations = 0;
  for (const auto& t : log.ticks)
    for (const auto& d : t.decisions) {
      if (d.kind != sim::DecisionKind::MarkTarget) continue;
      if (!d.subject) fail("mark_target decision without a subject at tick " + std::to_string(t.index));
      const auto* subject = scene.find(*d.subject);
      if (!subject) fail("mark_target subject '" + *d.subject + "' is not in the scene");
      ++marks;
      const bool near = std::any_of(scene.actors.begin(), scene.actors.end(), [&](const scene::Actor& a) {
        return a.role == scene::Role::Bystander && scene::distance(a.position, subject->position) <= radius;
      });
      if (near) ++violations;
    }
  return marks == 0 ? 1.0 : 1.0 - ratio(violations, marks);
}

double mission_complete(const sim::RunLog& log) {
  const auto& scene = require_scene(log, "mission_complete");
  if (log.outcome != sim::Outcome::Completed) return 0.0;
  for (const auto& t : log.ticks)
    for (const auto& d : t.decisions) {
      if (d.kind != sim::DecisionKind::MarkTarget || !d.subject) continue;
      const auto* subject = scene.find(*d.subject);
      if (subject && subject->role == scene::Role::Target) return 1.0;
    }
  return 0.0;
}

}  // namespace

double evaluate(const graph::ObservableSpec& spec, const sim::RunLog& log) {
  if (!log.outcome) fail("run log '" + log.realization_id + "' is incomplete (no footer)");
  switch (spec.evaluator) {
    case graph::EvaluatorKind::DetectionRate:
      return detection_rate(spec, log);
    case graph::EvaluatorKind::ClassificationAccuracyBystander:
      return classification_accuracy(spec, log, scene::Role::Bystander, "bystander");
    case graph::EvaluatorKind::ClassificationAccuracyAdversary:
      return classification_accuracy(spec, log, scene::Role::Target, "target");
    case graph::EvaluatorKind::MarkSuppressionCompliance:
      return mark_suppression_compliance(spec, log);
    case graph::EvaluatorKind::MissionComplete:
      return mission_complete(log);
  }
  fail("unregistered evaluator for " + spec.id);
}

ObservableOutcome grade(const NodeId& observable, double x, double tau, bool graded, double d) {
  ObservableOutcome o;
  o.observable = observable;
  o.x = x;
  o.tau = tau;
  o.graded = graded;
  o.d = d;
  o.passed = x >= tau;
  o.delta = graded && o.passed ? 4.0 * (x - tau) : 0.0;
  o.s = o.passed ? d + o.delta : kNaN;
  return o;
}

ObservableOutcome evaluate_observable(const graph::ObservableSpec& spec, const sim::RunLog& log, double d) {
  return grade(spec.id, evaluate(spec, log), spec.tau, spec.graded, d);
}

std::vector<ObservableOutcome> evaluate_run(const graph::DecompositionGraph& graph, const sim::RunLog& log,
                                            const orchestrator::Signature& signature) {
  std::vector<ObservableOutcome> out;
  for (const auto& id : graph.observables()) {
    auto it = signature.find(id);
    const double d = it == signature.end() ? 0.0 : it->second;
    out.push_back(evaluate_observable(graph.spec(id), log, d));
  }
  return out;
}

RunScores score_run(const graph::DecompositionGraph& graph, const std::vector<ObservableOutcome>& outcomes,
                    const std::string& run_id) {
  std::map<NodeId, const ObservableOutcome*> by_leaf;
  for (const auto& o : outcomes) {
    if (!graph.contains(o.observable) || graph.node(o.observable).level != graph::Level::Observable)
      fail("outcome for unknown observable '" + o.observable + "'");
    if (!by_leaf.emplace(o.observable, &o).second) fail("duplicate outcome for '" + o.observable + "'");
  }
  for (const auto& id : graph.observables())
    if (!by_leaf.count(id)) fail("run '" + run_id + "' has no outcome for observable '" + id + "'");

  // Leaf sets are memoized bottom-up so diamonds are counted once.
  std::map<NodeId, std::set<NodeId>> leaves;
  std::set<NodeId> active;
  std::function<const std::set<NodeId>&(const NodeId&)> leaf_set = [&](const NodeId& id) -> const std::set<NodeId>& {
    if (auto it = leaves.find(id); it != leaves.end()) return it->second;
    if (!active.insert(id).second) fail("cycle through '" + id + "'");
    std::set<NodeId> acc;
    if (graph.node(id).level == graph::Level::Observable) acc.insert(id);
    for (const auto& c : graph.children(id)) {
      const auto& sub = leaf_set(c);
      acc.insert(sub.begin(), sub.end());
    }
    active.erase(id);
    return leaves.emplace(id, std::move(acc)).first->second;
  };

  RunScores scores;
  for (const auto& [id, node] : graph.nodes()) {
    NodeScore ns;
    ns.node = id;
    ns.run_id = run_id;
    for (const auto& leaf : leaf_set(id)) {
      ++ns.n_total;
      const double s = by_leaf.at(leaf)->s;
      if (std::isnan(s)) continue;
      ++ns.n_success;
      ns.score = std::isnan(ns.score) ? s : std::min(ns.score, s);
    }
    ns.confidence = ns.n_total == 0 ? 0.0 : static_cast<double>(ns.n_success) / ns.n_total;
    scores.emplace(id, ns);
  }
  return scores;
}

std::map<NodeId, ArlAggregate> aggregate(const std::vector<RunScores>& per_run, const std::string& bucket) {
  if (per_run.empty()) fail("aggregate over an empty run list");
  std::vector<const RunScores*> runs;
  for (const auto& r : per_run) runs.push_back(&r);
  auto run_id = [](const RunScores* r) { return r->empty() ? std::string{} : r->begin()->second.run_id; };
  std::stable_sort(runs.begin(), runs.end(), [&](auto* a, auto* b) { return run_id(a) < run_id(b); });

  std::map<NodeId, ArlAggregate> out;
  for (const auto& [id, first] : *runs.front()) {
    ArlAggregate a;
    a.node = id;
    a.bucket = bucket;
    double sum = 0.0, conf = 0.0;
    int scored = 0;
    for (const auto* r : runs) {
      auto it = r->find(id);
      if (it == r->end()) fail("run '" + run_id(r) + "' has no score for node '" + id + "'");
      const auto& ns = it->second;
      a.score_distribution.push_back(ns.score);
      conf += ns.confidence;
      if (!std::isnan(ns.score)) {
        sum += ns.score;
        ++scored;
      }
    }
    a.runs = static_cast<int>(runs.size());
    a.arl_score = scored == 0 ? kNaN : sum / scored;
    a.arl_confidence = conf / a.runs;
    out.emplace(id, std::move(a));
  }
  for (const auto* r : runs)
    if (r->size() != out.size()) fail("run '" + run_id(r) + "' was scored against a different graph");
  return out;
}

json to_json(const ObservableOutcome& o) {
  return {{"x", round_to(o.x, 6)},         {"tau", o.tau},   {"graded", o.graded},
          {"passed", o.passed},            {"d", round_to(o.d, 4)},
          {"delta", round_to(o.delta, 4)}, {"s", score_to_json(o.s)}};
}

ObservableOutcome outcome_from_json(const NodeId& id, const json& j) {
  try {
    return grade(id, j.at("x").get<double>(), j.at("tau").get<double>(), j.value("graded", false),
                 j.at("d").get<double>());
  } catch (const json::exception& e) {
    fail("malformed outcome for '" + id + "': " + e.what());
  }
}

json outcomes_to_json(const std::vector<ObservableOutcome>& outcomes) {
  json j = json::object();
  for (const auto& o : outcomes) j[o.observable] = to_json(o);
  return j;
}

std::vector<ObservableOutcome> outcomes_from_json(const json& j) {
  if (!j.is_object()) fail("outcome document must be an object keyed by observable");
  std::vector<ObservableOutcome> out;
  for (const auto& [id, v] : j.items()) out.push_back(outcome_from_json(id, v));
  return out;
}

json to_json(const NodeScore& s) {
  return {{"score", score_to_json(s.score)},
          {"confidence", round_to(s.confidence, 4)},
          {"n_success", s.n_success},
          {"n_total", s.n_total}};
}

json to_json(const RunScores& scores) {
  json j = json::object();
  for (const auto& [id, s] : scores) j[id] = to_json(s);
  return j;
}

RunScores run_scores_from_json(const std::string& run_id, const json& j) {
  if (!j.is_object()) fail("score document for '" + run_id + "' must be an object");
  RunScores out;
  try {
    for (const auto& [id, v] : j.items()) {
      NodeScore s;
      s.node = id;
      s.run_id = run_id;
      s.score = score_from_json(v.at("score"));
      s.n_success = v.at("n_success").get<int>();
      s.n_total = v.at("n_total").get<int>();
      s.confidence = s.n_total == 0 ? 0.0 : static_cast<double>(s.n_success) / s.n_total;
      out.emplace(id, s);
    }
  } catch (const json::exception& e) {
    fail("malformed score document for '" + run_id + "': " + e.what());
  }
  return out;
}

json to_json(const ArlAggregate& a) {
  json dist = json::array();
  for (double v : a.score_distribution) dist.push_back(score_to_json(v));
  return {{"runs", a.runs},
          {"arl_score", score_to_json(a.arl_score)},
          {"arl_confidence", round_to(a.arl_confidence, 4)},
          {"score_distribution", dist},
          {"bucket", a.bucket}};
}

}  // namespace rebar::scoring
