#include "rebar/report.hpp"

#include <algorithm>
#include <cmath>

namespace rebar::report {

namespace {

json quantiles_to_json(const Quantiles& q) {
  return {{"min", score_to_json(q.min)},
          {"q25", score_to_json(q.q25)},
          {"median", score_to_json(q.median)},
          {"q75", score_to_json(q.q75)},
          {"max", score_to_json(q.max)}};
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string n2(double v) { return format_fixed(v, 2); }

// Panel geometry, px.
constexpr double kLeft = 60, kRight = 60, kTop = 40, kPlotH = 200, kBottom = 50, kColumn = 56, kBox = 22;

}  // namespace

Quantiles quantiles(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (!std::isnan(x)) v.push_back(x);
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double h = (v.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

std::vector<BucketReport> build_report(const orchestrator::Campaign& campaign, const graph::DecompositionGraph& graph,
                                       const BucketAggregates& aggregates) {
  std::vector<BucketReport> out;
  for (const auto& [key, members] : campaign.buckets) {
    auto it = aggregates.find(key);
    if (it == aggregates.end() || it->second.empty() || it->second.begin()->second.runs == 0)
      fail("bucket '" + key + "' has no scored runs");
    BucketReport br;
    br.bucket_key = key;
    br.n_runs = it->second.begin()->second.runs;
    br.signature = campaign.find(members.front()).difficulty_signature;
    for (const auto& [id, agg] : it->second) {
      NodeSummary ns;
      bool any = false;
      for (const auto& leaf : graph::reachable_leaves(graph, id)) {
        auto s = br.signature.find(leaf);
        if (s == br.signature.end()) continue;
        ns.difficulty = any ? std::min(ns.difficulty, s->second) : s->second;
        any = true;
      }
      ns.arl_score = agg.arl_score;
      ns.arl_confidence = agg.arl_confidence;
      ns.distribution = quantiles(agg.score_distribution);
      br.per_node.emplace(id, ns);
    }
    out.push_back(std::move(br));
  }
  for (const auto& [key, agg] : aggregates)
    if (!campaign.buckets.count(key)) fail("aggregates name bucket '" + key + "' which is not in the campaign");
  return out;
}

std::vector<BucketReport> filter_buckets(const std::vector<BucketReport>& reports, std::string_view filter) {
  if (filter.empty() || filter == "all") return reports;
  if (filter.rfind("top:", 0) != 0) fail("bucket filter must be 'all' or 'top:k'");
  double k = 0;
  if (!parse_number(filter.substr(4), k) || k < 1 || k != std::floor(k)) fail("bucket filter top:k needs k >= 1");
  std::vector<const BucketReport*> order;
  for (const auto& r : reports) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) {
    if (a->n_runs != b->n_runs) return a->n_runs > b->n_runs;
    return a->bucket_key < b->bucket_key;
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(k)));
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->bucket_key < b->bucket_key; });
  std::vector<BucketReport> out;
  for (auto* r : order) out.push_back(*r);
  return out;
}

json to_json(const std::vector<BucketReport>& reports) {
  json buckets = json::array();
  for (const auto& r : reports) {
    json nodes = json::object();
    for (const auto& [id, ns] : r.per_node)
      nodes[id] = {{"difficulty", round_to(ns.difficulty, 4)},
                   {"arl_score", score_to_json(ns.arl_score)},
                   {"arl_confidence", round_to(ns.arl_confidence, 4)},
                   {"distribution", quantiles_to_json(ns.distribution)}};
    json sig = json::object();
    for (const auto& [id, d] : r.signature) sig[id] = round_to(d, 4);
    buckets.push_back({{"bucket", r.bucket_key}, {"n_runs", r.n_runs}, {"signature", sig}, {"nodes", nodes}});
  }
  return {{"buckets", buckets}, {"bucket_count", reports.size()}};
}

std::string render_svg(const std::vector<BucketReport>& reports, const std::vector<NodeId>& nodes) {
  if (reports.empty()) fail("nothing to render: no buckets");
  std::vector<NodeId> panels;
  for (const auto& [id, ns] : reports.front().per_node)
    if (nodes.empty() || std::find(nodes.begin(), nodes.end(), id) != nodes.end()) panels.push_back(id);
  if (!nodes.empty()) {
    std::vector<NodeId> ordered;
    for (const auto& want : nodes)
      if (std::find(panels.begin(), panels.end(), want) != panels.end()) ordered.push_back(want);
    panels = ordered;
  }
  if (panels.empty()) fail("node filter matches no node in the report");

  const double panel_w = kLeft + kRight + kColumn * reports.size();
  const double panel_h = kTop + kPlotH + kBottom;
  const double width = panel_w;
  const double height = panel_h * panels.size();
  auto y_score = [](double top, double v) { return top + kTop + kPlotH * (1.0 - std::clamp(v, 0.0, 104.0) / 104.0); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + n2(width) + "\" height=\"" + n2(height) +
       "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& id = panels[p];
    const double top = panel_h * p;
    const double y0 = top + kTop, y1 = top + kTop + kPlotH;
    const double x0 = kLeft, x1 = panel_w - kRight;
    s += "<g class=\"panel\" data-node=\"" + escape(id) + "\">\n";
    s += "<text x=\"" + n2(x0) + "\" y=\"" + n2(top + 20) + "\" font-size=\"13\">" + escape(id) + "</text>\n";
    s += "<rect x=\"" + n2(x0) + "\" y=\"" + n2(y0) + "\" width=\"" + n2(x1 - x0) + "\" height=\"" + n2(kPlotH) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int tick = 0; tick <= 100; tick += 20) {
      const double y = y_score(top, tick);
      s += "<text x=\"" + n2(x0 - 6) + "\" y=\"" + n2(y + 3) + "\" text-anchor=\"end\">" + std::to_string(tick) +
           "</text>\n";
      s += "<text x=\"" + n2(x1 + 6) + "\" y=\"" + n2(y + 3) + "\">" + format_fixed(tick / 100.0, 1) +
           "</text>\n";
    }
    s += "<text x=\"" + n2(14) + "\" y=\"" + n2((y0 + y1) / 2) + "\" transform=\"rotate(-90 14 " +
         n2((y0 + y1) / 2) + ")\" text-anchor=\"middle\">score / difficulty</text>\n";
    s += "<text x=\"" + n2(panel_w - 14) + "\" y=\"" + n2((y0 + y1) / 2) + "\" transform=\"rotate(90 " +
         n2(panel_w - 14) + " " + n2((y0 + y1) / 2) + ")\" text-anchor=\"middle\">confidence</text>\n";

    for (std::size_t b = 0; b < reports.size(); ++b) {
      const auto& r = reports[b];
      auto it = r.per_node.find(id);
      if (it == r.per_node.end()) continue;
      const auto& ns = it->second;
      const double cx = x0 + kColumn * (b + 0.5);
      const double bar_h = (y1 - y_score(top, 100.0)) * std::clamp(ns.arl_confidence, 0.0, 1.0);
      s += "<rect class=\"confidence\" data-bucket=\"" + escape(r.bucket_key) + "\" x=\"" + n2(cx - kBox / 2 - 4) +
           "\" y=\"" + n2(y1 - bar_h) + "\" width=\"" + n2(kBox + 8) + "\" height=\"" + n2(bar_h) +
           "\" fill=\"#9ecae1\" fill-opacity=\"0.5\"/>\n";
      const auto& q = ns.distribution;
      if (!std::isnan(q.min)) {
        s += "<line class=\"whisker\" x1=\"" + n2(cx) + "\" y1=\"" + n2(y_score(top, q.min)) + "\" x2=\"" + n2(cx) +
             "\" y2=\"" + n2(y_score(top, q.max)) + "\" stroke=\"#1f4e9c\"/>\n";
        const double box_top = y_score(top, q.q75), box_bot = y_score(top, q.q25);
        s += "<rect class=\"box\" x=\"" + n2(cx - kBox / 2) + "\" y=\"" + n2(box_top) + "\" width=\"" + n2(kBox) +
             "\" height=\"" + n2(box_bot - box_top) + "\" fill=\"#3182bd\" fill-opacity=\"0.6\" stroke=\"#1f4e9c\"/>\n";
        s += "<line class=\"median\" x1=\"" + n2(cx - kBox / 2) + "\" y1=\"" + n2(y_score(top, q.median)) +
             "\" x2=\"" + n2(cx + kBox / 2) + "\" y2=\"" + n2(y_score(top, q.median)) +
             "\" stroke=\"#08306b\" stroke-width=\"2\"/>\n";
      }
      s += "<circle class=\"difficulty\" cx=\"" + n2(cx) + "\" cy=\"" + n2(y_score(top, ns.difficulty)) +
           "\" r=\"4\" fill=\"#d62728\"/>\n";
      s += "<text x=\"" + n2(cx) + "\" y=\"" + n2(y1 + 14) + "\" text-anchor=\"middle\">B" + std::to_string(b + 1) +
           "</text>\n";
      s += "<text x=\"" + n2(cx) + "\" y=\"" + n2(y1 + 28) + "\" text-anchor=\"middle\">N=" +
           std::to_string(r.n_runs) + "</text>\n";
    }
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace rebar::report
