#include "attackmap/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace attackmap {

using nlohmann::ordered_json;

namespace {

std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string asset_name(const Model& model, const AssetId& id) {
  const Asset* asset = model.find_asset(id);
  return asset && !asset->name.empty() ? asset->name : id;
}

std::string protection_name(const Model& model, const ProtectionId& id) {
  const Protection* protection = model.find_protection(id);
  return protection && !protection->name.empty() ? protection->name : id;
}

std::string rtrim(std::string line) {
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

std::string pad(const std::string& text, std::size_t width) {
  // Width is counted in bytes; names are expected to be ASCII.
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

}  // namespace

std::map<CoverageClass, std::string> default_highlight() {
  return {{CoverageClass::unpreventable, "darkred"},
          {CoverageClass::unprotected, "red"},
          {CoverageClass::thin, "orange"},
          {CoverageClass::defended, "darkgreen"}};
}

std::map<EdgeKey, CoverageClass> edge_classes(
    const AttackGraph& graph, const std::map<HazardId, CoverageReport, NaturalLess>& coverage_by_hazard) {
  std::map<EdgeKey, CoverageClass> out;
  for (const auto& edge : graph.edges) {
    std::optional<CoverageClass> worst;
    for (const auto& membership : edge.memberships) {
      auto it = coverage_by_hazard.find(membership.hazard);
      if (it == coverage_by_hazard.end() || membership.chain >= it->second.entries.size()) continue;
      const auto cls = it->second.entries[membership.chain].cls;
      if (!worst || cls < *worst) worst = cls;
    }
    if (worst) out[{edge.from, edge.to, edge.link}] = *worst;
  }
  return out;
}

std::string to_dot(const AttackGraph& graph, const Model& model, const DotOptions& options) {
  std::ostringstream out;
  out << "digraph attack {\n";
  for (const auto& node : graph.nodes)
    out << "  " << dot_quote(node) << " [label=" << dot_quote(asset_name(model, node)) << "];\n";
  for (const auto& edge : graph.edges) {
    std::vector<std::string> attrs{"comment=" + dot_quote(edge.link)};
    if (options.show_protections && !edge.protections.empty()) {
      std::string label;
      for (std::size_t i = 0; i < edge.protections.size(); ++i) {
        if (i) label += '\n';
        label += protection_name(model, edge.protections[i]);
      }
      attrs.push_back("label=" + dot_quote(label));
    }
    if (auto cls = options.edge_classes.find({edge.from, edge.to, edge.link}); cls != options.edge_classes.end())
      if (auto color = options.highlight.find(cls->second); color != options.highlight.end())
        attrs.push_back("color=" + dot_quote(color->second));
    out << "  " << dot_quote(edge.from) << " -> " << dot_quote(edge.to) << " [";
    for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::vector<ChainTableRow> chain_table_rows(const std::vector<AttackChain>& chains) {
  std::vector<ChainTableRow> rows;
  std::map<std::vector<AssetId>, std::size_t> by_sequence;
  for (const auto& chain : chains) {
    auto assets = chain.assets();
    auto [it, inserted] = by_sequence.try_emplace(assets, rows.size());
    if (inserted) rows.push_back({rows.size() + 1, assets, {}});
    auto& row = rows[it->second];
    for (const auto& hop : chain.hops)
      for (const auto& protection : hop.protections)
        if (std::find(row.protections.begin(), row.protections.end(), protection) == row.protections.end())
          row.protections.push_back(protection);
  }
  return rows;
}

std::string chain_table(const std::vector<AttackChain>& chains, const Model& model) {
  struct Rendered {
    std::string item;
    std::string chain;
    std::vector<std::string> protections;
  };
  std::vector<Rendered> rendered;
  for (const auto& row : chain_table_rows(chains)) {
    Rendered r{std::to_string(row.item), {}, {}};
    for (std::size_t i = 0; i < row.assets.size(); ++i) r.chain += (i ? "->" : "") + asset_name(model, row.assets[i]);
    for (const auto& protection : row.protections) r.protections.push_back(protection_name(model, protection));
    rendered.push_back(std::move(r));
  }

  const std::string h1 = "Itemize", h2 = "Chain", h3 = "Protections";
  std::size_t w1 = h1.size(), w2 = h2.size(), w3 = h3.size();
  for (const auto& r : rendered) {
    w1 = std::max(w1, r.item.size());
    w2 = std::max(w2, r.chain.size());
    for (const auto& p : r.protections) w3 = std::max(w3, p.size());
  }

  std::ostringstream out;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c) {
    out << rtrim(pad(a, w1) + " | " + pad(b, w2) + " | " + c) << '\n';
  };
  line(h1, h2, h3);
  out << std::string(w1 + 1, '-') << '+' << std::string(w2 + 2, '-') << '+' << std::string(w3 + 1, '-') << '\n';
  for (const auto& r : rendered) {
    if (r.protections.empty()) {
      line(r.item, r.chain, "");
      continue;
    }
    for (std::size_t i = 0; i < r.protections.size(); ++i)
      line(i == 0 ? r.item : "", i == 0 ? r.chain : "", r.protections[i]);
  }
  return out.str();
}

ordered_json chain_json(const AttackChain& chain) {
  ordered_json hops = ordered_json::array();
  for (const auto& hop : chain.hops)
    hops.push_back({{"from", hop.from},
                    {"to", hop.to},
                    {"link", hop.link},
                    {"direction", to_string(hop.direction)},
                    {"protections", hop.protections}});
  return {{"hazard", chain.hazard},
          {"entry", chain.entry},
          {"target", chain.target},
          {"path", chain_path(chain)},
          {"hops", std::move(hops)},
          {"protection_count", chain.protection_count()},
          {"score", chain.score}};
}

ordered_json chains_json(const std::vector<AttackChain>& chains, std::size_t thin_threshold) {
  ordered_json out = ordered_json::array();
  for (const auto& chain : chains) {
    auto entry = chain_json(chain);
    entry["class"] = to_string(classify(chain, thin_threshold));
    out.push_back(std::move(entry));
  }
  return out;
}

ordered_json coverage_json(const CoverageReport& report) {
  ordered_json entries = ordered_json::array();
  for (const auto& entry : report.entries) {
    auto item = chain_json(entry.chain);
    item["class"] = to_string(entry.cls);
    entries.push_back(std::move(item));
  }
  ordered_json detection = ordered_json::array();
  for (const auto& chain : report.detection_required) detection.push_back(chain_json(chain));
  return {{"summary",
           {{"unpreventable", report.summary.unpreventable},
            {"unprotected", report.summary.unprotected},
            {"thin", report.summary.thin},
            {"defended", report.summary.defended}}},
          {"entries", std::move(entries)},
          {"detection_required", std::move(detection)}};
}

ordered_json ranking_json(const ProtectionRanking& ranking) {
  ordered_json entries = ordered_json::array();
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const auto& entry = ranking.entries[i];
    entries.push_back({{"rank", i + 1},
                       {"protection", entry.protection},
                       {"chains_broken", entry.chains_broken},
                       {"weighted_score", entry.weighted_score}});
  }
  ordered_json uncut = ordered_json::array();
  for (const auto& chain : ranking.uncut_chains) uncut.push_back(chain_json(chain));
  return {{"entries", std::move(entries)}, {"greedy_cut", ranking.greedy_cut}, {"uncut_chains", std::move(uncut)}};
}

ordered_json graph_json(const AttackGraph& graph) {
  ordered_json edges = ordered_json::array();
  for (const auto& edge : graph.edges) {
    ordered_json memberships = ordered_json::array();
    for (const auto& m : edge.memberships) memberships.push_back({{"hazard", m.hazard}, {"chain", m.chain}});
    edges.push_back({{"from", edge.from},
                     {"to", edge.to},
                     {"link", edge.link},
                     {"protections", edge.protections},
                     {"memberships", std::move(memberships)}});
  }
  return {{"hazard", graph.hazard},
          {"nodes", std::vector<AssetId>(graph.nodes.begin(), graph.nodes.end())},
          {"edges", std::move(edges)}};
}

ordered_json delta_json(const WhatIfDelta& delta) {
  auto list = [](const std::vector<AttackChain>& chains) {
    ordered_json out = ordered_json::array();
    for (const auto& chain : chains) out.push_back(chain_json(chain));
    return out;
  };
  ordered_json removed = ordered_json::array();
  for (const auto& instance : delta.removed_protection_instances) {
    const auto& hop = instance.chain.hops[instance.hop];
    removed.push_back({{"path", chain_path(instance.chain)},
                       {"hop", instance.hop},
                       {"from", hop.from},
                       {"to", hop.to},
                       {"link", hop.link},
                       {"protection", instance.protection}});
  }
  ordered_json changes = ordered_json::array();
  for (const auto& change : delta.class_changes)
    changes.push_back({{"path", chain_path(change.chain)},
                       {"chain", chain_json(change.chain)},
                       {"from", to_string(change.from)},
                       {"to", to_string(change.to)}});
  return {{"hazard", delta.hazard},
          {"profile", delta.profile},
          {"unchanged", delta.unchanged()},
          {"baseline", coverage_json(delta.baseline)},
          {"scenario_result", coverage_json(delta.scenario_result)},
          {"new_chains", list(delta.new_chains)},
          {"removed_chains", list(delta.removed_chains)},
          {"removed_protection_instances", std::move(removed)},
          {"class_changes", std::move(changes)}};
}

ordered_json scoring_assumptions_json() {
  return {{"likelihood_rule", "chain score = product of directed hop likelihoods; unscored hops count as 1.0"},
          {"hazard_weight_rule", "hazard weight = max weight of its transitively resolved losses"},
          {"loss_weight_default", "absent loss weight = 101 - position in file order"},
          {"coverage_rule",
           "unpreventable: no hops; unprotected: no protections; thin: fewer than thin_threshold; else defended"}};
}

std::string full_report(const Model& model, const ModelAnalysis& analysis) {
  ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["metadata"] = {{"name", model.metadata.name},
                     {"version", model.metadata.version},
                     {"profile", analysis.profile},
                     {"max_depth", analysis.options.max_depth},
                     {"thin_threshold", analysis.options.thin_threshold}};

  ordered_json chains = ordered_json::object();
  std::map<HazardId, CoverageReport, NaturalLess> per_hazard;
  for (const auto& [hazard, list] : analysis.chains) {
    chains[hazard] = chains_json(list, analysis.options.thin_threshold);
    per_hazard[hazard] = coverage(list, analysis.options.thin_threshold);
  }
  doc["chains"] = std::move(chains);
  doc["coverage"] = coverage_json(analysis.coverage);
  doc["ranking"] = ranking_json(analysis.ranking);
  doc["scoring_assumptions"] = scoring_assumptions_json();

  const AttackGraph merged = analysis.merged_graph();
  DotOptions options;
  options.highlight = default_highlight();
  options.edge_classes = edge_classes(merged, per_hazard);
  doc["merged_graph_dot"] = to_dot(merged, model, options);
  return doc.dump(2) + "\n";
}

}  // namespace attackmap
