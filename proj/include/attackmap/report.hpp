#pragma once

// Itemized chain tables, DOT export and the JSON report bundle.

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "attackmap/analysis.hpp"
#include "attackmap/attack_graph.hpp"
#include "attackmap/model.hpp"

namespace attackmap {

inline constexpr std::string_view kReportSchemaVersion = "1";

using EdgeKey = std::tuple<AssetId, AssetId, LinkId>;

struct DotOptions {
  bool show_protections = true;
  // Edge colour per coverage class; an edge takes the worst class of the
  // chains using it (see edge_classes).
  std::map<CoverageClass, std::string> highlight;
  std::map<EdgeKey, CoverageClass> edge_classes;
};

// Default colour scale: unpreventable/unprotected red shades, thin orange,
// defended green.
std::map<CoverageClass, std::string> default_highlight();

// Worst class per edge. `coverage_by_hazard` holds, for every hazard in the
// graph's memberships, a coverage report whose entries are in chain-index
// order.
std::map<EdgeKey, CoverageClass> edge_classes(
    const AttackGraph& graph, const std::map<HazardId, CoverageReport, NaturalLess>& coverage_by_hazard);

// Deterministic DOT digraph; node ids are asset ids, labels asset names.
std::string to_dot(const AttackGraph& graph, const Model& model, const DotOptions& options = {});

// Itemize | Chain | Protections, one row per distinct asset sequence.
std::string chain_table(const std::vector<AttackChain>& chains, const Model& model);

struct ChainTableRow {
  std::size_t item = 0;
  std::vector<AssetId> assets;
  std::vector<ProtectionId> protections;  // merged, hop order, one line each
};
std::vector<ChainTableRow> chain_table_rows(const std::vector<AttackChain>& chains);

// JSON views shared by the report bundle, the CLI and the HTTP service.
nlohmann::ordered_json chain_json(const AttackChain& chain);
nlohmann::ordered_json chains_json(const std::vector<AttackChain>& chains, std::size_t thin_threshold);
nlohmann::ordered_json coverage_json(const CoverageReport& report);
nlohmann::ordered_json ranking_json(const ProtectionRanking& ranking);
nlohmann::ordered_json graph_json(const AttackGraph& graph);
nlohmann::ordered_json delta_json(const WhatIfDelta& delta);
nlohmann::ordered_json scoring_assumptions_json();

// Single JSON document: schema_version, metadata, chains (per hazard),
// coverage, ranking, scoring_assumptions, merged_graph_dot.
std::string full_report(const Model& model, const ModelAnalysis& analysis);

}  // namespace attackmap
