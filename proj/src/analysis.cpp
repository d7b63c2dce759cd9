#include "attackmap/analysis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace attackmap {

std::string_view to_string(CoverageClass cls) {
  switch (cls) {
    case CoverageClass::unpreventable: return "unpreventable";
    case CoverageClass::unprotected: return "unprotected";
    case CoverageClass::thin: return "thin";
    case CoverageClass::defended: return "defended";
  }
  return "defended";
}

std::optional<CoverageClass> parse_coverage_class(std::string_view text) {
  for (auto cls : {CoverageClass::unpreventable, CoverageClass::unprotected, CoverageClass::thin,
                   CoverageClass::defended})
    if (to_string(cls) == text) return cls;
  return std::nullopt;
}

CoverageClass classify(const AttackChain& chain, std::size_t thin_threshold) {
  if (chain.hops.empty()) return CoverageClass::unpreventable;
  const std::size_t count = chain.protection_count();
  if (count == 0) return CoverageClass::unprotected;
  if (count < thin_threshold) return CoverageClass::thin;
  return CoverageClass::defended;
}

std::size_t CoverageSummary::count(CoverageClass cls) const {
  switch (cls) {
    case CoverageClass::unpreventable: return unpreventable;
    case CoverageClass::unprotected: return unprotected;
    case CoverageClass::thin: return thin;
    case CoverageClass::defended: return defended;
  }
  return 0;
}

CoverageReport coverage(const std::vector<AttackChain>& chains, std::size_t thin_threshold) {
  if (thin_threshold < 1) throw InvalidArgumentError("E-BAD-ARG", "thin_threshold must be at least 1");
  CoverageReport report;
  for (const auto& chain : chains) {
    const auto cls = classify(chain, thin_threshold);
    report.entries.push_back({chain, chain.protection_count(), cls});
    switch (cls) {
      case CoverageClass::unpreventable:
        ++report.summary.unpreventable;
        report.detection_required.push_back(chain);
        break;
      case CoverageClass::unprotected:
        ++report.summary.unprotected;
        report.detection_required.push_back(chain);
        break;
      case CoverageClass::thin: ++report.summary.thin; break;
      case CoverageClass::defended: ++report.summary.defended; break;
    }
  }
  return report;
}

namespace {

std::set<ProtectionId> breakers(const AttackChain& chain) {
  std::set<ProtectionId> out;
  for (const auto& hop : chain.hops) out.insert(hop.protections.begin(), hop.protections.end());
  return out;
}

void check_likelihoods(const std::vector<EdgeScore>& scores) {
  for (const auto& score : scores) {
    if (score.likelihood > 0.0 && score.likelihood <= 1.0) continue;
    std::ostringstream msg;
    msg << "likelihood " << score.likelihood << " for '" << score.link << "' is outside (0, 1]";
    throw InvalidArgumentError("E-SCORE-RANGE", msg.str());
  }
}

const EdgeScore* find_score(const std::vector<EdgeScore>& scores, const Hop& hop) {
  for (const auto& score : scores)
    if (score.link == hop.link && score.direction == hop.direction) return &score;
  return nullptr;
}

}  // namespace

ProtectionRanking rank_protections(const std::vector<AttackChain>& chains, const Model& model) {
  std::map<HazardId, int> weights;
  auto weight_of = [&](const HazardId& hazard) {
    auto it = weights.find(hazard);
    if (it == weights.end()) it = weights.emplace(hazard, model.find_hazard(hazard) ? hazard_weight(model, hazard) : 0).first;
    return it->second;
  };

  std::map<ProtectionId, RankingEntry> tally;
  for (const auto& protection : model.protections) tally[protection.id] = {protection.id, 0, 0};

  ProtectionRanking ranking;
  std::vector<std::set<ProtectionId>> broken_by;
  for (const auto& chain : chains) {
    auto set = breakers(chain);
    for (const auto& id : set) {
      auto& entry = tally[id];
      entry.protection = id;
      ++entry.chains_broken;
      entry.weighted_score += weight_of(chain.hazard);
    }
    if (set.empty()) ranking.uncut_chains.push_back(chain);
    broken_by.push_back(std::move(set));
  }

  for (auto& [id, entry] : tally) ranking.entries.push_back(entry);
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const RankingEntry& l, const RankingEntry& r) {
    if (l.weighted_score != r.weighted_score) return l.weighted_score > r.weighted_score;
    return l.protection < r.protection;
  });

  std::vector<bool> open(chains.size());
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    open[i] = !broken_by[i].empty();
    remaining += open[i];
  }
  while (remaining > 0) {
    std::map<ProtectionId, std::size_t> gain;
    for (std::size_t i = 0; i < chains.size(); ++i)
      if (open[i])
        for (const auto& id : broken_by[i]) ++gain[id];
    // std::map iterates ids ascending, so the first maximum is the lowest id.
    auto best = gain.begin();
    for (auto it = gain.begin(); it != gain.end(); ++it)
      if (it->second > best->second) best = it;
    ranking.greedy_cut.push_back(best->first);
    for (std::size_t i = 0; i < chains.size(); ++i)
      if (open[i] && broken_by[i].count(best->first)) {
        open[i] = false;
        --remaining;
      }
  }
  return ranking;
}

double chain_likelihood(const AttackChain& chain, const std::vector<EdgeScore>& scores,
                        const std::vector<EdgeScore>& overrides) {
  check_likelihoods(scores);
  check_likelihoods(overrides);
  double product = 1.0;
  for (const auto& hop : chain.hops) {
    const EdgeScore* score = find_score(overrides, hop);
    if (!score) score = find_score(scores, hop);
    if (score) product *= score->likelihood;
  }
  return product;
}

std::vector<AttackChain> score_chains(std::vector<AttackChain> chains, const std::vector<EdgeScore>& scores,
                                      const std::vector<EdgeScore>& overrides) {
  for (auto& chain : chains) chain.score = chain_likelihood(chain, scores, overrides);
  std::stable_sort(chains.begin(), chains.end(),
                   [](const AttackChain& l, const AttackChain& r) { return l.score > r.score; });
  return chains;
}

std::vector<AttackChain> hazard_chains(const Model& model, std::string_view hazard, std::string_view profile,
                                       const Scenario* scenario, const PipelineOptions& options) {
  auto chains = enumerate_chains(model, hazard, profile, scenario, options.max_depth);
  static const std::vector<EdgeScore> kNoOverrides;
  const auto& overrides = scenario ? scenario->score_overrides : kNoOverrides;
  for (auto& chain : chains) {
    chain = attach_protections(model, std::move(chain), scenario);
    chain.score = chain_likelihood(chain, model.edge_scores, overrides);
  }
  return chains;
}

bool WhatIfDelta::unchanged() const {
  return new_chains.empty() && removed_chains.empty() && removed_protection_instances.empty() &&
         class_changes.empty();
}

WhatIfDelta what_if(const Model& model, std::string_view hazard, std::string_view profile, const Scenario& scenario,
                    const PipelineOptions& options) {
  check_scenario(model, scenario);
  const auto before = hazard_chains(model, hazard, profile, nullptr, options);
  const auto after = hazard_chains(model, hazard, profile, &scenario, options);

  WhatIfDelta delta;
  delta.hazard = std::string(hazard);
  delta.profile = scenario.profile ? *scenario.profile : std::string(profile);
  delta.baseline = coverage(before, options.thin_threshold);
  delta.scenario_result = coverage(after, options.thin_threshold);

  std::map<ChainKey, std::size_t> before_index;
  for (std::size_t i = 0; i < before.size(); ++i) before_index[chain_key(before[i])] = i;
  std::set<ChainKey> after_keys;

  for (std::size_t i = 0; i < after.size(); ++i) {
    const auto key = chain_key(after[i]);
    after_keys.insert(key);
    auto it = before_index.find(key);
    if (it == before_index.end()) {
      delta.new_chains.push_back(after[i]);
      continue;
    }
    const auto& old_chain = before[it->second];
    for (std::size_t h = 0; h < old_chain.hops.size(); ++h) {
      const auto& now = after[i].hops[h].protections;
      for (const auto& protection : old_chain.hops[h].protections)
        if (std::find(now.begin(), now.end(), protection) == now.end())
          delta.removed_protection_instances.push_back({old_chain, h, protection});
    }
    const auto from = delta.baseline.entries[it->second].cls;
    const auto to = delta.scenario_result.entries[i].cls;
    if (from != to) delta.class_changes.push_back({after[i], from, to});
  }
  for (const auto& chain : before)
    if (!after_keys.count(chain_key(chain))) delta.removed_chains.push_back(chain);
  return delta;
}

std::vector<AttackChain> ModelAnalysis::all_chains() const {
  std::vector<AttackChain> out;
  for (const auto& [hazard, list] : chains) out.insert(out.end(), list.begin(), list.end());
  return out;
}

AttackGraph ModelAnalysis::merged_graph() const {
  std::vector<AttackGraph> graphs;
  for (const auto& [hazard, list] : chains) graphs.push_back(build_graph(hazard, list));
  return merge_graphs(graphs);
}

ModelAnalysis analyze_model(const Model& model, std::string_view profile, const PipelineOptions& options,
                            const Scenario* scenario) {
  ModelAnalysis analysis;
  analysis.profile = std::string(profile);
  analysis.options = options;
  for (const auto& mapping : model.mappings)
    analysis.chains[mapping.hazard] = hazard_chains(model, mapping.hazard, profile, scenario, options);
  const auto all = analysis.all_chains();
  analysis.coverage = coverage(all, options.thin_threshold);
  analysis.ranking = rank_protections(all, model);
  return analysis;
}

}  // namespace attackmap
