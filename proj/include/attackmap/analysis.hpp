#pragma once

// Coverage classification, protection ranking and greedy cut, chain
// likelihood scoring and what-if comparison.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attackmap/attack_graph.hpp"
#include "attackmap/model.hpp"
#include "attackmap/scenario.hpp"

namespace attackmap {

inline constexpr std::size_t kDefaultThinThreshold = 2;

// Ordered from worst to best.
enum class CoverageClass { unpreventable, unprotected, thin, defended };

std::string_view to_string(CoverageClass cls);
std::optional<CoverageClass> parse_coverage_class(std::string_view text);
CoverageClass classify(const AttackChain& chain, std::size_t thin_threshold);

struct CoverageEntry {
  AttackChain chain;
  std::size_t protection_count = 0;
  CoverageClass cls = CoverageClass::defended;

  bool operator==(const CoverageEntry&) const = default;
};

struct CoverageSummary {
  std::size_t unpreventable = 0;
  std::size_t unprotected = 0;
  std::size_t thin = 0;
  std::size_t defended = 0;

  bool operator==(const CoverageSummary&) const = default;
  std::size_t count(CoverageClass cls) const;
};

struct CoverageReport {
  std::vector<CoverageEntry> entries;
  CoverageSummary summary;
  std::vector<AttackChain> detection_required;  // unpreventable and unprotected

  bool operator==(const CoverageReport&) const = default;
};

CoverageReport coverage(const std::vector<AttackChain>& chains, std::size_t thin_threshold = kDefaultThinThreshold);

struct RankingEntry {
  ProtectionId protection;
  std::size_t chains_broken = 0;
  std::int64_t weighted_score = 0;  // sum of hazard weights of broken chains

  bool operator==(const RankingEntry&) const = default;
};

struct ProtectionRanking {
  std::vector<RankingEntry> entries;  // weighted_score desc, then id asc
  std::vector<ProtectionId> greedy_cut;
  std::vector<AttackChain> uncut_chains;  // chains with zero protections

  bool operator==(const ProtectionRanking&) const = default;
};

// A protection breaks a chain when it guards at least one of its hops.
// greedy_cut repeatedly takes the protection breaking the most still-unbroken
// chains (ties to the lower id) until every breakable chain is broken.
ProtectionRanking rank_protections(const std::vector<AttackChain>& chains, const Model& model);

// Product of directed hop likelihoods (unscored hops count 1.0, overrides
// shadow base scores). Throws InvalidArgumentError for a likelihood outside
// (0, 1].
double chain_likelihood(const AttackChain& chain, const std::vector<EdgeScore>& scores,
                        const std::vector<EdgeScore>& overrides = {});

// Chains with score filled in, stably sorted by descending score.
std::vector<AttackChain> score_chains(std::vector<AttackChain> chains, const std::vector<EdgeScore>& scores,
                                      const std::vector<EdgeScore>& overrides = {});

struct PipelineOptions {
  std::size_t max_depth = kDefaultMaxDepth;
  std::size_t thin_threshold = kDefaultThinThreshold;

  bool operator==(const PipelineOptions&) const = default;
};

// enumerate -> attach protections -> score, in enumeration order.
std::vector<AttackChain> hazard_chains(const Model& model, std::string_view hazard, std::string_view profile,
                                       const Scenario* scenario = nullptr, const PipelineOptions& options = {});

struct ProtectionInstance {
  AttackChain chain;
  std::size_t hop = 0;
  ProtectionId protection;

  bool operator==(const ProtectionInstance&) const = default;
};

struct ClassChange {
  AttackChain chain;  // as evaluated under the scenario
  CoverageClass from = CoverageClass::defended;
  CoverageClass to = CoverageClass::defended;

  bool operator==(const ClassChange&) const = default;
};

struct WhatIfDelta {
  HazardId hazard;
  ProfileId profile;
  CoverageReport baseline;
  CoverageReport scenario_result;
  std::vector<AttackChain> new_chains;
  std::vector<AttackChain> removed_chains;
  std::vector<ProtectionInstance> removed_protection_instances;
  std::vector<ClassChange> class_changes;

  bool operator==(const WhatIfDelta&) const = default;
  bool unchanged() const;
};

WhatIfDelta what_if(const Model& model, std::string_view hazard, std::string_view profile, const Scenario& scenario,
                    const PipelineOptions& options = {});

// Every mapped hazard analysed for one profile.
struct ModelAnalysis {
  ProfileId profile;
  PipelineOptions options;
  std::map<HazardId, std::vector<AttackChain>, NaturalLess> chains;
  CoverageReport coverage;
  ProtectionRanking ranking;

  bool operator==(const ModelAnalysis&) const = default;
  std::vector<AttackChain> all_chains() const;  // hazard order, then chain order
  AttackGraph merged_graph() const;
};

ModelAnalysis analyze_model(const Model& model, std::string_view profile, const PipelineOptions& options = {},
                            const Scenario* scenario = nullptr);

}  // namespace attackmap
