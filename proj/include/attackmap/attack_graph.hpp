#pragma once

// Attack-chain enumeration over the asset/link graph and the per-hazard
// attack graphs built from the chains.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "attackmap/model.hpp"
#include "attackmap/scenario.hpp"

namespace attackmap {

inline constexpr std::size_t kDefaultMaxDepth = 8;
inline constexpr std::string_view kMergedHazard = "merged";

// One allowed traversal of one link.
struct Arc {
  AssetId from;
  AssetId to;
  LinkId link;
  HopDirection direction = HopDirection::a_to_b;

  bool operator==(const Arc&) const = default;
};

struct TraversalGraph {
  std::vector<AssetId> nodes;                    // sorted
  std::map<AssetId, std::vector<Arc>> outgoing;  // per node, sorted by (to, link)

  std::size_t arc_count() const;
  std::vector<Arc> arcs() const;
};

struct Hop {
  AssetId from;
  AssetId to;
  LinkId link;
  HopDirection direction = HopDirection::a_to_b;
  std::vector<ProtectionId> protections;

  bool operator==(const Hop&) const = default;
};

struct AttackChain {
  HazardId hazard;
  AssetId entry;
  AssetId target;
  std::vector<Hop> hops;  // empty iff entry == target
  double score = 1.0;

  bool operator==(const AttackChain&) const = default;

  std::vector<AssetId> assets() const;  // entry, then every hop's `to`
  std::vector<LinkId> links() const;
  std::size_t protection_count() const;
};

// Identity of a chain independent of protections and score.
struct ChainKey {
  HazardId hazard;
  std::vector<AssetId> assets;
  std::vector<LinkId> links;

  auto operator<=>(const ChainKey&) const = default;
};
ChainKey chain_key(const AttackChain& chain);

// Renders `a->b->c` using asset ids.
std::string chain_path(const AttackChain& chain);

// Arcs for every link traversal the model (plus the scenario's zero-days)
// allows. Throws NotFoundError for scenario references to unknown assets.
TraversalGraph traversal_graph(const Model& model, const Scenario* scenario = nullptr);

// Every simple path of at most max_depth hops from an entry asset (profile
// entries plus scenario compromised assets) to one of the hazard's targets.
// Targets end a path and never appear as intermediates. Result is ordered by
// hop count, then asset-id sequence, then link-id sequence. Hop protections
// are left empty (see attach_protections). profile may be kCombinedProfile.
std::vector<AttackChain> enumerate_chains(const Model& model, std::string_view hazard,
                                          std::string_view profile, const Scenario* scenario = nullptr,
                                          std::size_t max_depth = kDefaultMaxDepth);

// Fills each hop with the protections guarding entry to `to` (globally or
// via `from`), minus scenario-disabled ones, in protection-id order. Hops
// over injected zero-day links get none.
AttackChain attach_protections(const Model& model, AttackChain chain, const Scenario* scenario = nullptr);

struct Membership {
  HazardId hazard;
  std::size_t chain = 0;  // index into that hazard's chain list

  auto operator<=>(const Membership&) const = default;
};

struct GraphEdge {
  AssetId from;
  AssetId to;
  LinkId link;
  std::set<Membership> memberships;
  std::vector<ProtectionId> protections;

  bool operator==(const GraphEdge&) const = default;
};

struct AttackGraph {
  std::string hazard;  // hazard id or kMergedHazard
  std::set<AssetId> nodes;
  std::vector<GraphEdge> edges;  // sorted by (from, to, link)

  bool operator==(const AttackGraph&) const = default;
};

AttackGraph build_graph(std::string_view hazard, const std::vector<AttackChain>& chains);
AttackGraph merge_graphs(const std::vector<AttackGraph>& graphs);

}  // namespace attackmap
