#include "attackmap/attack_graph.hpp"

#include <algorithm>
#include <tuple>

namespace attackmap {

std::size_t TraversalGraph::arc_count() const {
  std::size_t n = 0;
  for (const auto& [node, arcs] : outgoing) n += arcs.size();
  return n;
}

std::vector<Arc> TraversalGraph::arcs() const {
  std::vector<Arc> all;
  for (const auto& [node, arcs] : outgoing) all.insert(all.end(), arcs.begin(), arcs.end());
  return all;
}

std::vector<AssetId> AttackChain::assets() const {
  std::vector<AssetId> seq{entry};
  for (const auto& hop : hops) seq.push_back(hop.to);
  return seq;
}

std::vector<LinkId> AttackChain::links() const {
  std::vector<LinkId> seq;
  for (const auto& hop : hops) seq.push_back(hop.link);
  return seq;
}

std::size_t AttackChain::protection_count() const {
  std::size_t n = 0;
  for (const auto& hop : hops) n += hop.protections.size();
  return n;
}

ChainKey chain_key(const AttackChain& chain) { return {chain.hazard, chain.assets(), chain.links()}; }

std::string chain_path(const AttackChain& chain) {
  std::string out = chain.entry;
  for (const auto& hop : chain.hops) out += "->" + hop.to;
  return out;
}

TraversalGraph traversal_graph(const Model& model, const Scenario* scenario) {
  TraversalGraph graph;
  for (const auto& asset : model.assets) {
    graph.nodes.push_back(asset.id);
    graph.outgoing[asset.id];
  }
  std::sort(graph.nodes.begin(), graph.nodes.end());

  auto add_link = [&](const LinkId& id, const AssetId& a, const AssetId& b, LinkDirection direction) {
    graph.outgoing[a].push_back({a, b, id, HopDirection::a_to_b});
    if (direction == LinkDirection::bidirectional) graph.outgoing[b].push_back({b, a, id, HopDirection::b_to_a});
  };

  for (const auto& link : model.links) add_link(link.id, link.a, link.b, link.direction);
  if (scenario) {
    for (std::size_t i = 0; i < scenario->zero_day_links.size(); ++i) {
      const auto& zero_day = scenario->zero_day_links[i];
      for (const auto* asset : {&zero_day.a, &zero_day.b})
        if (!model.find_asset(*asset))
          throw NotFoundError("E-UNKNOWN-ID", *asset, "zero-day link references unknown asset '" + *asset + "'");
      add_link(zero_day_link_id(i + 1), zero_day.a, zero_day.b, zero_day.direction);
    }
  }

  for (auto& [node, arcs] : graph.outgoing)
    std::sort(arcs.begin(), arcs.end(), [](const Arc& l, const Arc& r) {
      return std::tie(l.to, l.link, l.direction) < std::tie(r.to, r.link, r.direction);
    });
  return graph;
}

namespace {

class ChainSearch {
 public:
  ChainSearch(const TraversalGraph& graph, const std::set<AssetId>& targets, const HazardId& hazard,
              std::size_t max_depth)
      : graph_(graph), targets_(targets), hazard_(hazard), max_depth_(max_depth) {}

  void from_entry(const AssetId& entry) {
    entry_ = entry;
    if (targets_.count(entry)) {
      found_.push_back({hazard_, entry, entry, {}, 1.0});
      return;
    }
    visited_ = {entry};
    extend(entry);
  }

  std::vector<AttackChain> take() { return std::move(found_); }

 private:
  void extend(const AssetId& at) {
    if (hops_.size() >= max_depth_) return;
    auto it = graph_.outgoing.find(at);
    if (it == graph_.outgoing.end()) return;
    for (const auto& arc : it->second) {
      if (visited_.count(arc.to)) continue;
      hops_.push_back({arc.from, arc.to, arc.link, arc.direction, {}});
      if (targets_.count(arc.to)) {
        found_.push_back({hazard_, entry_, arc.to, hops_, 1.0});
      } else {
        visited_.insert(arc.to);
        extend(arc.to);
        visited_.erase(arc.to);
      }
      hops_.pop_back();
    }
  }

  const TraversalGraph& graph_;
  const std::set<AssetId>& targets_;
  const HazardId& hazard_;
  std::size_t max_depth_;
  AssetId entry_;
  std::set<AssetId> visited_;
  std::vector<Hop> hops_;
  std::vector<AttackChain> found_;
};

}  // namespace

std::vector<AttackChain> enumerate_chains(const Model& model, std::string_view hazard, std::string_view profile,
                                          const Scenario* scenario, std::size_t max_depth) {
  if (max_depth < 1) throw InvalidArgumentError("E-BAD-ARG", "max_depth must be at least 1");
  if (!model.find_hazard(hazard))
    throw NotFoundError("E-UNKNOWN-ID", std::string(hazard), "unknown hazard '" + std::string(hazard) + "'");
  const CriticalAssetMapping* mapping = model.find_mapping(hazard);
  if (!mapping)
    throw NotFoundError("E-NO-MAPPING", std::string(hazard),
                        "hazard '" + std::string(hazard) + "' has no critical-asset mapping");

  if (scenario) check_scenario(model, *scenario);
  std::string effective_profile(profile);
  if (scenario && scenario->profile) effective_profile = *scenario->profile;

  std::set<AssetId> entries;
  for (auto& entry : profile_entries(model, effective_profile)) entries.insert(std::move(entry));
  if (scenario) entries.insert(scenario->compromised.begin(), scenario->compromised.end());

  const std::set<AssetId> targets(mapping->targets.begin(), mapping->targets.end());
  const TraversalGraph graph = traversal_graph(model, scenario);
  const HazardId hazard_id(hazard);

  ChainSearch search(graph, targets, hazard_id, max_depth);
  for (const auto& entry : entries) search.from_entry(entry);
  auto chains = search.take();

  std::sort(chains.begin(), chains.end(), [](const AttackChain& l, const AttackChain& r) {
    if (l.hops.size() != r.hops.size()) return l.hops.size() < r.hops.size();
    auto la = l.assets(), ra = r.assets();
    if (la != ra) return la < ra;
    return l.links() < r.links();
  });
  chains.erase(std::unique(chains.begin(), chains.end()), chains.end());
  return chains;
}

AttackChain attach_protections(const Model& model, AttackChain chain, const Scenario* scenario) {
  std::set<ProtectionId> disabled;
  if (scenario) disabled.insert(scenario->disabled_protections.begin(), scenario->disabled_protections.end());

  for (auto& hop : chain.hops) {
    hop.protections.clear();
    if (is_zero_day_link_id(hop.link)) continue;
    for (const auto& protection : model.protections) {
      if (disabled.count(protection.id)) continue;
      const bool guards = std::any_of(protection.guards.begin(), protection.guards.end(), [&](const GuardSpec& g) {
        return g.asset == hop.to && (!g.via || *g.via == hop.from);
      });
      if (guards) hop.protections.push_back(protection.id);
    }
    std::sort(hop.protections.begin(), hop.protections.end());
  }
  return chain;
}

namespace {

using EdgeIndex = std::map<std::tuple<AssetId, AssetId, LinkId>, GraphEdge>;

void add_protections(GraphEdge& edge, const std::vector<ProtectionId>& protections) {
  std::set<ProtectionId> merged(edge.protections.begin(), edge.protections.end());
  merged.insert(protections.begin(), protections.end());
  edge.protections.assign(merged.begin(), merged.end());
}

std::vector<GraphEdge> flatten(EdgeIndex& index) {
  std::vector<GraphEdge> edges;
  edges.reserve(index.size());
  for (auto& [key, edge] : index) edges.push_back(std::move(edge));
  return edges;
}

}  // namespace

AttackGraph build_graph(std::string_view hazard, const std::vector<AttackChain>& chains) {
  AttackGraph graph{std::string(hazard), {}, {}};
  EdgeIndex index;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& chain = chains[i];
    if (chain.hops.empty()) graph.nodes.insert(chain.entry);
    for (const auto& hop : chain.hops) {
      auto& edge = index[{hop.from, hop.to, hop.link}];
      edge.from = hop.from;
      edge.to = hop.to;
      edge.link = hop.link;
      edge.memberships.insert({chain.hazard, i});
      add_protections(edge, hop.protections);
      graph.nodes.insert(hop.from);
      graph.nodes.insert(hop.to);
    }
  }
  graph.edges = flatten(index);
  return graph;
}

AttackGraph merge_graphs(const std::vector<AttackGraph>& graphs) {
  AttackGraph merged{std::string(kMergedHazard), {}, {}};
  EdgeIndex index;
  for (const auto& graph : graphs) {
    merged.nodes.insert(graph.nodes.begin(), graph.nodes.end());
    for (const auto& edge : graph.edges) {
      auto& target = index[{edge.from, edge.to, edge.link}];
      target.from = edge.from;
      target.to = edge.to;
      target.link = edge.link;
      target.memberships.insert(edge.memberships.begin(), edge.memberships.end());
      add_protections(target, edge.protections);
    }
  }
  merged.edges = flatten(index);
  return merged;
}

}  // namespace attackmap
