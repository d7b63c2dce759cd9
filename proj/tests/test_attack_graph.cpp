#include <doctest.h>

#include <algorithm>
#include <random>

#include "attackmap/attack_graph.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_model.hpp"

using namespace attackmap;

namespace {

std::multiset<oracle::Path> as_paths(const std::vector<AttackChain>& chains) {
  std::multiset<oracle::Path> out;
  for (const auto& c : chains) out.insert({c.entry, c.assets(), c.links()});
  return out;
}

std::vector<std::vector<AssetId>> sequences(const std::vector<AttackChain>& chains) {
  std::vector<std::vector<AssetId>> out;
  for (const auto& c : chains) out.push_back(c.assets());
  return out;
}

const Hop& hop(const AttackChain& c, std::size_t i) { return c.hops.at(i); }

}  // namespace

TEST_CASE("traversal graph arcs") {
  const auto& partial = fixtures::sphere_partial();
  const auto g = traversal_graph(partial);
  CHECK(g.arc_count() == 6);
  CHECK(g.nodes == std::vector<AssetId>{"infrapod-db", "infrapod-server", "nodes"});

  Model bare = partial;
  bare.links.clear();
  const auto empty = traversal_graph(bare);
  CHECK(empty.nodes.size() == 3);
  CHECK(empty.arc_count() == 0);

  const auto& sphere = fixtures::sphere();
  Scenario zd;
  zd.zero_day_links = {{"nodes", "ops", LinkDirection::a_to_b}};
  const auto base = traversal_graph(sphere);
  const auto with = traversal_graph(sphere, &zd);
  CHECK(with.arc_count() == base.arc_count() + 1);
  const auto& out = with.outgoing.at("nodes");
  CHECK(std::any_of(out.begin(), out.end(),
                    [](const Arc& a) { return a.to == "ops" && a.link == zero_day_link_id(1); }));

  Scenario bad;
  bad.zero_day_links = {{"nodes", "nowhere", LinkDirection::a_to_b}};
  CHECK_THROWS_AS(traversal_graph(sphere, &bad), NotFoundError);
}

TEST_CASE("directed links only traverse a to b") {
  const auto g = traversal_graph(fixtures::sphere());
  const auto& ops_out = g.outgoing.count("ops") ? g.outgoing.at("ops") : std::vector<Arc>{};
  CHECK(ops_out.empty());
  const auto& nodes_out = g.outgoing.at("nodes");
  CHECK(std::any_of(nodes_out.begin(), nodes_out.end(), [](const Arc& a) { return a.to == "node-server"; }));
  const auto& ns_out = g.outgoing.at("node-server");
  CHECK(std::any_of(ns_out.begin(), ns_out.end(),
                    [](const Arc& a) { return a.to == "nodes" && a.direction == HopDirection::b_to_a; }));
}

TEST_CASE("H3 chains on the partial model") {
  const auto chains = enumerate_chains(fixtures::sphere_partial(), "H3", "researcher");
  REQUIRE(chains.size() == 2);
  CHECK(sequences(chains) == std::vector<std::vector<AssetId>>{{"nodes", "infrapod-db"},
                                                                {"nodes", "infrapod-server", "infrapod-db"}});
  for (const auto& c : chains) {
    CHECK(c.hazard == "H3");
    CHECK(c.entry == "nodes");
    CHECK(c.target == "infrapod-db");
    for (const auto& h : c.hops) CHECK(h.protections.empty());
  }

  const auto shallow = enumerate_chains(fixtures::sphere_partial(), "H3", "researcher", nullptr, 1);
  REQUIRE(shallow.size() == 1);
  CHECK(chain_path(shallow[0]) == "nodes->infrapod-db");
}

TEST_CASE("H1.3 chains on the bundled model") {
  const auto chains = enumerate_chains(fixtures::sphere(), "H1.3", kCombinedProfile);
  const std::vector<std::vector<AssetId>> expected = {
      {"bare-metal-nodes", "ops"},
      {"internet", "infrapod-server", "ops"},
      {"nodes", "infrapod-server", "ops"},
      {"nodes", "node-server", "ops"},
      {"nodes", "storage-server", "ops"},
  };
  CHECK(sequences(chains) == expected);
  CHECK(enumerate_chains(fixtures::sphere(), "H1.3", "researcher").size() == 4);
  CHECK(enumerate_chains(fixtures::sphere(), "H1.3", "outsider").size() == 1);
}

TEST_CASE("entry that is a target gives a zero-hop chain") {
  const auto chains = enumerate_chains(fixtures::sphere(), "H5", "researcher");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].hops.empty());
  CHECK(chains[0].entry == "nodes");
  CHECK(chains[0].target == "nodes");
  CHECK(chains[0].assets() == std::vector<AssetId>{"nodes"});

  const auto m = fixtures::self_target_model();
  CHECK(enumerate_chains(m, "H5", "researcher").size() == 1);
}

TEST_CASE("targets are never intermediates") {
  auto m = fixtures::sphere();
  m.mappings.push_back({"H3.1", {"infrapod-server", "infrapod-db"}});
  for (const auto& c : enumerate_chains(m, "H3.1", kCombinedProfile)) {
    const auto a = c.assets();
    for (std::size_t i = 0; i + 1 < a.size(); ++i) CHECK(a[i] != "infrapod-server");
  }
}

TEST_CASE("enumeration errors") {
  const auto& m = fixtures::sphere();
  try {
    enumerate_chains(m, "H99", "researcher");
    FAIL("expected NotFoundError");
  } catch (const NotFoundError& e) {
    CHECK(e.code() == "E-UNKNOWN-ID");
    CHECK(e.subject() == "H99");
  }
  try {
    enumerate_chains(m, "H6", "researcher");
    FAIL("expected NotFoundError");
  } catch (const NotFoundError& e) {
    CHECK(e.code() == "E-NO-MAPPING");
  }
  CHECK_THROWS_AS(enumerate_chains(m, "H3", "ghost"), NotFoundError);
  CHECK_THROWS_AS(enumerate_chains(m, "H3", "researcher", nullptr, 0), InvalidArgumentError);
  Scenario s;
  s.compromised = {"ghost"};
  CHECK_THROWS_AS(enumerate_chains(m, "H3", "researcher", &s), NotFoundError);
}

TEST_CASE("protections attach per hop") {
  const auto& m = fixtures::sphere_partial();
  auto chains = enumerate_chains(m, "H3", "researcher");
  const auto direct = attach_protections(m, chains[0]);
  CHECK(hop(direct, 0).protections == std::vector<ProtectionId>{"db-auth"});
  CHECK(direct.protection_count() == 1);

  const auto two = attach_protections(m, chains[1]);
  CHECK(hop(two, 0).protections == std::vector<ProtectionId>{"ssh-infrapod"});
  CHECK(hop(two, 1).protections == std::vector<ProtectionId>{"db-auth", "db-encryption"});
  CHECK(two.protection_count() == 3);

  Scenario off;
  off.disabled_protections = {"db-encryption"};
  CHECK(attach_protections(m, chains[1], &off).protection_count() == 2);
}

TEST_CASE("zero-day hops carry no protections") {
  const auto& m = fixtures::sphere();
  Scenario s;
  s.zero_day_links = {{"nodes", "ops", LinkDirection::a_to_b}};
  const auto chains = enumerate_chains(m, "H1.3", "researcher", &s);
  CHECK(chains.size() == 5);
  const auto it = std::find_if(chains.begin(), chains.end(),
                               [](const AttackChain& c) { return c.links() == std::vector<LinkId>{"zero-day:1"}; });
  REQUIRE(it != chains.end());
  CHECK(attach_protections(m, *it, &s).protection_count() == 0);
  CHECK(is_zero_day_link_id("zero-day:1"));
  CHECK_FALSE(is_zero_day_link_id("l-nodes-infrapod"));
}

TEST_CASE("chain order is hop count, then assets, then links") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto m = testgen::random_model(rng);
    const auto chains = enumerate_chains(m, "H1", "p");
    for (std::size_t k = 1; k < chains.size(); ++k) {
      const auto& a = chains[k - 1];
      const auto& b = chains[k];
      const auto ka = std::make_tuple(a.hops.size(), a.assets(), a.links());
      const auto kb = std::make_tuple(b.hops.size(), b.assets(), b.links());
      CHECK(ka < kb);
    }
  }
}

TEST_CASE("enumeration equals the brute-force oracle") {
  std::mt19937 rng(424242);
  for (int i = 0; i < 300; ++i) {
    const auto m = testgen::random_model(rng);
    const auto s = testgen::random_scenario(rng, m);
    const std::size_t depth = std::uniform_int_distribution<int>(1, 8)(rng);
    CAPTURE(i);
    CHECK(as_paths(enumerate_chains(m, "H1", "p", nullptr, depth)) ==
          oracle::enumerate(m, "H1", m.profiles[0].entry_assets, nullptr, depth));
    CHECK(as_paths(enumerate_chains(m, "H1", "p", &s, depth)) ==
          oracle::enumerate(m, "H1", m.profiles[0].entry_assets, &s, depth));
  }
}

TEST_CASE("chains are simple paths in the traversal graph") {
  std::mt19937 rng(99);
  for (int i = 0; i < 150; ++i) {
    const auto m = testgen::random_model(rng);
    const auto s = testgen::random_scenario(rng, m);
    const auto g = traversal_graph(m, &s);
    for (const auto& c : enumerate_chains(m, "H1", "p", &s)) {
      auto assets = c.assets();
      std::sort(assets.begin(), assets.end());
      CHECK(std::adjacent_find(assets.begin(), assets.end()) == assets.end());
      for (const auto& h : c.hops) {
        const auto& out = g.outgoing.at(h.from);
        CHECK(std::any_of(out.begin(), out.end(), [&](const Arc& a) {
          return a.to == h.to && a.link == h.link && a.direction == h.direction;
        }));
      }
    }
  }
}

TEST_CASE("chain count is monotone") {
  std::mt19937 rng(5150);
  for (int i = 0; i < 200; ++i) {
    auto m = testgen::random_model(rng);
    const auto base = enumerate_chains(m, "H1", "p");
    CAPTURE(i);

    for (std::size_t d = 1; d < 8; ++d)
      CHECK(enumerate_chains(m, "H1", "p", nullptr, d).size() <= enumerate_chains(m, "H1", "p", nullptr, d + 1).size());

    const auto s = testgen::random_scenario(rng, m);
    Scenario grow;
    grow.compromised = s.compromised;
    CHECK(enumerate_chains(m, "H1", "p", &grow).size() >= base.size());
    grow.zero_day_links = s.zero_day_links;
    CHECK(enumerate_chains(m, "H1", "p", &grow).size() >= base.size());

    Model more = m;
    more.links.push_back({"extra", m.assets.front().id, m.assets.back().id, "other", LinkDirection::bidirectional, {}});
    CHECK(enumerate_chains(more, "H1", "p").size() >= base.size());
  }
}

TEST_CASE("enumeration is deterministic") {
  std::mt19937 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto m = testgen::random_model(rng);
    CHECK(enumerate_chains(m, "H1", "p") == enumerate_chains(m, "H1", "p"));
    Model reversed = m;
    std::reverse(reversed.links.begin(), reversed.links.end());
    std::reverse(reversed.assets.begin(), reversed.assets.end());
    CHECK(enumerate_chains(reversed, "H1", "p") == enumerate_chains(m, "H1", "p"));
  }
}

TEST_CASE("attack graph of H3") {
  const auto& m = fixtures::sphere();
  std::vector<AttackChain> chains;
  for (auto c : enumerate_chains(m, "H3", "researcher")) chains.push_back(attach_protections(m, c));
  const auto g = build_graph("H3", chains);
  CHECK(g.hazard == "H3");
  CHECK(g.nodes == std::set<AssetId>{"nodes", "infrapod-server", "infrapod-db"});
  REQUIRE(g.edges.size() == 3);
  const auto direct = std::find_if(g.edges.begin(), g.edges.end(), [](const GraphEdge& e) {
    return e.from == "nodes" && e.to == "infrapod-db";
  });
  REQUIRE(direct != g.edges.end());
  CHECK(direct->protections == std::vector<ProtectionId>{"db-auth"});
  CHECK(direct->memberships == std::set<Membership>{{"H3", 0}});
}

TEST_CASE("attack graph of H1.3 has the expected edges") {
  const auto g = build_graph("H1.3", enumerate_chains(fixtures::sphere(), "H1.3", kCombinedProfile));
  std::set<std::pair<AssetId, AssetId>> edges;
  for (const auto& e : g.edges) edges.insert({e.from, e.to});
  const std::set<std::pair<AssetId, AssetId>> expected = {
      {"nodes", "node-server"},  {"node-server", "ops"},       {"bare-metal-nodes", "ops"},
      {"nodes", "infrapod-server"}, {"infrapod-server", "ops"}, {"nodes", "storage-server"},
      {"storage-server", "ops"}, {"internet", "infrapod-server"}};
  CHECK(edges == expected);
}

TEST_CASE("graphs reconstruct their chains") {
  std::mt19937 rng(31337);
  for (int i = 0; i < 100; ++i) {
    const auto m = testgen::random_model(rng);
    std::vector<AttackChain> chains;
    for (auto c : enumerate_chains(m, "H1", "p")) chains.push_back(attach_protections(m, c));
    const auto g = build_graph("H1", chains);
    for (const auto& e : g.edges) CHECK_FALSE(e.memberships.empty());
    CHECK(std::is_sorted(g.edges.begin(), g.edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
      return std::tie(a.from, a.to, a.link) < std::tie(b.from, b.to, b.link);
    }));
    for (std::size_t k = 0; k < chains.size(); ++k) {
      std::set<std::tuple<AssetId, AssetId, LinkId>> from_graph, from_chain;
      for (const auto& e : g.edges)
        if (e.memberships.count({"H1", k})) from_graph.insert({e.from, e.to, e.link});
      for (const auto& h : chains[k].hops) from_chain.insert({h.from, h.to, h.link});
      CHECK(from_graph == from_chain);
      CHECK(g.nodes.count(chains[k].entry) == 1);
    }
  }
}

TEST_CASE("merging graphs") {
  const auto& m = fixtures::sphere();
  const auto h3 = build_graph("H3", enumerate_chains(m, "H3", kCombinedProfile));
  const auto h13 = build_graph("H1.3", enumerate_chains(m, "H1.3", kCombinedProfile));
  const auto merged = merge_graphs({h3, h13});
  CHECK(merged.hazard == "merged");
  CHECK(merged.nodes == std::set<AssetId>{"nodes", "infrapod-server", "infrapod-db", "node-server",
                                           "bare-metal-nodes", "storage-server", "ops", "internet"});
  const auto shared = std::find_if(merged.edges.begin(), merged.edges.end(), [](const GraphEdge& e) {
    return e.from == "nodes" && e.to == "infrapod-server";
  });
  REQUIRE(shared != merged.edges.end());
  std::set<HazardId> hazards;
  for (const auto& mb : shared->memberships) hazards.insert(mb.hazard);
  CHECK(hazards == std::set<HazardId>{"H1.3", "H3"});

  auto single = merge_graphs({h3});
  CHECK(single.hazard == "merged");
  single.hazard = h3.hazard;
  CHECK(single == h3);

  const auto none = merge_graphs({});
  CHECK(none.nodes.empty());
  CHECK(none.edges.empty());
}
