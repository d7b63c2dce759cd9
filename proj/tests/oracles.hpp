#pragma once

// Reference implementations used only by tests. They read the raw model
// sections directly and share no code with the library's graph or analysis
// modules.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "attackmap/model.hpp"
#include "attackmap/scenario.hpp"

namespace oracle {

// (entry, asset sequence, link sequence)
using Path = std::tuple<std::string, std::vector<std::string>, std::vector<std::string>>;

struct RawStep {
  std::string from, to, link;
};

inline std::vector<RawStep> raw_steps(const attackmap::Model& m, const attackmap::Scenario* s) {
  std::vector<RawStep> steps;
  for (const auto& l : m.links) {
    steps.push_back({l.a, l.b, l.id});
    if (l.direction == attackmap::LinkDirection::bidirectional) steps.push_back({l.b, l.a, l.id});
  }
  if (s) {
    int n = 0;
    for (const auto& z : s->zero_day_links) {
      std::string id = "zero-day:" + std::to_string(++n);
      steps.push_back({z.a, z.b, id});
      if (z.direction == attackmap::LinkDirection::bidirectional) steps.push_back({z.b, z.a, id});
    }
  }
  return steps;
}

// Brute force: grow every walk without repeats from every entry, scanning the
// whole step list at each level, and keep those ending in a target.
inline std::multiset<Path> enumerate(const attackmap::Model& m, const std::string& hazard,
                                     const std::vector<std::string>& entries, const attackmap::Scenario* s,
                                     std::size_t max_depth) {
  std::set<std::string> targets;
  for (const auto& mp : m.mappings)
    if (mp.hazard == hazard) targets.insert(mp.targets.begin(), mp.targets.end());
  std::set<std::string> starts(entries.begin(), entries.end());
  if (s) starts.insert(s->compromised.begin(), s->compromised.end());
  const auto steps = raw_steps(m, s);

  std::multiset<Path> out;
  struct Walk {
    std::vector<std::string> assets, links;
  };
  std::vector<Walk> frontier;
  for (const auto& e : starts) frontier.push_back({{e}, {}});
  while (!frontier.empty()) {
    Walk w = frontier.back();
    frontier.pop_back();
    const std::string& last = w.assets.back();
    if (targets.count(last)) {
      out.insert({w.assets.front(), w.assets, w.links});
      continue;
    }
    if (w.links.size() == max_depth) continue;
    for (const auto& st : steps) {
      if (st.from != last) continue;
      if (std::find(w.assets.begin(), w.assets.end(), st.to) != w.assets.end()) continue;
      Walk next = w;
      next.assets.push_back(st.to);
      next.links.push_back(st.link);
      frontier.push_back(std::move(next));
    }
  }
  return out;
}

// Chains as sets of protection ids; returns the smallest number of
// protections that touches every non-empty set (exhaustive over subsets).
inline std::size_t minimum_cover(const std::vector<std::set<std::string>>& chains) {
  std::set<std::string> all;
  for (const auto& c : chains) all.insert(c.begin(), c.end());
  std::vector<std::string> ids(all.begin(), all.end());
  const std::size_t n = ids.size();
  std::size_t best = n;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size >= best) continue;
    bool ok = true;
    for (const auto& c : chains) {
      if (c.empty()) continue;
      bool hit = false;
      for (std::size_t i = 0; i < n && !hit; ++i)
        if ((mask >> i) & 1u) hit = c.count(ids[i]) > 0;
      if (!hit) {
        ok = false;
        break;
      }
    }
    if (ok) best = size;
  }
  return best;
}

// Product of directed likelihoods keyed by "link|direction"; later maps win.
inline double product(const std::vector<std::pair<std::string, std::string>>& hops,
                      const std::map<std::string, double>& base, const std::map<std::string, double>& over) {
  double p = 1.0;
  for (const auto& [link, dir] : hops) {
    const std::string key = link + "|" + dir;
    if (auto it = over.find(key); it != over.end())
      p *= it->second;
    else if (auto jt = base.find(key); jt != base.end())
      p *= jt->second;
  }
  return p;
}

// Hand-encoded loss closure over every hazard of the bundled model.
inline const std::map<std::string, std::set<std::string>>& loss_closure_fixture() {
  static const std::map<std::string, std::set<std::string>> f = {
      {"H1", {"L1", "L2", "L3", "L4", "L5"}},
      {"H1.1", {"L2", "L3", "L4", "L5"}},
      {"H1.2", {"L3", "L4", "L5"}},
      {"H1.3", {"L1", "L2", "L3", "L4", "L5"}},
      {"H2", {"L3", "L5"}},
      {"H2.1", {}},
      {"H2.2", {"L5"}},
      {"H2.2.1", {"L5"}},
      {"H2.2.2", {"L5"}},
      {"H2.2.3", {"L5"}},
      {"H2.2.4", {"L5"}},
      {"H3", {"L1", "L4"}},
      {"H3.1", {"L1", "L2", "L3", "L4", "L5"}},
      {"H3.2", {"L1", "L4"}},
      {"H3.3", {"L1", "L4"}},
      {"H3.4", {"L4"}},
      {"H3.5", {"L4"}},
      {"H3.6", {"L4"}},
      {"H4", {"L1", "L2", "L4"}},
      {"H4.1", {"L1", "L2"}},
      {"H4.2", {"L1"}},
      {"H5", {"L2"}},
      {"H6", {"L3"}},
  };
  return f;
}

}  // namespace oracle
