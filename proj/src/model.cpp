#include "attackmap/model.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <sstream>

namespace attackmap {

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& item) { return item.id == id; });
  return it == items.end() ? nullptr : &*it;
}

bool all_digits(std::string_view text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool positive_int(std::string_view text) {
  return all_digits(text) && text.front() != '0';
}

class Collector {
 public:
  void error(std::string code, std::string subject, std::string message) {
    findings_.push_back({Severity::error, std::move(code), std::move(message), std::move(subject), {}, {}});
  }
  void warning(std::string code, std::string subject, std::string message) {
    findings_.push_back({Severity::warning, std::move(code), std::move(message), std::move(subject), {}, {}});
  }
  std::vector<Finding> take() { return std::move(findings_); }

 private:
  std::vector<Finding> findings_;
};

template <typename T>
void check_unique_ids(const std::vector<T>& items, std::string_view kind, Collector& out) {
  std::map<std::string, int> seen;
  for (const auto& item : items) {
    if (item.id.empty()) {
      out.error("E-EMPTY-ID", "", std::string(kind) + " with empty id");
      continue;
    }
    if (++seen[item.id] == 2)
      out.error("E-DUP-ID", item.id, std::string(kind) + " id '" + item.id + "' is defined more than once");
  }
}

void check_asset_ref(const Model& model, const std::string& subject, const std::string& asset,
                     std::string_view role, Collector& out) {
  if (!model.find_asset(asset))
    out.error("E-DANGLING-REF", subject,
              std::string(role) + " of '" + subject + "' references unknown asset '" + asset + "'");
}

void check_hazards(const Model& model, Collector& out) {
  for (const auto& hazard : model.hazards) {
    if (!is_hazard_id(hazard.id)) {
      out.error("E-BAD-ID", hazard.id, "hazard id '" + hazard.id + "' does not match H<int>(.<int>)*");
    } else if (auto parent = hazard_parent(hazard.id); parent && !model.find_hazard(*parent)) {
      out.error("E-MISSING-PARENT", hazard.id,
                "hazard '" + hazard.id + "' has no parent hazard '" + *parent + "'");
    }
    if (hazard.associated.empty())
      out.warning("W-EMPTY-ASSOCIATED", hazard.id, "hazard '" + hazard.id + "' has no associated losses");
    std::set<std::string> seen;
    for (const auto& ref : hazard.associated) {
      if (!seen.insert(ref).second)
        out.warning("W-DUP-REF", hazard.id, "hazard '" + hazard.id + "' lists '" + ref + "' twice");
      if (!model.find_loss(ref) && !model.find_hazard(ref))
        out.error("E-DANGLING-REF", hazard.id,
                  "hazard '" + hazard.id + "' references unknown loss or hazard '" + ref + "'");
    }
  }

  // A hazard is on a cycle iff it can reach itself through hazard refs.
  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& hazard : model.hazards)
    for (const auto& ref : hazard.associated)
      if (model.find_hazard(ref)) edges[hazard.id].push_back(ref);

  std::set<std::string> reported;
  for (const auto& hazard : model.hazards) {
    if (reported.count(hazard.id)) continue;
    std::set<std::string> visited;
    std::vector<std::string> stack(edges[hazard.id].begin(), edges[hazard.id].end());
    bool cyclic = false;
    while (!stack.empty() && !cyclic) {
      auto next = stack.back();
      stack.pop_back();
      if (next == hazard.id) cyclic = true;
      if (!visited.insert(next).second) continue;
      for (const auto& ref : edges[next]) stack.push_back(ref);
    }
    if (cyclic) {
      reported.insert(hazard.id);
      out.error("E-HAZARD-CYCLE", hazard.id,
                "hazard '" + hazard.id + "' is part of a hazard reference cycle");
    }
  }
}

void check_reachability(const Model& model, Collector& out) {
  std::map<std::string, std::vector<std::string>> arcs;
  for (const auto& link : model.links) {
    arcs[link.a].push_back(link.b);
    if (link.direction == LinkDirection::bidirectional) arcs[link.b].push_back(link.a);
  }
  std::set<std::string> reached;
  std::deque<std::string> queue;
  for (const auto& profile : model.profiles)
    for (const auto& entry : profile.entry_assets)
      if (reached.insert(entry).second) queue.push_back(entry);
  while (!queue.empty()) {
    auto at = queue.front();
    queue.pop_front();
    for (const auto& next : arcs[at])
      if (reached.insert(next).second) queue.push_back(next);
  }
  for (const auto& asset : model.assets)
    if (!reached.count(asset.id))
      out.warning("W-UNREACHABLE-ASSET", asset.id,
                  "asset '" + asset.id + "' is unreachable from every entry asset");
}

}  // namespace

const Loss* Model::find_loss(std::string_view id) const { return find_by_id(losses, id); }
const Hazard* Model::find_hazard(std::string_view id) const { return find_by_id(hazards, id); }
const Asset* Model::find_asset(std::string_view id) const { return find_by_id(assets, id); }
const Link* Model::find_link(std::string_view id) const { return find_by_id(links, id); }
const Protection* Model::find_protection(std::string_view id) const { return find_by_id(protections, id); }
const AttackerProfile* Model::find_profile(std::string_view id) const { return find_by_id(profiles, id); }

const CriticalAssetMapping* Model::find_mapping(std::string_view hazard) const {
  auto it = std::find_if(mappings.begin(), mappings.end(),
                         [&](const CriticalAssetMapping& m) { return m.hazard == hazard; });
  return it == mappings.end() ? nullptr : &*it;
}

std::size_t ValidationReport::error_count() const {
  return std::count_if(findings.begin(), findings.end(),
                       [](const Finding& f) { return f.severity == Severity::error; });
}

std::size_t ValidationReport::warning_count() const {
  return findings.size() - error_count();
}

namespace {
std::string summarize(const std::vector<Finding>& findings) {
  for (const auto& f : findings)
    if (f.severity == Severity::error) return f.code + ": " + f.message;
  return findings.empty() ? "invalid model" : findings.front().message;
}
std::string first_error_code(const std::vector<Finding>& findings) {
  for (const auto& f : findings)
    if (f.severity == Severity::error) return f.code;
  return "E-INVALID";
}
}  // namespace

ModelError::ModelError(std::vector<Finding> findings)
    : Error(first_error_code(findings), summarize(findings)), findings_(std::move(findings)) {}

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::hardware: return "hardware";
    case Layer::software: return "software";
    case Layer::data: return "data";
  }
  return "hardware";
}

std::optional<Layer> parse_layer(std::string_view text) {
  if (text == "hardware") return Layer::hardware;
  if (text == "software") return Layer::software;
  if (text == "data") return Layer::data;
  return std::nullopt;
}

std::string_view to_string(LinkDirection direction) {
  return direction == LinkDirection::bidirectional ? "bidirectional" : "a-to-b";
}

std::optional<LinkDirection> parse_link_direction(std::string_view text) {
  if (text == "bidirectional") return LinkDirection::bidirectional;
  if (text == "a-to-b") return LinkDirection::a_to_b;
  return std::nullopt;
}

std::string_view to_string(HopDirection direction) {
  return direction == HopDirection::a_to_b ? "a-to-b" : "b-to-a";
}

std::optional<HopDirection> parse_hop_direction(std::string_view text) {
  if (text == "a-to-b") return HopDirection::a_to_b;
  if (text == "b-to-a") return HopDirection::b_to_a;
  return std::nullopt;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

bool natural_less(std::string_view lhs, std::string_view rhs) {
  std::size_t i = 0, j = 0;
  while (i < lhs.size() && j < rhs.size()) {
    const bool ld = std::isdigit(static_cast<unsigned char>(lhs[i]));
    const bool rd = std::isdigit(static_cast<unsigned char>(rhs[j]));
    if (ld && rd) {
      std::size_t ie = i, je = j;
      while (ie < lhs.size() && std::isdigit(static_cast<unsigned char>(lhs[ie]))) ++ie;
      while (je < rhs.size() && std::isdigit(static_cast<unsigned char>(rhs[je]))) ++je;
      auto a = lhs.substr(i, ie - i);
      auto b = rhs.substr(j, je - j);
      while (a.size() > 1 && a.front() == '0') a.remove_prefix(1);
      while (b.size() > 1 && b.front() == '0') b.remove_prefix(1);
      if (a.size() != b.size()) return a.size() < b.size();
      if (a != b) return a < b;
      i = ie;
      j = je;
    } else {
      if (lhs[i] != rhs[j]) return lhs[i] < rhs[j];
      ++i;
      ++j;
    }
  }
  if (lhs.size() - i != rhs.size() - j) return lhs.size() - i < rhs.size() - j;
  return lhs < rhs;
}

bool is_loss_id(std::string_view id) {
  return id.size() >= 2 && id.front() == 'L' && positive_int(id.substr(1));
}

bool is_hazard_id(std::string_view id) {
  if (id.size() < 2 || id.front() != 'H') return false;
  id.remove_prefix(1);
  while (true) {
    auto dot = id.find('.');
    if (!all_digits(id.substr(0, dot))) return false;
    if (dot == std::string_view::npos) return true;
    id.remove_prefix(dot + 1);
  }
}

std::optional<HazardId> hazard_parent(std::string_view id) {
  auto dot = id.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return HazardId(id.substr(0, dot));
}

ValidationReport validate(const Model& model) {
  Collector out;

  check_unique_ids(model.losses, "loss", out);
  check_unique_ids(model.hazards, "hazard", out);
  check_unique_ids(model.assets, "asset", out);
  check_unique_ids(model.links, "link", out);
  check_unique_ids(model.protections, "protection", out);
  check_unique_ids(model.profiles, "profile", out);

  for (const auto& loss : model.losses) {
    if (!is_loss_id(loss.id))
      out.error("E-BAD-ID", loss.id, "loss id '" + loss.id + "' does not match L<positive integer>");
    if (loss.weight && (*loss.weight < 1 || *loss.weight > 100))
      out.error("E-WEIGHT-RANGE", loss.id,
                "loss '" + loss.id + "' weight " + std::to_string(*loss.weight) + " is outside [1, 100]");
  }

  check_hazards(model, out);

  for (const auto& link : model.links) {
    check_asset_ref(model, link.id, link.a, "endpoint a", out);
    check_asset_ref(model, link.id, link.b, "endpoint b", out);
    if (link.a == link.b)
      out.error("E-SELF-LINK", link.id, "link '" + link.id + "' connects asset '" + link.a + "' to itself");
    if (link.kind.empty()) out.error("E-BAD-KIND", link.id, "link '" + link.id + "' has an empty kind");
  }

  for (const auto& protection : model.protections) {
    if (protection.guards.empty())
      out.error("E-EMPTY-GUARDS", protection.id, "protection '" + protection.id + "' guards nothing");
    std::set<GuardSpec> seen;
    for (const auto& guard : protection.guards) {
      check_asset_ref(model, protection.id, guard.asset, "guard", out);
      if (guard.via) check_asset_ref(model, protection.id, *guard.via, "guard via", out);
      if (!seen.insert(guard).second)
        out.error("E-DUP-GUARD", protection.id,
                  "protection '" + protection.id + "' repeats guard on '" + guard.asset + "'" +
                      (guard.via ? " via '" + *guard.via + "'" : std::string()));
    }
  }

  for (const auto& profile : model.profiles) {
    if (profile.id == kCombinedProfile)
      out.error("E-RESERVED-ID", profile.id, "profile id '*' is reserved for the combined attacker");
    if (profile.tier < 0)
      out.error("E-NEGATIVE-TIER", profile.id, "profile '" + profile.id + "' has a negative tier");
    if (profile.entry_assets.empty())
      out.error("E-EMPTY-ENTRIES", profile.id, "profile '" + profile.id + "' has no entry assets");
    for (const auto& entry : profile.entry_assets) check_asset_ref(model, profile.id, entry, "entry", out);
  }

  std::map<std::string, int> mapped;
  for (const auto& mapping : model.mappings) {
    if (!model.find_hazard(mapping.hazard))
      out.error("E-DANGLING-REF", mapping.hazard, "mapping references unknown hazard '" + mapping.hazard + "'");
    if (++mapped[mapping.hazard] == 2)
      out.error("E-DUP-MAPPING", mapping.hazard, "hazard '" + mapping.hazard + "' is mapped more than once");
    if (mapping.targets.empty())
      out.error("E-EMPTY-TARGETS", mapping.hazard, "mapping for '" + mapping.hazard + "' has no targets");
    for (const auto& target : mapping.targets) check_asset_ref(model, mapping.hazard, target, "target", out);
  }

  std::set<std::pair<std::string, HopDirection>> scored;
  for (const auto& score : model.edge_scores) {
    const Link* link = model.find_link(score.link);
    if (!link) {
      out.error("E-DANGLING-REF", score.link, "edge score references unknown link '" + score.link + "'");
    } else if (link->direction == LinkDirection::a_to_b && score.direction == HopDirection::b_to_a) {
      out.error("E-SCORE-DIRECTION", score.link,
                "edge score for '" + score.link + "' scores b-to-a on a one-way link");
    }
    if (!(score.likelihood > 0.0 && score.likelihood <= 1.0)) {
      std::ostringstream msg;
      msg << "edge score for '" << score.link << "' has likelihood " << score.likelihood << " outside (0, 1]";
      out.error("E-SCORE-RANGE", score.link, msg.str());
    }
    if (!scored.insert({score.link, score.direction}).second)
      out.error("E-DUP-SCORE", score.link,
                "link '" + score.link + "' is scored twice in direction " + std::string(to_string(score.direction)));
  }

  for (const auto& hazard : model.hazards)
    if (!mapped.count(hazard.id))
      out.warning("W-UNMAPPED-HAZARD", hazard.id, "hazard '" + hazard.id + "' has no critical-asset mapping");

  check_reachability(model, out);

  return {out.take()};
}

std::set<LossId, NaturalLess> resolve_losses(const Model& model, std::string_view hazard) {
  if (!model.find_hazard(hazard))
    throw NotFoundError("E-UNKNOWN-ID", std::string(hazard), "unknown hazard '" + std::string(hazard) + "'");

  std::set<LossId, NaturalLess> losses;
  std::set<std::string> visited{std::string(hazard)};
  std::vector<std::string> pending{std::string(hazard)};
  while (!pending.empty()) {
    const Hazard* current = model.find_hazard(pending.back());
    pending.pop_back();
    for (const auto& ref : current->associated) {
      if (model.find_loss(ref)) {
        losses.insert(ref);
      } else if (model.find_hazard(ref) && visited.insert(ref).second) {
        pending.push_back(ref);
      }
    }
  }
  return losses;
}

int loss_weight(const Model& model, std::string_view loss) {
  for (std::size_t i = 0; i < model.losses.size(); ++i) {
    if (model.losses[i].id != loss) continue;
    if (model.losses[i].weight) return *model.losses[i].weight;
    return std::max(1, 101 - static_cast<int>(i + 1));
  }
  throw NotFoundError("E-UNKNOWN-ID", std::string(loss), "unknown loss '" + std::string(loss) + "'");
}

int hazard_weight(const Model& model, std::string_view hazard) {
  int weight = 0;
  for (const auto& loss : resolve_losses(model, hazard)) weight = std::max(weight, loss_weight(model, loss));
  return weight;
}

std::vector<HazardNode> hazard_tree(const Model& model) {
  std::vector<HazardId> ids;
  for (const auto& hazard : model.hazards) ids.push_back(hazard.id);
  std::sort(ids.begin(), ids.end(), NaturalLess{});

  std::map<HazardId, std::vector<HazardId>> children;
  std::vector<HazardId> roots;
  for (const auto& id : ids) {
    auto parent = hazard_parent(id);
    if (parent && model.find_hazard(*parent))
      children[*parent].push_back(id);
    else
      roots.push_back(id);
  }

  std::function<HazardNode(const HazardId&)> build = [&](const HazardId& id) {
    HazardNode node{id, {}};
    for (const auto& child : children[id]) node.children.push_back(build(child));
    return node;
  };
  std::vector<HazardNode> forest;
  for (const auto& root : roots) forest.push_back(build(root));
  return forest;
}

std::vector<AssetId> profile_entries(const Model& model, std::string_view profile) {
  std::set<AssetId> entries;
  if (profile == kCombinedProfile) {
    for (const auto& p : model.profiles) entries.insert(p.entry_assets.begin(), p.entry_assets.end());
  } else {
    const AttackerProfile* p = model.find_profile(profile);
    if (!p)
      throw NotFoundError("E-UNKNOWN-ID", std::string(profile), "unknown profile '" + std::string(profile) + "'");
    entries.insert(p->entry_assets.begin(), p->entry_assets.end());
  }
  return {entries.begin(), entries.end()};
}

}  // namespace attackmap
