#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attackmap/model.hpp"

namespace attackmap {

struct ZeroDayLink {
  AssetId a;
  AssetId b;
  LinkDirection direction = LinkDirection::a_to_b;

  bool operator==(const ZeroDayLink&) const = default;
};

// What-if overlay evaluated on top of an immutable model.
struct Scenario {
  std::optional<ProfileId> profile;  // replaces the base profile when set
  std::vector<AssetId> compromised;
  std::vector<ProtectionId> disabled_protections;
  std::vector<ZeroDayLink> zero_day_links;
  std::vector<EdgeScore> score_overrides;

  bool operator==(const Scenario&) const = default;
  bool empty() const;
};

// Link id given to the n-th (1-based) injected zero-day link.
std::string zero_day_link_id(std::size_t n);
bool is_zero_day_link_id(std::string_view link);

// Throws NotFoundError naming the first unknown id, InvalidArgumentError for
// self-looping zero-days or likelihoods outside (0, 1].
void check_scenario(const Model& model, const Scenario& scenario);

}  // namespace attackmap
