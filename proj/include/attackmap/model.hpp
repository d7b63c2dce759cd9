#pragma once

// Domain types of the security knowledge graph: losses, hazards, assets,
// links, protections, attacker profiles and critical-asset mappings.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace attackmap {

using LossId = std::string;
using HazardId = std::string;
using AssetId = std::string;
using LinkId = std::string;
using ProtectionId = std::string;
using ProfileId = std::string;

using Attributes = std::map<std::string, std::string>;

// Profile id that stands for "every profile at once" (union of entry assets).
inline constexpr std::string_view kCombinedProfile = "*";

enum class Layer { hardware, software, data };
enum class LinkDirection { bidirectional, a_to_b };
// Direction in which a single hop traverses its link.
enum class HopDirection { a_to_b, b_to_a };

struct Loss {
  LossId id;
  std::string description;
  std::optional<int> weight;  // 1..100; defaulted from file order on ingest

  bool operator==(const Loss&) const = default;
};

struct Hazard {
  HazardId id;
  std::string description;
  std::vector<std::string> associated;  // loss ids and/or hazard ids

  bool operator==(const Hazard&) const = default;
};

struct Asset {
  AssetId id;
  std::string name;
  Layer layer = Layer::hardware;
  Attributes attributes;
  std::vector<std::string> tags;

  bool operator==(const Asset&) const = default;
};

// kind is "direct", "vlan", "vxlan", "remote-api" or any other free label.
struct Link {
  LinkId id;
  AssetId a;
  AssetId b;
  std::string kind = "direct";
  LinkDirection direction = LinkDirection::bidirectional;
  Attributes attributes;

  bool operator==(const Link&) const = default;
};

struct GuardSpec {
  AssetId asset;             // asset whose entry is guarded
  std::optional<AssetId> via;  // only hops arriving from this asset

  bool operator==(const GuardSpec&) const = default;
  auto operator<=>(const GuardSpec&) const = default;
};

struct Protection {
  ProtectionId id;
  std::string name;
  std::string description;
  std::vector<GuardSpec> guards;

  bool operator==(const Protection&) const = default;
};

struct AttackerProfile {
  ProfileId id;
  std::string name;
  int tier = 0;
  std::vector<AssetId> entry_assets;

  bool operator==(const AttackerProfile&) const = default;
};

struct CriticalAssetMapping {
  HazardId hazard;
  std::vector<AssetId> targets;

  bool operator==(const CriticalAssetMapping&) const = default;
};

// Likelihood of traversing one link in one direction, in (0, 1].
struct EdgeScore {
  LinkId link;
  HopDirection direction = HopDirection::a_to_b;
  double likelihood = 1.0;

  bool operator==(const EdgeScore&) const = default;
};

struct ModelMetadata {
  std::string name;
  std::string version;

  bool operator==(const ModelMetadata&) const = default;
};

struct Model {
  ModelMetadata metadata;
  std::vector<Loss> losses;
  std::vector<Hazard> hazards;
  std::vector<Asset> assets;
  std::vector<Link> links;
  std::vector<Protection> protections;
  std::vector<AttackerProfile> profiles;
  std::vector<CriticalAssetMapping> mappings;
  std::vector<EdgeScore> edge_scores;

  bool operator==(const Model&) const = default;

  const Loss* find_loss(std::string_view id) const;
  const Hazard* find_hazard(std::string_view id) const;
  const Asset* find_asset(std::string_view id) const;
  const Link* find_link(std::string_view id) const;
  const Protection* find_protection(std::string_view id) const;
  const AttackerProfile* find_profile(std::string_view id) const;
  const CriticalAssetMapping* find_mapping(std::string_view hazard) const;
};

enum class Severity { error, warning };

struct Finding {
  Severity severity = Severity::error;
  std::string code;     // e.g. "E-DANGLING-REF"
  std::string message;
  std::string subject;  // offending id (or document path)
  std::optional<std::size_t> line;
  std::optional<std::size_t> column;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool operator==(const ValidationReport&) const = default;

  std::size_t error_count() const;
  std::size_t warning_count() const;
  bool ok() const { return error_count() == 0; }
};

// Base of all errors raised by the library. code() carries the diagnostic
// code ("E-UNKNOWN-ID", "E-NO-MAPPING", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// A referenced id does not exist (or a hazard lacks a mapping).
class NotFoundError : public Error {
 public:
  NotFoundError(std::string code, std::string subject, const std::string& message)
      : Error(std::move(code), message), subject_(std::move(subject)) {}
  const std::string& subject() const { return subject_; }

 private:
  std::string subject_;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A document or model failed to parse/validate; carries every finding.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<Finding> findings);
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  std::vector<Finding> findings_;
};

std::string_view to_string(Layer layer);
std::optional<Layer> parse_layer(std::string_view text);
std::string_view to_string(LinkDirection direction);
std::optional<LinkDirection> parse_link_direction(std::string_view text);
std::string_view to_string(HopDirection direction);
std::optional<HopDirection> parse_hop_direction(std::string_view text);
std::string_view to_string(Severity severity);

// Ordering that compares embedded digit runs numerically: H1.3 < H1.10.
bool natural_less(std::string_view lhs, std::string_view rhs);

struct NaturalLess {
  bool operator()(std::string_view lhs, std::string_view rhs) const {
    return natural_less(lhs, rhs);
  }
};

bool is_loss_id(std::string_view id);
bool is_hazard_id(std::string_view id);
// "H2.2.1" -> "H2.2"; top-level ids have no parent.
std::optional<HazardId> hazard_parent(std::string_view id);

// Runs every structural and referential check and returns all findings.
// Warnings include advisory lints (unreachable assets, unmapped hazards,
// hazards with no associated losses).
ValidationReport validate(const Model& model);

// Transitive closure of a hazard's associated references down to loss ids.
// Throws NotFoundError for an unknown hazard.
std::set<LossId, NaturalLess> resolve_losses(const Model& model, std::string_view hazard);

// Effective loss weight: the explicit weight, else 101 - (1-based position).
int loss_weight(const Model& model, std::string_view loss);

// Max weight of the hazard's resolved losses, 0 when it resolves to none.
int hazard_weight(const Model& model, std::string_view hazard);

struct HazardNode {
  HazardId id;
  std::vector<HazardNode> children;

  bool operator==(const HazardNode&) const = default;
};

// Forest of hazards keyed by dotted-id prefix, siblings in numeric order.
std::vector<HazardNode> hazard_tree(const Model& model);

// Entry assets of a profile; kCombinedProfile yields the union over all
// profiles. Sorted, deduplicated. Throws NotFoundError for an unknown profile.
std::vector<AssetId> profile_entries(const Model& model, std::string_view profile);

}  // namespace attackmap
