#include "attackmap/scenario.hpp"

#include <sstream>

namespace attackmap {

namespace {
constexpr std::string_view kZeroDayPrefix = "zero-day:";

[[noreturn]] void unknown(std::string_view kind, const std::string& id) {
  throw NotFoundError("E-UNKNOWN-ID", id, "scenario references unknown " + std::string(kind) + " '" + id + "'");
}
}  // namespace

bool Scenario::empty() const {
  return !profile && compromised.empty() && disabled_protections.empty() && zero_day_links.empty() &&
         score_overrides.empty();
}

std::string zero_day_link_id(std::size_t n) { return std::string(kZeroDayPrefix) + std::to_string(n); }

bool is_zero_day_link_id(std::string_view link) { return link.starts_with(kZeroDayPrefix); }

void check_scenario(const Model& model, const Scenario& scenario) {
  if (scenario.profile && *scenario.profile != kCombinedProfile && !model.find_profile(*scenario.profile))
    unknown("profile", *scenario.profile);
  for (const auto& asset : scenario.compromised)
    if (!model.find_asset(asset)) unknown("asset", asset);
  for (const auto& protection : scenario.disabled_protections)
    if (!model.find_protection(protection)) unknown("protection", protection);
  for (const auto& zero_day : scenario.zero_day_links) {
    if (!model.find_asset(zero_day.a)) unknown("asset", zero_day.a);
    if (!model.find_asset(zero_day.b)) unknown("asset", zero_day.b);
    if (zero_day.a == zero_day.b)
      throw InvalidArgumentError("E-SELF-LINK", "zero-day link connects '" + zero_day.a + "' to itself");
  }
  for (const auto& score : scenario.score_overrides) {
    bool known = model.find_link(score.link) != nullptr;
    for (std::size_t i = 1; !known && i <= scenario.zero_day_links.size(); ++i)
      known = score.link == zero_day_link_id(i);
    if (!known) unknown("link", score.link);
    if (!(score.likelihood > 0.0 && score.likelihood <= 1.0)) {
      std::ostringstream msg;
      msg << "likelihood " << score.likelihood << " for '" << score.link << "' is outside (0, 1]";
      throw InvalidArgumentError("E-SCORE-RANGE", msg.str());
    }
  }
}

}  // namespace attackmap
