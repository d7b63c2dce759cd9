#pragma once

#include <string>

#include "attackmap/ingest.hpp"
#include "attackmap/model.hpp"

namespace fixtures {

inline std::string data_path(const std::string& name) { return std::string(ATTACKMAP_DATA_DIR) + "/" + name; }

inline const attackmap::Model& sphere() {
  static const attackmap::Model m = attackmap::load_model_file(data_path("sphere.json"));
  return m;
}

inline const attackmap::Model& sphere_partial() {
  static const attackmap::Model m = attackmap::load_model_file(data_path("sphere-partial.json"));
  return m;
}

// Two-asset model whose only profile starts on the hazard's target.
inline attackmap::Model self_target_model() {
  using namespace attackmap;
  Model m;
  m.losses = {{"L2", "misuse", std::nullopt}};
  m.hazards = {{"H5", "misuse without detection", {"L2"}}};
  m.assets = {{"nodes", "node", Layer::hardware, {}, {}}, {"ops", "ops", Layer::hardware, {}, {}}};
  m.links = {{"l1", "nodes", "ops", "direct", LinkDirection::bidirectional, {}}};
  m.protections = {{"ops-guard", "ops guard", "", {{"ops", std::nullopt}}}};
  m.profiles = {{"researcher", "researcher", 1, {"nodes"}}};
  m.mappings = {{"H5", {"nodes"}}};
  return m;
}

}  // namespace fixtures
