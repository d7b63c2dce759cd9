#include "attackmap/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace attackmap {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kRequiredSections = {"losses",      "hazards",  "assets",  "links",
                                                    "protections", "profiles", "mappings"};
const std::set<std::string> kTopLevelKeys = {"schema_version", "metadata",  "losses",   "hazards",
                                             "assets",         "links",     "protections", "profiles",
                                             "mappings",       "edge_scores"};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

// Walks a parsed document, collecting schema findings instead of throwing.
class SchemaReader {
 public:
  explicit SchemaReader(std::vector<Finding>& findings) : findings_(findings) {}

  void error(const std::string& subject, const std::string& message, std::string code = "E-SCHEMA") {
    findings_.push_back({Severity::error, std::move(code), message, subject, {}, {}});
  }
  void warning(const std::string& subject, const std::string& message) {
    findings_.push_back({Severity::warning, "W-UNKNOWN-FIELD", message, subject, {}, {}});
  }

  // Warn on keys outside `known`.
  void check_keys(const json& object, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : object.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        warning(path + "." + key, "unknown field '" + key + "' at " + path);
  }

  std::string required_string(const json& object, const std::string& path, const char* key) {
    auto it = object.find(key);
    if (it == object.end()) {
      error(path, "missing required field '" + std::string(key) + "' at " + path);
      return {};
    }
    if (!it->is_string()) {
      error(path, "field '" + std::string(key) + "' at " + path + " must be a string");
      return {};
    }
    return it->get<std::string>();
  }

  std::optional<std::string> optional_string(const json& object, const std::string& path, const char* key) {
    auto it = object.find(key);
    if (it == object.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
      error(path, "field '" + std::string(key) + "' at " + path + " must be a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::vector<std::string> string_list(const json& object, const std::string& path, const char* key,
                                       bool required) {
    std::vector<std::string> out;
    auto it = object.find(key);
    if (it == object.end()) {
      if (required) error(path, "missing required field '" + std::string(key) + "' at " + path);
      return out;
    }
    if (!it->is_array()) {
      error(path, "field '" + std::string(key) + "' at " + path + " must be an array of strings");
      return out;
    }
    for (const auto& item : *it) {
      if (!item.is_string()) {
        error(path, "field '" + std::string(key) + "' at " + path + " must contain only strings");
        continue;
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  Attributes attributes(const json& object, const std::string& path) {
    Attributes out;
    auto it = object.find("attributes");
    if (it == object.end()) return out;
    if (!it->is_object()) {
      error(path, "field 'attributes' at " + path + " must be an object of strings");
      return out;
    }
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) {
        error(path, "attribute '" + key + "' at " + path + " must be a string");
        continue;
      }
      out[key] = value.get<std::string>();
    }
    return out;
  }

  // Yields (path, object) for each element of an array section.
  template <typename Fn>
  void each_object(const json& array, const std::string& section, Fn&& fn) {
    if (!array.is_array()) {
      error(section, "section '" + section + "' must be an array");
      return;
    }
    for (std::size_t i = 0; i < array.size(); ++i) {
      const std::string path = section + "[" + std::to_string(i) + "]";
      if (!array[i].is_object()) {
        error(path, "entry " + path + " must be an object");
        continue;
      }
      fn(path, array[i]);
    }
  }

 private:
  std::vector<Finding>& findings_;
};

// Subject for findings on an entry: its id when it has one.
std::string subject_of(const json& object, const std::string& path, const char* key = "id") {
  auto it = object.find(key);
  return it != object.end() && it->is_string() ? it->get<std::string>() : path;
}

std::optional<EdgeScore> read_edge_score(SchemaReader& reader, const json& entry, const std::string& path) {
  reader.check_keys(entry, path, {"link", "direction", "likelihood"});
  EdgeScore score;
  score.link = reader.required_string(entry, path, "link");
  const std::string subject = score.link.empty() ? path : score.link;
  const auto direction = reader.required_string(entry, path, "direction");
  if (auto parsed = parse_hop_direction(direction)) {
    score.direction = *parsed;
  } else if (!direction.empty()) {
    reader.error(subject, "edge score direction '" + direction + "' must be 'a-to-b' or 'b-to-a'");
  }
  auto it = entry.find("likelihood");
  if (it == entry.end() || !it->is_number()) {
    reader.error(subject, "edge score at " + path + " needs a numeric 'likelihood'");
    return std::nullopt;
  }
  score.likelihood = it->get<double>();
  return score;
}

Model read_model(const json& root, SchemaReader& reader) {
  Model model;

  for (const auto& [key, value] : root.items())
    if (!kTopLevelKeys.count(key)) reader.warning(key, "unknown top-level field '" + key + "'");

  auto version = root.find("schema_version");
  if (version == root.end()) {
    reader.error("schema_version", "missing required field 'schema_version'");
  } else if (!version->is_string() || version->get<std::string>() != kSchemaVersion) {
    reader.error("schema_version", "unsupported schema_version " + version->dump() + " (expected \"1\")");
  }
  for (const auto& section : kRequiredSections)
    if (!root.contains(section)) reader.error(section, "missing required section '" + section + "'");

  if (auto it = root.find("metadata"); it != root.end()) {
    if (!it->is_object()) {
      reader.error("metadata", "section 'metadata' must be an object");
    } else {
      reader.check_keys(*it, "metadata", {"name", "version"});
      model.metadata.name = reader.optional_string(*it, "metadata", "name").value_or("");
      model.metadata.version = reader.optional_string(*it, "metadata", "version").value_or("");
    }
  }

  auto section = [&](const char* name) -> const json* {
    auto it = root.find(name);
    return it == root.end() ? nullptr : &*it;
  };

  if (const json* losses = section("losses"))
    reader.each_object(*losses, "losses", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "description", "weight"});
      Loss loss;
      loss.id = reader.required_string(entry, path, "id");
      loss.description = reader.optional_string(entry, path, "description").value_or("");
      if (auto w = entry.find("weight"); w != entry.end() && !w->is_null()) {
        if (w->is_number_integer())
          loss.weight = w->get<int>();
        else
          reader.error(subject_of(entry, path), "loss weight at " + path + " must be an integer");
      }
      model.losses.push_back(std::move(loss));
    });

  if (const json* hazards = section("hazards"))
    reader.each_object(*hazards, "hazards", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "description", "associated"});
      Hazard hazard;
      hazard.id = reader.required_string(entry, path, "id");
      hazard.description = reader.optional_string(entry, path, "description").value_or("");
      hazard.associated = reader.string_list(entry, path, "associated", true);
      model.hazards.push_back(std::move(hazard));
    });

  if (const json* assets = section("assets"))
    reader.each_object(*assets, "assets", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "name", "layer", "attributes", "tags"});
      Asset asset;
      asset.id = reader.required_string(entry, path, "id");
      asset.name = reader.optional_string(entry, path, "name").value_or(asset.id);
      const auto layer = reader.required_string(entry, path, "layer");
      if (auto parsed = parse_layer(layer)) {
        asset.layer = *parsed;
      } else if (!layer.empty()) {
        reader.error(subject_of(entry, path),
                     "asset '" + asset.id + "' has layer '" + layer + "'; expected hardware, software or data",
                     "E-BAD-LAYER");
      }
      asset.attributes = reader.attributes(entry, path);
      asset.tags = reader.string_list(entry, path, "tags", false);
      model.assets.push_back(std::move(asset));
    });

  if (const json* links = section("links"))
    reader.each_object(*links, "links", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "a", "b", "kind", "direction", "attributes"});
      Link link;
      link.id = reader.required_string(entry, path, "id");
      link.a = reader.required_string(entry, path, "a");
      link.b = reader.required_string(entry, path, "b");
      link.kind = reader.required_string(entry, path, "kind");
      if (auto direction = reader.optional_string(entry, path, "direction")) {
        if (auto parsed = parse_link_direction(*direction))
          link.direction = *parsed;
        else
          reader.error(subject_of(entry, path),
                       "link '" + link.id + "' has direction '" + *direction + "'; expected bidirectional or a-to-b",
                       "E-BAD-DIRECTION");
      }
      link.attributes = reader.attributes(entry, path);
      model.links.push_back(std::move(link));
    });

  if (const json* protections = section("protections"))
    reader.each_object(*protections, "protections", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "name", "description", "guards"});
      Protection protection;
      protection.id = reader.required_string(entry, path, "id");
      protection.name = reader.optional_string(entry, path, "name").value_or(protection.id);
      protection.description = reader.optional_string(entry, path, "description").value_or("");
      if (auto guards = entry.find("guards"); guards == entry.end()) {
        reader.error(subject_of(entry, path), "missing required field 'guards' at " + path);
      } else {
        reader.each_object(*guards, path + ".guards", [&](const std::string& gpath, const json& g) {
          reader.check_keys(g, gpath, {"asset", "via"});
          GuardSpec guard;
          guard.asset = reader.required_string(g, gpath, "asset");
          guard.via = reader.optional_string(g, gpath, "via");
          protection.guards.push_back(std::move(guard));
        });
      }
      model.protections.push_back(std::move(protection));
    });

  if (const json* profiles = section("profiles"))
    reader.each_object(*profiles, "profiles", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"id", "name", "tier", "entry_assets"});
      AttackerProfile profile;
      profile.id = reader.required_string(entry, path, "id");
      profile.name = reader.optional_string(entry, path, "name").value_or(profile.id);
      if (auto tier = entry.find("tier"); tier == entry.end() || !tier->is_number_integer())
        reader.error(subject_of(entry, path), "profile at " + path + " needs an integer 'tier'");
      else
        profile.tier = tier->get<int>();
      profile.entry_assets = reader.string_list(entry, path, "entry_assets", true);
      model.profiles.push_back(std::move(profile));
    });

  if (const json* mappings = section("mappings"))
    reader.each_object(*mappings, "mappings", [&](const std::string& path, const json& entry) {
      reader.check_keys(entry, path, {"hazard", "targets"});
      CriticalAssetMapping mapping;
      mapping.hazard = reader.required_string(entry, path, "hazard");
      mapping.targets = reader.string_list(entry, path, "targets", true);
      model.mappings.push_back(std::move(mapping));
    });

  if (const json* scores = section("edge_scores"))
    reader.each_object(*scores, "edge_scores", [&](const std::string& path, const json& entry) {
      if (auto score = read_edge_score(reader, entry, path)) model.edge_scores.push_back(*score);
    });

  return model;
}

bool has_error(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::error; });
}

std::optional<json> parse_json(std::string_view text, std::vector<Finding>& findings) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte);
    std::string message = e.what();
    // nlohmann prefixes "[json.exception.parse_error.101] "; keep the rest.
    if (auto pos = message.find("] "); pos != std::string::npos) message = message.substr(pos + 2);
    findings.push_back({Severity::error, "E-SYNTAX",
                        "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message, "",
                        line, column});
    return std::nullopt;
  }
}

ordered_json attributes_json(const Attributes& attributes) {
  ordered_json out = ordered_json::object();
  for (const auto& [key, value] : attributes) out[key] = value;
  return out;
}

}  // namespace

ParseOutcome parse_model_document(std::string_view text) {
  ParseOutcome outcome;
  auto root = parse_json(text, outcome.findings);
  if (!root) return outcome;
  SchemaReader reader(outcome.findings);
  if (!root->is_object()) {
    reader.error("", "model document must be a JSON object");
    return outcome;
  }
  Model model = read_model(*root, reader);
  if (has_error(outcome.findings)) return outcome;

  for (std::size_t i = 0; i < model.losses.size(); ++i)
    if (!model.losses[i].weight) model.losses[i].weight = std::max(1, 100 - static_cast<int>(i));

  auto report = validate(model);
  outcome.findings.insert(outcome.findings.end(), report.findings.begin(), report.findings.end());
  if (report.ok()) outcome.model = std::move(model);
  return outcome;
}

Model parse_model(std::string_view text) {
  auto outcome = parse_model_document(text);
  if (!outcome.model) throw ModelError(std::move(outcome.findings));
  return std::move(*outcome.model);
}

Model canonicalize(Model model) {
  // Effective weights depend on file order, so pin them before sorting.
  for (std::size_t i = 0; i < model.losses.size(); ++i)
    if (!model.losses[i].weight) model.losses[i].weight = std::max(1, 100 - static_cast<int>(i));
  auto by_natural_id = [](const auto& l, const auto& r) { return natural_less(l.id, r.id); };
  auto by_id = [](const auto& l, const auto& r) { return l.id < r.id; };
  std::stable_sort(model.losses.begin(), model.losses.end(), by_natural_id);
  std::stable_sort(model.hazards.begin(), model.hazards.end(), by_natural_id);
  std::stable_sort(model.assets.begin(), model.assets.end(), by_id);
  std::stable_sort(model.links.begin(), model.links.end(), by_id);
  std::stable_sort(model.protections.begin(), model.protections.end(), by_id);
  for (auto& protection : model.protections) std::sort(protection.guards.begin(), protection.guards.end());
  std::stable_sort(model.profiles.begin(), model.profiles.end(), by_id);
  std::stable_sort(model.mappings.begin(), model.mappings.end(),
                   [](const auto& l, const auto& r) { return natural_less(l.hazard, r.hazard); });
  std::stable_sort(model.edge_scores.begin(), model.edge_scores.end(), [](const EdgeScore& l, const EdgeScore& r) {
    return std::tie(l.link, l.direction) < std::tie(r.link, r.direction);
  });
  return model;
}

bool structurally_equal(const Model& lhs, const Model& rhs) { return canonicalize(lhs) == canonicalize(rhs); }

std::string emit_model(const Model& input) {
  const Model model = canonicalize(input);
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["metadata"] = {{"name", model.metadata.name}, {"version", model.metadata.version}};

  auto& losses = doc["losses"] = ordered_json::array();
  for (std::size_t i = 0; i < model.losses.size(); ++i) {
    const auto& loss = model.losses[i];
    ordered_json entry{{"id", loss.id}, {"description", loss.description}};
    entry["weight"] = *loss.weight;
    losses.push_back(std::move(entry));
  }

  auto& hazards = doc["hazards"] = ordered_json::array();
  for (const auto& hazard : model.hazards)
    hazards.push_back({{"id", hazard.id}, {"description", hazard.description}, {"associated", hazard.associated}});

  auto& assets = doc["assets"] = ordered_json::array();
  for (const auto& asset : model.assets) {
    ordered_json entry{{"id", asset.id}, {"name", asset.name}, {"layer", to_string(asset.layer)}};
    if (!asset.attributes.empty()) entry["attributes"] = attributes_json(asset.attributes);
    if (!asset.tags.empty()) entry["tags"] = asset.tags;
    assets.push_back(std::move(entry));
  }

  auto& links = doc["links"] = ordered_json::array();
  for (const auto& link : model.links) {
    ordered_json entry{{"id", link.id},
                       {"a", link.a},
                       {"b", link.b},
                       {"kind", link.kind},
                       {"direction", to_string(link.direction)}};
    if (!link.attributes.empty()) entry["attributes"] = attributes_json(link.attributes);
    links.push_back(std::move(entry));
  }

  auto& protections = doc["protections"] = ordered_json::array();
  for (const auto& protection : model.protections) {
    ordered_json guards = ordered_json::array();
    for (const auto& guard : protection.guards) {
      ordered_json g{{"asset", guard.asset}};
      if (guard.via) g["via"] = *guard.via;
      guards.push_back(std::move(g));
    }
    protections.push_back({{"id", protection.id},
                           {"name", protection.name},
                           {"description", protection.description},
                           {"guards", std::move(guards)}});
  }

  auto& profiles = doc["profiles"] = ordered_json::array();
  for (const auto& profile : model.profiles)
    profiles.push_back(
        {{"id", profile.id}, {"name", profile.name}, {"tier", profile.tier}, {"entry_assets", profile.entry_assets}});

  auto& mappings = doc["mappings"] = ordered_json::array();
  for (const auto& mapping : model.mappings)
    mappings.push_back({{"hazard", mapping.hazard}, {"targets", mapping.targets}});

  if (!model.edge_scores.empty()) {
    auto& scores = doc["edge_scores"] = ordered_json::array();
    for (const auto& score : model.edge_scores)
      scores.push_back(
          {{"link", score.link}, {"direction", to_string(score.direction)}, {"likelihood", score.likelihood}});
  }
  return doc.dump(2) + "\n";
}

Scenario parse_scenario(std::string_view text) {
  std::vector<Finding> findings;
  auto root = parse_json(text, findings);
  if (!root) throw ModelError(std::move(findings));
  SchemaReader reader(findings);
  Scenario scenario;
  if (!root->is_object()) {
    reader.error("", "scenario must be a JSON object");
    throw ModelError(std::move(findings));
  }
  static const std::set<std::string> kKeys = {"profile", "compromised", "disabled_protections", "zero_day_links",
                                              "score_overrides"};
  for (const auto& [key, value] : root->items())
    if (!kKeys.count(key)) reader.error(key, "unknown scenario field '" + key + "'");

  scenario.profile = reader.optional_string(*root, "scenario", "profile");
  scenario.compromised = reader.string_list(*root, "scenario", "compromised", false);
  scenario.disabled_protections = reader.string_list(*root, "scenario", "disabled_protections", false);
  if (auto it = root->find("zero_day_links"); it != root->end())
    reader.each_object(*it, "zero_day_links", [&](const std::string& path, const json& entry) {
      for (const auto& [key, value] : entry.items())
        if (key != "a" && key != "b" && key != "direction")
          reader.error(path, "unknown field '" + key + "' at " + path);
      ZeroDayLink link;
      link.a = reader.required_string(entry, path, "a");
      link.b = reader.required_string(entry, path, "b");
      if (auto direction = reader.optional_string(entry, path, "direction")) {
        if (auto parsed = parse_link_direction(*direction))
          link.direction = *parsed;
        else
          reader.error(path, "zero-day direction '" + *direction + "' must be bidirectional or a-to-b");
      }
      scenario.zero_day_links.push_back(std::move(link));
    });
  if (auto it = root->find("score_overrides"); it != root->end())
    reader.each_object(*it, "score_overrides", [&](const std::string& path, const json& entry) {
      if (auto score = read_edge_score(reader, entry, path)) scenario.score_overrides.push_back(*score);
    });

  // Unknown keys inside score overrides are only warnings from the shared
  // reader; a scenario treats them as errors too.
  for (auto& finding : findings)
    if (finding.code == "W-UNKNOWN-FIELD") {
      finding.severity = Severity::error;
      finding.code = "E-SCHEMA";
    }
  if (has_error(findings)) throw ModelError(std::move(findings));
  return scenario;
}

std::string emit_scenario(const Scenario& scenario) {
  ordered_json doc = ordered_json::object();
  if (scenario.profile) doc["profile"] = *scenario.profile;
  doc["compromised"] = scenario.compromised;
  doc["disabled_protections"] = scenario.disabled_protections;
  auto& zero_days = doc["zero_day_links"] = ordered_json::array();
  for (const auto& link : scenario.zero_day_links)
    zero_days.push_back({{"a", link.a}, {"b", link.b}, {"direction", to_string(link.direction)}});
  auto& overrides = doc["score_overrides"] = ordered_json::array();
  for (const auto& score : scenario.score_overrides)
    overrides.push_back(
        {{"link", score.link}, {"direction", to_string(score.direction)}, {"likelihood", score.likelihood}});
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("E-IO", path, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Model load_model_file(const std::string& path) { return parse_model(read_text_file(path)); }

}  // namespace attackmap
