#pragma once

// JSON model documents and scenario documents.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attackmap/model.hpp"
#include "attackmap/scenario.hpp"

namespace attackmap {

inline constexpr std::string_view kSchemaVersion = "1";

struct ParseOutcome {
  std::optional<Model> model;     // present iff there are no errors
  std::vector<Finding> findings;  // syntax/schema errors, validation findings, unknown-field warnings

  bool ok() const { return model.has_value(); }
};

// Never throws for bad input; everything is reported as findings.
ParseOutcome parse_model_document(std::string_view text);

// Throws ModelError when the document has any error.
Model parse_model(std::string_view text);

// Canonical text: entries sorted by id, fixed key order, 2-space indent,
// trailing newline.
std::string emit_model(const Model& model);

// Copy of the model with every section in canonical order.
Model canonicalize(Model model);
bool structurally_equal(const Model& lhs, const Model& rhs);

// Scenario document: {profile?, compromised?, disabled_protections?,
// zero_day_links?, score_overrides?}. Throws ModelError (E-SYNTAX/E-SCHEMA)
// on malformed input; ids are not checked against a model here.
Scenario parse_scenario(std::string_view text);
std::string emit_scenario(const Scenario& scenario);

Model load_model_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace attackmap
