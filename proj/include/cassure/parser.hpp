#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cassure/model.hpp"

namespace cassure {

/// Parses the supported DTMC modelling subset. Throws DiagnosticError with
/// source spans on syntax errors, duplicate identifiers, assignments to
/// undeclared variables and unsupported constructs.
ModelAst parse_model(std::string_view text, const std::string& file = "<model>");

/// Parses a property file. Unnamed properties are named `prop<k>` (1-based,
/// file order). Reward structure names are not resolved here.
std::vector<PropertySpec> parse_properties(std::string_view text, const std::string& file = "<props>");

/// Canonical pretty-printed model text; re-parses to a structurally equal AST.
std::string render_model(const ModelAst& model);

/// Parses a single boolean state predicate (property-expression syntax, `->` allowed).
ExprPtr parse_expression(std::string_view text, const std::string& file = "<expr>");

}  // namespace cassure
