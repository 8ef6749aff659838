#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cassure/engine.hpp"

namespace cassure {

/// Hash of (name, kind, value, verdict). Stable across runs that compute the same numbers.
std::string result_fingerprint(const VerificationResult& r);

/// Fills model_fingerprint, result_fingerprint and checked_at on every record.
void stamp_results(std::vector<VerificationResult>& results, std::string_view model_text,
                   const std::map<std::string, double>& constants, const std::string& checked_at);

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_timestamp();

// Results file: one JSON object per line with fields, in order,
// property, kind, value, verdict, marginal, iterations, residual, wall_ms,
// engine, formula, model_fingerprint, result_fingerprint, checked_at.
// `value` is a number, the string "+inf", or null; `verdict` is a boolean or null.
std::string to_json_line(const VerificationResult& r);
std::string write_results(const std::vector<VerificationResult>& results);
/// Throws DiagnosticError (with line numbers) on malformed records.
std::vector<VerificationResult> parse_results(std::string_view text, const std::string& file = "<results>");

}  // namespace cassure
