#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cassure/engine.hpp"
#include "cassure/gsn.hpp"

namespace cassure::transform {

/// Description templates. Variables: {model}, {property}, {formula}, {result}.
struct ArgumentTemplate {
    std::string root = "All verified properties hold for model {model}";
    std::string strategy = "Argument over each verified property of {model}";
    std::string goal = "Property {property} holds for model {model}";
    std::string context = "{property}: {formula}";
    std::string solution = "Verification result for {property}: {result}";

    /// Reads `key = value` lines (keys root, strategy, goal, context, solution) over the defaults.
    static ArgumentTemplate parse(std::string_view text);
};

/// Replaces `{name}` by vars[name]; throws std::invalid_argument on unknown names.
std::string expand_template(const std::string& tmpl, const std::map<std::string, std::string>& vars);

struct ModelRef {
    std::string name;         // shown in descriptions
    std::string path;         // recorded on the root trace link
    std::string fingerprint;  // of the model file
};

inline const std::string kRootId = "G.root";
inline const std::string kStrategyId = "S.byProperty";
std::string goal_id(const std::string& property);
std::string context_id(const std::string& property);
std::string solution_id(const std::string& property);
/// Property name of a per-property node id, or empty.
std::string property_of(const std::string& node_id);

/// Human rendering: 6 significant digits, holds/violated, +∞, with a marginal marker.
std::string render_result(const VerificationResult& r);
/// Exact value text recorded on result trace links (shortest round-trip decimal or +inf); empty if none.
std::string result_value_text(const VerificationResult& r);
std::string property_fingerprint(const PropertySpec& p);

/// One goal/context/solution triple per property under a single strategy.
/// Throws std::invalid_argument if results do not cover exactly the properties
/// or a template names an unknown variable.
gsn::ArgumentModel build_argument(const ModelRef& model, const std::vector<PropertySpec>& properties,
                                  const std::vector<VerificationResult>& results,
                                  const ArgumentTemplate& tmpl = {});

/// Merges `previous` into `fresh` and carries versions forward: a node keeps
/// its previous version unless its description or linked fingerprint changed
/// (goals also follow their solution). New nodes start at 1. The argument
/// version increases only when the output differs from `previous`.
gsn::ArgumentModel regenerate(const gsn::ArgumentModel& previous, const gsn::ArgumentModel& fresh,
                              gsn::MergeReport* report = nullptr);

/// Adds an external-evidence link (no fingerprint). Throws std::invalid_argument for unknown nodes.
gsn::ArgumentModel attach_external_evidence(gsn::ArgumentModel arg, const std::string& node, const std::string& ref);

}  // namespace cassure::transform
