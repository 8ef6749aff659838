#include "cassure/transformer.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cassure/fingerprint.hpp"
#include "cassure/results_io.hpp"

namespace cassure::transform {

using namespace gsn;

ArgumentTemplate ArgumentTemplate::parse(std::string_view text) {
    ArgumentTemplate t;
    std::map<std::string, std::string*> slots{{"root", &t.root},
                                              {"strategy", &t.strategy},
                                              {"goal", &t.goal},
                                              {"context", &t.context},
                                              {"solution", &t.solution}};
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("template line " + std::to_string(number) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        auto it = slots.find(key);
        if (it == slots.end())
            throw std::invalid_argument("template line " + std::to_string(number) + ": unknown key '" + key + "'");
        *it->second = trim(line.substr(eq + 1));
    }
    return t;
}

std::string goal_id(const std::string& property) { return "G." + property; }
std::string context_id(const std::string& property) { return "C." + property; }
std::string solution_id(const std::string& property) { return "E." + property; }

std::string property_of(const std::string& node_id) {
    if (node_id == kRootId || node_id == kStrategyId || node_id.size() < 3 || node_id[1] != '.') return {};
    if (node_id[0] != 'G' && node_id[0] != 'C' && node_id[0] != 'E') return {};
    return node_id.substr(2);
}

std::string expand_template(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') {
            out += tmpl[i];
            continue;
        }
        auto close = tmpl.find('}', i);
        if (close == std::string::npos) throw std::invalid_argument("unterminated template variable in '" + tmpl + "'");
        auto name = tmpl.substr(i + 1, close - i - 1);
        auto it = vars.find(name);
        if (it == vars.end()) throw std::invalid_argument("unresolved template variable {" + name + "}");
        out += it->second;
        i = close;
    }
    return out;
}

std::string render_result(const VerificationResult& r) {
    std::string text;
    if (r.kind == ResultKind::Boolean) {
        text = r.verdict.value_or(false) ? "holds" : "violated";
    } else if (std::holds_alternative<Unbounded>(r.value)) {
        text = "+∞";
    } else if (auto d = std::get_if<double>(&r.value)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", *d);
        text = buf;
    } else {
        text = "no value";
    }
    if (r.marginal) text += " (marginal)";
    return text;
}

std::string result_value_text(const VerificationResult& r) {
    if (std::holds_alternative<Unbounded>(r.value)) return "+inf";
    if (auto d = std::get_if<double>(&r.value)) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, *d);
        return std::string(buf, end);
    }
    return {};
}

std::string property_fingerprint(const PropertySpec& p) { return fingerprint(render_property(p, false)); }

ArgumentModel build_argument(const ModelRef& model, const std::vector<PropertySpec>& properties,
                             const std::vector<VerificationResult>& results, const ArgumentTemplate& tmpl) {
    std::map<std::string, const VerificationResult*> by_name;
    for (const auto& r : results) by_name[r.property] = &r;
    std::set<std::string> seen;
    for (const auto& p : properties) {
        if (!by_name.count(p.name)) throw std::invalid_argument("no verification result for property " + p.name);
        seen.insert(p.name);
    }
    for (const auto& r : results)
        if (!seen.count(r.property)) throw std::invalid_argument("result for unknown property " + r.property);

    ArgumentModel arg;
    arg.name = model.name;
    std::map<std::string, std::string> vars{{"model", model.name}};
    arg.nodes.push_back({kRootId, NodeKind::Goal, expand_template(tmpl.root, vars), 1});
    arg.nodes.push_back({kStrategyId, NodeKind::Strategy, expand_template(tmpl.strategy, vars), 1});
    arg.links.push_back({LinkKind::SupportedBy, kRootId, kStrategyId});
    arg.traces.push_back({kRootId, ArtifactKind::ModelFile, model.path, model.fingerprint, std::nullopt, std::nullopt});

    for (const auto& p : properties) {
        const auto& r = *by_name.at(p.name);
        vars["property"] = p.name;
        vars["formula"] = render_property(p, false);
        vars["result"] = render_result(r);
        auto g = goal_id(p.name), c = context_id(p.name), e = solution_id(p.name);
        arg.nodes.push_back({g, NodeKind::Goal, expand_template(tmpl.goal, vars), 1});
        arg.nodes.push_back({c, NodeKind::Context, expand_template(tmpl.context, vars), 1});
        arg.nodes.push_back({e, NodeKind::Solution, expand_template(tmpl.solution, vars), 1});
        arg.links.push_back({LinkKind::SupportedBy, kStrategyId, g});
        arg.links.push_back({LinkKind::SupportedBy, g, e});
        arg.links.push_back({LinkKind::InContextOf, g, c});
        arg.traces.push_back({g, ArtifactKind::Property, p.name, property_fingerprint(p), std::nullopt, std::nullopt});
        auto value = result_value_text(r);
        arg.traces.push_back({e, ArtifactKind::VerificationResult, p.name,
                              r.result_fingerprint.empty() ? result_fingerprint(r) : r.result_fingerprint,
                              value.empty() ? std::nullopt : std::optional(value), r.verdict});
        if ((r.verdict && !*r.verdict) || r.marginal) arg.add_stereotype(g, "DeferredEvidence", Origin::Generated);
    }
    arg.normalize();
    return arg;
}

namespace {

std::string linked_fingerprint(const ArgumentModel& arg, const std::string& node, ArtifactKind kind) {
    auto links = arg.traces_of(node, kind);
    return links.empty() ? std::string{} : links.front()->fingerprint;
}

}  // namespace

ArgumentModel regenerate(const ArgumentModel& previous, const ArgumentModel& fresh, MergeReport* report) {
    ArgumentModel out = merge_annotations(fresh, previous, report);
    out.normalize();

    std::set<std::string> bumped;
    auto changed = [&](const GsnNode& now, const GsnNode& before) {
        if (now.kind != before.kind || now.description != before.description) return true;
        if (linked_fingerprint(out, now.id, ArtifactKind::VerificationResult) !=
            linked_fingerprint(previous, now.id, ArtifactKind::VerificationResult))
            return true;
        return now.kind == NodeKind::Goal && linked_fingerprint(out, now.id, ArtifactKind::Property) !=
                                                 linked_fingerprint(previous, now.id, ArtifactKind::Property);
    };
    // Solutions first so goals can follow them.
    for (auto kind : {NodeKind::Solution, NodeKind::Context, NodeKind::Strategy, NodeKind::Goal})
        for (auto& n : out.nodes) {
            if (n.kind != kind) continue;
            const auto* before = previous.find(n.id);
            if (!before) continue;
            bool bump = changed(n, *before);
            if (n.kind == NodeKind::Goal)
                for (const auto& child : out.children(n.id))
                    if (bumped.count(child) && out.find(child)->kind == NodeKind::Solution) bump = true;
            n.version = before->version + (bump ? 1 : 0);
            if (bump) bumped.insert(n.id);
        }

    // A goal whose fresh evidence fails no longer counts as provided.
    for (const auto& n : out.nodes)
        if (n.kind == NodeKind::Goal && bumped.count(n.id) && out.has_stereotype(n.id, "DeferredEvidence"))
            out.remove_stereotype(n.id, "EvidenceProvided");

    out.version = previous.version;
    if (!(out == previous)) out.version = previous.version + 1;
    return out;
}

ArgumentModel attach_external_evidence(ArgumentModel arg, const std::string& node, const std::string& ref) {
    if (!arg.find(node)) throw std::invalid_argument("unknown node '" + node + "'");
    if (ref.empty()) throw std::invalid_argument("empty evidence reference");
    arg.traces.push_back({node, ArtifactKind::ExternalEvidence, ref, "", std::nullopt, std::nullopt});
    return arg;
}

}  // namespace cassure::transform
