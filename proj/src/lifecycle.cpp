#include "cassure/lifecycle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cassure/fingerprint.hpp"
#include "cassure/results_io.hpp"
#include "json.hpp"

namespace cassure::lifecycle {

using namespace gsn;
using Json = nlohmann::ordered_json;

namespace {

std::optional<double> parse_real(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size()) return std::nullopt;
    return v;
}

bool is_goal(const ArgumentModel& arg, const std::string& id) {
    const auto* n = arg.find(id);
    return n && n->kind == NodeKind::Goal;
}

}  // namespace

// ---------------------------------------------------------------------------
// Monitor log
// ---------------------------------------------------------------------------

std::vector<MonitorEvent> parse_monitor_log(std::string_view text, const std::string& file) {
    std::vector<MonitorEvent> events;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        SourceSpan where{file, number, 1, 0};
        try {
            auto j = Json::parse(line);
            MonitorEvent e;
            e.timestamp = j.at("timestamp").get<std::string>();
            e.monitor_id = j.at("monitor_id").get<std::string>();
            auto kind = j.at("kind").get<std::string>();
            if (kind == "violation") {
                e.kind = EventKind::Violation;
                const auto& v = j.at("value");
                e.detail = v.is_string() ? v.get<std::string>() : v.dump();
            } else if (kind == "confidence") {
                e.kind = EventKind::Confidence;
                e.confidence = j.at("value").get<double>();
                if (!(e.confidence >= 0.0 && e.confidence <= 1.0))
                    throw DiagnosticError("confidence value outside [0,1]", where);
            } else {
                throw DiagnosticError("unknown event kind '" + kind + "'", where);
            }
            if (j.contains("payload") && !j["payload"].is_null()) e.payload = j["payload"].get<std::string>();
            if (e.monitor_id.empty()) throw DiagnosticError("empty monitor_id", where);
            events.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DiagnosticError(std::string("malformed monitor event: ") + ex.what(), where);
        }
    }
    return events;
}

std::string write_monitor_log(const std::vector<MonitorEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        Json j;
        j["timestamp"] = e.timestamp;
        j["monitor_id"] = e.monitor_id;
        j["kind"] = e.kind == EventKind::Violation ? "violation" : "confidence";
        if (e.kind == EventKind::Violation) j["value"] = e.detail;
        else j["value"] = e.confidence;
        if (!e.payload.empty()) j["payload"] = e.payload;
        out += j.dump() + "\n";
    }
    return out;
}

ArgumentModel ingest_monitor_events(ArgumentModel arg, const std::vector<MonitorEvent>& events, IngestReport* report) {
    IngestReport local;
    for (const auto& e : events) {
        std::vector<std::string> goals;
        for (const auto& n : arg.nodes)
            if (n.kind == NodeKind::Goal && arg.placeholder(n.id, "monitor_id") == e.monitor_id) goals.push_back(n.id);
        if (goals.empty()) {
            local.unmatched.push_back(e.monitor_id);
            continue;
        }
        for (const auto& g : goals) {
            if (e.kind == EventKind::Violation) {
                arg.add_stereotype(g, "Reopened");
                std::string log = e.payload.empty() ? e.detail : e.payload;
                arg.add_placeholder(g, "runtime_log", e.timestamp + " " + log);
                arg.remove_stereotype(g, "EvidenceProvided");
                local.reopened.push_back(g);
                continue;
            }
            auto threshold_text = arg.placeholder(g, "confidence_threshold");
            if (!threshold_text) {
                local.notes.push_back(g + ": confidence event ignored, no confidence_threshold");
                continue;
            }
            auto threshold = parse_real(*threshold_text);
            if (!threshold)
                throw std::invalid_argument(g + ": unparseable confidence_threshold \"" + *threshold_text + "\"");
            if (e.confidence < *threshold) {
                arg.add_stereotype(g, "Reopened");
                arg.add_stereotype(g, "DeferredEvidence");
                arg.remove_stereotype(g, "EvidenceProvided");
                local.reopened.push_back(g);
            }
        }
    }
    if (report) *report = std::move(local);
    return arg;
}

// ---------------------------------------------------------------------------
// Evolution package
// ---------------------------------------------------------------------------

EvolutionPackage parse_manifest(std::string_view text, const std::string& file) {
    EvolutionPackage pkg;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream words(line);
        std::string head;
        if (!(words >> head) || head[0] == '#') continue;
        SourceSpan where{file, number, 1, 0};
        std::string rest;
        std::getline(words >> std::ws, rest);
        if (head == "changed") {
            std::istringstream parts(rest);
            ChangedArtifact c;
            if (!(parts >> c.path >> c.old_fingerprint >> c.new_fingerprint))
                throw DiagnosticError("expected: changed <path> <old-fp> <new-fp>", where);
            pkg.changed.push_back(std::move(c));
        } else if (head == "log" || head == "note" || head == "reopened") {
            if (rest.empty()) throw DiagnosticError("'" + head + "' needs an argument", where);
            (head == "log" ? pkg.logs : head == "note" ? pkg.notes : pkg.reopened).push_back(rest);
        } else {
            throw DiagnosticError("unknown manifest entry '" + head + "'", where);
        }
    }
    return pkg;
}

std::string write_manifest(const EvolutionPackage& pkg) {
    std::string out;
    for (const auto& c : pkg.changed)
        out += "changed " + c.path + " " + c.old_fingerprint + " " + c.new_fingerprint + "\n";
    for (const auto& l : pkg.logs) out += "log " + l + "\n";
    for (const auto& n : pkg.notes) out += "note " + n + "\n";
    for (const auto& r : pkg.reopened) out += "reopened " + r + "\n";
    return out;
}

EvolutionPackage load_package(const std::filesystem::path& dir) {
    auto manifest = dir / "manifest.txt";
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("cannot read " + manifest.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), manifest.string());
}

// ---------------------------------------------------------------------------
// Impact analysis
// ---------------------------------------------------------------------------

const char* classification_name(Classification c) noexcept {
    switch (c) {
        case Classification::Valid: return "valid";
        case Classification::Invalid: return "invalid";
        case Classification::Uncertain: return "uncertain";
    }
    return "?";
}

std::size_t ImpactReport::count(Classification c) const {
    return static_cast<std::size_t>(
        std::count_if(goals.begin(), goals.end(), [&](const GoalImpact& g) { return g.classification == c; }));
}

const GoalImpact* ImpactReport::find(std::string_view goal) const {
    for (const auto& g : goals)
        if (g.goal == goal) return &g;
    return nullptr;
}

namespace {

bool same_file(const std::string& a, const std::string& b) {
    return a == b || std::filesystem::path(a).filename() == std::filesystem::path(b).filename();
}

// Differences between a recorded result trace and a fresh result, or empty if equal.
std::string result_difference(const TraceLink* recorded, const VerificationResult& fresh) {
    if (!recorded) return "no recorded result";
    if (recorded->verdict != fresh.verdict) return "verdict changed";
    auto now = transform::result_value_text(fresh);
    auto before = recorded->value.value_or("");
    if (now == before) return {};
    if (now.empty() || before.empty()) return "value changed";
    if (now == "+inf" || before == "+inf") return "value changed " + before + " -> " + now;
    auto a = parse_real(before), b = parse_real(now);
    if (!a || !b || std::abs(*a - *b) > 1e-6) return "value changed " + before + " -> " + now;
    return {};
}

}  // namespace

ImpactOutcome impact_analysis(const ArgumentModel& arg, const EvolutionPackage& pkg,
                              const std::vector<VerificationResult>* fresh) {
    std::map<std::string, const VerificationResult*> fresh_by_name;
    if (fresh)
        for (const auto& r : *fresh) fresh_by_name[r.property] = &r;

    // Which changed artifacts touch which goals.
    bool model_changed = false, props_changed = false;
    std::map<std::string, std::vector<std::string>> evidence_changed;  // goal -> changed paths
    auto model_links = arg.traces_of(transform::kRootId, ArtifactKind::ModelFile);
    for (const auto& c : pkg.changed) {
        bool matched = false;
        for (const auto& t : arg.traces)
            if (t.kind == ArtifactKind::ExternalEvidence && same_file(t.ref, c.path)) {
                evidence_changed[t.node].push_back(c.path);
                matched = true;
            }
        for (const auto* m : model_links)
            if (same_file(m->ref, c.path) || (!c.old_fingerprint.empty() && c.old_fingerprint == m->fingerprint)) {
                model_changed = true;
                matched = true;
            }
        if (!matched) props_changed = true;
    }
    std::set<std::string> listed(pkg.reopened.begin(), pkg.reopened.end());

    ImpactReport report;
    std::vector<std::string> property_goals;
    std::vector<const GsnNode*> goals;
    for (const auto& n : arg.nodes)
        if (n.kind == NodeKind::Goal) goals.push_back(&n);
    std::sort(goals.begin(), goals.end(), [](auto* a, auto* b) { return a->id < b->id; });

    std::map<std::string, Classification> property_outcome;
    auto classify_property_goal = [&](const std::string& id) -> GoalImpact {
        GoalImpact gi{id, Classification::Valid, "no change affects this goal"};
        auto prop = transform::property_of(id);
        bool linked = !prop.empty() && !arg.traces_of(id, ArtifactKind::Property).empty() &&
                      (model_changed || props_changed);
        if (arg.has_stereotype(id, "Reopened") && arg.placeholder(id, "runtime_log"))
            return {id, Classification::Invalid, "reopened by a runtime violation"};
        if (linked) {
            auto it = fresh_by_name.find(prop);
            if (it == fresh_by_name.end()) {
                gi = {id, Classification::Uncertain,
                      std::string(model_changed ? "model" : "property file") + " changed, no re-check yet"};
            } else {
                auto recorded = arg.traces_of(transform::solution_id(prop), ArtifactKind::VerificationResult);
                auto diff = result_difference(recorded.empty() ? nullptr : recorded.front(), *it->second);
                auto property_links = arg.traces_of(id, ArtifactKind::Property);
                if (diff.empty() && !it->second->property_text.empty() && !property_links.empty() &&
                    fingerprint(it->second->property_text) != property_links.front()->fingerprint)
                    diff = "property text changed";
                if (!diff.empty()) return {id, Classification::Invalid, "re-check: " + diff};
                gi = {id, Classification::Valid, "re-check unchanged"};
            }
        }
        if (auto ev = evidence_changed.find(id); ev != evidence_changed.end())
            return {id, Classification::Uncertain, "external evidence changed: " + ev->second.front()};
        if (arg.has_stereotype(id, "Reopened")) return {id, Classification::Uncertain, "reopened by a confidence drop"};
        if (listed.count(id)) return {id, Classification::Uncertain, "listed as reopened in the evolution package"};
        return gi;
    };

    for (const auto* g : goals) {
        if (g->id == transform::kRootId) continue;
        auto gi = classify_property_goal(g->id);
        property_outcome[g->id] = gi.classification;
        report.goals.push_back(std::move(gi));
    }
    if (const auto* root = arg.find(transform::kRootId); root && root->kind == NodeKind::Goal) {
        GoalImpact gi{root->id, Classification::Valid, "no change affects this goal"};
        if (arg.has_stereotype(root->id, "Reopened") && arg.placeholder(root->id, "runtime_log")) {
            gi = {root->id, Classification::Invalid, "reopened by a runtime violation"};
        } else if (model_changed) {
            bool complete = fresh != nullptr;
            for (const auto& [id, cls] : property_outcome)
                if (!transform::property_of(id).empty() && !fresh_by_name.count(transform::property_of(id)))
                    complete = false;
            bool any_invalid = std::any_of(property_outcome.begin(), property_outcome.end(),
                                           [](const auto& kv) { return kv.second == Classification::Invalid; });
            if (!complete) gi = {root->id, Classification::Uncertain, "model changed, re-check incomplete"};
            else if (any_invalid) gi = {root->id, Classification::Invalid, "model changed, re-check differs"};
            else gi = {root->id, Classification::Valid, "model changed, re-check unchanged"};
        } else if (arg.has_stereotype(root->id, "Reopened")) {
            gi = {root->id, Classification::Uncertain, "reopened by a confidence drop"};
        } else if (listed.count(root->id)) {
            gi = {root->id, Classification::Uncertain, "listed as reopened in the evolution package"};
        }
        report.goals.push_back(std::move(gi));
        std::sort(report.goals.begin(), report.goals.end(),
                  [](const GoalImpact& a, const GoalImpact& b) { return a.goal < b.goal; });
    }
    report.summary = "valid=" + std::to_string(report.count(Classification::Valid)) +
                     " invalid=" + std::to_string(report.count(Classification::Invalid)) +
                     " uncertain=" + std::to_string(report.count(Classification::Uncertain));

    ImpactOutcome outcome{arg, std::move(report)};
    if (!pkg.empty() && arg.find(transform::kStrategyId)) {
        outcome.argument.add_stereotype(transform::kStrategyId, "ImpactAnalysis");
        outcome.argument.set_placeholder(transform::kStrategyId, "impact_summary", outcome.report.summary);
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

const char* strategy_name(RepairStrategy s) noexcept {
    switch (s) {
        case RepairStrategy::ReVerify: return "re-verify";
        case RepairStrategy::Simulate: return "simulate";
        case RepairStrategy::ManualReview: return "manual-review";
    }
    return "?";
}

std::optional<double> parse_evidence_cost(std::string_view text) {
    static const std::regex pattern(R"(\s*([0-9]+(?:\.[0-9]+)?)\s*([hd])\s*)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, pattern)) return std::nullopt;
    auto number = parse_real(m[1].str());
    if (!number) return std::nullopt;
    return m[2].str() == "d" ? *number * 24.0 : *number;
}

PlanOutcome plan_regeneration(const ImpactReport& report, const ArgumentModel& arg) {
    PlanOutcome outcome{arg, {}};
    auto& plan = outcome.plan;
    for (const auto& g : report.goals) {
        if (g.classification == Classification::Valid) continue;
        if (!is_goal(arg, g.goal)) {
            plan.warnings.push_back(g.goal + ": not a goal of this argument, skipped");
            continue;
        }
        PlanEntry e;
        e.goal = g.goal;
        e.classification = g.classification;
        if (auto cost = arg.placeholder(g.goal, "evidence_cost")) {
            e.cost_hours = parse_evidence_cost(*cost);
            if (!e.cost_hours)
                plan.warnings.push_back(g.goal + ": unparseable evidence_cost \"" + *cost + "\", treated as missing");
        }
        e.critical = arg.placeholder(g.goal, "safety_critical") == "true";
        e.strategy = arg.traces_of(g.goal, ArtifactKind::ExternalEvidence).empty() ? RepairStrategy::ReVerify
                                                                                   : RepairStrategy::ManualReview;
        plan.entries.push_back(std::move(e));
    }
    std::sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
        auto cls = [](const PlanEntry& e) { return e.classification == Classification::Invalid ? 0 : 1; };
        if (cls(a) != cls(b)) return cls(a) < cls(b);
        if (a.cost_hours.has_value() != b.cost_hours.has_value()) return a.cost_hours.has_value();
        if (a.cost_hours && *a.cost_hours != *b.cost_hours) return *a.cost_hours < *b.cost_hours;
        return a.goal < b.goal;
    });
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        auto& e = plan.entries[i];
        e.rank = static_cast<int>(i + 1);
        outcome.argument.add_stereotype(e.goal, "RegenerationPlan");
        outcome.argument.set_placeholder(e.goal, "regeneration_plan", strategy_name(e.strategy));
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// Applying a plan
// ---------------------------------------------------------------------------

namespace {

bool passing(const VerificationResult& r) { return !(r.verdict && !*r.verdict) && !r.marginal; }

void close_out(ArgumentModel& arg, const std::string& goal, bool discharged) {
    arg.remove_stereotype(goal, "Reopened");
    arg.remove_stereotype(goal, "RegenerationPlan");
    std::erase_if(arg.annotations, [&](const Annotation& a) {
        return a.node == goal && a.kind == AnnotationKind::Placeholder && a.name == "regeneration_plan";
    });
    if (discharged) {
        arg.remove_stereotype(goal, "DeferredEvidence");
        arg.add_stereotype(goal, "EvidenceProvided");
    } else {
        arg.remove_stereotype(goal, "EvidenceProvided");
        arg.add_stereotype(goal, "DeferredEvidence", Origin::Generated);
    }
    arg.find(goal)->version += 1;
}

}  // namespace

ArgumentModel apply_regeneration(const ArgumentModel& arg, const RegenerationPlan& plan,
                                 const std::vector<VerificationResult>& fresh,
                                 const std::optional<std::string>& model_fingerprint,
                                 const transform::ArgumentTemplate& tmpl) {
    std::map<std::string, const VerificationResult*> by_name;
    for (const auto& r : fresh) by_name[r.property] = &r;
    ArgumentModel out = arg;

    for (const auto& e : plan.entries) {
        if (e.strategy != RepairStrategy::ReVerify) continue;
        if (!is_goal(out, e.goal)) throw std::invalid_argument("planned goal " + e.goal + " is not in the argument");
        if (e.goal == transform::kRootId) {
            bool all_pass = true;
            for (const auto& n : out.nodes) {
                auto prop = transform::property_of(n.id);
                if (n.kind != NodeKind::Goal || prop.empty()) continue;
                auto it = by_name.find(prop);
                if (it == by_name.end()) throw std::invalid_argument("no fresh result for " + prop + " (needed by root)");
                all_pass = all_pass && passing(*it->second);
            }
            if (model_fingerprint)
                for (auto& t : out.traces)
                    if (t.node == e.goal && t.kind == ArtifactKind::ModelFile) t.fingerprint = *model_fingerprint;
            close_out(out, e.goal, all_pass);
            continue;
        }
        auto prop = transform::property_of(e.goal);
        auto it = by_name.find(prop);
        if (prop.empty() || it == by_name.end()) throw std::invalid_argument("no fresh result for planned goal " + e.goal);
        const auto& r = *it->second;

        auto sid = transform::solution_id(prop);
        if (auto* solution = out.find(sid)) {
            std::map<std::string, std::string> vars{{"model", out.name},
                                                    {"property", prop},
                                                    {"formula", r.property_text},
                                                    {"result", transform::render_result(r)}};
            auto text = transform::expand_template(tmpl.solution, vars);
            auto value = transform::result_value_text(r);
            auto fp = r.result_fingerprint.empty() ? result_fingerprint(r) : r.result_fingerprint;
            bool changed = text != solution->description;
            bool linked = false;
            for (auto& t : out.traces) {
                if (t.node != sid || t.kind != ArtifactKind::VerificationResult) continue;
                linked = true;
                changed = changed || t.fingerprint != fp;
                t.fingerprint = fp;
                t.value = value.empty() ? std::nullopt : std::optional(value);
                t.verdict = r.verdict;
            }
            if (!linked) {
                out.traces.push_back({sid, ArtifactKind::VerificationResult, prop, fp,
                                      value.empty() ? std::nullopt : std::optional(value), r.verdict});
                changed = true;
            }
            solution->description = text;
            if (changed) solution->version += 1;
        }
        close_out(out, e.goal, passing(r));
    }
    if (!(out == arg)) out.version += 1;
    return out;
}

std::vector<std::string> stereotype_state_violations(const ArgumentModel& arg) {
    std::vector<std::string> out;
    for (const auto& n : arg.nodes) {
        if (n.kind != NodeKind::Goal) continue;
        bool provided = arg.has_stereotype(n.id, "EvidenceProvided");
        if (provided && arg.has_stereotype(n.id, "DeferredEvidence"))
            out.push_back(n.id + ": EvidenceProvided together with DeferredEvidence");
        if (provided && arg.has_stereotype(n.id, "Reopened"))
            out.push_back(n.id + ": EvidenceProvided together with Reopened");
        if (provided && arg.has_stereotype(n.id, "RegenerationPlan"))
            out.push_back(n.id + ": EvidenceProvided together with RegenerationPlan");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string impact_report_json(const ImpactReport& report) {
    Json j;
    j["summary"] = report.summary;
    j["goals"] = Json::array();
    for (const auto& g : report.goals)
        j["goals"].push_back({{"goal", g.goal},
                              {"classification", classification_name(g.classification)},
                              {"rationale", g.rationale}});
    return j.dump(2) + "\n";
}

std::string plan_json(const RegenerationPlan& plan) {
    Json j;
    j["entries"] = Json::array();
    for (const auto& e : plan.entries) {
        Json entry{{"rank", e.rank},
                   {"goal", e.goal},
                   {"classification", classification_name(e.classification)},
                   {"strategy", strategy_name(e.strategy)}};
        entry["evidence_cost_hours"] = e.cost_hours ? Json(*e.cost_hours) : Json(nullptr);
        entry["critical"] = e.critical;
        j["entries"].push_back(std::move(entry));
    }
    j["warnings"] = plan.warnings;
    return j.dump(2) + "\n";
}

RegenerationPlan parse_plan_json(std::string_view text) {
    RegenerationPlan plan;
    try {
        auto j = Json::parse(text);
        for (const auto& entry : j.at("entries")) {
            PlanEntry e;
            e.rank = entry.at("rank").get<int>();
            e.goal = entry.at("goal").get<std::string>();
            auto cls = entry.at("classification").get<std::string>();
            e.classification = cls == "invalid" ? Classification::Invalid
                               : cls == "valid" ? Classification::Valid
                                                : Classification::Uncertain;
            auto s = entry.at("strategy").get<std::string>();
            if (s == "re-verify") e.strategy = RepairStrategy::ReVerify;
            else if (s == "simulate") e.strategy = RepairStrategy::Simulate;
            else if (s == "manual-review") e.strategy = RepairStrategy::ManualReview;
            else throw std::invalid_argument("unknown plan strategy '" + s + "'");
            if (entry.contains("evidence_cost_hours") && entry["evidence_cost_hours"].is_number())
                e.cost_hours = entry["evidence_cost_hours"].get<double>();
            e.critical = entry.value("critical", false);
            plan.entries.push_back(std::move(e));
        }
        if (j.contains("warnings")) plan.warnings = j["warnings"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed plan: ") + e.what());
    }
    return plan;
}

}  // namespace cassure::lifecycle
