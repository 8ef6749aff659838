#include <doctest.h>

#include "cassure/fingerprint.hpp"
#include "cassure/lifecycle.hpp"
#include "cassure/results_io.hpp"
#include "support.hpp"

using namespace cassure;
using namespace cassure::gsn;
using namespace cassure::lifecycle;
using transform::goal_id;

namespace {

struct Case {
    std::vector<PropertySpec> props;
    std::vector<VerificationResult> results;
    ArgumentModel argument;
};

std::vector<VerificationResult> results_for(const std::map<std::string, double>& constants) {
    auto text = testing::case_model_text();
    auto space = testing::space_of(parse_model(text), constants);
    auto results = check_properties(space, testing::case_props());
    stamp_results(results, text, constants, "2026-01-01T00:00:00Z");
    return results;
}

Case case_study() {
    Case c;
    c.props = testing::case_props();
    c.results = results_for({});
    c.argument = transform::build_argument({"nuclear", "nuclear.prism", fingerprint(testing::case_model_text())},
                                           c.props, c.results);
    return c;
}

MonitorEvent confidence(const std::string& monitor, double value) {
    MonitorEvent e;
    e.timestamp = "2026-03-01T10:00:00Z";
    e.monitor_id = monitor;
    e.kind = EventKind::Confidence;
    e.confidence = value;
    return e;
}

MonitorEvent violation(const std::string& monitor, const std::string& detail) {
    MonitorEvent e;
    e.timestamp = "2026-03-01T11:00:00Z";
    e.monitor_id = monitor;
    e.kind = EventKind::Violation;
    e.detail = detail;
    return e;
}

ArgumentModel monitored() {
    auto a = case_study().argument;
    a.add_placeholder(goal_id("P_succ"), "monitor_id", "nav-success");
    a.add_placeholder(goal_id("P_succ"), "confidence_threshold", "0.9");
    a.add_placeholder(goal_id("P_succ"), "evidence_cost", "1d");
    a.add_stereotype(goal_id("P_succ"), "EvidenceProvided");
    a.add_placeholder(goal_id("P_safe"), "monitor_id", "zone-guard");
    a.add_placeholder(goal_id("P_safe"), "confidence_threshold", "0.95");
    a.add_placeholder(goal_id("P_safe"), "evidence_cost", "2h");
    a.add_placeholder(goal_id("P_stopped"), "monitor_id", "speed-check");
    return a;
}

}  // namespace

TEST_SUITE("lifecycle") {

TEST_CASE("monitor log round-trip and errors") {
    std::vector<MonitorEvent> events{confidence("a", 0.5), violation("b", "speed 3 in sw=2")};
    events[1].payload = "log#42";
    auto text = write_monitor_log(events);
    auto back = parse_monitor_log(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].kind == EventKind::Confidence);
    CHECK(back[0].confidence == 0.5);
    CHECK(back[1].detail == "speed 3 in sw=2");
    CHECK(back[1].payload == "log#42");
    auto line_of = [](const std::string& t) {
        try {
            (void)parse_monitor_log(t, "m.jsonl");
        } catch (const DiagnosticError& e) {
            return e.diagnostics().at(0).span.line;
        }
        return 0;
    };
    CHECK(line_of("\n{\"timestamp\":\"t\",\"monitor_id\":\"a\",\"kind\":\"confidence\",\"value\":1.5}\n") == 2);
    CHECK(line_of("{\"timestamp\":\"t\",\"monitor_id\":\"a\",\"kind\":\"other\",\"value\":1}\n") == 1);
    CHECK(line_of("{broken\n") == 1);
}

TEST_CASE("a low confidence event reopens and defers") {
    IngestReport report;
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.8)}, &report);
    CHECK(a.has_stereotype(goal_id("P_succ"), "Reopened"));
    CHECK(a.has_stereotype(goal_id("P_succ"), "DeferredEvidence"));
    CHECK_FALSE(a.has_stereotype(goal_id("P_succ"), "EvidenceProvided"));
    CHECK(report.reopened == std::vector<std::string>{goal_id("P_succ")});
    CHECK(stereotype_state_violations(a).empty());
}

TEST_CASE("a confidence event at or above the threshold changes nothing") {
    auto before = monitored();
    auto a = ingest_monitor_events(before, {confidence("nav-success", 0.9), confidence("nav-success", 0.99)});
    CHECK(a == before);
}

TEST_CASE("a violation reopens and records the log") {
    auto a = ingest_monitor_events(monitored(), {violation("speed-check", "vel=1 while sw=2")});
    CHECK(a.has_stereotype(goal_id("P_stopped"), "Reopened"));
    CHECK(a.placeholder(goal_id("P_stopped"), "runtime_log") ==
          std::optional<std::string>("2026-03-01T11:00:00Z vel=1 while sw=2"));
    CHECK_FALSE(has_errors(validate_argument(a)));
}

TEST_CASE("unmatched monitors and missing thresholds are reported") {
    IngestReport report;
    auto a = ingest_monitor_events(monitored(), {violation("nobody", "x"), confidence("speed-check", 0.1)}, &report);
    CHECK(report.unmatched == std::vector<std::string>{"nobody"});
    REQUIRE(report.notes.size() == 1);
    CHECK(report.notes[0].find("no confidence_threshold") != std::string::npos);
    CHECK_FALSE(a.has_stereotype(goal_id("P_stopped"), "Reopened"));
    auto bad = monitored();
    bad.set_placeholder(goal_id("P_succ"), "confidence_threshold", "high");
    CHECK_THROWS_AS((void)ingest_monitor_events(bad, {confidence("nav-success", 0.1)}), std::invalid_argument);
}

TEST_CASE("manifest parsing") {
    auto pkg = parse_manifest(
        "# evolution\nchanged models/nuclear.prism 1111 2222\nlog logs/run.jsonl\nnote sensor swap\n"
        "reopened G.P_succ\n");
    REQUIRE(pkg.changed.size() == 1);
    CHECK(pkg.changed[0].new_fingerprint == "2222");
    CHECK(pkg.logs.size() == 1);
    CHECK(pkg.notes == std::vector<std::string>{"sensor swap"});
    CHECK(parse_manifest(write_manifest(pkg)).reopened == pkg.reopened);
    CHECK(parse_manifest("").empty());
    CHECK_THROWS_AS((void)parse_manifest("changed only-a-path\n"), DiagnosticError);
    CHECK_THROWS_AS((void)parse_manifest("deleted x\n"), DiagnosticError);
}

TEST_CASE("an empty package leaves every goal valid and the argument untouched") {
    auto a = case_study().argument;
    auto out = impact_analysis(a, {});
    CHECK(out.argument == a);
    CHECK(out.report.goals.size() == 18);
    CHECK(out.report.count(Classification::Valid) == 18);
    CHECK(out.report.summary == "valid=18 invalid=0 uncertain=0");
}

TEST_CASE("a model change without a re-check leaves goals uncertain") {
    auto a = case_study().argument;
    EvolutionPackage pkg;
    pkg.changed.push_back({"nuclear.prism", "old", "new"});
    auto out = impact_analysis(a, pkg);
    CHECK(out.report.count(Classification::Uncertain) == 18);
    CHECK(out.argument.has_stereotype(transform::kStrategyId, "ImpactAnalysis"));
    CHECK(out.argument.placeholder(transform::kStrategyId, "impact_summary") ==
          std::optional<std::string>("valid=0 invalid=0 uncertain=18"));
}

TEST_CASE("a re-check separates changed from unchanged results") {
    auto a = case_study().argument;
    EvolutionPackage pkg;
    pkg.changed.push_back({"nuclear.prism", "old", "new"});
    auto fresh = results_for({{"p_err", 0.015}});
    auto out = impact_analysis(a, pkg, &fresh);
    for (auto p : {"P_succ", "P_forb", "P_safe", "P_condSucc", "P_battRisk", "P_timeBound", "P_safeEnergy"})
        CHECK_MESSAGE(out.report.find(goal_id(p))->classification == Classification::Invalid, p);
    for (auto p : {"R_dose", "P_stopped", "P_noOpOutside", "P_warnMode"})
        CHECK_MESSAGE(out.report.find(goal_id(p))->classification == Classification::Valid, p);
    CHECK(out.report.find(transform::kRootId)->classification == Classification::Invalid);

    auto same = results_for({});
    auto unchanged = impact_analysis(a, pkg, &same);
    CHECK(unchanged.report.count(Classification::Valid) == 18);
}

TEST_CASE("classification is total and reopened goals count") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5), violation("speed-check", "x")});
    auto out = impact_analysis(a, {});
    CHECK(out.report.goals.size() == 18);
    CHECK(out.report.find(goal_id("P_succ"))->classification == Classification::Uncertain);
    CHECK(out.report.find(goal_id("P_stopped"))->classification == Classification::Invalid);
    CHECK(out.report.count(Classification::Valid) + out.report.count(Classification::Invalid) +
              out.report.count(Classification::Uncertain) ==
          out.report.goals.size());
}

TEST_CASE("changed external evidence makes its goal uncertain") {
    auto a = transform::attach_external_evidence(case_study().argument, goal_id("P_battRisk"), "trials/battery.csv");
    EvolutionPackage pkg;
    pkg.changed.push_back({"data/trials/battery.csv", "a", "b"});
    auto out = impact_analysis(a, pkg);
    CHECK(out.report.find(goal_id("P_battRisk"))->classification == Classification::Uncertain);
    CHECK(out.report.find(goal_id("P_succ"))->classification == Classification::Valid);
    auto plan = plan_regeneration(out.report, out.argument).plan;
    REQUIRE(plan.entries.size() == 1);
    CHECK(plan.entries[0].strategy == RepairStrategy::ManualReview);
}

TEST_CASE("evidence cost parsing") {
    CHECK(parse_evidence_cost("2h") == std::optional(2.0));
    CHECK(parse_evidence_cost("1d") == std::optional(24.0));
    CHECK(parse_evidence_cost(" 1.5 d ") == std::optional(36.0));
    CHECK_FALSE(parse_evidence_cost("soon").has_value());
    CHECK_FALSE(parse_evidence_cost("3w").has_value());
    CHECK(*parse_evidence_cost("2h") < *parse_evidence_cost("1d"));
}

TEST_CASE("plans order invalid first, then by cost") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5), confidence("zone-guard", 0.5)});
    a.add_stereotype(goal_id("P_forb"), "Reopened");  // uncertain, no cost
    a.add_placeholder(goal_id("P_stopped"), "runtime_log", "t x");
    a.add_stereotype(goal_id("P_stopped"), "Reopened");  // invalid
    a.add_placeholder(goal_id("P_succ"), "safety_critical", "true");
    auto report = impact_analysis(a, {}).report;
    auto [planned, plan] = plan_regeneration(report, a);
    REQUIRE(plan.entries.size() == 4);
    CHECK(plan.entries[0].goal == goal_id("P_stopped"));
    CHECK(plan.entries[1].goal == goal_id("P_safe"));  // 2h
    CHECK(plan.entries[2].goal == goal_id("P_succ"));  // 1d
    CHECK(plan.entries[3].goal == goal_id("P_forb"));  // no cost
    for (std::size_t i = 0; i < 4; ++i) CHECK(plan.entries[i].rank == static_cast<int>(i + 1));
    CHECK(plan.entries[2].critical);
    CHECK(planned.has_stereotype(goal_id("P_safe"), "RegenerationPlan"));
    CHECK(planned.placeholder(goal_id("P_safe"), "regeneration_plan") == std::optional<std::string>("re-verify"));
    auto back = parse_plan_json(plan_json(plan));
    REQUIRE(back.entries.size() == 4);
    CHECK(back.entries[1].cost_hours == std::optional(2.0));
    CHECK(back.entries[3].cost_hours == std::nullopt);
}

TEST_CASE("an all-valid report gives an empty plan and apply changes nothing") {
    auto a = case_study().argument;
    auto report = impact_analysis(a, {}).report;
    auto [planned, plan] = plan_regeneration(report, a);
    CHECK(plan.entries.empty());
    CHECK(planned == a);
    CHECK(apply_regeneration(planned, plan, case_study().results) == a);
}

TEST_CASE("unparseable costs sort last with a warning") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5)});
    a.set_placeholder(goal_id("P_succ"), "evidence_cost", "a while");
    auto plan = plan_regeneration(impact_analysis(a, {}).report, a).plan;
    REQUIRE(plan.entries.size() == 1);
    CHECK_FALSE(plan.entries[0].cost_hours.has_value());
    REQUIRE(plan.warnings.size() == 1);
    CHECK(plan.warnings[0].find("unparseable evidence_cost") != std::string::npos);
}

TEST_CASE("apply with a passing result provides evidence") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5)});
    auto [planned, plan] = plan_regeneration(impact_analysis(a, {}).report, a);
    auto fresh = case_study().results;
    auto done = apply_regeneration(planned, plan, fresh);
    const auto g = goal_id("P_succ");
    CHECK(done.has_stereotype(g, "EvidenceProvided"));
    CHECK_FALSE(done.has_stereotype(g, "DeferredEvidence"));
    CHECK_FALSE(done.has_stereotype(g, "Reopened"));
    CHECK_FALSE(done.has_stereotype(g, "RegenerationPlan"));
    CHECK_FALSE(done.placeholder(g, "regeneration_plan").has_value());
    CHECK(done.find(g)->version == planned.find(g)->version + 1);
    CHECK(done.find("E.P_succ")->version == planned.find("E.P_succ")->version);  // same result
    CHECK(done.version == planned.version + 1);
    CHECK_FALSE(has_errors(validate_argument(done)));
    CHECK(stereotype_state_violations(done).empty());
}

TEST_CASE("apply with a changed result updates the solution") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5)});
    auto [planned, plan] = plan_regeneration(impact_analysis(a, {}).report, a);
    auto fresh = results_for({{"p_err", 0.015}});
    auto done = apply_regeneration(planned, plan, fresh);
    CHECK(done.find("E.P_succ")->version == 2);
    CHECK(done.find("E.P_succ")->description == "Verification result for P_succ: 0.913378");
    auto t = done.traces_of("E.P_succ", ArtifactKind::VerificationResult);
    CHECK(t.at(0)->value == std::optional<std::string>("0.9133779137348863"));
}

TEST_CASE("apply with a failing result keeps the goal deferred") {
    auto a = monitored();
    a.add_placeholder(goal_id("P_critMode"), "monitor_id", "crit");
    a.add_placeholder(goal_id("P_critMode"), "confidence_threshold", "0.5");
    a = ingest_monitor_events(a, {confidence("crit", 0.1)});
    auto [planned, plan] = plan_regeneration(impact_analysis(a, {}).report, a);
    auto done = apply_regeneration(planned, plan, case_study().results);
    CHECK(done.has_stereotype(goal_id("P_critMode"), "DeferredEvidence"));
    CHECK_FALSE(done.has_stereotype(goal_id("P_critMode"), "EvidenceProvided"));
    CHECK_FALSE(done.has_stereotype(goal_id("P_critMode"), "Reopened"));
    CHECK(stereotype_state_violations(done).empty());
}

TEST_CASE("apply requires fresh results for re-verify entries") {
    auto a = ingest_monitor_events(monitored(), {confidence("nav-success", 0.5)});
    auto [planned, plan] = plan_regeneration(impact_analysis(a, {}).report, a);
    CHECK_THROWS_AS((void)apply_regeneration(planned, plan, {}), std::invalid_argument);
}

TEST_CASE("state-machine violations are detected") {
    auto a = case_study().argument;
    a.add_stereotype(goal_id("P_succ"), "EvidenceProvided");
    a.add_stereotype(goal_id("P_succ"), "Reopened");
    auto v = stereotype_state_violations(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("Reopened") != std::string::npos);
}

TEST_CASE("impact report JSON lists every goal") {
    auto report = impact_analysis(case_study().argument, {}).report;
    auto json = impact_report_json(report);
    CHECK(json.find("\"summary\": \"valid=18 invalid=0 uncertain=0\"") != std::string::npos);
    CHECK(std::count(json.begin(), json.end(), '{') == 19);
}

}  // TEST_SUITE
