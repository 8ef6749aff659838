#include <doctest.h>

#include <random>

#include "cassure/gsn.hpp"
#include "support.hpp"

using namespace cassure;
using namespace cassure::gsn;

namespace {

ArgumentModel small_argument() {
    ArgumentModel a;
    a.name = "demo";
    a.nodes = {{"G.root", NodeKind::Goal, "System is safe", 1},
               {"S.split", NodeKind::Strategy, "Argue over hazards", 1},
               {"G.h1", NodeKind::Goal, "Hazard \"one\" is mitigated", 2},
               {"E.h1", NodeKind::Solution, "Test report", 1},
               {"C.h1", NodeKind::Context, "Hazard log", 1}};
    a.links = {{LinkKind::SupportedBy, "G.root", "S.split"},
               {LinkKind::SupportedBy, "S.split", "G.h1"},
               {LinkKind::SupportedBy, "G.h1", "E.h1"},
               {LinkKind::InContextOf, "G.h1", "C.h1"}};
    a.add_placeholder("G.h1", "monitor_id", "mon-7");
    a.add_stereotype("G.h1", "TraceMonitored", Origin::Generated);
    a.traces.push_back({"G.root", ArtifactKind::ModelFile, "m.prism", "0123456789abcdef", std::nullopt, std::nullopt});
    a.traces.push_back({"E.h1", ArtifactKind::VerificationResult, "h1", "fedcba9876543210", "0.25", std::nullopt});
    a.traces.push_back({"E.h1", ArtifactKind::ExternalEvidence, "reports/h1.pdf", "", std::nullopt, std::nullopt});
    a.normalize();
    return a;
}

bool has_issue(const std::vector<ValidationIssue>& issues, Severity sev, const std::string& fragment) {
    for (const auto& i : issues)
        if (i.severity == sev && i.message.find(fragment) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_SUITE("gsn") {

TEST_CASE("a well-formed argument validates cleanly") {
    auto issues = validate_argument(small_argument());
    CHECK_FALSE(has_errors(issues));
    CHECK(issues.empty());
}

TEST_CASE("structural errors") {
    auto a = small_argument();
    a.links.push_back({LinkKind::SupportedBy, "G.h1", "E.missing"});
    CHECK(has_issue(validate_argument(a), Severity::Error, "unknown node"));

    a = small_argument();
    a.links.push_back({LinkKind::SupportedBy, "E.h1", "G.h1"});
    CHECK(has_issue(validate_argument(a), Severity::Error, "cannot be"));

    a = small_argument();
    a.links.push_back({LinkKind::SupportedBy, "G.h1", "S.split"});
    CHECK(has_issue(validate_argument(a), Severity::Error, "cycle"));

    a = small_argument();
    a.nodes.push_back({"G.h1", NodeKind::Goal, "dup", 1});
    CHECK(has_issue(validate_argument(a), Severity::Error, "duplicate node id"));

    a = small_argument();
    a.nodes.push_back({"G.other", NodeKind::Goal, "second top", 1});
    CHECK(has_issue(validate_argument(a), Severity::Error, "second root"));

    a = small_argument();
    a.find("C.h1")->description.clear();
    CHECK(has_issue(validate_argument(a), Severity::Error, "empty description"));
}

TEST_CASE("root goal without sub-goals is a warning") {
    ArgumentModel a;
    a.name = "empty";
    a.nodes = {{"G.root", NodeKind::Goal, "Top", 1}, {"S.s", NodeKind::Strategy, "By nothing", 1}};
    a.links = {{LinkKind::SupportedBy, "G.root", "S.s"}};
    auto issues = validate_argument(a);
    CHECK_FALSE(has_errors(issues));
    CHECK(has_issue(issues, Severity::Warning, "no sub-goals"));
}

TEST_CASE("annotation checks") {
    auto a = small_argument();
    a.add_placeholder("G.h1", "made_up", "1");
    CHECK(has_issue(validate_argument(a), Severity::Warning, "not in the annotation vocabulary"));
    CHECK_FALSE(has_errors(validate_argument(a)));

    a = small_argument();
    a.annotations.push_back({"G.h1", AnnotationKind::Stereotype, "RegenerationPlan", "", Design, Origin::Manual});
    CHECK(has_issue(validate_argument(a), Severity::Warning, "phases"));

    a = small_argument();
    a.add_stereotype("G.h1", "DeferredEvidence");
    a.add_stereotype("G.h1", "EvidenceProvided");
    CHECK(has_issue(validate_argument(a), Severity::Error, "both DeferredEvidence and EvidenceProvided"));

    a = small_argument();
    a.traces.push_back({"G.h1", ArtifactKind::VerificationResult, "x", "", std::nullopt, std::nullopt});
    CHECK(has_issue(validate_argument(a), Severity::Error, "without fingerprint"));

    // Extensions are known to the standard vocabulary but not the base table.
    a = small_argument();
    a.add_placeholder("G.h1", "safety_critical", "true");
    CHECK_FALSE(has_issue(validate_argument(a), Severity::Warning, "vocabulary"));
    CHECK(has_issue(validate_argument(a, Vocabulary::base()), Severity::Warning, "vocabulary"));
}

TEST_CASE("vocabulary phases") {
    const auto& v = Vocabulary::standard();
    CHECK(v.default_phases(AnnotationKind::Stereotype, "Reopened") == (Runtime | Evolution));
    CHECK(v.default_phases(AnnotationKind::Placeholder, "evidence_cost") == (Design | Evolution));
    CHECK(v.find(AnnotationKind::Placeholder, "DeferredEvidence") == nullptr);
    CHECK(parse_phases("design,runtime") == std::optional(Design | Runtime));
    CHECK_FALSE(parse_phases("design,later").has_value());
    CHECK(phase_text(AllPhases) == "design,runtime,evolution");
}

TEST_CASE("model helpers") {
    auto a = small_argument();
    CHECK(a.placeholder("G.h1", "monitor_id") == std::optional<std::string>("mon-7"));
    a.add_placeholder("G.h1", "monitor_id", "mon-8");
    CHECK(a.placeholder("G.h1", "monitor_id") == std::optional<std::string>("mon-8"));
    a.set_placeholder("G.h1", "monitor_id", "mon-9");
    CHECK(std::count_if(a.annotations.begin(), a.annotations.end(),
                        [](const Annotation& x) { return x.name == "monitor_id"; }) == 1);
    auto before = a.annotations.size();
    a.add_stereotype("G.h1", "TraceMonitored");
    CHECK(a.annotations.size() == before);
    a.remove_stereotype("G.h1", "TraceMonitored");
    CHECK_FALSE(a.has_stereotype("G.h1", "TraceMonitored"));
    CHECK(a.children("G.h1") == std::vector<std::string>{"E.h1"});
    CHECK(a.children("G.h1", LinkKind::InContextOf) == std::vector<std::string>{"C.h1"});
    CHECK(a.traces_of("E.h1").size() == 2);
    CHECK(a.traces_of("E.h1", ArtifactKind::ExternalEvidence).size() == 1);
}

TEST_CASE("DSL round-trip is exact") {
    auto a = small_argument();
    a.version = 4;
    a.orphaned_annotations.push_back({"G.gone", AnnotationKind::Placeholder, "deferred", "true", AllPhases, Origin::Manual});
    a.orphaned_traces.push_back({"E.gone", ArtifactKind::ExternalEvidence, "old.pdf", "", std::nullopt, std::nullopt});
    auto text = serialize_dsl(a);
    auto back = parse_dsl(text);
    CHECK(back == a);
    CHECK(serialize_dsl(back) == text);
    CHECK(text.find("# orphaned") != std::string::npos);
}

TEST_CASE("DSL text shape") {
    auto text = serialize_dsl(small_argument());
    CHECK(text.rfind("argument \"demo\" version 1\n", 0) == 0);
    CHECK(text.find("goal G.h1 v2 \"Hazard \\\"one\\\" is mitigated\"") != std::string::npos);
    CHECK(text.find("supported-by G.root -> S.split") != std::string::npos);
    CHECK(text.find("in-context-of G.h1 -> C.h1") != std::string::npos);
    CHECK(text.find("annotate G.h1 placeholder monitor_id=\"mon-7\"") != std::string::npos);
    CHECK(text.find("annotate G.h1 stereotype <<TraceMonitored>>") != std::string::npos);
    CHECK(text.find(" auto") != std::string::npos);
}

TEST_CASE("DSL errors carry line numbers") {
    auto line_of = [](const std::string& text) {
        try {
            (void)parse_dsl(text, "a.gsn");
        } catch (const DiagnosticError& e) {
            return e.diagnostics().at(0).span.line;
        }
        return 0;
    };
    CHECK(line_of("argument \"x\" version 1\ngoal G.a v1 \"A\"\nbogus line\n") == 3);
    CHECK(line_of("argument \"x\" version 1\ngoal G.a v1 \"A\"\nsupported-by G.a -> G.b\n") == 3);
    CHECK(line_of("argument \"x\" version 1\ngoal G.a v1 \"unterminated\n") == 2);
    CHECK(line_of("argument \"x\" version 1\ngoal G.a v1 \"A\"\nannotate G.a stereotype <<X>> phase=never\n") == 3);
    // Comments and blank lines are fine.
    CHECK_NOTHROW((void)parse_dsl("# header\nargument \"x\" version 1\n\n# note\ngoal G.a v1 \"A\"\n"));
}

TEST_CASE("DOT export") {
    auto a = small_argument();
    a.add_stereotype("G.h1", "Reopened");
    auto dot = export_dot(a);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("shape=box") != std::string::npos);
    CHECK(dot.find("shape=parallelogram") != std::string::npos);
    CHECK(dot.find("shape=circle") != std::string::npos);
    CHECK(dot.find("style=rounded") != std::string::npos);
    CHECK(dot.find("«Reopened»") != std::string::npos);
    CHECK(dot.find("«TraceMonitored»") != std::string::npos);
    CHECK(dot.find("style=dashed") != std::string::npos);
    CHECK(std::count(dot.begin(), dot.end(), '\n') > 9);
}

TEST_CASE("merge keeps manual annotations and drops generated ones") {
    auto previous = small_argument();
    previous.add_placeholder("G.h1", "evidence_cost", "2h");
    auto regenerated = small_argument();
    regenerated.annotations.clear();
    regenerated.traces.erase(std::remove_if(regenerated.traces.begin(), regenerated.traces.end(),
                                            [](const TraceLink& t) { return t.kind == ArtifactKind::ExternalEvidence; }),
                             regenerated.traces.end());
    MergeReport report;
    auto merged = merge_annotations(regenerated, previous, &report);
    CHECK(merged.placeholder("G.h1", "evidence_cost") == std::optional<std::string>("2h"));
    CHECK(merged.placeholder("G.h1", "monitor_id") == std::optional<std::string>("mon-7"));
    CHECK_FALSE(merged.has_stereotype("G.h1", "TraceMonitored"));  // generated, not carried
    CHECK(merged.traces_of("E.h1", ArtifactKind::ExternalEvidence).size() == 1);
    CHECK(report.orphaned_annotations.empty());
}

TEST_CASE("merge quarantines and re-attaches") {
    auto previous = small_argument();
    auto without = previous;
    without.nodes.erase(std::remove_if(without.nodes.begin(), without.nodes.end(),
                                       [](const GsnNode& n) { return n.id == "G.h1" || n.id == "E.h1"; }),
                        without.nodes.end());
    without.links.clear();
    without.annotations.clear();
    without.traces.clear();
    MergeReport r1;
    auto gone = merge_annotations(without, previous, &r1);
    CHECK(r1.orphaned_annotations.size() == 1);
    CHECK(r1.orphaned_traces.size() == 1);
    CHECK(gone.orphaned_annotations.size() == 1);
    CHECK(has_issue(validate_argument(gone), Severity::Warning, "quarantined"));

    auto restored = previous;
    restored.annotations.clear();
    std::erase_if(restored.traces, [](const TraceLink& t) { return t.kind == ArtifactKind::ExternalEvidence; });
    MergeReport r2;
    auto back = merge_annotations(restored, gone, &r2);
    CHECK(r2.reattached == 2);
    CHECK(back.orphaned_annotations.empty());
    CHECK(back.orphaned_traces.empty());
    CHECK(back.placeholder("G.h1", "monitor_id") == std::optional<std::string>("mon-7"));
}

TEST_CASE("merge is idempotent on random annotation sets") {
    std::mt19937 rng(11);
    const char* nodes[] = {"G.root", "G.h1", "E.h1", "C.h1", "G.ghost"};
    const char* keys[] = {"deferred", "evidence_cost", "monitor_id", "Reopened", "ConfidenceMonitor"};
    for (int trial = 0; trial < 100; ++trial) {
        auto previous = small_argument();
        previous.annotations.clear();
        int n = static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            Annotation a;
            a.node = nodes[rng() % 5];
            a.name = keys[rng() % 5];
            a.kind = std::isupper(static_cast<unsigned char>(a.name[0])) ? AnnotationKind::Stereotype
                                                                         : AnnotationKind::Placeholder;
            if (a.kind == AnnotationKind::Placeholder) a.value = std::to_string(rng() % 3);
            a.origin = rng() % 3 == 0 ? Origin::Generated : Origin::Manual;
            a.phases = Vocabulary::standard().default_phases(a.kind, a.name);
            if (a.node == std::string("G.ghost")) previous.orphaned_annotations.push_back(a);
            else previous.annotations.push_back(a);
        }
        auto regenerated = small_argument();
        auto once = merge_annotations(regenerated, previous);
        auto twice = merge_annotations(regenerated, once);
        CHECK(once == twice);
        // Every manual annotation survives, attached or quarantined.
        for (const auto& a : previous.annotations) {
            if (a.origin != Origin::Manual) continue;
            CHECK(std::find(once.annotations.begin(), once.annotations.end(), a) != once.annotations.end());
        }
        for (const auto& a : previous.orphaned_annotations)
            CHECK(std::find(once.orphaned_annotations.begin(), once.orphaned_annotations.end(), a) !=
                  once.orphaned_annotations.end());
    }
}

}  // TEST_SUITE
