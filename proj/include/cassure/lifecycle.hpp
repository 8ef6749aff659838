#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cassure/engine.hpp"
#include "cassure/gsn.hpp"
#include "cassure/transformer.hpp"

namespace cassure::lifecycle {

// ---------------------------------------------------------------------------
// Runtime evidence
// ---------------------------------------------------------------------------

enum class EventKind { Violation, Confidence };

struct MonitorEvent {
    std::string timestamp;
    std::string monitor_id;
    EventKind kind = EventKind::Violation;
    double confidence = 0.0;  // confidence events, in [0,1]
    std::string detail;       // violation events
    std::string payload;      // optional log excerpt or reference
};

/// Monitor log: one JSON object per line with fields timestamp, monitor_id,
/// kind ("violation" | "confidence"), value (number for confidence, string
/// for violation) and optional payload. Throws DiagnosticError on malformed lines.
std::vector<MonitorEvent> parse_monitor_log(std::string_view text, const std::string& file = "<log>");
std::string write_monitor_log(const std::vector<MonitorEvent>& events);

struct IngestReport {
    std::vector<std::string> reopened;   // goal ids, in event order
    std::vector<std::string> unmatched;  // monitor ids with no goal
    std::vector<std::string> notes;
};

/// Violations reopen the goals carrying the monitor's id and record a
/// runtime_log placeholder; confidence below the goal's confidence_threshold
/// reopens it and defers its evidence. Throws std::invalid_argument for an
/// unparseable confidence_threshold.
gsn::ArgumentModel ingest_monitor_events(gsn::ArgumentModel arg, const std::vector<MonitorEvent>& events,
                                         IngestReport* report = nullptr);

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

struct ChangedArtifact {
    std::string path;
    std::string old_fingerprint;
    std::string new_fingerprint;
};

/// Directory `manifest.txt` with lines:
///   changed <path> <old-fp> <new-fp>
///   log <path>
///   note <free text>
///   reopened <goal-id>
/// Blank lines and `#` comments are ignored.
struct EvolutionPackage {
    std::vector<ChangedArtifact> changed;
    std::vector<std::string> logs;
    std::vector<std::string> notes;
    std::vector<std::string> reopened;

    bool empty() const { return changed.empty() && logs.empty() && notes.empty() && reopened.empty(); }
};

EvolutionPackage parse_manifest(std::string_view text, const std::string& file = "<manifest>");
std::string write_manifest(const EvolutionPackage& pkg);
/// Reads `<dir>/manifest.txt`.
EvolutionPackage load_package(const std::filesystem::path& dir);

enum class Classification { Valid, Invalid, Uncertain };
const char* classification_name(Classification c) noexcept;

struct GoalImpact {
    std::string goal;
    Classification classification = Classification::Valid;
    std::string rationale;
};

struct ImpactReport {
    std::vector<GoalImpact> goals;  // every goal exactly once, in id order
    std::string summary;            // text of the impact_summary placeholder

    std::size_t count(Classification c) const;
    const GoalImpact* find(std::string_view goal) const;
};

struct ImpactOutcome {
    gsn::ArgumentModel argument;
    ImpactReport report;
};

/// Classifies every goal. With a non-empty package the strategy node gains
/// ImpactAnalysis and an impact_summary placeholder; an empty package leaves
/// the argument untouched. `fresh` holds re-check results, if any.
ImpactOutcome impact_analysis(const gsn::ArgumentModel& arg, const EvolutionPackage& pkg,
                              const std::vector<VerificationResult>* fresh = nullptr);

enum class RepairStrategy { ReVerify, Simulate, ManualReview };
const char* strategy_name(RepairStrategy s) noexcept;

struct PlanEntry {
    std::string goal;
    RepairStrategy strategy = RepairStrategy::ReVerify;
    int rank = 0;
    Classification classification = Classification::Uncertain;
    std::optional<double> cost_hours;
    bool critical = false;
};

struct RegenerationPlan {
    std::vector<PlanEntry> entries;
    std::vector<std::string> warnings;
};

/// `<number>(h|d)` with 1d = 24h; nullopt if the text does not match.
std::optional<double> parse_evidence_cost(std::string_view text);

struct PlanOutcome {
    gsn::ArgumentModel argument;
    RegenerationPlan plan;
};

/// Orders invalid before uncertain goals, then by ascending evidence_cost
/// (missing last), then by id, and tags each planned goal with RegenerationPlan.
PlanOutcome plan_regeneration(const ImpactReport& report, const gsn::ArgumentModel& arg);

/// Discharges every re-verify entry with its fresh result. Throws
/// std::invalid_argument when a planned goal has no fresh result.
gsn::ArgumentModel apply_regeneration(const gsn::ArgumentModel& arg, const RegenerationPlan& plan,
                                      const std::vector<VerificationResult>& fresh,
                                      const std::optional<std::string>& model_fingerprint = std::nullopt,
                                      const transform::ArgumentTemplate& tmpl = {});

/// Goals violating the stereotype life cycle (e.g. DeferredEvidence together with EvidenceProvided).
std::vector<std::string> stereotype_state_violations(const gsn::ArgumentModel& arg);

std::string impact_report_json(const ImpactReport& report);
std::string plan_json(const RegenerationPlan& plan);
/// Reads a plan written by plan_json.
RegenerationPlan parse_plan_json(std::string_view text);

}  // namespace cassure::lifecycle
