#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "cassure/engine.hpp"
#include "cassure/gsn.hpp"
#include "cassure/lifecycle.hpp"
#include "cassure/transformer.hpp"

namespace cassure::pipeline {

namespace fs = std::filesystem;

struct PipelineConfig {
    fs::path model;
    fs::path props;
    fs::path out_dir = ".";
    std::map<std::string, double> constants;
    SolverConfig solver;
    std::chrono::milliseconds poll{1000};
    std::optional<fs::path> templates;
    bool dot = false;
    unsigned threads = 0;  // 0: one per hardware thread
};

/// Applies `key = value` lines (model, props, out, const, epsilon, max_iters,
/// poll_ms, templates, dot, method, threads) on top of `base`. `const` takes
/// NAME=VALUE and may repeat. Throws std::invalid_argument with the line number.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
/// Parses `NAME=VALUE` into the constants map.
void add_constant(PipelineConfig& cfg, const std::string& assignment);

/// Fills a missing model or props path from the other one (same basename,
/// `.prism` / `.props`, same directory). Throws std::invalid_argument if neither resolves.
void resolve_pairing(PipelineConfig& cfg);

/// Output file locations, all named after the model file's stem.
struct Artifacts {
    fs::path results, gsn, dot, ingest_report, impact_report, plan;
};
Artifacts artifacts_for(const PipelineConfig& cfg);

/// Writes through a temporary sibling and renames it into place.
void write_atomic(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

struct CheckOutcome {
    std::string model_text;
    std::vector<PropertySpec> properties;
    std::vector<VerificationResult> results;
    std::size_t states = 0;
    std::size_t violated = 0;
};

/// Parses, builds and checks in memory. Throws DiagnosticError, ConvergenceError or std::runtime_error.
CheckOutcome run_check(const PipelineConfig& cfg);

struct GenerateOutcome {
    gsn::ArgumentModel argument;
    std::string dsl;
    std::string dot;
    gsn::MergeReport merge;
    std::vector<gsn::ValidationIssue> issues;
    bool had_previous = false;
};

/// Builds the argument for `check` and regenerates it against `previous_dsl` when given.
GenerateOutcome run_generate(const PipelineConfig& cfg, const CheckOutcome& check,
                             const std::optional<std::string>& previous_dsl);

// Command entry points. Exit codes: 0 success, 1 a bound property is violated (check only), 2 error.
int cmd_check(const PipelineConfig& cfg, std::ostream& log);
int cmd_generate(const PipelineConfig& cfg, std::ostream& log);
int cmd_ingest(const PipelineConfig& cfg, const fs::path& events, std::ostream& log);
/// `recheck` re-runs verification on the current model and properties as fresh evidence.
int cmd_impact(const PipelineConfig& cfg, const fs::path& package, bool recheck, std::ostream& log);
int cmd_plan(const PipelineConfig& cfg, std::ostream& log);
int cmd_apply(const PipelineConfig& cfg, std::ostream& log);

/// Polls content fingerprints of the model and property files and runs one
/// check+generate cycle whenever they change. Outputs are replaced only after
/// a cycle succeeds.
class Watcher {
public:
    Watcher(PipelineConfig cfg, std::ostream& log);

    /// Runs a cycle if the inputs changed since the last attempt. Returns true if a cycle ran.
    bool poll_once();
    /// Loops until stop is requested, or after `max_cycles` cycles if non-zero.
    void run(std::stop_token stop, std::size_t max_cycles = 0);

    std::size_t cycles() const noexcept { return cycles_; }
    std::size_t failures() const noexcept { return failures_; }
    const std::string& last_error() const noexcept { return last_error_; }

private:
    PipelineConfig cfg_;
    std::ostream& log_;
    std::string seen_;
    std::size_t cycles_ = 0;
    std::size_t failures_ = 0;
    std::string last_error_;
};

int cmd_watch(const PipelineConfig& cfg, std::ostream& log, std::size_t max_cycles = 0);

}  // namespace cassure::pipeline
