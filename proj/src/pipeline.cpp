#include "cassure/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "cassure/fingerprint.hpp"
#include "cassure/parser.hpp"
#include "cassure/results_io.hpp"
#include "cassure/state_space.hpp"
#include "json.hpp"

namespace cassure::pipeline {

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& text, const char* what) {
    T v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || p != text.data() + text.size())
        throw std::invalid_argument(std::string("invalid ") + what + " '" + text + "'");
    return v;
}

void print_diagnostics(std::ostream& log, const DiagnosticError& e) {
    for (const auto& d : e.diagnostics()) log << d.to_string() << "\n";
}

// First line of an error, for one-line cycle summaries.
std::string first_line(const std::exception& e) {
    if (auto* d = dynamic_cast<const DiagnosticError*>(&e); d && !d->diagnostics().empty())
        return d->diagnostics().front().to_string();
    std::string s = e.what();
    return s.substr(0, s.find('\n'));
}

// Resolves every predicate and reward name up front so errors carry spans and arrive together.
void validate_properties(const BoundModel& model, const std::vector<PropertySpec>& properties) {
    std::vector<Diagnostic> errors;
    auto check_predicate = [&](const ExprPtr& e) {
        if (!e) return;
        try {
            if (model.type_of_expr(e) != ValueType::Bool)
                errors.push_back({Severity::Error, "state formula '" + render_expr(e, true) + "' is not boolean", e->span});
        } catch (const DiagnosticError& d) {
            errors.insert(errors.end(), d.diagnostics().begin(), d.diagnostics().end());
        }
    };
    for (const auto& p : properties) {
        check_predicate(p.path.left);
        check_predicate(p.path.right);
        if (p.query == QueryKind::RewardQuery && !model.ast().find_rewards(p.reward_structure))
            errors.push_back({Severity::Error, "unknown reward structure \"" + p.reward_structure + "\"", p.span});
    }
    if (!errors.empty()) throw DiagnosticError(std::move(errors));
}

std::optional<std::string> read_if_exists(const fs::path& path) {
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    return read_file(path);
}

gsn::ArgumentModel load_argument(const fs::path& path) {
    if (!fs::exists(path)) throw std::runtime_error("no argument at " + path.string() + " (run generate first)");
    return gsn::parse_dsl(read_file(path), path.string());
}

void save_argument(const PipelineConfig& cfg, const Artifacts& files, const gsn::ArgumentModel& arg) {
    write_atomic(files.gsn, gsn::serialize_dsl(arg));
    if (cfg.dot) write_atomic(files.dot, gsn::export_dot(arg));
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void add_constant(PipelineConfig& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected NAME=VALUE, got '" + assignment + "'");
    cfg.constants[trim(assignment.substr(0, eq))] = parse_number<double>(trim(assignment.substr(eq + 1)), "constant value");
}

PipelineConfig parse_config(std::string_view text, PipelineConfig cfg) {
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        auto where = "config line " + std::to_string(number) + ": ";
        if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        try {
            if (key == "model") cfg.model = value;
            else if (key == "props") cfg.props = value;
            else if (key == "out") cfg.out_dir = value;
            else if (key == "const") add_constant(cfg, value);
            else if (key == "epsilon") cfg.solver.epsilon = parse_number<double>(value, "epsilon");
            else if (key == "max_iters") cfg.solver.max_iterations = parse_number<std::int64_t>(value, "max_iters");
            else if (key == "poll_ms") cfg.poll = std::chrono::milliseconds(parse_number<long>(value, "poll_ms"));
            else if (key == "templates") cfg.templates = fs::path(value);
            else if (key == "threads") cfg.threads = parse_number<unsigned>(value, "threads");
            else if (key == "dot") cfg.dot = value == "true" || value == "1" || value == "yes";
            else if (key == "method") {
                if (value == "gauss-seidel") cfg.solver.method = SolveMethod::GaussSeidel;
                else if (value == "jacobi") cfg.solver.method = SolveMethod::Jacobi;
                else throw std::invalid_argument("unknown method '" + value + "'");
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        }
    }
    return cfg;
}

void resolve_pairing(PipelineConfig& cfg) {
    if (cfg.model.empty() && !cfg.props.empty()) cfg.model = fs::path(cfg.props).replace_extension(".prism");
    if (cfg.props.empty() && !cfg.model.empty()) cfg.props = fs::path(cfg.model).replace_extension(".props");
    if (cfg.model.empty()) throw std::invalid_argument("no model given (use --model or --props)");
}

Artifacts artifacts_for(const PipelineConfig& cfg) {
    auto stem = cfg.model.stem().string();
    auto at = [&](const char* suffix) { return cfg.out_dir / (stem + suffix); };
    return {at(".results.jsonl"), at(".gsn"),         at(".dot"),
            at(".ingest.json"),   at(".impact.json"), at(".plan.json")};
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// check / generate
// ---------------------------------------------------------------------------

CheckOutcome run_check(const PipelineConfig& cfg) {
    cfg.solver.validate();
    CheckOutcome out;
    out.model_text = read_file(cfg.model);
    auto ast = parse_model(out.model_text, cfg.model.string());
    out.properties = parse_properties(read_file(cfg.props), cfg.props.string());
    auto model = bind_shared(ast, cfg.constants);
    validate_properties(*model, out.properties);
    auto space = fix_deadlocks(build_state_space(model));
    out.states = space.size();
    out.results = check_properties(space, out.properties, cfg.solver, cfg.threads);
    stamp_results(out.results, out.model_text, cfg.constants, utc_timestamp());
    for (const auto& r : out.results)
        if (r.verdict && !*r.verdict) ++out.violated;
    return out;
}

GenerateOutcome run_generate(const PipelineConfig& cfg, const CheckOutcome& check,
                             const std::optional<std::string>& previous_dsl) {
    GenerateOutcome out;
    transform::ArgumentTemplate tmpl;
    if (cfg.templates) tmpl = transform::ArgumentTemplate::parse(read_file(*cfg.templates));
    transform::ModelRef ref{cfg.model.stem().string(), cfg.model.filename().string(), fingerprint(check.model_text)};
    auto fresh = transform::build_argument(ref, check.properties, check.results, tmpl);
    if (previous_dsl) {
        auto previous = gsn::parse_dsl(*previous_dsl, artifacts_for(cfg).gsn.string());
        out.argument = transform::regenerate(previous, fresh, &out.merge);
        out.had_previous = true;
    } else {
        out.argument = std::move(fresh);
    }
    out.issues = gsn::validate_argument(out.argument);
    out.dsl = gsn::serialize_dsl(out.argument);
    out.dot = gsn::export_dot(out.argument);
    return out;
}

int cmd_check(const PipelineConfig& cfg, std::ostream& log) {
    try {
        auto check = run_check(cfg);
        auto files = artifacts_for(cfg);
        write_atomic(files.results, write_results(check.results));
        for (const auto& r : check.results) {
            log << r.property << ": " << transform::render_result(r) << "\n";
        }
        log << check.results.size() << " properties checked over " << check.states << " states, " << check.violated
            << " violated; results in " << files.results.string() << "\n";
        return check.violated ? 1 : 0;
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

int cmd_generate(const PipelineConfig& cfg, std::ostream& log) {
    try {
        auto check = run_check(cfg);
        auto files = artifacts_for(cfg);
        auto gen = run_generate(cfg, check, read_if_exists(files.gsn));
        if (gsn::has_errors(gen.issues)) {
            for (const auto& i : gen.issues) log << i.to_string() << "\n";
            return 2;
        }
        write_atomic(files.results, write_results(check.results));
        write_atomic(files.gsn, gen.dsl);
        if (cfg.dot) write_atomic(files.dot, gen.dot);
        for (const auto& a : gen.merge.orphaned_annotations)
            log << "warning: annotation '" << a.name << "' on missing node " << a.node << " quarantined\n";
        for (const auto& t : gen.merge.orphaned_traces)
            log << "warning: evidence link '" << t.ref << "' on missing node " << t.node << " quarantined\n";
        log << "argument " << files.gsn.string() << " version " << gen.argument.version << ", "
            << gen.argument.nodes.size() << " nodes\n";
        return 0;
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

// ---------------------------------------------------------------------------
// lifecycle commands
// ---------------------------------------------------------------------------

int cmd_ingest(const PipelineConfig& cfg, const fs::path& events, std::ostream& log) {
    try {
        auto files = artifacts_for(cfg);
        auto arg = load_argument(files.gsn);
        auto parsed = lifecycle::parse_monitor_log(read_file(events), events.string());
        lifecycle::IngestReport report;
        auto updated = lifecycle::ingest_monitor_events(arg, parsed, &report);
        if (!(updated == arg)) updated.version = arg.version + 1;
        save_argument(cfg, files, updated);
        nlohmann::ordered_json j;
        j["events"] = parsed.size();
        j["reopened"] = report.reopened;
        j["unmatched"] = report.unmatched;
        j["notes"] = report.notes;
        write_atomic(files.ingest_report, j.dump(2) + "\n");
        for (const auto& m : report.unmatched) log << "warning: no goal carries monitor_id \"" << m << "\"\n";
        log << parsed.size() << " events, " << report.reopened.size() << " goals reopened\n";
        return 0;
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

int cmd_impact(const PipelineConfig& cfg, const fs::path& package, bool recheck, std::ostream& log) {
    try {
        auto files = artifacts_for(cfg);
        auto arg = load_argument(files.gsn);
        auto pkg = lifecycle::load_package(package);
        std::optional<CheckOutcome> fresh;
        if (recheck) fresh = run_check(cfg);
        auto outcome = lifecycle::impact_analysis(arg, pkg, fresh ? &fresh->results : nullptr);
        if (!(outcome.argument == arg)) outcome.argument.version = arg.version + 1;
        save_argument(cfg, files, outcome.argument);
        write_atomic(files.impact_report, lifecycle::impact_report_json(outcome.report));
        log << outcome.report.summary << "; report in " << files.impact_report.string() << "\n";
        return 0;
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

namespace {

lifecycle::ImpactReport read_impact_report(const fs::path& path) {
    auto j = nlohmann::json::parse(read_file(path));
    lifecycle::ImpactReport report;
    report.summary = j.value("summary", std::string{});
    for (const auto& g : j.at("goals")) {
        auto cls = g.at("classification").get<std::string>();
        report.goals.push_back({g.at("goal").get<std::string>(),
                                cls == "invalid"     ? lifecycle::Classification::Invalid
                                : cls == "uncertain" ? lifecycle::Classification::Uncertain
                                                     : lifecycle::Classification::Valid,
                                g.value("rationale", std::string{})});
    }
    return report;
}

}  // namespace

int cmd_plan(const PipelineConfig& cfg, std::ostream& log) {
    try {
        auto files = artifacts_for(cfg);
        auto arg = load_argument(files.gsn);
        auto report = read_impact_report(files.impact_report);
        auto outcome = lifecycle::plan_regeneration(report, arg);
        if (!(outcome.argument == arg)) outcome.argument.version = arg.version + 1;
        save_argument(cfg, files, outcome.argument);
        write_atomic(files.plan, lifecycle::plan_json(outcome.plan));
        for (const auto& w : outcome.plan.warnings) log << "warning: " << w << "\n";
        for (const auto& e : outcome.plan.entries)
            log << e.rank << ". " << e.goal << " (" << lifecycle::classification_name(e.classification) << ", "
                << lifecycle::strategy_name(e.strategy) << ")\n";
        log << outcome.plan.entries.size() << " goals planned; plan in " << files.plan.string() << "\n";
        return 0;
    } catch (const nlohmann::json::exception& e) {
        log << "error: malformed impact report: " << e.what() << "\n";
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

int cmd_apply(const PipelineConfig& cfg, std::ostream& log) {
    try {
        auto files = artifacts_for(cfg);
        auto arg = load_argument(files.gsn);
        auto plan = lifecycle::parse_plan_json(read_file(files.plan));
        auto fresh = run_check(cfg);
        transform::ArgumentTemplate tmpl;
        if (cfg.templates) tmpl = transform::ArgumentTemplate::parse(read_file(*cfg.templates));
        auto updated = lifecycle::apply_regeneration(arg, plan, fresh.results, fingerprint(fresh.model_text), tmpl);
        save_argument(cfg, files, updated);
        write_atomic(files.results, write_results(fresh.results));
        std::size_t applied = 0;
        for (const auto& e : plan.entries) applied += e.strategy == lifecycle::RepairStrategy::ReVerify;
        log << applied << " of " << plan.entries.size() << " planned goals re-verified; argument version "
            << updated.version << "\n";
        return 0;
    } catch (const DiagnosticError& e) {
        print_diagnostics(log, e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

// ---------------------------------------------------------------------------
// watch
// ---------------------------------------------------------------------------

Watcher::Watcher(PipelineConfig cfg, std::ostream& log) : cfg_(std::move(cfg)), log_(log) {}

bool Watcher::poll_once() {
    std::string current;
    try {
        current = file_fingerprint(cfg_.model) + ":" + file_fingerprint(cfg_.props);
    } catch (const std::exception&) {
        return false;  // an editor may be replacing the file; try again next poll
    }
    if (current == seen_) return false;
    seen_ = current;
    ++cycles_;
    try {
        auto check = run_check(cfg_);
        auto files = artifacts_for(cfg_);
        auto gen = run_generate(cfg_, check, read_if_exists(files.gsn));
        if (gsn::has_errors(gen.issues)) throw std::runtime_error(gen.issues.front().to_string());
        write_atomic(files.results, write_results(check.results));
        write_atomic(files.gsn, gen.dsl);
        if (cfg_.dot) write_atomic(files.dot, gen.dot);
        std::size_t orphans = gen.merge.orphaned_annotations.size() + gen.merge.orphaned_traces.size();
        log_ << "cycle " << cycles_ << ": " << check.results.size() << " properties, " << check.violated
             << " violated, argument version " << gen.argument.version
             << (orphans ? ", " + std::to_string(orphans) + " orphaned" : std::string{}) << std::endl;
        last_error_.clear();
    } catch (const std::exception& e) {
        ++failures_;
        last_error_ = first_line(e);
        log_ << "cycle " << cycles_ << " failed: " << last_error_ << std::endl;
    }
    return true;
}

void Watcher::run(std::stop_token stop, std::size_t max_cycles) {
    while (!stop.stop_requested()) {
        poll_once();
        if (max_cycles && cycles_ >= max_cycles) return;
        std::this_thread::sleep_for(cfg_.poll);
    }
}

int cmd_watch(const PipelineConfig& cfg, std::ostream& log, std::size_t max_cycles) {
    try {
        cfg.solver.validate();
        if (!fs::exists(cfg.model)) throw std::runtime_error("model file " + cfg.model.string() + " does not exist");
        Watcher watcher(cfg, log);
        log << "watching " << cfg.model.string() << " and " << cfg.props.string() << " every " << cfg.poll.count()
            << " ms" << std::endl;
        std::stop_source never;
        watcher.run(never.get_token(), max_cycles);
        return watcher.failures() ? 2 : 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
    }
    return 2;
}

}  // namespace cassure::pipeline
