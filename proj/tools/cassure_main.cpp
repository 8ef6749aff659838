#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cassure/pipeline.hpp"

using namespace cassure::pipeline;

namespace {

struct Flags {
    std::optional<std::string> config, model, props, out, templates, method;
    std::vector<std::string> constants;
    std::optional<double> epsilon;
    std::optional<std::int64_t> max_iters;
    std::optional<long> poll_ms;
    std::optional<unsigned> threads;
    bool dot = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key=value configuration file (flags take precedence)");
    cmd->add_option("--model", f.model, "model file (.prism)");
    cmd->add_option("--props", f.props, "property file (.props)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--const", f.constants, "constant override NAME=VALUE (repeatable)");
    cmd->add_option("--epsilon", f.epsilon, "convergence tolerance");
    cmd->add_option("--max-iters", f.max_iters, "iteration limit");
    cmd->add_option("--poll-ms", f.poll_ms, "watch poll interval in milliseconds");
    cmd->add_option("--templates", f.templates, "description template file");
    cmd->add_option("--method", f.method, "gauss-seidel or jacobi");
    cmd->add_option("--threads", f.threads, "worker threads for property checks");
    cmd->add_flag("--dot", f.dot, "also write a .dot graph");
}

PipelineConfig make_config(const Flags& f) {
    PipelineConfig cfg;
    if (f.config) cfg = parse_config(read_file(*f.config), cfg);
    if (f.model) cfg.model = *f.model;
    if (f.props) cfg.props = *f.props;
    if (f.out) cfg.out_dir = *f.out;
    for (const auto& c : f.constants) add_constant(cfg, c);
    if (f.epsilon) cfg.solver.epsilon = *f.epsilon;
    if (f.max_iters) cfg.solver.max_iterations = *f.max_iters;
    if (f.poll_ms) cfg.poll = std::chrono::milliseconds(*f.poll_ms);
    if (f.templates) cfg.templates = *f.templates;
    if (f.threads) cfg.threads = *f.threads;
    if (f.dot) cfg.dot = true;
    if (f.method) {
        if (*f.method == "gauss-seidel") cfg.solver.method = cassure::SolveMethod::GaussSeidel;
        else if (*f.method == "jacobi") cfg.solver.method = cassure::SolveMethod::Jacobi;
        else throw std::invalid_argument("unknown method '" + *f.method + "'");
    }
    resolve_pairing(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic model checking with generated assurance arguments"};
    app.require_subcommand(1);
    Flags flags;
    std::string events, package;
    bool recheck = false;
    std::size_t max_cycles = 0;

    auto* check = app.add_subcommand("check", "verify all properties and write the results file");
    auto* generate = app.add_subcommand("generate", "verify and (re)generate the assurance argument");
    auto* watch = app.add_subcommand("watch", "regenerate whenever the model or property file changes");
    auto* ingest = app.add_subcommand("ingest", "ingest runtime monitor events into the argument");
    auto* impact = app.add_subcommand("impact", "classify goals against an evolution package");
    auto* plan = app.add_subcommand("plan", "plan evidence regeneration from the impact report");
    auto* apply = app.add_subcommand("apply", "re-verify planned goals and update the argument");
    for (auto* cmd : {check, generate, watch, ingest, impact, plan, apply}) add_common(cmd, flags);
    ingest->add_option("--events", events, "monitor event log (one JSON object per line)")->required();
    impact->add_option("--package", package, "evolution package directory")->required();
    impact->add_flag("--recheck", recheck, "re-run verification and use it as fresh evidence");
    watch->add_option("--max-cycles", max_cycles, "stop after this many cycles (0: run forever)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    PipelineConfig cfg;
    try {
        cfg = make_config(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (check->parsed()) return cmd_check(cfg, std::cout);
    if (generate->parsed()) return cmd_generate(cfg, std::cout);
    if (watch->parsed()) return cmd_watch(cfg, std::cout, max_cycles);
    if (ingest->parsed()) return cmd_ingest(cfg, events, std::cout);
    if (impact->parsed()) return cmd_impact(cfg, package, recheck, std::cout);
    if (plan->parsed()) return cmd_plan(cfg, std::cout);
    return cmd_apply(cfg, std::cout);
}
