#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "cassure/fingerprint.hpp"
#include "cassure/gsn.hpp"
#include "cassure/lifecycle.hpp"
#include "cassure/parser.hpp"
#include "cassure/results_io.hpp"
#include "cassure/state_space.hpp"
#include "cassure/transformer.hpp"

namespace py = pybind11;
using namespace cassure;

namespace {

SolverConfig solver(double epsilon, std::int64_t max_iters, const std::string& method) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iterations = max_iters;
    if (method == "jacobi") cfg.method = SolveMethod::Jacobi;
    else if (method != "gauss-seidel") throw std::invalid_argument("unknown method '" + method + "'");
    cfg.validate();
    return cfg;
}

py::dict to_dict(const VerificationResult& r) {
    py::dict d;
    d["property"] = r.property;
    d["kind"] = kind_name(r.kind);
    if (std::holds_alternative<Unbounded>(r.value)) d["value"] = INFINITY;
    else if (auto v = std::get_if<double>(&r.value)) d["value"] = *v;
    else d["value"] = py::none();
    d["verdict"] = r.verdict ? py::cast(*r.verdict) : py::none();
    d["marginal"] = r.marginal;
    d["iterations"] = r.stats.iterations;
    d["engine"] = r.engine;
    d["formula"] = r.property_text;
    d["result_fingerprint"] = r.result_fingerprint;
    return d;
}

struct Checked {
    std::vector<PropertySpec> properties;
    std::vector<VerificationResult> results;
    std::size_t states = 0;
};

Checked run(const std::string& model, const std::string& props, const std::map<std::string, double>& constants,
            const SolverConfig& cfg) {
    py::gil_scoped_release release;
    Checked out;
    auto ast = parse_model(model);
    out.properties = parse_properties(props);
    auto space = fix_deadlocks(build_state_space(bind_shared(ast, constants)));
    out.states = space.size();
    out.results = check_properties(space, out.properties, cfg);
    stamp_results(out.results, model, constants, utc_timestamp());
    return out;
}

}  // namespace

PYBIND11_MODULE(_cassure, m) {
    m.doc() = "Probabilistic model checking and assurance-argument generation";

    py::register_exception<DiagnosticError>(m, "DiagnosticError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("fingerprint", [](const std::string& data) { return fingerprint(data); });

    m.def(
        "state_count",
        [](const std::string& model, const std::map<std::string, double>& constants) {
            auto space = fix_deadlocks(build_state_space(bind_shared(parse_model(model), constants)));
            return py::make_tuple(space.size(), space.matrix().nonzeros());
        },
        py::arg("model"), py::arg("constants") = std::map<std::string, double>{},
        "Returns (states, transitions) of the reachable chain.");

    m.def(
        "check",
        [](const std::string& model, const std::string& props, const std::map<std::string, double>& constants,
           double epsilon, std::int64_t max_iters, const std::string& method) {
            auto checked = run(model, props, constants, solver(epsilon, max_iters, method));
            py::list out;
            for (const auto& r : checked.results) out.append(to_dict(r));
            return out;
        },
        py::arg("model"), py::arg("props"), py::arg("constants") = std::map<std::string, double>{},
        py::arg("epsilon") = 1e-9, py::arg("max_iters") = 100000, py::arg("method") = "gauss-seidel");

    m.def(
        "generate",
        [](const std::string& model, const std::string& props, const std::string& name,
           const std::map<std::string, double>& constants, std::optional<std::string> previous) {
            auto checked = run(model, props, constants, SolverConfig{});
            auto arg = transform::build_argument({name, name + ".prism", fingerprint(model)}, checked.properties,
                                                 checked.results);
            if (previous) arg = transform::regenerate(gsn::parse_dsl(*previous), arg);
            return gsn::serialize_dsl(arg);
        },
        py::arg("model"), py::arg("props"), py::arg("name") = "model",
        py::arg("constants") = std::map<std::string, double>{}, py::arg("previous") = py::none(),
        "Argument DSL text; with `previous`, regenerates against it.");

    m.def(
        "validate",
        [](const std::string& dsl) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& i : gsn::validate_argument(gsn::parse_dsl(dsl)))
                out.emplace_back(i.severity == Severity::Error ? "error" : "warning", i.to_string());
            return out;
        },
        py::arg("dsl"));

    m.def("export_dot", [](const std::string& dsl) { return gsn::export_dot(gsn::parse_dsl(dsl)); }, py::arg("dsl"));

    m.def(
        "ingest",
        [](const std::string& dsl, const std::string& events) {
            auto arg = gsn::parse_dsl(dsl);
            lifecycle::IngestReport report;
            auto updated = lifecycle::ingest_monitor_events(arg, lifecycle::parse_monitor_log(events), &report);
            if (!(updated == arg)) updated.version = arg.version + 1;
            return py::make_tuple(gsn::serialize_dsl(updated), report.reopened);
        },
        py::arg("dsl"), py::arg("events"), "Returns (updated DSL, reopened goal ids).");

    m.def(
        "impact",
        [](const std::string& dsl, const std::string& manifest) {
            auto outcome = lifecycle::impact_analysis(gsn::parse_dsl(dsl), lifecycle::parse_manifest(manifest));
            py::dict classes;
            for (const auto& g : outcome.report.goals) classes[py::str(g.goal)] = lifecycle::classification_name(g.classification);
            return py::make_tuple(outcome.report.summary, classes);
        },
        py::arg("dsl"), py::arg("manifest") = "");

    m.def("evidence_cost_hours", [](const std::string& text) { return lifecycle::parse_evidence_cost(text); });
}
