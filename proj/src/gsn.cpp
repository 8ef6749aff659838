#include "cassure/gsn.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace cassure::gsn {

const char* node_kind_name(NodeKind k) noexcept {
    switch (k) {
        case NodeKind::Goal: return "goal";
        case NodeKind::Strategy: return "strategy";
        case NodeKind::Solution: return "solution";
        case NodeKind::Context: return "context";
    }
    return "?";
}

const char* artifact_kind_name(ArtifactKind k) noexcept {
    switch (k) {
        case ArtifactKind::ModelFile: return "model-file";
        case ArtifactKind::Property: return "property";
        case ArtifactKind::VerificationResult: return "verification-result";
        case ArtifactKind::ExternalEvidence: return "external-evidence";
    }
    return "?";
}

std::optional<ArtifactKind> parse_artifact_kind(std::string_view text) {
    for (auto k : {ArtifactKind::ModelFile, ArtifactKind::Property, ArtifactKind::VerificationResult,
                   ArtifactKind::ExternalEvidence})
        if (text == artifact_kind_name(k)) return k;
    return std::nullopt;
}

std::string phase_text(unsigned phases) {
    std::string out;
    for (auto [bit, name] : {std::pair{Design, "design"}, {Runtime, "runtime"}, {Evolution, "evolution"}})
        if (phases & bit) out += (out.empty() ? "" : ",") + std::string(name);
    return out;
}

std::optional<unsigned> parse_phases(std::string_view text) {
    unsigned out = 0;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto part = text.substr(0, comma);
        if (part == "design") out |= Design;
        else if (part == "runtime") out |= Runtime;
        else if (part == "evolution") out |= Evolution;
        else if (part == "all") out |= AllPhases;
        else return std::nullopt;
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out ? std::optional(out) : std::nullopt;
}

// ---------------------------------------------------------------------------
// ArgumentModel
// ---------------------------------------------------------------------------

const GsnNode* ArgumentModel::find(std::string_view id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

GsnNode* ArgumentModel::find(std::string_view id) {
    for (auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

bool ArgumentModel::has_stereotype(std::string_view node, std::string_view name) const {
    return std::any_of(annotations.begin(), annotations.end(), [&](const Annotation& a) {
        return a.node == node && a.kind == AnnotationKind::Stereotype && a.name == name;
    });
}

std::optional<std::string> ArgumentModel::placeholder(std::string_view node, std::string_view key) const {
    std::optional<std::string> out;
    for (const auto& a : annotations)
        if (a.node == node && a.kind == AnnotationKind::Placeholder && a.name == key) out = a.value;
    return out;
}

std::vector<const TraceLink*> ArgumentModel::traces_of(std::string_view node, std::optional<ArtifactKind> kind) const {
    std::vector<const TraceLink*> out;
    for (const auto& t : traces)
        if (t.node == node && (!kind || t.kind == *kind)) out.push_back(&t);
    return out;
}

std::vector<std::string> ArgumentModel::children(std::string_view node, LinkKind kind) const {
    std::vector<std::string> out;
    for (const auto& l : links)
        if (l.kind == kind && l.source == node) out.push_back(l.target);
    return out;
}

void ArgumentModel::add_stereotype(const std::string& node, const std::string& name, Origin origin) {
    if (has_stereotype(node, name)) return;
    annotations.push_back({node, AnnotationKind::Stereotype, name, "", Vocabulary::standard().default_phases(
                                                                            AnnotationKind::Stereotype, name),
                           origin});
}

void ArgumentModel::remove_stereotype(std::string_view node, std::string_view name) {
    std::erase_if(annotations, [&](const Annotation& a) {
        return a.node == node && a.kind == AnnotationKind::Stereotype && a.name == name;
    });
}

void ArgumentModel::add_placeholder(const std::string& node, const std::string& key, const std::string& value,
                                    Origin origin) {
    annotations.push_back({node, AnnotationKind::Placeholder, key, value,
                           Vocabulary::standard().default_phases(AnnotationKind::Placeholder, key), origin});
}

void ArgumentModel::set_placeholder(const std::string& node, const std::string& key, const std::string& value,
                                    Origin origin) {
    std::erase_if(annotations, [&](const Annotation& a) {
        return a.node == node && a.kind == AnnotationKind::Placeholder && a.name == key;
    });
    add_placeholder(node, key, value, origin);
}

void ArgumentModel::normalize() {
    std::sort(nodes.begin(), nodes.end(), [](const GsnNode& a, const GsnNode& b) { return a.id < b.id; });
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary Vocabulary::base() {
    using enum AnnotationKind;
    Vocabulary v;
    v.entries_ = {
        {"trace_expr", Placeholder, Design | Runtime},
        {"monitor_id", Placeholder, AllPhases},
        {"deferred", Placeholder, AllPhases},
        {"confidence_threshold", Placeholder, Runtime},
        {"monitor_expr", Placeholder, Runtime},
        {"evidence_cost", Placeholder, Design | Evolution},
        {"evolution_package", Placeholder, Evolution},
        {"impact_summary", Placeholder, Evolution},
        {"regeneration_plan", Placeholder, Evolution},
        {"TraceMonitored", Stereotype, Design | Runtime},
        {"DeferredEvidence", Stereotype, AllPhases},
        {"RuntimeAssumptionMonitor", Stereotype, Runtime | Evolution},
        {"ConfidenceMonitor", Stereotype, Runtime | Evolution},
        {"Reopened", Stereotype, Runtime | Evolution},
        {"RegenerationPlan", Stereotype, Evolution},
        {"ImpactAnalysis", Stereotype, Evolution},
        {"EvidenceProvided", Stereotype, Evolution},
    };
    return v;
}

const Vocabulary& Vocabulary::standard() {
    static const Vocabulary v = [] {
        auto v = base();
        v.extend({"runtime_log", AnnotationKind::Placeholder, Runtime | Evolution});
        v.extend({"safety_critical", AnnotationKind::Placeholder, Design | Evolution});
        return v;
    }();
    return v;
}

void Vocabulary::extend(VocabularyEntry entry) {
    if (!find(entry.kind, entry.name)) entries_.push_back(std::move(entry));
}

const VocabularyEntry* Vocabulary::find(AnnotationKind kind, std::string_view name) const {
    for (const auto& e : entries_)
        if (e.kind == kind && e.name == name) return &e;
    return nullptr;
}

unsigned Vocabulary::default_phases(AnnotationKind kind, std::string_view name) const {
    const auto* e = find(kind, name);
    return e ? e->phases : 0;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::string ValidationIssue::to_string() const {
    std::string out = severity == Severity::Error ? "error" : "warning";
    if (!node.empty()) out += " [" + node + "]";
    return out + ": " + message;
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
    return std::any_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& i) { return i.severity == Severity::Error; });
}

std::vector<ValidationIssue> validate_argument(const ArgumentModel& arg, const Vocabulary& vocabulary) {
    std::vector<ValidationIssue> issues;
    auto error = [&](const std::string& node, std::string msg) {
        issues.push_back({Severity::Error, node, std::move(msg)});
    };
    auto warn = [&](const std::string& node, std::string msg) {
        issues.push_back({Severity::Warning, node, std::move(msg)});
    };

    std::map<std::string, NodeKind> kinds;
    for (const auto& n : arg.nodes) {
        if (!kinds.emplace(n.id, n.kind).second) error(n.id, "duplicate node id");
        if (n.description.empty()) error(n.id, "empty description");
        if (n.version < 1) error(n.id, "version must be at least 1");
    }

    std::map<std::string, std::vector<std::string>> support;
    std::set<std::string> supported;
    for (const auto& l : arg.links) {
        auto s = kinds.find(l.source), t = kinds.find(l.target);
        const char* link = l.kind == LinkKind::SupportedBy ? "supported-by" : "in-context-of";
        if (s == kinds.end() || t == kinds.end()) {
            error(l.source, std::string(link) + " link to unknown node '" +
                                (s == kinds.end() ? l.source : l.target) + "'");
            continue;
        }
        bool ok;
        if (l.kind == LinkKind::SupportedBy) {
            ok = (s->second == NodeKind::Goal && (t->second == NodeKind::Strategy || t->second == NodeKind::Goal ||
                                                  t->second == NodeKind::Solution)) ||
                 (s->second == NodeKind::Strategy && t->second == NodeKind::Goal);
            support[l.source].push_back(l.target);
            supported.insert(l.target);
        } else {
            ok = s->second == NodeKind::Goal && t->second == NodeKind::Context;
        }
        if (!ok)
            error(l.source, std::string(node_kind_name(s->second)) + " cannot be " + link + " a " +
                                node_kind_name(t->second) + " ('" + l.target + "')");
    }

    // Cycles in the support graph.
    std::map<std::string, int> colour;
    std::function<bool(const std::string&)> cyclic = [&](const std::string& v) {
        colour[v] = 1;
        for (const auto& w : support[v]) {
            if (colour[w] == 1) return true;
            if (colour[w] == 0 && cyclic(w)) return true;
        }
        colour[v] = 2;
        return false;
    };
    for (const auto& n : arg.nodes)
        if (colour[n.id] == 0 && cyclic(n.id)) {
            error(n.id, "supported-by cycle");
            break;
        }

    std::vector<std::string> roots;
    std::size_t goals = 0;
    for (const auto& n : arg.nodes) {
        if (n.kind != NodeKind::Goal) continue;
        ++goals;
        if (!supported.count(n.id)) roots.push_back(n.id);
    }
    if (roots.empty()) error("", "argument has no root goal");
    for (std::size_t i = 1; i < roots.size(); ++i)
        error(roots[i], "second root goal (first is '" + roots[0] + "')");
    if (goals == 1 && roots.size() == 1) warn(roots[0], "no sub-goals");

    std::map<std::string, std::pair<bool, bool>> closure;  // deferred, provided
    for (const auto& a : arg.annotations) {
        if (!kinds.count(a.node)) error(a.node, "annotation '" + a.name + "' on unknown node");
        const auto* entry = vocabulary.find(a.kind, a.name);
        const char* what = a.kind == AnnotationKind::Placeholder ? "placeholder" : "stereotype";
        if (!entry) {
            warn(a.node, std::string(what) + " '" + a.name + "' is not in the annotation vocabulary");
        } else if ((a.phases & ~entry->phases) != 0 || a.phases == 0) {
            warn(a.node, std::string(what) + " '" + a.name + "' tagged with phases '" + phase_text(a.phases) +
                             "', vocabulary allows '" + phase_text(entry->phases) + "'");
        }
        if (a.kind == AnnotationKind::Stereotype) {
            if (a.name == "DeferredEvidence") closure[a.node].first = true;
            if (a.name == "EvidenceProvided") closure[a.node].second = true;
        }
    }
    for (const auto& [node, state] : closure)
        if (state.first && state.second) error(node, "carries both DeferredEvidence and EvidenceProvided");

    for (const auto& t : arg.traces) {
        if (!kinds.count(t.node)) error(t.node, "trace link to '" + t.ref + "' on unknown node");
        if (t.ref.empty()) error(t.node, "trace link without artifact reference");
        if ((t.kind == ArtifactKind::ModelFile || t.kind == ArtifactKind::VerificationResult) && t.fingerprint.empty())
            error(t.node, std::string(artifact_kind_name(t.kind)) + " trace link without fingerprint");
    }
    for (const auto& a : arg.orphaned_annotations) warn(a.node, "quarantined annotation '" + a.name + "'");
    for (const auto& t : arg.orphaned_traces) warn(t.node, "quarantined trace link to '" + t.ref + "'");
    return issues;
}

// ---------------------------------------------------------------------------
// DSL
// ---------------------------------------------------------------------------

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

void write_annotation(std::ostream& out, const Annotation& a, const Vocabulary& vocabulary) {
    out << "annotate " << a.node;
    if (a.kind == AnnotationKind::Placeholder) out << " placeholder " << a.name << "=" << quote(a.value);
    else out << " stereotype <<" << a.name << ">>";
    if (a.phases != vocabulary.default_phases(a.kind, a.name)) out << " phase=" << phase_text(a.phases);
    if (a.origin == Origin::Generated) out << " auto";
    out << "\n";
}

void write_trace(std::ostream& out, const TraceLink& t) {
    out << "trace " << t.node << " " << artifact_kind_name(t.kind) << " " << quote(t.ref);
    if (!t.fingerprint.empty()) out << " fp=" << t.fingerprint;
    if (t.value) out << " value=" << quote(*t.value);
    if (t.verdict) out << " verdict=" << (*t.verdict ? "true" : "false");
    out << "\n";
}

struct Word {
    std::string text;  // bare word, quoted content, or key of a pair
    std::string value; // value of a key=value pair
    bool quoted = false;
    bool pair = false;
    int column = 1;
};

class LineReader {
public:
    LineReader(const std::string& file, int line) : file_(file), line_(line) {}

    [[noreturn]] void fail(const std::string& message, int column = 1) const {
        throw DiagnosticError(message, SourceSpan{file_, line_, column, 0});
    }

    std::vector<Word> split(std::string_view text) const {
        std::vector<Word> words;
        std::size_t i = 0;
        auto read_quoted = [&](std::size_t& k) {
            std::string out;
            ++k;
            while (k < text.size() && text[k] != '"') {
                if (text[k] == '\\' && k + 1 < text.size()) {
                    ++k;
                    out += text[k] == 'n' ? '\n' : text[k];
                } else {
                    out += text[k];
                }
                ++k;
            }
            if (k >= text.size()) fail("unterminated string", static_cast<int>(k + 1));
            ++k;
            return out;
        };
        while (i < text.size()) {
            if (text[i] == ' ' || text[i] == '\t' || text[i] == '\r') {
                ++i;
                continue;
            }
            Word w;
            w.column = static_cast<int>(i + 1);
            if (text[i] == '"') {
                w.quoted = true;
                w.text = read_quoted(i);
            } else {
                std::size_t start = i;
                while (i < text.size() && text[i] != ' ' && text[i] != '\t' && text[i] != '=' && text[i] != '"') ++i;
                w.text = std::string(text.substr(start, i - start));
                if (i < text.size() && text[i] == '=') {
                    w.pair = true;
                    ++i;
                    if (i < text.size() && text[i] == '"') {
                        w.value = read_quoted(i);
                    } else {
                        std::size_t vs = i;
                        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
                        w.value = std::string(text.substr(vs, i - vs));
                    }
                } else if (i < text.size() && text[i] == '"') {
                    fail("unexpected quote", static_cast<int>(i + 1));
                }
            }
            words.push_back(std::move(w));
        }
        return words;
    }

private:
    const std::string& file_;
    int line_;
};

bool valid_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::string serialize_dsl(const ArgumentModel& input, const Vocabulary& vocabulary) {
    ArgumentModel arg = input;
    arg.normalize();
    std::ostringstream out;
    out << "argument " << quote(arg.name) << " version " << arg.version << "\n";
    if (!arg.nodes.empty()) out << "\n";
    for (const auto& n : arg.nodes)
        out << node_kind_name(n.kind) << " " << n.id << " v" << n.version << " " << quote(n.description) << "\n";
    if (!arg.links.empty()) out << "\n";
    for (const auto& l : arg.links)
        out << (l.kind == LinkKind::SupportedBy ? "supported-by " : "in-context-of ") << l.source << " -> "
            << l.target << "\n";
    if (!arg.annotations.empty()) out << "\n";
    for (const auto& a : arg.annotations) write_annotation(out, a, vocabulary);
    if (!arg.traces.empty()) out << "\n";
    for (const auto& t : arg.traces) write_trace(out, t);
    if (!arg.orphaned_annotations.empty() || !arg.orphaned_traces.empty()) {
        out << "\n# orphaned\n";
        for (const auto& a : arg.orphaned_annotations) write_annotation(out, a, vocabulary);
        for (const auto& t : arg.orphaned_traces) write_trace(out, t);
    }
    return out.str();
}

ArgumentModel parse_dsl(std::string_view text, const std::string& file, const Vocabulary& vocabulary) {
    ArgumentModel arg;
    bool header = false, orphaned = false;
    std::vector<std::pair<int, std::string>> references;  // line, node id that must exist
    std::vector<Diagnostic> errors;

    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        LineReader reader(file, line);
        auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (raw[first] == '#') {
            std::string_view rest(raw);
            rest.remove_prefix(first + 1);
            while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
            while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\r')) rest.remove_suffix(1);
            if (rest == "orphaned") orphaned = true;
            continue;
        }
        try {
            auto w = reader.split(raw);
            const std::string& head = w[0].text;
            auto need = [&](std::size_t n, const char* form) {
                if (w.size() < n) reader.fail(std::string("expected ") + form);
            };
            auto id_at = [&](std::size_t k) {
                if (w[k].quoted || w[k].pair || !valid_id(w[k].text)) reader.fail("invalid node id", w[k].column);
                return w[k].text;
            };
            if (head == "argument") {
                need(4, "argument \"<name>\" version <n>");
                if (header) reader.fail("duplicate argument header");
                if (!w[1].quoted || w[2].text != "version") reader.fail("expected argument \"<name>\" version <n>");
                auto v = parse_int(w[3].text);
                if (!v || *v < 1) reader.fail("invalid argument version", w[3].column);
                arg.name = w[1].text;
                arg.version = *v;
                header = true;
                continue;
            }
            if (!header) reader.fail("expected 'argument' header before '" + head + "'");
            if (head == "goal" || head == "strategy" || head == "solution" || head == "context") {
                if (orphaned) reader.fail("node declarations are not allowed in the orphaned section");
                need(4, "<kind> <id> v<version> \"<description>\"");
                GsnNode n;
                n.kind = head == "goal" ? NodeKind::Goal
                         : head == "strategy" ? NodeKind::Strategy
                         : head == "solution" ? NodeKind::Solution
                                              : NodeKind::Context;
                n.id = id_at(1);
                auto v = w[2].text.size() > 1 && w[2].text[0] == 'v' ? parse_int(w[2].text.substr(1)) : std::nullopt;
                if (!v || *v < 1) reader.fail("expected version 'v<n>'", w[2].column);
                n.version = *v;
                if (!w[3].quoted) reader.fail("expected quoted description", w[3].column);
                n.description = w[3].text;
                if (w.size() > 4) reader.fail("unexpected text after description", w[4].column);
                if (arg.find(n.id)) reader.fail("duplicate node id '" + n.id + "'", w[1].column);
                arg.nodes.push_back(std::move(n));
            } else if (head == "supported-by" || head == "in-context-of") {
                if (orphaned) reader.fail("links are not allowed in the orphaned section");
                need(4, "<link> <source> -> <target>");
                if (w[2].text != "->" || w.size() > 4) reader.fail("expected '<source> -> <target>'");
                GsnLink l{head == "supported-by" ? LinkKind::SupportedBy : LinkKind::InContextOf, id_at(1), id_at(3)};
                references.push_back({line, l.source});
                references.push_back({line, l.target});
                arg.links.push_back(std::move(l));
            } else if (head == "annotate") {
                need(4, "annotate <id> placeholder|stereotype ...");
                Annotation a;
                a.node = id_at(1);
                if (w[2].text == "placeholder") {
                    if (!w[3].pair) reader.fail("expected key=\"value\"", w[3].column);
                    a.kind = AnnotationKind::Placeholder;
                    a.name = w[3].text;
                    a.value = w[3].value;
                } else if (w[2].text == "stereotype") {
                    const auto& s = w[3].text;
                    if (w[3].pair || s.size() < 5 || !s.starts_with("<<") || !s.ends_with(">>"))
                        reader.fail("expected <<Name>>", w[3].column);
                    a.kind = AnnotationKind::Stereotype;
                    a.name = s.substr(2, s.size() - 4);
                } else {
                    reader.fail("expected 'placeholder' or 'stereotype'", w[2].column);
                }
                a.phases = vocabulary.default_phases(a.kind, a.name);
                for (std::size_t k = 4; k < w.size(); ++k) {
                    if (w[k].pair && w[k].text == "phase") {
                        auto p = parse_phases(w[k].value);
                        if (!p) reader.fail("unknown phase list '" + w[k].value + "'", w[k].column);
                        a.phases = *p;
                    } else if (!w[k].pair && w[k].text == "auto") {
                        a.origin = Origin::Generated;
                    } else {
                        reader.fail("unexpected '" + w[k].text + "'", w[k].column);
                    }
                }
                if (orphaned) {
                    arg.orphaned_annotations.push_back(std::move(a));
                } else {
                    references.push_back({line, a.node});
                    arg.annotations.push_back(std::move(a));
                }
            } else if (head == "trace") {
                need(4, "trace <id> <artifact-kind> \"<ref>\"");
                TraceLink t;
                t.node = id_at(1);
                auto kind = parse_artifact_kind(w[2].text);
                if (!kind) reader.fail("unknown artifact kind '" + w[2].text + "'", w[2].column);
                t.kind = *kind;
                if (!w[3].quoted) reader.fail("expected quoted artifact reference", w[3].column);
                t.ref = w[3].text;
                for (std::size_t k = 4; k < w.size(); ++k) {
                    if (!w[k].pair) reader.fail("unexpected '" + w[k].text + "'", w[k].column);
                    if (w[k].text == "fp") t.fingerprint = w[k].value;
                    else if (w[k].text == "value") t.value = w[k].value;
                    else if (w[k].text == "verdict" && (w[k].value == "true" || w[k].value == "false"))
                        t.verdict = w[k].value == "true";
                    else reader.fail("unexpected '" + w[k].text + "'", w[k].column);
                }
                if (orphaned) {
                    arg.orphaned_traces.push_back(std::move(t));
                } else {
                    references.push_back({line, t.node});
                    arg.traces.push_back(std::move(t));
                }
            } else {
                reader.fail("unknown statement '" + head + "'", w[0].column);
            }
        } catch (const DiagnosticError& e) {
            errors.insert(errors.end(), e.diagnostics().begin(), e.diagnostics().end());
        }
    }
    if (!header && errors.empty()) errors.push_back({Severity::Error, "expected 'argument' header", {file, 1, 1, 0}});
    for (const auto& [at, id] : references)
        if (!arg.find(id)) errors.push_back({Severity::Error, "reference to unknown node '" + id + "'", {file, at, 1, 0}});
    if (!errors.empty()) throw DiagnosticError(std::move(errors));
    arg.normalize();
    return arg;
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

namespace {

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

const char* dot_shape(NodeKind k) {
    switch (k) {
        case NodeKind::Goal: return "shape=box";
        case NodeKind::Strategy: return "shape=parallelogram";
        case NodeKind::Solution: return "shape=circle";
        case NodeKind::Context: return "shape=box, style=rounded";
    }
    return "shape=box";
}

}  // namespace

std::string export_dot(const ArgumentModel& input) {
    ArgumentModel arg = input;
    arg.normalize();
    std::ostringstream out;
    out << "digraph \"" << dot_escape(arg.name) << "\" {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n";
    for (const auto& n : arg.nodes) {
        std::string label;
        for (const auto& a : arg.annotations)
            if (a.node == n.id && a.kind == AnnotationKind::Stereotype) label += "«" + a.name + "» ";
        if (!label.empty()) label.back() = '\n';
        label += n.id + " (v" + std::to_string(n.version) + ")\n" + n.description;
        out << "  \"" << dot_escape(n.id) << "\" [" << dot_shape(n.kind) << ", label=\"" << dot_escape(label)
            << "\"];\n";
    }
    for (const auto& l : arg.links) {
        out << "  \"" << dot_escape(l.source) << "\" -> \"" << dot_escape(l.target) << "\"";
        if (l.kind == LinkKind::InContextOf) out << " [arrowhead=empty, style=dashed]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Merge
// ---------------------------------------------------------------------------

namespace {

// Appends `item` to `target` unless `target` already holds as many copies as
// the candidates seen so far; repeated merges therefore add nothing.
template <class T>
bool place(const T& item, const std::vector<T>& candidates, std::size_t position, std::vector<T>& target) {
    auto wanted = std::count(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(position) + 1, item);
    if (std::count(target.begin(), target.end(), item) >= wanted) return false;
    target.push_back(item);
    return true;
}

}  // namespace

ArgumentModel merge_annotations(const ArgumentModel& regenerated, const ArgumentModel& previous,
                                MergeReport* report) {
    ArgumentModel out = regenerated;
    MergeReport local;

    std::vector<Annotation> annotations;
    std::vector<bool> was_orphan;
    for (const auto& a : previous.annotations)
        if (a.origin == Origin::Manual) {
            annotations.push_back(a);
            was_orphan.push_back(false);
        }
    for (const auto& a : previous.orphaned_annotations) {
        annotations.push_back(a);
        was_orphan.push_back(true);
    }
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const auto& a = annotations[i];
        if (out.find(a.node)) {
            if (place(a, annotations, i, out.annotations) && was_orphan[i]) ++local.reattached;
        } else if (place(a, annotations, i, out.orphaned_annotations) && !was_orphan[i]) {
            local.orphaned_annotations.push_back(a);
        }
    }

    std::vector<TraceLink> traces;
    std::vector<bool> trace_was_orphan;
    for (const auto& t : previous.traces)
        if (t.kind == ArtifactKind::ExternalEvidence) {
            traces.push_back(t);
            trace_was_orphan.push_back(false);
        }
    for (const auto& t : previous.orphaned_traces) {
        traces.push_back(t);
        trace_was_orphan.push_back(true);
    }
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        if (out.find(t.node)) {
            if (place(t, traces, i, out.traces) && trace_was_orphan[i]) ++local.reattached;
        } else if (place(t, traces, i, out.orphaned_traces) && !trace_was_orphan[i]) {
            local.orphaned_traces.push_back(t);
        }
    }
    if (report) *report = std::move(local);
    return out;
}

}  // namespace cassure::gsn
