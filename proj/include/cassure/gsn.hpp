#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cassure/diagnostics.hpp"

namespace cassure::gsn {

enum class NodeKind { Goal, Strategy, Solution, Context };
const char* node_kind_name(NodeKind k) noexcept;

struct GsnNode {
    std::string id;
    NodeKind kind = NodeKind::Goal;
    std::string description;
    int version = 1;

    bool operator==(const GsnNode&) const = default;
};

enum class LinkKind { SupportedBy, InContextOf };

struct GsnLink {
    LinkKind kind = LinkKind::SupportedBy;
    std::string source;
    std::string target;

    auto operator<=>(const GsnLink&) const = default;
};

// Phase tags as a bit set.
enum Phase : unsigned { Design = 1, Runtime = 2, Evolution = 4, AllPhases = 7 };
std::string phase_text(unsigned phases);
/// Parses `design,runtime` style lists; returns nullopt on unknown names.
std::optional<unsigned> parse_phases(std::string_view text);

enum class AnnotationKind { Placeholder, Stereotype };

/// Generated annotations are owned by the transformer and rebuilt on every
/// regeneration; manual ones (including those added by lifecycle operations) are carried over.
enum class Origin { Manual, Generated };

struct Annotation {
    std::string node;
    AnnotationKind kind = AnnotationKind::Placeholder;
    std::string name;   // placeholder key or stereotype name
    std::string value;  // placeholders only
    unsigned phases = 0;
    Origin origin = Origin::Manual;

    bool operator==(const Annotation&) const = default;
};

enum class ArtifactKind { ModelFile, Property, VerificationResult, ExternalEvidence };
const char* artifact_kind_name(ArtifactKind k) noexcept;
std::optional<ArtifactKind> parse_artifact_kind(std::string_view text);

struct TraceLink {
    std::string node;
    ArtifactKind kind = ArtifactKind::Property;
    std::string ref;
    std::string fingerprint;           // empty for external evidence
    std::optional<std::string> value;  // exact result value text, verification results only
    std::optional<bool> verdict;

    bool operator==(const TraceLink&) const = default;
};

struct ArgumentModel {
    std::string name;
    int version = 1;
    std::vector<GsnNode> nodes;
    std::vector<GsnLink> links;
    std::vector<Annotation> annotations;
    std::vector<TraceLink> traces;
    // Quarantine: annotations and evidence links whose node disappeared.
    std::vector<Annotation> orphaned_annotations;
    std::vector<TraceLink> orphaned_traces;

    bool operator==(const ArgumentModel&) const = default;

    const GsnNode* find(std::string_view id) const;
    GsnNode* find(std::string_view id);

    bool has_stereotype(std::string_view node, std::string_view name) const;
    /// Last value recorded for a placeholder key on a node.
    std::optional<std::string> placeholder(std::string_view node, std::string_view key) const;
    std::vector<const TraceLink*> traces_of(std::string_view node, std::optional<ArtifactKind> kind = {}) const;
    std::vector<std::string> children(std::string_view node, LinkKind kind = LinkKind::SupportedBy) const;

    /// Adds a stereotype unless the node already carries it.
    void add_stereotype(const std::string& node, const std::string& name, Origin origin = Origin::Manual);
    void remove_stereotype(std::string_view node, std::string_view name);
    void add_placeholder(const std::string& node, const std::string& key, const std::string& value,
                         Origin origin = Origin::Manual);
    /// Replaces every placeholder with this key on the node by a single one.
    void set_placeholder(const std::string& node, const std::string& key, const std::string& value,
                         Origin origin = Origin::Manual);

    /// Sorts nodes by id and links lexicographically; annotation and trace order is kept.
    void normalize();
};

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct VocabularyEntry {
    std::string name;
    AnnotationKind kind;
    unsigned phases;
};

class Vocabulary {
public:
    /// The placeholder/stereotype table plus the built-in extensions
    /// `runtime_log` and `safety_critical`.
    static const Vocabulary& standard();
    /// Only the base table, no extensions.
    static Vocabulary base();

    void extend(VocabularyEntry entry);
    const VocabularyEntry* find(AnnotationKind kind, std::string_view name) const;
    unsigned default_phases(AnnotationKind kind, std::string_view name) const;

private:
    std::vector<VocabularyEntry> entries_;
};

// ---------------------------------------------------------------------------
// Validation, serialization, export
// ---------------------------------------------------------------------------

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string node;
    std::string message;

    std::string to_string() const;
};

std::vector<ValidationIssue> validate_argument(const ArgumentModel& arg,
                                               const Vocabulary& vocabulary = Vocabulary::standard());
bool has_errors(const std::vector<ValidationIssue>& issues);

/// Canonical DSL text; equal arguments give identical bytes.
std::string serialize_dsl(const ArgumentModel& arg, const Vocabulary& vocabulary = Vocabulary::standard());
/// Throws DiagnosticError with line numbers on syntax errors or links to unknown nodes.
ArgumentModel parse_dsl(std::string_view text, const std::string& file = "<gsn>",
                        const Vocabulary& vocabulary = Vocabulary::standard());

std::string export_dot(const ArgumentModel& arg);

struct MergeReport {
    std::vector<Annotation> orphaned_annotations;  // newly quarantined by this merge
    std::vector<TraceLink> orphaned_traces;
    std::size_t reattached = 0;
};

/// Carries manual annotations, external-evidence links and the quarantine of
/// `previous` over to `regenerated`. Nothing manual is dropped: items whose
/// node no longer exists are quarantined, and quarantined items whose node
/// reappears are re-attached.
ArgumentModel merge_annotations(const ArgumentModel& regenerated, const ArgumentModel& previous,
                                MergeReport* report = nullptr);

}  // namespace cassure::gsn
