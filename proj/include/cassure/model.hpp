#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cassure/expr.hpp"

namespace cassure {

// ---------------------------------------------------------------------------
// Model abstract syntax
// ---------------------------------------------------------------------------

enum class ConstantKind { Int, Real };

struct ConstantDecl {
    std::string name;
    ConstantKind kind = ConstantKind::Real;
    ExprPtr definition;
    SourceSpan span;
};

struct FormulaDecl {
    std::string name;
    ExprPtr definition;
    SourceSpan span;
};

struct VarDecl {
    std::string name;
    bool is_bool = false;
    ExprPtr lower;  // integer ranges only
    ExprPtr upper;
    ExprPtr init;   // may be null: defaults to the lower bound (or false)
    SourceSpan span;
};

struct Assignment {
    std::string variable;
    ExprPtr value;
    SourceSpan span;
};

struct Update {
    ExprPtr probability;  // null means probability 1
    std::vector<Assignment> assignments;
};

struct Command {
    std::string action;  // empty for unlabeled commands
    ExprPtr guard;
    std::vector<Update> updates;
    SourceSpan span;
};

struct ModuleDecl {
    std::string name;
    std::vector<VarDecl> variables;
    std::vector<Command> commands;
    SourceSpan span;
};

struct RewardItem {
    ExprPtr guard;
    ExprPtr reward;
    SourceSpan span;
};

struct RewardStructureDecl {
    std::string name;
    std::vector<RewardItem> items;
    SourceSpan span;
};

struct ModelAst {
    std::string source_file;
    std::vector<ConstantDecl> constants;
    std::vector<FormulaDecl> formulas;
    std::vector<ModuleDecl> modules;
    std::vector<RewardStructureDecl> rewards;

    std::size_t variable_count() const;
    const RewardStructureDecl* find_rewards(const std::string& name) const;
};

/// Structural equality ignoring source spans.
bool structurally_equal(const ModelAst& a, const ModelAst& b);

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

enum class QueryKind { ProbabilityQuery, ProbabilityBound, RewardQuery };
enum class BoundOp { GreaterEqual, LessEqual };
enum class PathKind { Eventually, BoundedEventually, Globally, Until };

struct PathFormula {
    PathKind kind = PathKind::Eventually;
    ExprPtr left;   // until: constraint; globally: invariant
    ExprPtr right;  // eventually/bounded/until: target
    std::int64_t step_bound = 0;
};

struct PropertySpec {
    std::string name;
    bool synthetic_name = false;  // `prop<k>` assigned to an unnamed property
    QueryKind query = QueryKind::ProbabilityQuery;
    BoundOp bound_op = BoundOp::GreaterEqual;
    double bound = 0.0;
    std::string reward_structure;
    PathFormula path;
    SourceSpan span;
};

bool structurally_equal(const PropertySpec& a, const PropertySpec& b);

// ---------------------------------------------------------------------------
// Binding and checking
// ---------------------------------------------------------------------------

struct VariableInfo {
    std::string name;
    std::string module;
    bool is_bool = false;
    std::int64_t lower = 0;
    std::int64_t upper = 1;
    std::int64_t init = 0;
};

/// A resolved command: variable references point at state slots, constants
/// are folded into literals and formulas are inlined.
struct BoundCommand {
    std::size_t module = 0;
    std::string action;
    ExprPtr guard;
    struct BoundUpdate {
        ExprPtr probability;
        std::vector<std::pair<int, ExprPtr>> assignments;  // slot, value
    };
    std::vector<BoundUpdate> updates;
    SourceSpan span;
};

struct BoundRewardStructure {
    std::string name;
    std::vector<std::pair<ExprPtr, ExprPtr>> items;  // guard, reward
};

/// A type-checked model with every constant evaluated. Immutable once built.
class BoundModel {
public:
    const ModelAst& ast() const noexcept { return *ast_; }
    const std::vector<VariableInfo>& variables() const noexcept { return variables_; }
    const std::map<std::string, Value>& constants() const noexcept { return constants_; }
    const std::vector<BoundCommand>& commands() const noexcept { return commands_; }
    const std::vector<BoundRewardStructure>& rewards() const noexcept { return rewards_; }
    const std::vector<std::string>& module_names() const noexcept { return module_names_; }

    std::optional<int> slot_of(const std::string& variable) const;
    std::vector<std::int64_t> initial_state() const;

    /// Resolves names in a free-standing expression (e.g. a property predicate)
    /// against this model. Throws DiagnosticError on unknown names or cycles.
    ExprPtr resolve(const ExprPtr& e) const;

    /// Type of an expression after resolution. Throws DiagnosticError on ill-typed input.
    ValueType type_of_expr(const ExprPtr& e) const;

private:
    friend BoundModel bind_constants(const ModelAst&, const std::map<std::string, double>&);
    friend std::shared_ptr<const BoundModel> bind_shared(const ModelAst&, const std::map<std::string, double>&);

    std::shared_ptr<const ModelAst> ast_;
    std::vector<VariableInfo> variables_;
    std::map<std::string, Value> constants_;
    std::map<std::string, const FormulaDecl*> formulas_;
    std::vector<std::string> module_names_;
    std::vector<BoundCommand> commands_;
    std::vector<BoundRewardStructure> rewards_;
};

/// Full static check: name resolution, typing, acyclic formulas, assignment
/// targets local to their module. Throws DiagnosticError listing every problem.
void type_check(const ModelAst& model);

/// Applies overrides, evaluates derived constants and resolves the model.
/// Runs type_check first. Throws DiagnosticError on unknown constants, kind
/// mismatches and probability-valued constants outside [0,1].
BoundModel bind_constants(const ModelAst& model, const std::map<std::string, double>& overrides = {});
std::shared_ptr<const BoundModel> bind_shared(const ModelAst& model,
                                              const std::map<std::string, double>& overrides = {});

/// Evaluates `e` in a named valuation. Formulas and constants expand by substitution.
Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& valuation, const BoundModel& env);

/// Renders the canonical text of a property (used for fingerprints and GSN contexts).
std::string render_property(const PropertySpec& p, bool with_name = true);
std::string render_path(const PathFormula& path);

}  // namespace cassure
