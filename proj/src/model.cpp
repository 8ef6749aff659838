#include "cassure/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>

namespace cassure {

std::size_t ModelAst::variable_count() const {
    std::size_t n = 0;
    for (const auto& m : modules) n += m.variables.size();
    return n;
}

const RewardStructureDecl* ModelAst::find_rewards(const std::string& name) const {
    for (const auto& r : rewards)
        if (r.name == name) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

namespace {

template <class T, class Eq>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), eq);
}

bool equal_updates(const Update& a, const Update& b) {
    return structurally_equal(a.probability, b.probability) &&
           all_equal(a.assignments, b.assignments, [](const Assignment& x, const Assignment& y) {
               return x.variable == y.variable && structurally_equal(x.value, y.value);
           });
}

bool equal_commands(const Command& a, const Command& b) {
    return a.action == b.action && structurally_equal(a.guard, b.guard) &&
           all_equal(a.updates, b.updates, equal_updates);
}

bool equal_vars(const VarDecl& a, const VarDecl& b) {
    return a.name == b.name && a.is_bool == b.is_bool && structurally_equal(a.lower, b.lower) &&
           structurally_equal(a.upper, b.upper) && structurally_equal(a.init, b.init);
}

}  // namespace

bool structurally_equal(const ModelAst& a, const ModelAst& b) {
    return all_equal(a.constants, b.constants,
                     [](const ConstantDecl& x, const ConstantDecl& y) {
                         return x.name == y.name && x.kind == y.kind &&
                                structurally_equal(x.definition, y.definition);
                     }) &&
           all_equal(a.formulas, b.formulas,
                     [](const FormulaDecl& x, const FormulaDecl& y) {
                         return x.name == y.name && structurally_equal(x.definition, y.definition);
                     }) &&
           all_equal(a.modules, b.modules,
                     [](const ModuleDecl& x, const ModuleDecl& y) {
                         return x.name == y.name && all_equal(x.variables, y.variables, equal_vars) &&
                                all_equal(x.commands, y.commands, equal_commands);
                     }) &&
           all_equal(a.rewards, b.rewards, [](const RewardStructureDecl& x, const RewardStructureDecl& y) {
               return x.name == y.name &&
                      all_equal(x.items, y.items, [](const RewardItem& p, const RewardItem& q) {
                          return structurally_equal(p.guard, q.guard) && structurally_equal(p.reward, q.reward);
                      });
           });
}

bool structurally_equal(const PropertySpec& a, const PropertySpec& b) {
    return a.name == b.name && a.query == b.query && a.bound_op == b.bound_op && a.bound == b.bound &&
           a.reward_structure == b.reward_structure && a.path.kind == b.path.kind &&
           a.path.step_bound == b.path.step_bound && structurally_equal(a.path.left, b.path.left) &&
           structurally_equal(a.path.right, b.path.right);
}

// ---------------------------------------------------------------------------
// Typing
// ---------------------------------------------------------------------------

namespace {

bool numeric(ValueType t) { return t != ValueType::Bool; }

/// Infers expression types, reporting every error into `errors`. Identifier
/// lookup is delegated so the same rules serve raw ASTs and resolved trees.
class TypeInferer {
public:
    using Lookup = std::function<std::optional<ValueType>(const Expr&)>;

    TypeInferer(Lookup lookup, std::vector<Diagnostic>& errors) : lookup_(std::move(lookup)), errors_(errors) {}

    std::optional<ValueType> infer(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Literal:
                return type_of(e.literal);
            case ExprKind::Variable:
                return e.slot_type;
            case ExprKind::Identifier:
                return lookup_(e);
            case ExprKind::Unary: {
                auto t = infer(*e.lhs);
                if (!t) return std::nullopt;
                if (e.unary_op == UnaryOp::Not) {
                    if (*t != ValueType::Bool) return fail(e, "operand of '!' must be boolean");
                    return ValueType::Bool;
                }
                if (!numeric(*t)) return fail(e, "operand of unary '-' must be numeric");
                return t;
            }
            case ExprKind::Binary: {
                auto l = infer(*e.lhs);
                auto r = infer(*e.rhs);
                if (!l || !r) return std::nullopt;
                BinaryOp op = e.binary_op;
                std::string sym = op_symbol(op);
                if (is_logical(op)) {
                    if (*l != ValueType::Bool || *r != ValueType::Bool)
                        return fail(e, "operands of '" + sym + "' must be boolean");
                    return ValueType::Bool;
                }
                if (op == BinaryOp::Eq || op == BinaryOp::Ne) {
                    if (numeric(*l) != numeric(*r))
                        return fail(e, "operands of '" + sym + "' must both be numeric or both boolean");
                    return ValueType::Bool;
                }
                if (!numeric(*l) || !numeric(*r)) return fail(e, "operands of '" + sym + "' must be numeric");
                if (is_comparison(op)) return ValueType::Bool;
                if (op == BinaryOp::Div) return ValueType::Real;
                return (*l == ValueType::Int && *r == ValueType::Int) ? ValueType::Int : ValueType::Real;
            }
        }
        return std::nullopt;
    }

    std::optional<ValueType> fail(const Expr& e, const std::string& message) {
        errors_.push_back({Severity::Error, "type error: " + message, e.span});
        return std::nullopt;
    }

private:
    Lookup lookup_;
    std::vector<Diagnostic>& errors_;
};

void collect_identifiers(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::Identifier) out.insert(e->name);
    collect_identifiers(e->lhs, out);
    collect_identifiers(e->rhs, out);
}

struct Symbols {
    std::map<std::string, const ConstantDecl*> constants;
    std::map<std::string, const FormulaDecl*> formulas;
    std::map<std::string, std::pair<std::size_t, const VarDecl*>> variables;  // module index, decl
};

/// Static analysis shared by type_check and bind_constants.
class Checker {
public:
    explicit Checker(const ModelAst& model) : model_(model) {}

    std::vector<Diagnostic> run() {
        declare();
        check_constants();
        check_formulas();
        check_modules();
        check_rewards();
        return std::move(errors_);
    }

    const Symbols& symbols() const { return symbols_; }

private:
    void error(std::string message, const SourceSpan& span) {
        errors_.push_back({Severity::Error, std::move(message), span});
    }

    void declare() {
        std::set<std::string> names;
        auto claim = [&](const std::string& name, const SourceSpan& span) {
            if (!names.insert(name).second) error("duplicate identifier '" + name + "'", span);
        };
        for (const auto& c : model_.constants) {
            claim(c.name, c.span);
            symbols_.constants.emplace(c.name, &c);
        }
        for (const auto& f : model_.formulas) {
            claim(f.name, f.span);
            symbols_.formulas.emplace(f.name, &f);
        }
        for (std::size_t m = 0; m < model_.modules.size(); ++m)
            for (const auto& v : model_.modules[m].variables) {
                claim(v.name, v.span);
                symbols_.variables.emplace(v.name, std::pair{m, &v});
            }
    }

    // Constant expressions may only mention constants; cycles are errors.
    std::optional<ValueType> constant_type(const std::string& name, const SourceSpan& use) {
        auto it = symbols_.constants.find(name);
        if (it == symbols_.constants.end()) return std::nullopt;
        if (auto done = constant_types_.find(name); done != constant_types_.end()) return done->second;
        if (constants_in_progress_.count(name)) {
            error("cyclic constant definition involving '" + name + "'", use);
            return std::nullopt;
        }
        constants_in_progress_.insert(name);
        const ConstantDecl& decl = *it->second;
        auto t = const_expr_type(*decl.definition);
        constants_in_progress_.erase(name);
        ValueType declared = decl.kind == ConstantKind::Int ? ValueType::Int : ValueType::Real;
        if (t && (*t == ValueType::Bool || (declared == ValueType::Int && *t != ValueType::Int)))
            error("type error: constant '" + name + "' declared " + type_name(declared) + " but defined by " +
                      type_name(*t) + " expression",
                  decl.span);
        constant_types_[name] = declared;
        return declared;
    }

    std::optional<ValueType> const_expr_type(const Expr& e) {
        TypeInferer inferer(
            [this](const Expr& id) -> std::optional<ValueType> {
                if (symbols_.constants.count(id.name)) return constant_type(id.name, id.span);
                error("'" + id.name + "' is not a constant (constant expressions may only reference constants)",
                      id.span);
                return std::nullopt;
            },
            errors_);
        return inferer.infer(e);
    }

    std::optional<ValueType> formula_type(const std::string& name, const SourceSpan& use) {
        if (auto done = formula_types_.find(name); done != formula_types_.end()) return done->second;
        if (formulas_in_progress_.count(name)) {
            error("cyclic formula definition: '" + name + "' refers to itself", use);
            return std::nullopt;
        }
        formulas_in_progress_.insert(name);
        auto t = expr_type(*symbols_.formulas.at(name)->definition);
        formulas_in_progress_.erase(name);
        formula_types_[name] = t;
        return t;
    }

    std::optional<ValueType> expr_type(const Expr& e) {
        TypeInferer inferer(
            [this](const Expr& id) -> std::optional<ValueType> {
                if (symbols_.constants.count(id.name)) return constant_type(id.name, id.span);
                if (symbols_.formulas.count(id.name)) return formula_type(id.name, id.span);
                if (auto v = symbols_.variables.find(id.name); v != symbols_.variables.end())
                    return v->second.second->is_bool ? ValueType::Bool : ValueType::Int;
                error("unknown identifier '" + id.name + "'", id.span);
                return std::nullopt;
            },
            errors_);
        return inferer.infer(e);
    }

    void expect(const ExprPtr& e, bool want_bool, const std::string& what, const SourceSpan& where) {
        std::size_t before = errors_.size();
        auto t = expr_type(*e);
        if (errors_.size() != before) {
            // Attribute the failure to the enclosing construct as well.
            errors_.back().message += " (in " + what + ")";
            if (errors_.back().span.line == 0) errors_.back().span = where;
            return;
        }
        if (t && want_bool && *t != ValueType::Bool) error("type error: " + what + " must be boolean", where);
        if (t && !want_bool && !numeric(*t)) error("type error: " + what + " must be numeric", where);
    }

    void check_constants() {
        for (const auto& c : model_.constants) constant_type(c.name, c.span);
    }

    void check_formulas() {
        for (const auto& f : model_.formulas) formula_type(f.name, f.span);
    }

    void check_modules() {
        for (std::size_t m = 0; m < model_.modules.size(); ++m) {
            const auto& mod = model_.modules[m];
            for (const auto& v : mod.variables) {
                if (v.is_bool) {
                    if (v.init) {
                        auto t = const_expr_type(*v.init);
                        if (t && *t != ValueType::Bool)
                            error("type error: initial value of '" + v.name + "' must be boolean", v.span);
                    }
                    continue;
                }
                for (const auto* bound : {&v.lower, &v.upper, &v.init}) {
                    if (!*bound) continue;
                    auto t = const_expr_type(**bound);
                    if (t && *t != ValueType::Int)
                        error("type error: range and initial value of '" + v.name + "' must be integer", v.span);
                }
            }
            for (const auto& cmd : mod.commands) {
                expect(cmd.guard, true, "guard", cmd.span);
                for (const auto& upd : cmd.updates) {
                    if (upd.probability) expect(upd.probability, false, "update probability", cmd.span);
                    for (const auto& a : upd.assignments) {
                        auto var = symbols_.variables.find(a.variable);
                        if (var == symbols_.variables.end()) {
                            error("assignment to undeclared variable '" + a.variable + "'", a.span);
                            continue;
                        }
                        if (var->second.first != m) {
                            error("assignment target '" + a.variable + "' is not a local variable of module '" +
                                      mod.name + "'",
                                  a.span);
                            continue;
                        }
                        std::size_t before = errors_.size();
                        auto t = expr_type(*a.value);
                        if (errors_.size() != before || !t) continue;
                        bool want_bool = var->second.second->is_bool;
                        if (want_bool && *t != ValueType::Bool)
                            error("type error: boolean variable '" + a.variable + "' assigned a number", a.span);
                        else if (!want_bool && *t != ValueType::Int)
                            error("type error: integer variable '" + a.variable + "' assigned a " +
                                      type_name(*t) + " value",
                                  a.span);
                    }
                }
            }
        }
    }

    void check_rewards() {
        for (const auto& r : model_.rewards)
            for (const auto& item : r.items) {
                expect(item.guard, true, "reward guard", item.span);
                expect(item.reward, false, "reward value", item.span);
            }
    }

    const ModelAst& model_;
    Symbols symbols_;
    std::vector<Diagnostic> errors_;
    std::map<std::string, ValueType> constant_types_;
    std::set<std::string> constants_in_progress_;
    std::map<std::string, std::optional<ValueType>> formula_types_;
    std::set<std::string> formulas_in_progress_;
};

/// Folds literal-only subtrees. Division by zero is left for runtime.
ExprPtr fold(const ExprPtr& e) {
    if (e->kind == ExprKind::Unary && e->lhs->kind == ExprKind::Literal) {
        try {
            return Expr::make_literal(evaluate(*e, {}), e->span);
        } catch (const EvalError&) {
        }
    }
    if (e->kind == ExprKind::Binary && e->lhs->kind == ExprKind::Literal && e->rhs->kind == ExprKind::Literal) {
        try {
            return Expr::make_literal(evaluate(*e, {}), e->span);
        } catch (const EvalError&) {
        }
    }
    return e;
}

}  // namespace

void type_check(const ModelAst& model) {
    auto errors = Checker(model).run();
    if (!errors.empty()) throw DiagnosticError(std::move(errors));
}

// ---------------------------------------------------------------------------
// Binding
// ---------------------------------------------------------------------------

std::optional<int> BoundModel::slot_of(const std::string& variable) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == variable) return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::int64_t> BoundModel::initial_state() const {
    std::vector<std::int64_t> state;
    state.reserve(variables_.size());
    for (const auto& v : variables_) state.push_back(v.init);
    return state;
}

ExprPtr BoundModel::resolve(const ExprPtr& e) const {
    std::set<std::string> expanding;
    std::function<ExprPtr(const ExprPtr&)> go = [&](const ExprPtr& x) -> ExprPtr {
        switch (x->kind) {
            case ExprKind::Literal:
            case ExprKind::Variable:
                return x;
            case ExprKind::Identifier: {
                if (auto c = constants_.find(x->name); c != constants_.end())
                    return Expr::make_literal(c->second, x->span);
                if (auto slot = slot_of(x->name))
                    return Expr::make_variable(x->name, *slot,
                                               variables_[*slot].is_bool ? ValueType::Bool : ValueType::Int, x->span);
                if (auto f = formulas_.find(x->name); f != formulas_.end()) {
                    if (!expanding.insert(x->name).second)
                        throw DiagnosticError("cyclic formula definition: '" + x->name + "' refers to itself",
                                              x->span);
                    auto body = go(f->second->definition);
                    expanding.erase(x->name);
                    return body;
                }
                throw DiagnosticError("unknown identifier '" + x->name + "'", x->span);
            }
            case ExprKind::Unary:
                return fold(Expr::make_unary(x->unary_op, go(x->lhs), x->span));
            case ExprKind::Binary:
                return fold(Expr::make_binary(x->binary_op, go(x->lhs), go(x->rhs), x->span));
        }
        return x;
    };
    return go(e);
}

ValueType BoundModel::type_of_expr(const ExprPtr& e) const {
    std::vector<Diagnostic> errors;
    TypeInferer inferer(
        [&](const Expr& id) -> std::optional<ValueType> {
            errors.push_back({Severity::Error, "unknown identifier '" + id.name + "'", id.span});
            return std::nullopt;
        },
        errors);
    auto t = inferer.infer(*resolve(e));
    if (!errors.empty() || !t) throw DiagnosticError(std::move(errors));
    return *t;
}

namespace {

void collect_probability_constants(const ModelAst& model, std::set<std::string>& out) {
    for (const auto& m : model.modules)
        for (const auto& c : m.commands)
            for (const auto& u : c.updates) collect_identifiers(u.probability, out);
}

}  // namespace

BoundModel bind_constants(const ModelAst& model, const std::map<std::string, double>& overrides) {
    Checker checker(model);
    auto errors = checker.run();
    if (!errors.empty()) throw DiagnosticError(std::move(errors));
    const Symbols& symbols = checker.symbols();

    BoundModel bound;
    bound.ast_ = std::make_shared<const ModelAst>(model);
    const ModelAst& ast = *bound.ast_;

    for (const auto& [name, value] : overrides) {
        auto it = symbols.constants.find(name);
        if (it == symbols.constants.end()) errors.push_back({Severity::Error, "unknown constant '" + name + "'", {}});
        else if (it->second->kind == ConstantKind::Int && value != std::floor(value))
            errors.push_back({Severity::Error,
                              "type mismatch: constant '" + name + "' is int but override value is not integral",
                              it->second->span});
    }
    if (!errors.empty()) throw DiagnosticError(std::move(errors));

    // Evaluate constants on demand so derived constants see overrides.
    std::function<Value(const std::string&)> value_of = [&](const std::string& name) -> Value {
        if (auto done = bound.constants_.find(name); done != bound.constants_.end()) return done->second;
        const ConstantDecl& decl = *symbols.constants.at(name);
        Value v;
        if (auto o = overrides.find(name); o != overrides.end()) {
            if (decl.kind == ConstantKind::Int) v = static_cast<std::int64_t>(o->second);
            else v = o->second;
        } else {
            std::function<ExprPtr(const ExprPtr&)> subst = [&](const ExprPtr& x) -> ExprPtr {
                if (x->kind == ExprKind::Identifier) return Expr::make_literal(value_of(x->name), x->span);
                if (x->kind == ExprKind::Unary) return Expr::make_unary(x->unary_op, subst(x->lhs), x->span);
                if (x->kind == ExprKind::Binary)
                    return Expr::make_binary(x->binary_op, subst(x->lhs), subst(x->rhs), x->span);
                return x;
            };
            try {
                v = evaluate(*subst(decl.definition), {});
            } catch (const EvalError& err) {
                throw DiagnosticError(std::string("cannot evaluate constant '") + name + "': " + err.what(), decl.span);
            }
            if (decl.kind == ConstantKind::Real) v = as_real(v);
        }
        bound.constants_[name] = v;
        return v;
    };
    for (const auto& c : ast.constants) value_of(c.name);

    std::set<std::string> probability_names;
    collect_probability_constants(ast, probability_names);
    for (const auto& name : probability_names) {
        auto it = symbols.constants.find(name);
        if (it == symbols.constants.end() || it->second->kind != ConstantKind::Real) continue;
        double p = as_real(bound.constants_.at(name));
        if (p < 0.0 || p > 1.0)
            errors.push_back({Severity::Error,
                              "probability constant '" + name + "' = " + render_value(p) + " lies outside [0,1]",
                              it->second->span});
    }
    if (!errors.empty()) throw DiagnosticError(std::move(errors));

    for (const auto& f : ast.formulas) bound.formulas_[f.name] = &f;

    for (std::size_t m = 0; m < ast.modules.size(); ++m) {
        const auto& mod = ast.modules[m];
        bound.module_names_.push_back(mod.name);
        for (const auto& v : mod.variables) {
            VariableInfo info;
            info.name = v.name;
            info.module = mod.name;
            info.is_bool = v.is_bool;
            auto const_int = [&](const ExprPtr& e) { return as_int(evaluate(*bound.resolve(e), {})); };
            if (v.is_bool) {
                info.lower = 0;
                info.upper = 1;
                info.init = v.init ? (as_bool(evaluate(*bound.resolve(v.init), {})) ? 1 : 0) : 0;
            } else {
                info.lower = const_int(v.lower);
                info.upper = const_int(v.upper);
                info.init = v.init ? const_int(v.init) : info.lower;
                if (info.lower > info.upper)
                    errors.push_back({Severity::Error, "empty range for variable '" + v.name + "'", v.span});
                else if (info.init < info.lower || info.init > info.upper)
                    errors.push_back(
                        {Severity::Error, "initial value of '" + v.name + "' lies outside its range", v.span});
            }
            bound.variables_.push_back(std::move(info));
        }
    }
    if (!errors.empty()) throw DiagnosticError(std::move(errors));

    for (std::size_t m = 0; m < ast.modules.size(); ++m) {
        for (const auto& cmd : ast.modules[m].commands) {
            BoundCommand bc;
            bc.module = m;
            bc.action = cmd.action;
            bc.guard = bound.resolve(cmd.guard);
            bc.span = cmd.span;
            for (const auto& u : cmd.updates) {
                BoundCommand::BoundUpdate bu;
                bu.probability = u.probability ? bound.resolve(u.probability) : Expr::make_literal(1.0);
                for (const auto& a : u.assignments)
                    bu.assignments.emplace_back(*bound.slot_of(a.variable), bound.resolve(a.value));
                bc.updates.push_back(std::move(bu));
            }
            bound.commands_.push_back(std::move(bc));
        }
    }
    for (const auto& r : ast.rewards) {
        BoundRewardStructure br;
        br.name = r.name;
        for (const auto& item : r.items) br.items.emplace_back(bound.resolve(item.guard), bound.resolve(item.reward));
        bound.rewards_.push_back(std::move(br));
    }
    return bound;
}

std::shared_ptr<const BoundModel> bind_shared(const ModelAst& model, const std::map<std::string, double>& overrides) {
    return std::make_shared<const BoundModel>(bind_constants(model, overrides));
}

Value eval_expr(const ExprPtr& e, const std::map<std::string, Value>& valuation, const BoundModel& env) {
    ExprPtr resolved = env.resolve(e);
    std::vector<std::int64_t> state(env.variables().size(), 0);
    std::vector<bool> covered(state.size(), false);
    for (const auto& [name, value] : valuation) {
        auto slot = env.slot_of(name);
        if (!slot) throw EvalError("valuation names unknown variable '" + name + "'");
        state[*slot] = as_int(value);
        covered[*slot] = true;
    }
    std::function<void(const Expr&)> check = [&](const Expr& x) {
        if (x.kind == ExprKind::Variable && !covered[x.slot])
            throw EvalError("valuation does not cover variable '" + x.name + "'");
        if (x.lhs) check(*x.lhs);
        if (x.rhs) check(*x.rhs);
    };
    check(*resolved);
    return evaluate(*resolved, state);
}

// ---------------------------------------------------------------------------
// Property rendering
// ---------------------------------------------------------------------------

namespace {

std::string render_number(double d) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, end);
}

std::string operand(const ExprPtr& e) {
    std::string text = render_expr(e, true);
    bool atomic = e->kind == ExprKind::Literal || e->kind == ExprKind::Identifier || e->kind == ExprKind::Variable;
    return atomic ? text : "(" + text + ")";
}

// Bodies of F and G read ambiguously next to the operator when they are compound formulas.
std::string body(const ExprPtr& e) {
    bool compound = (e->kind == ExprKind::Binary && is_logical(e->binary_op)) ||
                    (e->kind == ExprKind::Unary && e->unary_op == UnaryOp::Not);
    std::string text = render_expr(e, true);
    return compound ? "(" + text + ")" : text;
}

}  // namespace

std::string render_path(const PathFormula& path) {
    switch (path.kind) {
        case PathKind::Eventually:
            return "F " + body(path.right);
        case PathKind::BoundedEventually:
            return "F<=" + std::to_string(path.step_bound) + " " + body(path.right);
        case PathKind::Globally:
            return "G " + body(path.left);
        case PathKind::Until:
            return operand(path.left) + " U " + operand(path.right);
    }
    return {};
}

std::string render_property(const PropertySpec& p, bool with_name) {
    std::string text;
    if (with_name && !p.synthetic_name) text += "\"" + p.name + "\": ";
    switch (p.query) {
        case QueryKind::ProbabilityQuery:
            text += "P=?";
            break;
        case QueryKind::ProbabilityBound:
            text += std::string("P") + (p.bound_op == BoundOp::GreaterEqual ? ">=" : "<=") + render_number(p.bound);
            break;
        case QueryKind::RewardQuery:
            text += "R{\"" + p.reward_structure + "\"}=?";
            break;
    }
    text += " [ " + render_path(p.path) + " ]";
    return text;
}

}  // namespace cassure
