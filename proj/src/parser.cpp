#include "cassure/parser.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace cassure {

using detail::Tok;
using detail::Token;

namespace {

const std::set<std::string>& reserved_words() {
    static const std::set<std::string> words = {
        "dtmc", "const", "int", "double", "bool", "formula", "module", "endmodule",
        "rewards", "endrewards", "init", "endinit", "true", "false", "label", "system",
        "endsystem", "global",
    };
    return words;
}

// Upstream-language constructs outside the supported subset.
const std::set<std::string>& unsupported_words() {
    static const std::set<std::string> words = {
        "init", "label", "system", "global", "endinit", "endsystem", "rate", "observables",
        "invariant", "clock", "ctmc", "mdp", "pta", "pomdp", "smg", "nondeterministic",
        "stochastic", "probabilistic",
    };
    return words;
}

class Parser {
public:
    Parser(std::string_view text, std::string file, bool property_mode)
        : tokens_(detail::tokenize(text, file)), property_mode_(property_mode) {}

    // ---- model -------------------------------------------------------------

    ModelAst model(const std::string& file) {
        ModelAst ast;
        ast.source_file = file;
        if (at(Tok::End)) fail("expected model type header (e.g. 'dtmc')");
        if (!at_word("dtmc")) {
            if (at(Tok::Ident) && unsupported_words().count(peek().text))
                fail("unsupported construct: model type '" + peek().text + "' (only 'dtmc' is supported)");
            fail("expected model type header (e.g. 'dtmc')");
        }
        next();
        while (!at(Tok::End)) {
            if (at_word("const")) ast.constants.push_back(constant());
            else if (at_word("formula")) ast.formulas.push_back(formula());
            else if (at_word("module")) ast.modules.push_back(module());
            else if (at_word("rewards")) ast.rewards.push_back(rewards());
            else if (at(Tok::Ident) && unsupported_words().count(peek().text)) unsupported_block();
            else fail("expected 'const', 'formula', 'module' or 'rewards', found " + found());
        }
        check_declarations(ast);
        return ast;
    }

    // ---- properties ----------------------------------------------------------

    std::vector<PropertySpec> properties() {
        std::vector<PropertySpec> props;
        std::set<std::string> names;
        while (!at(Tok::End)) {
            if (at(Tok::Semi)) {
                next();
                continue;
            }
            PropertySpec p = property(props.size() + 1);
            if (!names.insert(p.name).second) fail_at("duplicate property name '" + p.name + "'", p.span);
            props.push_back(std::move(p));
        }
        return props;
    }

    ExprPtr standalone_expression() {
        auto e = expression();
        if (!at(Tok::End)) fail("unexpected " + found() + " after expression");
        return e;
    }

private:
    const Token& peek(std::size_t off = 0) const {
        return tokens_[std::min(pos_ + off, tokens_.size() - 1)];
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_word(const char* w) const { return at(Tok::Ident) && peek().text == w; }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < tokens_.size() - 1) ++pos_;
        return t;
    }
    std::string found() const {
        const Token& t = peek();
        if (t.kind == Tok::End) return "end of input";
        if (t.kind == Tok::String) return "string \"" + t.text + "\"";
        return "'" + t.text + "'";
    }

    [[noreturn]] void fail(const std::string& message) const { fail_at(message, peek().span); }
    [[noreturn]] static void fail_at(const std::string& message, const SourceSpan& span) {
        throw DiagnosticError(message, span);
    }

    const Token& expect(Tok k, const char* context) {
        if (!at(k)) fail(std::string("expected ") + detail::describe(k) + " " + context + ", found " + found());
        return next();
    }

    void expect_word(const char* w, const char* context) {
        if (!at_word(w)) fail(std::string("expected '") + w + "' " + context + ", found " + found());
        next();
    }

    std::string identifier(const char* context) {
        if (!at(Tok::Ident)) fail(std::string("expected identifier ") + context + ", found " + found());
        if (reserved_words().count(peek().text))
            fail("'" + peek().text + "' is a reserved word and cannot be used " + context);
        return next().text;
    }

    [[noreturn]] void unsupported_block() {
        const Token& t = peek();
        std::string what = t.text;
        if (what == "init") what = "init...endinit";
        else if (what == "system") what = "system...endsystem";
        else if (what == "label") what = "label";
        else if (what == "global") what = "global variables";
        fail_at("unsupported construct: '" + what + "' is not part of the supported modelling subset", t.span);
    }

    ConstantDecl constant() {
        ConstantDecl c;
        c.span = next().span;
        if (at_word("int")) c.kind = ConstantKind::Int;
        else if (at_word("double")) c.kind = ConstantKind::Real;
        else if (at_word("bool")) fail("unsupported construct: boolean constants");
        else fail("expected 'int' or 'double' after 'const', found " + found());
        next();
        c.span = peek().span;
        c.name = identifier("as constant name");
        if (at(Tok::Semi)) fail("unsupported construct: undefined constant '" + c.name + "' (give it a value)");
        expect(Tok::Eq, "in constant definition");
        c.definition = expression();
        expect(Tok::Semi, "after constant definition");
        return c;
    }

    FormulaDecl formula() {
        next();
        FormulaDecl f;
        f.span = peek().span;
        f.name = identifier("as formula name");
        expect(Tok::Eq, "in formula definition");
        f.definition = expression();
        expect(Tok::Semi, "after formula definition");
        return f;
    }

    ModuleDecl module() {
        next();
        ModuleDecl m;
        m.span = peek().span;
        m.name = identifier("as module name");
        if (at(Tok::Eq)) fail("unsupported construct: module renaming");
        while (!at_word("endmodule")) {
            if (at(Tok::End)) fail("expected 'endmodule' before end of input");
            if (at(Tok::LBracket)) m.commands.push_back(command());
            else if (at(Tok::Ident) && peek(1).kind == Tok::Colon) m.variables.push_back(variable());
            else fail("expected variable declaration or command in module '" + m.name + "', found " + found());
        }
        next();
        return m;
    }

    VarDecl variable() {
        VarDecl v;
        v.span = peek().span;
        v.name = identifier("as variable name");
        expect(Tok::Colon, "after variable name");
        if (at_word("bool")) {
            next();
            v.is_bool = true;
        } else {
            expect(Tok::LBracket, "to open variable range");
            v.lower = expression();
            expect(Tok::DotDot, "in variable range");
            v.upper = expression();
            expect(Tok::RBracket, "to close variable range");
        }
        if (at_word("init")) {
            next();
            v.init = expression();
        }
        expect(Tok::Semi, "after variable declaration");
        return v;
    }

    Command command() {
        Command c;
        c.span = peek().span;
        next();
        if (at(Tok::Ident)) c.action = identifier("as action label");
        expect(Tok::RBracket, "after action label");
        c.guard = expression();
        expect(Tok::Arrow, "after command guard");
        for (;;) {
            c.updates.push_back(update());
            if (!at(Tok::Plus)) break;
            next();
        }
        expect(Tok::Semi, "after command updates");
        return c;
    }

    bool at_assignment() const {
        return at(Tok::LParen) && peek(1).kind == Tok::Ident && peek(2).kind == Tok::Prime;
    }

    Update update() {
        Update u;
        if (at_word("true") && (peek(1).kind == Tok::Semi || peek(1).kind == Tok::Plus)) {
            next();
            return u;
        }
        if (!at_assignment()) {
            u.probability = expression();
            expect(Tok::Colon, "after update probability");
            if (at_word("true")) {
                next();
                return u;
            }
        }
        for (;;) {
            if (!at_assignment()) fail("expected assignment of the form (x' = expr), found " + found());
            Assignment a;
            next();
            a.span = peek().span;
            a.variable = identifier("as assignment target");
            next();  // prime
            expect(Tok::Eq, "in assignment");
            a.value = expression();
            expect(Tok::RParen, "to close assignment");
            u.assignments.push_back(std::move(a));
            if (!at(Tok::And)) break;
            next();
        }
        return u;
    }

    RewardStructureDecl rewards() {
        RewardStructureDecl r;
        r.span = next().span;
        if (!at(Tok::String)) fail("expected reward structure name in quotes, found " + found());
        r.name = next().text;
        while (!at_word("endrewards")) {
            if (at(Tok::End)) fail("expected 'endrewards' before end of input");
            if (at(Tok::LBracket)) fail("unsupported construct: transition (action) rewards");
            RewardItem item;
            item.span = peek().span;
            item.guard = expression();
            expect(Tok::Colon, "after reward guard");
            item.reward = expression();
            expect(Tok::Semi, "after reward item");
            r.items.push_back(std::move(item));
        }
        next();
        return r;
    }

    void check_declarations(const ModelAst& ast) {
        std::map<std::string, SourceSpan> names;
        auto claim = [&](const std::string& name, const SourceSpan& span) {
            if (!names.emplace(name, span).second) fail_at("duplicate identifier '" + name + "'", span);
        };
        for (const auto& c : ast.constants) claim(c.name, c.span);
        for (const auto& f : ast.formulas) claim(f.name, f.span);
        for (const auto& m : ast.modules)
            for (const auto& v : m.variables) claim(v.name, v.span);
        std::set<std::string> modules, rewards;
        for (const auto& m : ast.modules)
            if (!modules.insert(m.name).second) fail_at("duplicate module name '" + m.name + "'", m.span);
        for (const auto& r : ast.rewards)
            if (!rewards.insert(r.name).second) fail_at("duplicate reward structure '" + r.name + "'", r.span);
        std::set<std::string> variables;
        for (const auto& m : ast.modules)
            for (const auto& v : m.variables) variables.insert(v.name);
        for (const auto& m : ast.modules)
            for (const auto& c : m.commands)
                for (const auto& u : c.updates)
                    for (const auto& a : u.assignments)
                        if (!variables.count(a.variable))
                            fail_at("update assigns undeclared variable '" + a.variable + "'", a.span);
    }

    // ---- properties ----------------------------------------------------------

    PropertySpec property(std::size_t ordinal) {
        PropertySpec p;
        p.span = peek().span;
        if (at(Tok::String)) {
            p.name = next().text;
            if (p.name.empty()) fail_at("property name must not be empty", p.span);
            expect(Tok::Colon, "after property name");
        } else {
            p.name = "prop" + std::to_string(ordinal);
            p.synthetic_name = true;
        }
        if (at(Tok::Ident) && (peek().text == "const" || peek().text == "label"))
            fail("unsupported construct: '" + peek().text + "' declarations in property files");
        if (!at(Tok::Ident)) fail("expected 'P' or 'R' query operator, found " + found());
        const Token& op = next();
        if (op.text == "P") {
            if (at(Tok::QueryEq)) {
                next();
                p.query = QueryKind::ProbabilityQuery;
            } else if (at(Tok::Ge) || at(Tok::Le)) {
                p.query = QueryKind::ProbabilityBound;
                p.bound_op = next().kind == Tok::Ge ? BoundOp::GreaterEqual : BoundOp::LessEqual;
                SourceSpan bound_span = peek().span;
                p.bound = number("as probability bound");
                if (p.bound < 0.0 || p.bound > 1.0)
                    fail_at("probability bound " + tokens_[pos_ - 1].text + " lies outside [0,1]", bound_span);
            } else if (at(Tok::Gt) || at(Tok::Lt)) {
                fail("unsupported construct: strict probability bounds (use >= or <=)");
            } else {
                fail("expected '=?', '>=' or '<=' after 'P', found " + found());
            }
        } else if (op.text == "R") {
            p.query = QueryKind::RewardQuery;
            if (!at(Tok::LBrace)) fail("expected reward structure name R{\"name\"}, found " + found());
            next();
            if (!at(Tok::String)) fail("expected quoted reward structure name, found " + found());
            p.reward_structure = next().text;
            expect(Tok::RBrace, "after reward structure name");
            expect(Tok::QueryEq, "after reward operator (only R{...}=? queries are supported)");
        } else if (op.text == "S" || op.text == "Pmin" || op.text == "Pmax" || op.text == "filter" ||
                   op.text == "Rmin" || op.text == "Rmax") {
            fail_at("unsupported construct: '" + op.text + "' operator", op.span);
        } else {
            fail_at("expected 'P' or 'R' query operator, found '" + op.text + "'", op.span);
        }
        expect(Tok::LBracket, "to open path formula");
        p.path = path();
        if (p.query == QueryKind::RewardQuery && p.path.kind != PathKind::Eventually)
            fail_at("reward queries support only 'F' reachability paths", p.span);
        expect(Tok::RBracket, "to close path formula");
        return p;
    }

    double number(const char* context) {
        if (!at(Tok::Int) && !at(Tok::Real)) fail(std::string("expected number ") + context + ", found " + found());
        const Token& t = next();
        double v = 0.0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        return v;
    }

    PathFormula path() {
        PathFormula f;
        if (at_word("X")) fail("unsupported construct: next operator 'X'");
        if (at_word("F")) {
            next();
            if (at(Tok::Le)) {
                next();
                if (!at(Tok::Int)) fail("expected integer step bound after 'F<=', found " + found());
                f.kind = PathKind::BoundedEventually;
                f.step_bound = std::stoll(next().text);
            } else if (at(Tok::Lt) || at(Tok::Ge) || at(Tok::Gt) || at(Tok::LBracket)) {
                fail("unsupported construct: only 'F<=k' time bounds are supported");
            } else {
                f.kind = PathKind::Eventually;
            }
            f.right = expression();
            return f;
        }
        if (at_word("G")) {
            next();
            if (at(Tok::Le) || at(Tok::Lt)) fail("unsupported construct: bounded 'G'");
            f.kind = PathKind::Globally;
            f.left = expression();
            return f;
        }
        f.left = expression();
        if (at_word("W") || at_word("R")) fail("unsupported construct: '" + peek().text + "' operator");
        if (!at_word("U")) fail("expected path operator 'F', 'G' or 'U', found " + found());
        next();
        if (at(Tok::Le) || at(Tok::Lt)) fail("unsupported construct: bounded 'U'");
        f.kind = PathKind::Until;
        f.right = expression();
        return f;
    }

    // ---- expressions -------------------------------------------------------

    ExprPtr expression() { return implication(); }

    ExprPtr implication() {
        auto lhs = disjunction();
        bool arrow = property_mode_ && at(Tok::Arrow);
        if (at(Tok::Implies) || arrow) {
            SourceSpan span = next().span;
            return Expr::make_binary(BinaryOp::Implies, lhs, implication(), span);
        }
        return lhs;
    }

    ExprPtr disjunction() {
        auto lhs = conjunction();
        while (at(Tok::Or)) {
            SourceSpan span = next().span;
            lhs = Expr::make_binary(BinaryOp::Or, lhs, conjunction(), span);
        }
        return lhs;
    }

    ExprPtr conjunction() {
        auto lhs = negation();
        while (at(Tok::And)) {
            SourceSpan span = next().span;
            lhs = Expr::make_binary(BinaryOp::And, lhs, negation(), span);
        }
        return lhs;
    }

    ExprPtr negation() {
        if (at(Tok::Not)) {
            SourceSpan span = next().span;
            return Expr::make_unary(UnaryOp::Not, negation(), span);
        }
        return relation();
    }

    ExprPtr relation() {
        auto lhs = additive();
        BinaryOp op;
        switch (peek().kind) {
            case Tok::Eq: op = BinaryOp::Eq; break;
            case Tok::Ne: op = BinaryOp::Ne; break;
            case Tok::Lt: op = BinaryOp::Lt; break;
            case Tok::Le: op = BinaryOp::Le; break;
            case Tok::Gt: op = BinaryOp::Gt; break;
            case Tok::Ge: op = BinaryOp::Ge; break;
            default: return lhs;
        }
        SourceSpan span = next().span;
        return Expr::make_binary(op, lhs, additive(), span);
    }

    ExprPtr additive() {
        auto lhs = multiplicative();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            // In update lists '+' separates alternatives: `p : (x'=1) + q : ...`.
            // The assignment parser never reaches here, so '+' is always arithmetic.
            bool plus = at(Tok::Plus);
            SourceSpan span = next().span;
            lhs = Expr::make_binary(plus ? BinaryOp::Add : BinaryOp::Sub, lhs, multiplicative(), span);
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        auto lhs = unary();
        while (at(Tok::Star) || at(Tok::Slash)) {
            bool star = at(Tok::Star);
            SourceSpan span = next().span;
            lhs = Expr::make_binary(star ? BinaryOp::Mul : BinaryOp::Div, lhs, unary(), span);
        }
        return lhs;
    }

    ExprPtr unary() {
        if (at(Tok::Minus)) {
            SourceSpan span = next().span;
            return Expr::make_unary(UnaryOp::Negate, unary(), span);
        }
        return primary();
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: {
                next();
                std::int64_t v = 0;
                auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                if (ec != std::errc()) fail_at("integer literal out of range", t.span);
                return Expr::make_literal(v, t.span);
            }
            case Tok::Real: {
                next();
                double v = 0.0;
                std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                return Expr::make_literal(v, t.span);
            }
            case Tok::LParen: {
                next();
                auto e = expression();
                expect(Tok::RParen, "to close parenthesised expression");
                return e;
            }
            case Tok::Ident: {
                if (t.text == "true" || t.text == "false") {
                    next();
                    return Expr::make_literal(t.text == "true", t.span);
                }
                if (property_mode_ && (t.text == "P" || t.text == "R") &&
                    (peek(1).kind == Tok::QueryEq || peek(1).kind == Tok::Ge || peek(1).kind == Tok::Le ||
                     peek(1).kind == Tok::LBrace))
                    fail("unsupported construct: nested probability/reward operators");
                if (peek(1).kind == Tok::LParen)
                    fail("unsupported construct: function call '" + t.text + "(...)'");
                if (reserved_words().count(t.text))
                    fail("unexpected reserved word '" + t.text + "' in expression");
                next();
                return Expr::make_identifier(t.text, t.span);
            }
            case Tok::String:
                fail("unsupported construct: label reference \"" + t.text + "\"");
            default:
                fail("expected expression, found " + found());
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    bool property_mode_;
};

// ---- rendering ----------------------------------------------------------

std::string render_update(const Update& u) {
    std::string text;
    if (u.probability) text += render_expr(u.probability) + " : ";
    if (u.assignments.empty()) return text + "true";
    for (std::size_t i = 0; i < u.assignments.size(); ++i) {
        if (i) text += " & ";
        text += "(" + u.assignments[i].variable + "' = " + render_expr(u.assignments[i].value) + ")";
    }
    return text;
}

}  // namespace

ModelAst parse_model(std::string_view text, const std::string& file) {
    return Parser(text, file, false).model(file);
}

std::vector<PropertySpec> parse_properties(std::string_view text, const std::string& file) {
    return Parser(text, file, true).properties();
}

ExprPtr parse_expression(std::string_view text, const std::string& file) {
    return Parser(text, file, true).standalone_expression();
}

std::string render_model(const ModelAst& model) {
    std::ostringstream out;
    out << "dtmc\n";
    if (!model.constants.empty()) out << '\n';
    for (const auto& c : model.constants)
        out << "const " << (c.kind == ConstantKind::Int ? "int" : "double") << ' ' << c.name << " = "
            << render_expr(c.definition) << ";\n";
    if (!model.formulas.empty()) out << '\n';
    for (const auto& f : model.formulas) out << "formula " << f.name << " = " << render_expr(f.definition) << ";\n";
    for (const auto& m : model.modules) {
        out << "\nmodule " << m.name << '\n';
        for (const auto& v : m.variables) {
            out << "  " << v.name << " : ";
            if (v.is_bool) out << "bool";
            else out << '[' << render_expr(v.lower) << ".." << render_expr(v.upper) << ']';
            if (v.init) out << " init " << render_expr(v.init);
            out << ";\n";
        }
        if (!m.variables.empty() && !m.commands.empty()) out << '\n';
        for (const auto& c : m.commands) {
            out << "  [" << c.action << "] " << render_expr(c.guard) << " ->";
            if (c.updates.size() == 1) {
                out << ' ' << render_update(c.updates[0]) << ";\n";
                continue;
            }
            for (std::size_t i = 0; i < c.updates.size(); ++i)
                out << "\n      " << (i ? "+ " : "") << render_update(c.updates[i]);
            out << ";\n";
        }
        out << "endmodule\n";
    }
    for (const auto& r : model.rewards) {
        out << "\nrewards \"" << r.name << "\"\n";
        for (const auto& item : r.items)
            out << "  " << render_expr(item.guard) << " : " << render_expr(item.reward) << ";\n";
        out << "endrewards\n";
    }
    return out.str();
}

}  // namespace cassure
