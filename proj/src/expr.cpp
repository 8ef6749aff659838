#include "cassure/expr.hpp"

#include <charconv>
#include <cmath>

namespace cassure {

ValueType type_of(const Value& v) noexcept {
    switch (v.index()) {
        case 0: return ValueType::Bool;
        case 1: return ValueType::Int;
        default: return ValueType::Real;
    }
}

const char* type_name(ValueType t) noexcept {
    switch (t) {
        case ValueType::Bool: return "bool";
        case ValueType::Int: return "int";
        case ValueType::Real: return "double";
    }
    return "?";
}

namespace {

std::string render_real(double d) {
    if (std::isinf(d)) return d > 0 ? "1e400" : "-1e400";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string text(buf, end);
    if (text.find_first_of(".en") == std::string::npos) text += ".0";
    return text;
}

}  // namespace

std::string render_value(const Value& v) {
    switch (type_of(v)) {
        case ValueType::Bool: return std::get<bool>(v) ? "true" : "false";
        case ValueType::Int: return std::to_string(std::get<std::int64_t>(v));
        case ValueType::Real: return render_real(std::get<double>(v));
    }
    return {};
}

double as_real(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&v)) return *d;
    throw EvalError("expected a numeric value, got bool");
}

bool as_bool(const Value& v) {
    if (auto b = std::get_if<bool>(&v)) return *b;
    throw EvalError("expected a boolean value, got a number");
}

std::int64_t as_int(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto b = std::get_if<bool>(&v)) return *b ? 1 : 0;
    throw EvalError("expected an integer value, got double");
}

const char* op_symbol(UnaryOp op) noexcept { return op == UnaryOp::Negate ? "-" : "!"; }

const char* op_symbol(BinaryOp op) noexcept {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Eq: return "=";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "&";
        case BinaryOp::Or: return "|";
        case BinaryOp::Implies: return "=>";
    }
    return "?";
}

bool is_comparison(BinaryOp op) noexcept { return op >= BinaryOp::Eq && op <= BinaryOp::Ge; }
bool is_logical(BinaryOp op) noexcept { return op >= BinaryOp::And; }

ExprPtr Expr::make_literal(Value v, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Literal;
    e->literal = v;
    e->span = std::move(span);
    return e;
}

ExprPtr Expr::make_identifier(std::string name, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Identifier;
    e->name = std::move(name);
    e->span = std::move(span);
    return e;
}

ExprPtr Expr::make_variable(std::string name, int slot, ValueType type, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Variable;
    e->name = std::move(name);
    e->slot = slot;
    e->slot_type = type;
    e->span = std::move(span);
    return e;
}

ExprPtr Expr::make_unary(UnaryOp op, ExprPtr operand, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->unary_op = op;
    e->lhs = std::move(operand);
    e->span = std::move(span);
    return e;
}

ExprPtr Expr::make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->binary_op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->span = std::move(span);
    return e;
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::Literal:
            return a->literal == b->literal;
        case ExprKind::Identifier:
            return a->name == b->name;
        case ExprKind::Variable:
            return a->name == b->name && a->slot == b->slot;
        case ExprKind::Unary:
            return a->unary_op == b->unary_op && structurally_equal(a->lhs, b->lhs);
        case ExprKind::Binary:
            return a->binary_op == b->binary_op && structurally_equal(a->lhs, b->lhs) &&
                   structurally_equal(a->rhs, b->rhs);
    }
    return false;
}

namespace {

// Binding strength, loosest first. Mirrors the parser's grammar levels.
enum Prec { Implies = 1, Or, And, Not, Relation, Additive, Multiplicative, Negation, Atom };

int precedence(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Unary:
            return e.unary_op == UnaryOp::Not ? Not : Negation;
        case ExprKind::Binary:
            switch (e.binary_op) {
                case BinaryOp::Implies: return Implies;
                case BinaryOp::Or: return Or;
                case BinaryOp::And: return And;
                case BinaryOp::Add:
                case BinaryOp::Sub: return Additive;
                case BinaryOp::Mul:
                case BinaryOp::Div: return Multiplicative;
                default: return Relation;
            }
        case ExprKind::Literal: {
            // A negative literal prints with a leading minus sign.
            if (auto i = std::get_if<std::int64_t>(&e.literal); i && *i < 0) return Negation;
            if (auto d = std::get_if<double>(&e.literal); d && std::signbit(*d)) return Negation;
            return Atom;
        }
        default:
            return Atom;
    }
}

void render(const Expr& e, bool arrow, std::string& out);

void render_child(const Expr& child, int min_prec, bool arrow, std::string& out) {
    bool parens = precedence(child) < min_prec;
    if (parens) out += '(';
    render(child, arrow, out);
    if (parens) out += ')';
}

void render(const Expr& e, bool arrow, std::string& out) {
    switch (e.kind) {
        case ExprKind::Literal:
            out += render_value(e.literal);
            return;
        case ExprKind::Identifier:
        case ExprKind::Variable:
            out += e.name;
            return;
        case ExprKind::Unary:
            out += op_symbol(e.unary_op);
            render_child(*e.lhs, e.unary_op == UnaryOp::Not ? Not : Negation + 1, arrow, out);
            return;
        case ExprKind::Binary: {
            int p = precedence(e);
            // Relations and implication do not chain; other operators are left-associative.
            bool chains = p != Relation && p != Implies;
            render_child(*e.lhs, chains ? p : p + 1, arrow, out);
            out += ' ';
            out += (e.binary_op == BinaryOp::Implies && arrow) ? "->" : op_symbol(e.binary_op);
            out += ' ';
            render_child(*e.rhs, p + 1, arrow, out);
            return;
        }
    }
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
    bool ints = type_of(a) == ValueType::Int && type_of(b) == ValueType::Int;
    if (op == BinaryOp::Div) {
        double denom = as_real(b);
        if (denom == 0.0) throw EvalError("division by zero");
        return as_real(a) / denom;
    }
    if (ints) {
        auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
        switch (op) {
            case BinaryOp::Add: return x + y;
            case BinaryOp::Sub: return x - y;
            default: return x * y;
        }
    }
    double x = as_real(a), y = as_real(b);
    switch (op) {
        case BinaryOp::Add: return x + y;
        case BinaryOp::Sub: return x - y;
        default: return x * y;
    }
}

bool compare(BinaryOp op, const Value& a, const Value& b) {
    if (type_of(a) == ValueType::Bool || type_of(b) == ValueType::Bool) {
        bool x = as_bool(a), y = as_bool(b);
        if (op == BinaryOp::Eq) return x == y;
        if (op == BinaryOp::Ne) return x != y;
        throw EvalError("ordering comparison on booleans");
    }
    if (type_of(a) == ValueType::Int && type_of(b) == ValueType::Int) {
        auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
        switch (op) {
            case BinaryOp::Eq: return x == y;
            case BinaryOp::Ne: return x != y;
            case BinaryOp::Lt: return x < y;
            case BinaryOp::Le: return x <= y;
            case BinaryOp::Gt: return x > y;
            default: return x >= y;
        }
    }
    double x = as_real(a), y = as_real(b);
    switch (op) {
        case BinaryOp::Eq: return x == y;
        case BinaryOp::Ne: return x != y;
        case BinaryOp::Lt: return x < y;
        case BinaryOp::Le: return x <= y;
        case BinaryOp::Gt: return x > y;
        default: return x >= y;
    }
}

}  // namespace

std::string render_expr(const ExprPtr& e, bool arrow_implies) {
    std::string out;
    if (e) render(*e, arrow_implies, out);
    return out;
}

Value evaluate(const Expr& e, std::span<const std::int64_t> state) {
    switch (e.kind) {
        case ExprKind::Literal:
            return e.literal;
        case ExprKind::Identifier:
            throw EvalError("unresolved identifier '" + e.name + "'");
        case ExprKind::Variable:
            if (e.slot_type == ValueType::Bool) return state[static_cast<std::size_t>(e.slot)] != 0;
            return state[static_cast<std::size_t>(e.slot)];
        case ExprKind::Unary: {
            Value v = evaluate(*e.lhs, state);
            if (e.unary_op == UnaryOp::Not) return !as_bool(v);
            if (auto i = std::get_if<std::int64_t>(&v)) return -*i;
            return -as_real(v);
        }
        case ExprKind::Binary: {
            BinaryOp op = e.binary_op;
            if (is_logical(op)) {
                bool left = as_bool(evaluate(*e.lhs, state));
                if (op == BinaryOp::And && !left) return false;
                if (op == BinaryOp::Or && left) return true;
                if (op == BinaryOp::Implies && !left) return true;
                return as_bool(evaluate(*e.rhs, state));
            }
            Value a = evaluate(*e.lhs, state);
            Value b = evaluate(*e.rhs, state);
            if (is_comparison(op)) return compare(op, a, b);
            return arithmetic(op, a, b);
        }
    }
    throw EvalError("malformed expression");
}

}  // namespace cassure
