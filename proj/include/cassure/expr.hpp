#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "cassure/diagnostics.hpp"

namespace cassure {

/// Runtime value of an expression. Integers are exact, reals are binary64.
using Value = std::variant<bool, std::int64_t, double>;

enum class ValueType { Bool, Int, Real };

ValueType type_of(const Value& v) noexcept;
const char* type_name(ValueType t) noexcept;
std::string render_value(const Value& v);

/// Numeric view of a value; throws EvalError for booleans.
double as_real(const Value& v);
bool as_bool(const Value& v);
std::int64_t as_int(const Value& v);

enum class UnaryOp { Negate, Not };

enum class BinaryOp {
    Add, Sub, Mul, Div,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Implies,
};

const char* op_symbol(UnaryOp op) noexcept;
const char* op_symbol(BinaryOp op) noexcept;
bool is_comparison(BinaryOp op) noexcept;
bool is_logical(BinaryOp op) noexcept;

enum class ExprKind {
    Literal,
    Identifier,  // unresolved name: variable, constant or formula
    Variable,    // resolved reference to a state variable slot
    Unary,
    Binary,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree node. Nodes are shared freely between trees.
struct Expr {
    ExprKind kind = ExprKind::Literal;
    Value literal = false;
    std::string name;
    int slot = -1;
    ValueType slot_type = ValueType::Int;
    UnaryOp unary_op = UnaryOp::Not;
    BinaryOp binary_op = BinaryOp::Add;
    ExprPtr lhs;
    ExprPtr rhs;
    SourceSpan span;

    static ExprPtr make_literal(Value v, SourceSpan span = {});
    static ExprPtr make_identifier(std::string name, SourceSpan span = {});
    static ExprPtr make_variable(std::string name, int slot, ValueType type, SourceSpan span = {});
    static ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourceSpan span = {});
    static ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
};

/// Structural equality: ignores spans, compares literal values exactly.
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

/// Text form with the minimum parentheses needed to re-parse to the same tree.
/// `arrow_implies` selects `->` instead of `=>` for implication.
std::string render_expr(const ExprPtr& e, bool arrow_implies = false);

/// Evaluates a resolved expression (no Identifier nodes) against a state
/// given as one slot per variable (booleans stored as 0/1).
Value evaluate(const Expr& e, std::span<const std::int64_t> state);

}  // namespace cassure
