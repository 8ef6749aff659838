#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cassure/diagnostics.hpp"

namespace cassure::detail {

enum class Tok {
    End,
    Ident,
    Int,
    Real,
    String,
    LBracket, RBracket, LParen, RParen, LBrace, RBrace,
    Semi, Colon, Comma, Prime, DotDot,
    Eq, Ne, Lt, Le, Gt, Ge,
    Plus, Minus, Star, Slash,
    And, Or, Not,
    Arrow,       // ->
    Implies,     // =>
    QueryEq,     // =?
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

/// Splits model/property text into tokens. `//` comments and whitespace are
/// dropped. Throws DiagnosticError on stray characters or unterminated strings.
std::vector<Token> tokenize(std::string_view text, const std::string& file);

const char* describe(Tok kind);

}  // namespace cassure::detail
