#include "lexer.hpp"

#include <cctype>

namespace cassure::detail {

const char* describe(Tok kind) {
    switch (kind) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::Real: return "number";
        case Tok::String: return "string";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Semi: return "';'";
        case Tok::Colon: return "':'";
        case Tok::Comma: return "','";
        case Tok::Prime: return "'''";
        case Tok::DotDot: return "'..'";
        case Tok::Eq: return "'='";
        case Tok::Ne: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::And: return "'&'";
        case Tok::Or: return "'|'";
        case Tok::Not: return "'!'";
        case Tok::Arrow: return "'->'";
        case Tok::Implies: return "'=>'";
        case Tok::QueryEq: return "'=?'";
    }
    return "token";
}

std::vector<Token> tokenize(std::string_view text, const std::string& file) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    int line = 1, col = 1;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto peek = [&](std::size_t off = 0) -> char { return i + off < text.size() ? text[i + off] : '\0'; };

    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && peek(1) == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.span = {file, line, col, 1};
        std::size_t start = i;

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance(1);
            tok.kind = Tok::Ident;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            tok.kind = Tok::Int;
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
            // `0..6` is a range, not a real literal.
            if (peek() == '.' && peek(1) != '.') {
                tok.kind = Tok::Real;
                advance(1);
                while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                 ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
                tok.kind = Tok::Real;
                advance(2);
                while (std::isdigit(static_cast<unsigned char>(peek()))) advance(1);
            }
        } else if (c == '"') {
            advance(1);
            while (i < text.size() && text[i] != '"' && text[i] != '\n') advance(1);
            if (peek() != '"') throw DiagnosticError("unterminated string literal", tok.span);
            advance(1);
            tok.kind = Tok::String;
        } else {
            auto two = [&](char a, char b) { return c == a && peek(1) == b; };
            std::size_t len = 2;
            if (two('.', '.')) tok.kind = Tok::DotDot;
            else if (two('!', '=')) tok.kind = Tok::Ne;
            else if (two('<', '=')) tok.kind = Tok::Le;
            else if (two('>', '=')) tok.kind = Tok::Ge;
            else if (two('-', '>')) tok.kind = Tok::Arrow;
            else if (two('=', '>')) tok.kind = Tok::Implies;
            else if (two('=', '?')) tok.kind = Tok::QueryEq;
            else {
                len = 1;
                switch (c) {
                    case '[': tok.kind = Tok::LBracket; break;
                    case ']': tok.kind = Tok::RBracket; break;
                    case '(': tok.kind = Tok::LParen; break;
                    case ')': tok.kind = Tok::RParen; break;
                    case '{': tok.kind = Tok::LBrace; break;
                    case '}': tok.kind = Tok::RBrace; break;
                    case ';': tok.kind = Tok::Semi; break;
                    case ':': tok.kind = Tok::Colon; break;
                    case ',': tok.kind = Tok::Comma; break;
                    case '\'': tok.kind = Tok::Prime; break;
                    case '=': tok.kind = Tok::Eq; break;
                    case '<': tok.kind = Tok::Lt; break;
                    case '>': tok.kind = Tok::Gt; break;
                    case '+': tok.kind = Tok::Plus; break;
                    case '-': tok.kind = Tok::Minus; break;
                    case '*': tok.kind = Tok::Star; break;
                    case '/': tok.kind = Tok::Slash; break;
                    case '&': tok.kind = Tok::And; break;
                    case '|': tok.kind = Tok::Or; break;
                    case '!': tok.kind = Tok::Not; break;
                    default:
                        throw DiagnosticError(std::string("unexpected character '") + c + "'", tok.span);
                }
            }
            advance(len);
        }
        tok.text = std::string(text.substr(start, i - start));
        tok.span.length = static_cast<int>(i - start);
        if (tok.kind == Tok::String) tok.text = tok.text.substr(1, tok.text.size() - 2);
        tokens.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    if (tokens.empty()) {
        end.span = {file, 1, 1, 0};
    } else {
        const SourceSpan& last = tokens.back().span;
        end.span = {file, last.line, last.column + last.length, 0};
    }
    tokens.push_back(end);
    return tokens;
}

}  // namespace cassure::detail
