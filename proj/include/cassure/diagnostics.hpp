#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cassure {

/// Location of a token or construct inside an input file. Lines and columns are 1-based.
struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
    int length = 0;

    bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    SourceSpan span;

    /// `file:line:col: error: message`
    std::string to_string() const;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

/// Thrown by parsers, the type checker and constant binding. Carries every
/// diagnostic collected before giving up.
class DiagnosticError : public std::runtime_error {
public:
    explicit DiagnosticError(std::vector<Diagnostic> diagnostics);
    DiagnosticError(std::string message, SourceSpan span);

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

/// Runtime evaluation failure (division by zero, type error on an unchecked expression).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cassure
