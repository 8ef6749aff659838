#include "cassure/diagnostics.hpp"

#include <sstream>

namespace cassure {

std::string Diagnostic::to_string() const {
    std::ostringstream out;
    out << (span.file.empty() ? "<input>" : span.file) << ':' << span.line << ':' << span.column << ": "
        << (severity == Severity::Error ? "error" : "warning") << ": " << message;
    return out.str();
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
    std::string text;
    for (const auto& d : diagnostics) {
        if (!text.empty()) text += '\n';
        text += d.to_string();
    }
    return text;
}

DiagnosticError::DiagnosticError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

DiagnosticError::DiagnosticError(std::string message, SourceSpan span)
    : DiagnosticError(std::vector<Diagnostic>{{Severity::Error, std::move(message), std::move(span)}}) {}

}  // namespace cassure
