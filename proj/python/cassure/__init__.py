"""Python access to the model checker and the assurance-argument pipeline."""

from ._cassure import (
    ConvergenceError,
    DiagnosticError,
    check,
    evidence_cost_hours,
    export_dot,
    fingerprint,
    generate,
    impact,
    ingest,
    state_count,
    validate,
)

__all__ = [
    "ConvergenceError",
    "DiagnosticError",
    "check",
    "evidence_cost_hours",
    "export_dot",
    "fingerprint",
    "generate",
    "impact",
    "ingest",
    "state_count",
    "validate",
]
