#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cassure/state_space.hpp"

namespace cassure {

enum class SolveMethod { GaussSeidel, Jacobi };

struct SolverConfig {
    double epsilon = 1e-9;  // applied to each update as |delta| <= epsilon * max(1, |x|)
    std::int64_t max_iterations = 100'000;
    SolveMethod method = SolveMethod::GaussSeidel;

    /// Throws std::invalid_argument unless epsilon > 0 and max_iterations >= 1.
    void validate() const;
};

struct SolveStats {
    std::int64_t iterations = 0;
    double residual = 0.0;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::int64_t iterations, double residual);
    std::int64_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::int64_t iterations_;
    double residual_;
};

using StateSet = std::vector<bool>;

struct NumericVector {
    std::vector<double> values;  // reward vectors hold +infinity where the target is not almost sure
    SolveStats stats;
};

/// States from which phi U psi has probability exactly 0 (graph analysis only).
StateSet prob0_states(const StateSpace& space, const StateSet& phi, const StateSet& psi);
/// States from which phi U psi has probability exactly 1 (double fixpoint, graph analysis only).
StateSet prob1_states(const StateSpace& space, const StateSet& phi, const StateSet& psi);

NumericVector until_probability(const StateSpace& space, const StateSet& phi, const StateSet& psi,
                                const SolverConfig& cfg = {});
NumericVector eventually_probability(const StateSpace& space, const StateSet& psi, const SolverConfig& cfg = {});
/// 1 - P(F !phi).
NumericVector globally_probability(const StateSpace& space, const StateSet& phi, const SolverConfig& cfg = {});
/// k backward steps from the indicator of psi, psi absorbing.
NumericVector bounded_eventually_probability(const StateSpace& space, const StateSet& psi, std::int64_t k,
                                             const SolverConfig& cfg = {});
/// Expected state reward accumulated before reaching psi. Throws DiagnosticError for an unknown reward structure.
NumericVector reach_reward(const StateSpace& space, const std::string& reward, const StateSet& psi,
                           const SolverConfig& cfg = {});

enum class ResultKind { Probability, Boolean, Reward };
const char* kind_name(ResultKind k) noexcept;

struct Unbounded {
    bool operator==(const Unbounded&) const = default;
};

/// Absent (monostate) only for qualitative verdicts decided purely on the graph.
using ResultValue = std::variant<std::monostate, double, Unbounded>;

struct VerificationResult {
    std::string property;
    std::string property_text;  // canonical rendering, without the name
    ResultKind kind = ResultKind::Probability;
    ResultValue value;
    std::optional<bool> verdict;
    bool marginal = false;  // numeric bound within 1e-9 of the threshold
    SolveStats stats;
    double wall_ms = 0.0;
    std::string engine;
    std::string model_fingerprint;
    std::string result_fingerprint;
    std::string checked_at;

    std::optional<double> number() const;
};

/// Checks one property from the initial state. Pure in (space, property, cfg);
/// fingerprints and the timestamp are left for the caller.
VerificationResult check_property(const StateSpace& space, const PropertySpec& property,
                                  const SolverConfig& cfg = {});

/// Checks properties concurrently over the shared space; results keep input
/// order. The first failure is rethrown after all workers finish.
std::vector<VerificationResult> check_properties(const StateSpace& space, const std::vector<PropertySpec>& properties,
                                                 const SolverConfig& cfg = {}, unsigned threads = 0);

}  // namespace cassure
