#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cassure/model.hpp"

namespace cassure {

/// Row-major sparse matrix. Columns inside a row are strictly increasing.
struct SparseMatrix {
    std::vector<std::size_t> row_start{0};
    std::vector<std::uint32_t> columns;
    std::vector<double> values;

    std::size_t rows() const noexcept { return row_start.size() - 1; }
    std::size_t nonzeros() const noexcept { return columns.size(); }

    struct Entry {
        std::uint32_t column;
        double value;
    };
    std::vector<Entry> row(std::size_t r) const;
    double row_sum(std::size_t r) const;
};

struct BuildDiagnostics {
    std::size_t deadlock_states_fixed = 0;
    std::vector<std::size_t> deadlock_samples;  // at most a handful of state indices
    std::size_t nondeterministic_states = 0;    // states where more than one unit was enabled
    std::vector<std::string> range_violations;
};

struct BuildOptions {
    std::size_t state_cap = 10'000'000;
};

/// Explicit DTMC over the reachable valuations of a bound model.
class StateSpace {
public:
    std::size_t size() const noexcept { return state_count_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t initial() const noexcept { return initial_; }

    std::span<const std::int64_t> state(std::size_t index) const {
        return {valuations_.data() + index * width_, width_};
    }
    std::string describe_state(std::size_t index) const;

    const SparseMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::vector<std::uint32_t>>& predecessors() const noexcept { return predecessors_; }
    const BoundModel& model() const noexcept { return *model_; }
    std::shared_ptr<const BoundModel> model_ptr() const noexcept { return model_; }

    /// State reward vector for a declared reward structure, or nullptr.
    const std::vector<double>* rewards(const std::string& name) const;
    const std::map<std::string, std::vector<double>>& all_rewards() const noexcept { return rewards_; }

    const BuildDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    /// Plain-text export: one `src dst prob` line per transition.
    void write_transitions(std::ostream& out) const;
    /// Plain-text export: header of variable names then one line per state.
    void write_valuations(std::ostream& out) const;

private:
    friend StateSpace build_state_space(std::shared_ptr<const BoundModel>, const BuildOptions&);
    friend StateSpace fix_deadlocks(StateSpace);

    void index_predecessors();

    std::shared_ptr<const BoundModel> model_;
    std::size_t width_ = 0;
    std::size_t state_count_ = 0;
    std::size_t initial_ = 0;
    std::vector<std::int64_t> valuations_;
    SparseMatrix matrix_;
    std::vector<std::vector<std::uint32_t>> predecessors_;
    std::map<std::string, std::vector<double>> rewards_;
    BuildDiagnostics diagnostics_;
};

/// Breadth-first exploration from the initial valuation under uniform
/// scheduling of enabled units. Successors of a state are discovered in
/// lexicographic order of their valuations, so the numbering is canonical.
/// States without enabled units are left with empty rows; see fix_deadlocks.
/// Throws DiagnosticError on out-of-range assignments, update probabilities
/// not summing to one, or when the state cap is exceeded.
StateSpace build_state_space(std::shared_ptr<const BoundModel> model, const BuildOptions& options = {});

/// Gives every state with an empty row a probability-one self-loop.
StateSpace fix_deadlocks(StateSpace space);

/// Indices of states satisfying a boolean predicate (resolved against the model if needed).
std::vector<bool> label_states(const StateSpace& space, const ExprPtr& predicate);

}  // namespace cassure
