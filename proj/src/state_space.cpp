#include "cassure/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <unordered_map>

namespace cassure {

std::vector<SparseMatrix::Entry> SparseMatrix::row(std::size_t r) const {
    std::vector<Entry> out;
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) out.push_back({columns[k], values[k]});
    return out;
}

double SparseMatrix::row_sum(std::size_t r) const {
    double sum = 0.0;
    for (std::size_t k = row_start[r]; k < row_start[r + 1]; ++k) sum += values[k];
    return sum;
}

std::string StateSpace::describe_state(std::size_t index) const {
    const auto& vars = model_->variables();
    auto s = state(index);
    std::string text = "(";
    for (std::size_t i = 0; i < width_; ++i) {
        if (i) text += ",";
        text += vars[i].name + "=";
        text += vars[i].is_bool ? (s[i] ? "true" : "false") : std::to_string(s[i]);
    }
    return text + ")";
}

const std::vector<double>* StateSpace::rewards(const std::string& name) const {
    auto it = rewards_.find(name);
    return it == rewards_.end() ? nullptr : &it->second;
}

void StateSpace::write_transitions(std::ostream& out) const {
    char buf[32];
    for (std::size_t r = 0; r < matrix_.rows(); ++r)
        for (const auto& [c, p] : matrix_.row(r)) {
            std::snprintf(buf, sizeof buf, "%.17g", p);
            out << r << ' ' << c << ' ' << buf << '\n';
        }
}

void StateSpace::write_valuations(std::ostream& out) const {
    out << "index";
    for (const auto& v : model_->variables()) out << ' ' << v.name;
    out << '\n';
    for (std::size_t i = 0; i < state_count_; ++i) {
        out << i;
        for (auto x : state(i)) out << ' ' << x;
        out << '\n';
    }
}

void StateSpace::index_predecessors() {
    predecessors_.assign(state_count_, {});
    for (std::size_t r = 0; r < matrix_.rows(); ++r)
        for (std::size_t k = matrix_.row_start[r]; k < matrix_.row_start[r + 1]; ++k)
            predecessors_[matrix_.columns[k]].push_back(static_cast<std::uint32_t>(r));
}

namespace {

using Valuation = std::vector<std::int64_t>;

struct ValuationHash {
    std::size_t operator()(const Valuation& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
        return h;
    }
};

// One outcome of a transition unit before scheduling.
struct Outcome {
    double probability;
    Valuation target;
};

class Explorer {
public:
    explicit Explorer(const BoundModel& model) : model_(model) {
        for (std::size_t i = 0; i < model.commands().size(); ++i) {
            const auto& c = model.commands()[i];
            if (c.action.empty()) {
                unlabeled_.push_back(i);
            } else {
                auto& per_module = labeled_[c.action];
                if (per_module.size() <= c.module) per_module.resize(model.module_names().size());
                per_module[c.module].push_back(i);
            }
        }
        for (auto& [label, per_module] : labeled_) {
            std::vector<std::vector<std::size_t>> participants;
            for (auto& cmds : per_module)
                if (!cmds.empty()) participants.push_back(std::move(cmds));
            per_module = std::move(participants);
        }
    }

    // Successor distribution of `s`, merged and sorted by valuation. Sets `units` to the number of enabled units.
    std::vector<Outcome> successors(const Valuation& s, std::size_t& units) {
        std::vector<std::vector<Outcome>> enabled;
        for (auto i : unlabeled_)
            if (guard_holds(i, s)) enabled.push_back(expand({i}, s));
        for (const auto& [label, participants] : labeled_) {
            std::vector<std::vector<std::size_t>> choices;
            for (const auto& cmds : participants) {
                std::vector<std::size_t> on;
                for (auto i : cmds)
                    if (guard_holds(i, s)) on.push_back(i);
                if (on.empty()) {
                    choices.clear();
                    break;
                }
                choices.push_back(std::move(on));
            }
            if (choices.empty()) continue;
            // Every combination of one enabled command per participating module is a unit.
            std::vector<std::size_t> pick(choices.size(), 0);
            while (true) {
                std::vector<std::size_t> combo;
                for (std::size_t m = 0; m < choices.size(); ++m) combo.push_back(choices[m][pick[m]]);
                enabled.push_back(expand(combo, s));
                std::size_t m = 0;
                while (m < choices.size() && ++pick[m] == choices[m].size()) pick[m++] = 0;
                if (m == choices.size()) break;
            }
        }
        units = enabled.size();
        std::map<Valuation, double> merged;
        const double share = units ? 1.0 / static_cast<double>(units) : 0.0;
        for (const auto& unit : enabled)
            for (const auto& o : unit) merged[o.target] += share * o.probability;
        std::vector<Outcome> out;
        out.reserve(merged.size());
        for (auto& [target, p] : merged)
            if (p > 0.0) out.push_back({p, target});
        return out;
    }

private:
    bool guard_holds(std::size_t command, const Valuation& s) const {
        return as_bool(evaluate(*model_.commands()[command].guard, s));
    }

    std::string where(const Valuation& s) const {
        std::string text = "(";
        const auto& vars = model_.variables();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) text += ",";
            text += vars[i].name + "=" + (vars[i].is_bool ? (s[i] ? "true" : "false") : std::to_string(s[i]));
        }
        return text + ")";
    }

    // Outcomes of the synchronized product of `commands` (one per module).
    std::vector<Outcome> expand(const std::vector<std::size_t>& commands, const Valuation& s) const {
        std::vector<Outcome> acc{{1.0, s}};
        for (auto ci : commands) {
            const auto& cmd = model_.commands()[ci];
            std::vector<std::pair<double, const BoundCommand::BoundUpdate*>> branches;
            double total = 0.0;
            for (const auto& u : cmd.updates) {
                double p = u.probability ? as_real(evaluate(*u.probability, s)) : 1.0;
                if (p < 0.0 || p > 1.0 || std::isnan(p))
                    throw DiagnosticError("update probability " + std::to_string(p) + " outside [0,1] in state " +
                                              where(s),
                                          cmd.span);
                total += p;
                branches.push_back({p, &u});
            }
            if (std::abs(total - 1.0) > 1e-10)
                throw DiagnosticError("update probabilities sum to " + std::to_string(total) +
                                          " instead of 1 in state " + where(s),
                                      cmd.span);
            std::vector<Outcome> next;
            for (const auto& o : acc)
                for (const auto& [p, u] : branches) {
                    Valuation t = o.target;
                    for (const auto& [slot, value] : u->assignments) {
                        auto v = evaluate(*value, s);
                        const auto& info = model_.variables()[slot];
                        std::int64_t x = info.is_bool ? static_cast<std::int64_t>(as_bool(v)) : as_int(v);
                        if (x < info.lower || x > info.upper)
                            throw DiagnosticError("assignment " + info.name + "'=" + std::to_string(x) +
                                                      " leaves range [" + std::to_string(info.lower) + ".." +
                                                      std::to_string(info.upper) + "] in state " + where(s),
                                                  cmd.span);
                        t[slot] = x;
                    }
                    next.push_back({o.probability * p, std::move(t)});
                }
            acc = std::move(next);
        }
        return acc;
    }

    const BoundModel& model_;
    std::vector<std::size_t> unlabeled_;
    std::map<std::string, std::vector<std::vector<std::size_t>>> labeled_;
};

}  // namespace

StateSpace build_state_space(std::shared_ptr<const BoundModel> model, const BuildOptions& options) {
    StateSpace space;
    space.model_ = model;
    space.width_ = model->variables().size();

    Explorer explorer(*model);
    std::unordered_map<Valuation, std::uint32_t, ValuationHash> index;
    std::deque<Valuation> frontier;

    auto intern = [&](const Valuation& v) -> std::uint32_t {
        auto [it, fresh] = index.try_emplace(v, static_cast<std::uint32_t>(index.size()));
        if (fresh) {
            if (index.size() > options.state_cap)
                throw DiagnosticError("state space exceeds the cap of " + std::to_string(options.state_cap) +
                                          " states",
                                      SourceSpan{model->ast().source_file, 1, 1, 0});
            space.valuations_.insert(space.valuations_.end(), v.begin(), v.end());
            frontier.push_back(v);
        }
        return it->second;
    };

    intern(model->initial_state());
    space.initial_ = 0;
    while (!frontier.empty()) {
        Valuation s = std::move(frontier.front());
        frontier.pop_front();
        std::size_t units = 0;
        auto outcomes = explorer.successors(s, units);
        if (units > 1) ++space.diagnostics_.nondeterministic_states;
        std::vector<std::pair<std::uint32_t, double>> row;
        for (const auto& o : outcomes) row.push_back({intern(o.target), o.probability});
        std::sort(row.begin(), row.end());
        for (const auto& [c, p] : row) {
            space.matrix_.columns.push_back(c);
            space.matrix_.values.push_back(p);
        }
        space.matrix_.row_start.push_back(space.matrix_.columns.size());
    }
    space.state_count_ = index.size();

    for (const auto& rs : model->rewards()) {
        std::vector<double> r(space.state_count_, 0.0);
        for (std::size_t i = 0; i < space.state_count_; ++i)
            for (const auto& [guard, value] : rs.items)
                if (as_bool(evaluate(*guard, space.state(i)))) r[i] += as_real(evaluate(*value, space.state(i)));
        space.rewards_[rs.name] = std::move(r);
    }
    space.index_predecessors();
    return space;
}

StateSpace fix_deadlocks(StateSpace space) {
    SparseMatrix fixed;
    auto& m = space.matrix_;
    bool changed = false;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (m.row_start[r] == m.row_start[r + 1]) {
            changed = true;
            ++space.diagnostics_.deadlock_states_fixed;
            if (space.diagnostics_.deadlock_samples.size() < 5) space.diagnostics_.deadlock_samples.push_back(r);
            fixed.columns.push_back(static_cast<std::uint32_t>(r));
            fixed.values.push_back(1.0);
        } else {
            for (std::size_t k = m.row_start[r]; k < m.row_start[r + 1]; ++k) {
                fixed.columns.push_back(m.columns[k]);
                fixed.values.push_back(m.values[k]);
            }
        }
        fixed.row_start.push_back(fixed.columns.size());
    }
    if (changed) {
        m = std::move(fixed);
        space.index_predecessors();
    }
    return space;
}

std::vector<bool> label_states(const StateSpace& space, const ExprPtr& predicate) {
    auto resolved = space.model().resolve(predicate);
    if (space.model().type_of_expr(resolved) != ValueType::Bool)
        throw DiagnosticError("state predicate '" + render_expr(predicate, true) + "' is not boolean", predicate->span);
    std::vector<bool> out(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) out[i] = as_bool(evaluate(*resolved, space.state(i)));
    return out;
}

}  // namespace cassure
