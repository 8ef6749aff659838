#include "cassure/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <thread>

namespace cassure {

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

ConvergenceError::ConvergenceError(std::int64_t iterations, double residual)
    : std::runtime_error("no convergence after " + std::to_string(iterations) + " iterations (residual " +
                         std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

const char* kind_name(ResultKind k) noexcept {
    switch (k) {
        case ResultKind::Probability: return "probability";
        case ResultKind::Boolean: return "boolean";
        case ResultKind::Reward: return "reward";
    }
    return "?";
}

std::optional<double> VerificationResult::number() const {
    if (auto d = std::get_if<double>(&value)) return *d;
    if (std::holds_alternative<Unbounded>(value)) return std::numeric_limits<double>::infinity();
    return std::nullopt;
}

namespace {

StateSet complement(StateSet s) {
    s.flip();
    return s;
}

// States that reach psi along a path whose intermediate states satisfy phi.
StateSet backward_reach(const StateSpace& space, const StateSet& phi, const StateSet& psi) {
    StateSet seen = psi;
    std::deque<std::uint32_t> queue;
    for (std::size_t s = 0; s < psi.size(); ++s)
        if (psi[s]) queue.push_back(static_cast<std::uint32_t>(s));
    while (!queue.empty()) {
        auto t = queue.front();
        queue.pop_front();
        for (auto s : space.predecessors()[t])
            if (!seen[s] && phi[s]) {
                seen[s] = true;
                queue.push_back(s);
            }
    }
    return seen;
}

// Solves x_s = b_s + sum_t P(s,t) x_t over `unknown` states; other entries of x are fixed.
SolveStats solve(const StateSpace& space, const StateSet& unknown, const std::vector<double>& b,
                 std::vector<double>& x, const SolverConfig& cfg) {
    cfg.validate();
    const auto& m = space.matrix();
    std::vector<std::uint32_t> rows;
    std::vector<double> diagonal;
    for (std::size_t s = 0; s < unknown.size(); ++s) {
        if (!unknown[s]) continue;
        rows.push_back(static_cast<std::uint32_t>(s));
        double self = 0.0;
        for (std::size_t k = m.row_start[s]; k < m.row_start[s + 1]; ++k)
            if (m.columns[k] == s) self = m.values[k];
        diagonal.push_back(1.0 - self);
    }
    SolveStats stats;
    if (rows.empty()) return stats;

    std::vector<double> previous;
    const bool jacobi = cfg.method == SolveMethod::Jacobi;
    while (true) {
        if (stats.iterations >= cfg.max_iterations) throw ConvergenceError(stats.iterations, stats.residual);
        ++stats.iterations;
        if (jacobi) previous = x;
        const std::vector<double>& read = jacobi ? previous : x;
        double residual = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto s = rows[i];
            double acc = b[s];
            for (std::size_t k = m.row_start[s]; k < m.row_start[s + 1]; ++k)
                if (m.columns[k] != s) acc += m.values[k] * read[m.columns[k]];
            double next = acc / diagonal[i];
            double delta = std::abs(next - x[s]) / std::max(1.0, std::abs(next));
            residual = std::max(residual, delta);
            x[s] = next;
        }
        stats.residual = residual;
        if (residual <= cfg.epsilon) return stats;
    }
}

}  // namespace

StateSet prob0_states(const StateSpace& space, const StateSet& phi, const StateSet& psi) {
    return complement(backward_reach(space, phi, psi));
}

StateSet prob1_states(const StateSpace& space, const StateSet& phi, const StateSet& psi) {
    const auto& m = space.matrix();
    const std::size_t n = space.size();
    StateSet z(n, true);
    while (true) {
        // Inner least fixpoint: states reaching psi through phi-states whose successors all stay in z.
        StateSet closed(n, false);
        for (std::size_t s = 0; s < n; ++s) {
            if (!phi[s] || m.row_start[s] == m.row_start[s + 1]) continue;
            bool inside = true;
            for (std::size_t k = m.row_start[s]; k < m.row_start[s + 1] && inside; ++k) inside = z[m.columns[k]];
            closed[s] = inside;
        }
        StateSet y = backward_reach(space, closed, psi);
        for (std::size_t s = 0; s < n; ++s) y[s] = y[s] && z[s];
        if (y == z) return z;
        z = std::move(y);
    }
}

NumericVector until_probability(const StateSpace& space, const StateSet& phi, const StateSet& psi,
                                const SolverConfig& cfg) {
    const std::size_t n = space.size();
    auto no = prob0_states(space, phi, psi);
    auto yes = prob1_states(space, phi, psi);
    NumericVector out;
    out.values.assign(n, 0.0);
    StateSet unknown(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        if (yes[s]) out.values[s] = 1.0;
        else if (!no[s]) unknown[s] = true;
    }
    std::vector<double> b(n, 0.0);
    out.stats = solve(space, unknown, b, out.values, cfg);
    for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
    return out;
}

NumericVector eventually_probability(const StateSpace& space, const StateSet& psi, const SolverConfig& cfg) {
    return until_probability(space, StateSet(space.size(), true), psi, cfg);
}

NumericVector globally_probability(const StateSpace& space, const StateSet& phi, const SolverConfig& cfg) {
    auto out = eventually_probability(space, complement(phi), cfg);
    for (auto& v : out.values) v = 1.0 - v;
    return out;
}

NumericVector bounded_eventually_probability(const StateSpace& space, const StateSet& psi, std::int64_t k,
                                             const SolverConfig& cfg) {
    cfg.validate();
    if (k < 0) throw std::invalid_argument("step bound must be non-negative");
    const auto& m = space.matrix();
    const std::size_t n = space.size();
    NumericVector out;
    out.values.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        if (psi[s]) out.values[s] = 1.0;
    std::vector<double> next(n);
    for (std::int64_t step = 0; step < k; ++step) {
        for (std::size_t s = 0; s < n; ++s) {
            if (psi[s]) {
                next[s] = 1.0;
                continue;
            }
            double acc = 0.0;
            for (std::size_t j = m.row_start[s]; j < m.row_start[s + 1]; ++j)
                acc += m.values[j] * out.values[m.columns[j]];
            next[s] = std::min(acc, 1.0);
        }
        out.values.swap(next);
    }
    out.stats.iterations = k;
    return out;
}

NumericVector reach_reward(const StateSpace& space, const std::string& reward, const StateSet& psi,
                           const SolverConfig& cfg) {
    const auto* rewards = space.rewards(reward);
    if (!rewards) throw DiagnosticError("unknown reward structure \"" + reward + "\"", SourceSpan{});
    const std::size_t n = space.size();
    auto sure = prob1_states(space, StateSet(n, true), psi);
    NumericVector out;
    out.values.assign(n, 0.0);
    StateSet unknown(n, false);
    std::vector<double> b(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (!sure[s]) {
            out.values[s] = std::numeric_limits<double>::infinity();
        } else if (!psi[s]) {
            unknown[s] = true;
            b[s] = (*rewards)[s];
        }
    }
    out.stats = solve(space, unknown, b, out.values, cfg);
    return out;
}

namespace {

struct Sets {
    StateSet left, right;
};

Sets label_path(const StateSpace& space, const PathFormula& path) {
    Sets sets;
    if (path.left) sets.left = label_states(space, path.left);
    if (path.right) sets.right = label_states(space, path.right);
    return sets;
}

// For F<=k: states where psi is reached within k steps on every path (all) or on some path (!all).
StateSet bounded_reach_sets(const StateSpace& space, const StateSet& psi, std::int64_t k, bool all) {
    const auto& m = space.matrix();
    StateSet cur = psi;
    for (std::int64_t step = 0; step < k; ++step) {
        StateSet next = psi;
        for (std::size_t s = 0; s < space.size(); ++s) {
            if (next[s] || m.row_start[s] == m.row_start[s + 1]) continue;
            bool hit = all;
            for (std::size_t j = m.row_start[s]; j < m.row_start[s + 1]; ++j) {
                bool in = cur[m.columns[j]];
                if (all && !in) {
                    hit = false;
                    break;
                }
                if (!all && in) {
                    hit = true;
                    break;
                }
            }
            next[s] = hit;
        }
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

// Probability vector of the path formula.
NumericVector path_probability(const StateSpace& space, const PathFormula& path, const SolverConfig& cfg) {
    auto sets = label_path(space, path);
    switch (path.kind) {
        case PathKind::Eventually: return eventually_probability(space, sets.right, cfg);
        case PathKind::BoundedEventually:
            return bounded_eventually_probability(space, sets.right, path.step_bound, cfg);
        case PathKind::Globally: return globally_probability(space, sets.left, cfg);
        case PathKind::Until: return until_probability(space, sets.left, sets.right, cfg);
    }
    return {};
}

// Qualitative decision of P>=1 (want_one) or P<=0 at the initial state.
bool decide_qualitative(const StateSpace& space, const PathFormula& path, bool want_one) {
    auto sets = label_path(space, path);
    const std::size_t n = space.size();
    const std::size_t init = space.initial();
    const StateSet everywhere(n, true);
    switch (path.kind) {
        case PathKind::Eventually:
            return want_one ? prob1_states(space, everywhere, sets.right)[init]
                            : prob0_states(space, everywhere, sets.right)[init];
        case PathKind::Until:
            return want_one ? prob1_states(space, sets.left, sets.right)[init]
                            : prob0_states(space, sets.left, sets.right)[init];
        case PathKind::Globally: {
            auto bad = complement(sets.left);
            return want_one ? prob0_states(space, everywhere, bad)[init] : prob1_states(space, everywhere, bad)[init];
        }
        case PathKind::BoundedEventually:
            return want_one ? bounded_reach_sets(space, sets.right, path.step_bound, true)[init]
                            : !bounded_reach_sets(space, sets.right, path.step_bound, false)[init];
    }
    return false;
}

const char* method_tag(const SolverConfig& cfg) {
    return cfg.method == SolveMethod::Jacobi ? "explicit/jacobi" : "explicit/gauss-seidel";
}

}  // namespace

VerificationResult check_property(const StateSpace& space, const PropertySpec& property, const SolverConfig& cfg) {
    auto started = std::chrono::steady_clock::now();
    VerificationResult result;
    result.property = property.name;
    result.property_text = render_property(property, false);
    const std::size_t init = space.initial();

    switch (property.query) {
        case QueryKind::ProbabilityQuery: {
            auto x = path_probability(space, property.path, cfg);
            result.kind = ResultKind::Probability;
            result.value = x.values[init];
            result.stats = x.stats;
            result.engine = property.path.kind == PathKind::BoundedEventually ? "explicit/bounded" : method_tag(cfg);
            break;
        }
        case QueryKind::RewardQuery: {
            if (property.path.kind != PathKind::Eventually)
                throw DiagnosticError("reward queries support only F targets", property.span);
            auto target = label_states(space, property.path.right);
            if (!space.rewards(property.reward_structure))
                throw DiagnosticError("unknown reward structure \"" + property.reward_structure + "\"", property.span);
            auto r = reach_reward(space, property.reward_structure, target, cfg);
            result.kind = ResultKind::Reward;
            double v = r.values[init];
            if (std::isinf(v)) result.value = Unbounded{};
            else result.value = v;
            result.stats = r.stats;
            result.engine = method_tag(cfg);
            break;
        }
        case QueryKind::ProbabilityBound: {
            result.kind = ResultKind::Boolean;
            const bool at_least = property.bound_op == BoundOp::GreaterEqual;
            if ((at_least && property.bound == 0.0) || (!at_least && property.bound == 1.0)) {
                label_path(space, property.path);  // still reject ill-typed predicates
                result.verdict = true;
                result.engine = "trivial";
            } else if ((at_least && property.bound == 1.0) || (!at_least && property.bound == 0.0)) {
                result.verdict = decide_qualitative(space, property.path, at_least);
                result.engine = "explicit/graph";
            } else {
                auto x = path_probability(space, property.path, cfg);
                double p = x.values[init];
                result.value = p;
                result.verdict = at_least ? p >= property.bound : p <= property.bound;
                result.marginal = std::abs(p - property.bound) <= 1e-9;
                result.stats = x.stats;
                result.engine = property.path.kind == PathKind::BoundedEventually ? "explicit/bounded" : method_tag(cfg);
            }
            break;
        }
    }
    result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::vector<VerificationResult> check_properties(const StateSpace& space, const std::vector<PropertySpec>& properties,
                                                 const SolverConfig& cfg, unsigned threads) {
    cfg.validate();
    std::vector<VerificationResult> results(properties.size());
    std::vector<std::exception_ptr> errors(properties.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, properties.size())));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < properties.size(); i = next++) {
            try {
                results[i] = check_property(space, properties[i], cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace cassure
