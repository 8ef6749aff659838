#include "rational_oracle.hpp"

#include <charconv>
#include <deque>
#include <functional>
#include <stdexcept>

namespace cassure::oracle {

mpq_class decimal_to_rational(const std::string& text) {
    std::string digits;
    long exponent = 0;
    bool negative = false, after_point = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            digits += c;
            if (after_point) --exponent;
        } else if (c == '.') {
            after_point = true;
        } else if (c == 'e' || c == 'E') {
            exponent += std::stol(text.substr(i + 1));
            break;
        } else {
            throw std::invalid_argument("not a decimal: " + text);
        }
    }
    if (digits.empty()) digits = "0";
    mpz_class numerator(digits, 10), scale = 1;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    mpq_class q = exponent < 0 ? mpq_class(numerator, scale) : mpq_class(numerator * scale);
    q.canonicalize();
    return negative ? mpq_class(-q) : q;
}

double to_double(const mpq_class& q) { return q.get_d(); }

namespace {

mpq_class literal_to_rational(const cassure::Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return mpq_class(static_cast<long>(*i));
    double d = std::get<double>(v);
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return decimal_to_rational(std::string(buf, end));
}

}  // namespace

RationalOracle::Value RationalOracle::constant(const std::string& name) const {
    if (auto it = constants_.find(name); it != constants_.end()) return it->second;
    const ConstantDecl& decl = *constant_decls_.at(name);
    Value v;
    if (auto o = overrides_.find(name); o != overrides_.end()) v.q = decimal_to_rational(o->second);
    else v = eval(*decl.definition, nullptr);
    constants_[name] = v;
    return v;
}

RationalOracle::Value RationalOracle::eval(const Expr& e, const Valuation* state) const {
    Value out;
    switch (e.kind) {
        case ExprKind::Literal:
            if (auto b = std::get_if<bool>(&e.literal)) {
                out.is_bool = true;
                out.b = *b;
            } else {
                out.q = literal_to_rational(e.literal);
            }
            return out;
        case ExprKind::Identifier: {
            if (constant_decls_.count(e.name)) return constant(e.name);
            if (auto f = formulas_.find(e.name); f != formulas_.end()) return eval(*f->second->definition, state);
            auto slot = slots_.at(e.name);
            if (!state) throw std::logic_error("variable in constant context");
            std::int64_t raw = (*state)[slot];
            if (bool_slot_[slot]) {
                out.is_bool = true;
                out.b = raw != 0;
            } else {
                out.q = mpq_class(static_cast<long>(raw));
            }
            return out;
        }
        case ExprKind::Variable:
            throw std::logic_error("oracle works on unresolved ASTs");
        case ExprKind::Unary: {
            Value a = eval(*e.lhs, state);
            if (e.unary_op == UnaryOp::Not) {
                out.is_bool = true;
                out.b = !a.b;
            } else {
                out.q = -a.q;
            }
            return out;
        }
        case ExprKind::Binary: {
            Value a = eval(*e.lhs, state);
            Value b = eval(*e.rhs, state);
            out.is_bool = true;
            switch (e.binary_op) {
                case BinaryOp::Add: out.is_bool = false; out.q = a.q + b.q; break;
                case BinaryOp::Sub: out.is_bool = false; out.q = a.q - b.q; break;
                case BinaryOp::Mul: out.is_bool = false; out.q = a.q * b.q; break;
                case BinaryOp::Div:
                    if (b.q == 0) throw std::domain_error("division by zero");
                    out.is_bool = false;
                    out.q = a.q / b.q;
                    break;
                case BinaryOp::Eq: out.b = a.is_bool ? a.b == b.b : a.q == b.q; break;
                case BinaryOp::Ne: out.b = a.is_bool ? a.b != b.b : a.q != b.q; break;
                case BinaryOp::Lt: out.b = a.q < b.q; break;
                case BinaryOp::Le: out.b = a.q <= b.q; break;
                case BinaryOp::Gt: out.b = a.q > b.q; break;
                case BinaryOp::Ge: out.b = a.q >= b.q; break;
                case BinaryOp::And: out.b = a.b && b.b; break;
                case BinaryOp::Or: out.b = a.b || b.b; break;
                case BinaryOp::Implies: out.b = !a.b || b.b; break;
            }
            return out;
        }
    }
    throw std::logic_error("bad expression");
}

RationalOracle::RationalOracle(const ModelAst& model, const std::map<std::string, std::string>& overrides)
    : model_(model), overrides_(overrides) {
    for (const auto& c : model.constants) constant_decls_[c.name] = &c;
    for (const auto& f : model.formulas) formulas_[f.name] = &f;

    Valuation init;
    struct Var {
        std::int64_t lo, hi;
    };
    std::vector<Var> ranges;
    for (const auto& m : model.modules)
        for (const auto& v : m.variables) {
            slots_[v.name] = init.size();
            bool_slot_.push_back(v.is_bool);
            chain_.variable_names.push_back(v.name);
            auto as_long = [&](const ExprPtr& e) { return eval(*e, nullptr).q.get_num().get_si(); };
            if (v.is_bool) {
                ranges.push_back({0, 1});
                init.push_back(v.init && eval(*v.init, nullptr).b ? 1 : 0);
            } else {
                ranges.push_back({as_long(v.lower), as_long(v.upper)});
                init.push_back(v.init ? as_long(v.init) : ranges.back().lo);
            }
        }

    // Outcome list of one scheduling unit: (probability, successor).
    using Outcomes = std::vector<std::pair<mpq_class, Valuation>>;

    auto apply = [&](const Valuation& s, const Update& u, Valuation& target) {
        for (const auto& a : u.assignments) {
            Value v = eval(*a.value, &s);
            std::size_t slot = slots_.at(a.variable);
            std::int64_t raw = v.is_bool ? (v.b ? 1 : 0) : v.q.get_num().get_si();
            if (raw < ranges[slot].lo || raw > ranges[slot].hi)
                throw std::out_of_range("assignment out of range for " + a.variable);
            target[slot] = raw;
        }
    };
    auto command_outcomes = [&](const Valuation& s, const Command& c) {
        std::vector<std::pair<mpq_class, const Update*>> out;
        for (const auto& u : c.updates) out.emplace_back(u.probability ? eval(*u.probability, &s).q : mpq_class(1), &u);
        return out;
    };

    std::set<std::string> labels;
    for (const auto& m : model.modules)
        for (const auto& c : m.commands)
            if (!c.action.empty()) labels.insert(c.action);

    std::deque<std::size_t> queue;
    chain_.states.push_back(init);
    chain_.index[init] = 0;
    chain_.rows.emplace_back();
    queue.push_back(0);

    while (!queue.empty()) {
        std::size_t id = queue.front();
        queue.pop_front();
        const Valuation s = chain_.states[id];
        std::vector<Outcomes> units;

        for (const auto& m : model.modules)
            for (const auto& c : m.commands) {
                if (!c.action.empty() || !eval(*c.guard, &s).b) continue;
                Outcomes o;
                for (auto& [p, u] : command_outcomes(s, c)) {
                    Valuation t = s;
                    apply(s, *u, t);
                    o.emplace_back(p, t);
                }
                units.push_back(std::move(o));
            }

        for (const auto& label : labels) {
            std::vector<std::vector<const Command*>> per_module;
            bool blocked = false;
            for (const auto& m : model.modules) {
                bool declares = false;
                std::vector<const Command*> enabled;
                for (const auto& c : m.commands) {
                    if (c.action != label) continue;
                    declares = true;
                    if (eval(*c.guard, &s).b) enabled.push_back(&c);
                }
                if (!declares) continue;
                if (enabled.empty()) blocked = true;
                per_module.push_back(std::move(enabled));
            }
            if (blocked || per_module.empty()) continue;
            // Every combination of one enabled command per participating module.
            std::function<void(std::size_t, std::vector<const Command*>&)> combine =
                [&](std::size_t k, std::vector<const Command*>& chosen) {
                    if (k == per_module.size()) {
                        Outcomes o{{mpq_class(1), s}};
                        for (const Command* c : chosen) {
                            Outcomes next;
                            for (auto& [p0, t0] : o)
                                for (auto& [p, u] : command_outcomes(s, *c)) {
                                    Valuation t = t0;
                                    apply(s, *u, t);
                                    next.emplace_back(p0 * p, t);
                                }
                            o = std::move(next);
                        }
                        units.push_back(std::move(o));
                        return;
                    }
                    for (const Command* c : per_module[k]) {
                        chosen.push_back(c);
                        combine(k + 1, chosen);
                        chosen.pop_back();
                    }
                };
            std::vector<const Command*> chosen;
            combine(0, chosen);
        }

        auto& row = chain_.rows[id];
        if (units.empty()) {
            ++chain_.deadlocks;
            row[id] = 1;
            continue;
        }
        mpq_class share(1, static_cast<unsigned long>(units.size()));
        for (const auto& unit : units)
            for (const auto& [p, t] : unit) {
                if (p == 0) continue;
                auto [it, fresh] = chain_.index.emplace(t, chain_.states.size());
                if (fresh) {
                    chain_.states.push_back(t);
                    chain_.rows.emplace_back();
                    queue.push_back(it->second);
                }
                // `row` may have been invalidated by emplace_back above.
                chain_.rows[id][it->second] += share * p;
            }
    }
}

std::optional<std::size_t> RationalOracle::find(const std::map<std::string, std::int64_t>& values) const {
    for (std::size_t i = 0; i < chain_.states.size(); ++i) {
        bool match = true;
        for (const auto& [name, v] : values)
            if (chain_.states[i][slots_.at(name)] != v) match = false;
        if (match) return i;
    }
    return std::nullopt;
}

std::vector<bool> RationalOracle::satisfying(const ExprPtr& predicate) const {
    std::vector<bool> out(chain_.states.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(*predicate, &chain_.states[i]).b;
    return out;
}

namespace {

std::vector<std::vector<std::size_t>> predecessors(const ExactChain& chain) {
    std::vector<std::vector<std::size_t>> pred(chain.states.size());
    for (std::size_t s = 0; s < chain.rows.size(); ++s)
        for (const auto& [t, p] : chain.rows[s])
            if (p > 0) pred[t].push_back(s);
    return pred;
}

// States that reach `targets` through states in `through` (targets included).
std::vector<bool> backward_reach(const ExactChain& chain, const std::vector<bool>& targets,
                                 const std::vector<bool>& through) {
    auto pred = predecessors(chain);
    std::vector<bool> seen = targets;
    std::deque<std::size_t> work;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) work.push_back(i);
    while (!work.empty()) {
        std::size_t t = work.front();
        work.pop_front();
        for (std::size_t s : pred[t])
            if (!seen[s] && through[s]) {
                seen[s] = true;
                work.push_back(s);
            }
    }
    return seen;
}

/// Solves x_i = b_i + sum_j a_ij x_j over the listed unknowns by sparse
/// Gauss-Jordan elimination, deepest (highest index) unknown first.
std::map<std::size_t, mpq_class> solve(std::map<std::size_t, std::map<std::size_t, mpq_class>> coef,
                                       std::map<std::size_t, mpq_class> rhs) {
    std::map<std::size_t, std::set<std::size_t>> users;
    for (const auto& [i, row] : coef)
        for (const auto& [j, a] : row) users[j].insert(i);
    for (auto k_it = coef.rbegin(); k_it != coef.rend(); ++k_it) {
        std::size_t k = k_it->first;
        auto& row_k = coef[k];
        mpq_class self = 0;
        if (auto s = row_k.find(k); s != row_k.end()) {
            self = s->second;
            row_k.erase(s);
            users[k].erase(k);
        }
        if (self == 1) throw std::domain_error("singular system");
        mpq_class scale = 1 / (1 - self);
        for (auto& [j, a] : row_k) a *= scale;
        rhs[k] *= scale;
        for (std::size_t i : std::set<std::size_t>(users[k])) {
            if (i == k) continue;
            auto& row_i = coef[i];
            mpq_class factor = row_i[k];
            row_i.erase(k);
            rhs[i] += factor * rhs[k];
            for (const auto& [j, a] : row_k) {
                row_i[j] += factor * a;
                users[j].insert(i);
            }
        }
        users[k].clear();
    }
    return rhs;
}

}  // namespace

std::vector<bool> RationalOracle::prob0(const std::vector<bool>& phi, const std::vector<bool>& psi) const {
    auto positive = backward_reach(chain_, psi, phi);
    std::vector<bool> out(positive.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = !positive[i];
    return out;
}

std::vector<bool> RationalOracle::prob1(const std::vector<bool>& phi, const std::vector<bool>& psi) const {
    // Complement of the states that can reach a probability-0 state while
    // staying inside phi & !psi.
    auto no = prob0(phi, psi);
    std::vector<bool> through(no.size());
    for (std::size_t i = 0; i < no.size(); ++i) through[i] = phi[i] && !psi[i];
    auto bad = backward_reach(chain_, no, through);
    std::vector<bool> out(no.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = !bad[i];
    return out;
}

std::vector<mpq_class> RationalOracle::until(const std::vector<bool>& phi, const std::vector<bool>& psi) const {
    auto no = prob0(phi, psi);
    auto yes = prob1(phi, psi);
    std::vector<mpq_class> x(chain_.states.size(), 0);
    std::map<std::size_t, std::map<std::size_t, mpq_class>> coef;
    std::map<std::size_t, mpq_class> rhs;
    for (std::size_t s = 0; s < x.size(); ++s) {
        if (yes[s]) x[s] = 1;
        if (no[s] || yes[s]) continue;
        auto& row = coef[s];
        rhs[s] = 0;
        for (const auto& [t, p] : chain_.rows[s]) {
            if (yes[t]) rhs[s] += p;
            else if (!no[t]) row[t] += p;
        }
    }
    for (const auto& [s, v] : solve(std::move(coef), std::move(rhs))) x[s] = v;
    return x;
}

mpq_class RationalOracle::bounded_eventually_by_paths(std::size_t from, const std::vector<bool>& psi,
                                                      std::int64_t k) const {
    std::function<mpq_class(std::size_t, std::int64_t)> walk = [&](std::size_t s, std::int64_t left) -> mpq_class {
        if (psi[s]) return 1;
        if (left == 0) return 0;
        mpq_class total = 0;
        for (const auto& [t, p] : chain_.rows[s]) total += p * walk(t, left - 1);
        return total;
    };
    return walk(from, k);
}

std::vector<std::optional<mpq_class>> RationalOracle::reach_reward(const std::string& reward,
                                                                   const std::vector<bool>& psi) const {
    const RewardStructureDecl* decl = model_.find_rewards(reward);
    if (!decl) throw std::invalid_argument("unknown reward structure " + reward);
    std::vector<bool> all(chain_.states.size(), true);
    auto sure = prob1(all, psi);
    std::vector<std::optional<mpq_class>> out(chain_.states.size());
    std::map<std::size_t, std::map<std::size_t, mpq_class>> coef;
    std::map<std::size_t, mpq_class> rhs;
    for (std::size_t s = 0; s < out.size(); ++s) {
        if (!sure[s]) continue;
        out[s] = mpq_class(0);
        if (psi[s]) continue;
        mpq_class r = 0;
        for (const auto& item : decl->items)
            if (eval(*item.guard, &chain_.states[s]).b) r += eval(*item.reward, &chain_.states[s]).q;
        rhs[s] = r;
        auto& row = coef[s];
        for (const auto& [t, p] : chain_.rows[s])
            if (!psi[t]) row[t] += p;
    }
    for (const auto& [s, v] : solve(std::move(coef), std::move(rhs))) out[s] = v;
    return out;
}

ExactResult RationalOracle::check(const PropertySpec& property) const {
    const PathFormula& path = property.path;
    std::vector<bool> all(chain_.states.size(), true);
    auto negate = [](std::vector<bool> v) {
        for (auto&& b : v) b = !b;
        return v;
    };
    std::size_t s0 = chain_.initial;
    ExactResult r;

    if (property.query == QueryKind::RewardQuery) {
        r.kind = ExactResult::Kind::Reward;
        auto values = reach_reward(property.reward_structure, satisfying(path.right));
        if (values[s0]) r.value = *values[s0];
        else r.infinite = true;
        return r;
    }

    // Probability of the path formula at the initial state.
    auto probability = [&]() -> mpq_class {
        switch (path.kind) {
            case PathKind::Eventually: return until(all, satisfying(path.right))[s0];
            case PathKind::Until: return until(satisfying(path.left), satisfying(path.right))[s0];
            case PathKind::Globally: return 1 - until(all, negate(satisfying(path.left)))[s0];
            case PathKind::BoundedEventually:
                return bounded_eventually_by_paths(s0, satisfying(path.right), path.step_bound);
        }
        return 0;
    };

    if (property.query == QueryKind::ProbabilityQuery) {
        r.value = probability();
        return r;
    }
    r.kind = ExactResult::Kind::Verdict;
    r.value = probability();
    mpq_class bound = literal_to_rational(cassure::Value(property.bound));
    r.verdict = property.bound_op == BoundOp::GreaterEqual ? r.value >= bound : r.value <= bound;
    return r;
}

}  // namespace cassure::oracle
