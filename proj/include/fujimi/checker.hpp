#pragma once

#include <optional>
#include <vector>

#include "fujimi/dtmc.hpp"
#include "fujimi/graph.hpp"
#include "fujimi/pctl.hpp"
#include "fujimi/solvers.hpp"

namespace fujimi {

// Boundary tolerance for numeric probability bounds. Qualitative thresholds
// (>= 1, <= 0 and their strict twins) never reach the numeric comparison;
// they are decided by graph analysis.
constexpr double kBoundTolerance = 1e-9;

struct CheckResult {
    enum class Kind { Verdict, Value };
    Kind kind = Kind::Verdict;

    bool verdict = false;
    std::optional<StateIndex> counterexample;  // a violating state, when false

    double value = 0.0;                 // =? queries: value at the initial state
    std::vector<double> values;         // =? queries: full per-state vector
};

namespace detail {

inline bool compare(double v, Comparison cmp, double bound) {
    switch (cmp) {
        case Comparison::Leq: return v <= bound + kBoundTolerance;
        case Comparison::Lt: return v < bound - kBoundTolerance;
        case Comparison::Geq: return v >= bound - kBoundTolerance;
        case Comparison::Gt: return v > bound + kBoundTolerance;
        case Comparison::Query: break;
    }
    throw Error("compare called with a query");
}

}  // namespace detail

class Checker {
public:
    explicit Checker(const Dtmc& d) : d_(d), all_(StateSet::all(d.state_count())) {}

    // Exact satisfaction set of a state formula.
    StateSet sat_set(const StateFormula& f) {
        switch (f.kind) {
            case StateFormula::Kind::True:
                return all_;
            case StateFormula::Kind::Atom:
                return d_.label(f.atom);
            case StateFormula::Kind::Not:
                return sat_set(*f.left).complement(d_.state_count());
            case StateFormula::Kind::And:
                return sat_set(*f.left).intersect(sat_set(*f.right));
            case StateFormula::Kind::Prob:
                return prob_sat(f);
            case StateFormula::Kind::Steady: {
                // The steady operator is evaluated from the initial state, so
                // it is a global property: all states or none.
                if (f.comparison == Comparison::Query)
                    throw Error("sat_set: S=? is a query, not a predicate");
                double v = steady_value(*f.left);
                return detail::compare(v, f.comparison, f.bound) ? all_ : StateSet{};
            }
            case StateFormula::Kind::ForAllGlobally: {
                return ag_counterexample(*f.left) ? StateSet{} : all_;
            }
        }
        throw Error("sat_set: unhandled formula kind");
    }

    // Evaluates f at the initial state; =? queries also carry the vector.
    CheckResult check(const StateFormula& f) {
        CheckResult r;
        if (f.kind == StateFormula::Kind::Prob && f.comparison == Comparison::Query) {
            r.kind = CheckResult::Kind::Value;
            r.values = path_probabilities(*f.path);
            r.value = r.values[d_.initial()];
            return r;
        }
        if (f.kind == StateFormula::Kind::Steady && f.comparison == Comparison::Query) {
            r.kind = CheckResult::Kind::Value;
            StateSet inner = sat_set(*f.left);
            std::vector<double> pi = steady_state(d_);
            r.values.assign(d_.state_count(), 0.0);
            for (StateIndex s : inner) r.values[s] = pi[s];
            r.value = 0.0;
            for (double v : r.values) r.value += v;
            return r;
        }
        if (f.kind == StateFormula::Kind::ForAllGlobally) {
            auto cex = ag_counterexample(*f.left);
            r.verdict = !cex.has_value();
            r.counterexample = cex;
            return r;
        }
        StateSet sat = sat_set(f);
        r.verdict = sat.contains(d_.initial());
        if (!r.verdict) r.counterexample = d_.initial();
        return r;
    }

    // Per-state probability vector of a path formula.
    std::vector<double> path_probabilities(const PathFormula& p) {
        switch (p.kind) {
            case PathFormula::Kind::Next:
                return prob_next(d_, sat_set(*p.left));
            case PathFormula::Kind::Until:
                return prob_until(d_, sat_set(*p.left), sat_set(*p.right));
            case PathFormula::Kind::BoundedUntil:
                return prob_bounded_until(d_, sat_set(*p.left), sat_set(*p.right),
                                          static_cast<std::size_t>(p.step_bound));
            case PathFormula::Kind::Eventually:
                return prob_reach(d_, sat_set(*p.left));
            case PathFormula::Kind::Globally: {
                // Pr(G a) = 1 - Pr(F !a)
                std::vector<double> v =
                    prob_reach(d_, sat_set(*p.left).complement(d_.state_count()));
                for (double& x : v) x = 1.0 - x;
                return v;
            }
            case PathFormula::Kind::EventuallyGlobally:
                return prob_fg(d_, sat_set(*p.left));
        }
        throw Error("path_probabilities: unhandled path kind");
    }

    double steady_value(const StateFormula& inner) {
        return steady_state_mass(d_, sat_set(inner));
    }

private:
    const Dtmc& d_;
    StateSet all_;

    std::optional<StateIndex> ag_counterexample(const StateFormula& inner) {
        StateSet bad = sat_set(inner).complement(d_.state_count());
        StateSet reach = reachable(d_, d_.initial());
        StateSet violating = bad.intersect(reach);
        if (violating.empty()) return std::nullopt;
        return *violating.begin();
    }

    // Qualitative handling of P>=1, P<=0 and the equivalent strict bounds:
    // decided on the graph, never by comparing floats to 0 or 1.
    StateSet prob_sat(const StateFormula& f) {
        bool want_one = (f.comparison == Comparison::Geq && f.bound == 1.0);
        bool want_pos = (f.comparison == Comparison::Gt && f.bound == 0.0);
        bool want_zero = (f.comparison == Comparison::Leq && f.bound == 0.0);
        bool want_sub_one = (f.comparison == Comparison::Lt && f.bound == 1.0);

        if (want_one || want_pos || want_zero || want_sub_one) {
            StateSet one, zero;
            if (qualitative_sets(*f.path, one, zero)) {
                if (want_one) return one;
                if (want_zero) return zero;
                if (want_pos) return zero.complement(d_.state_count());
                return one.complement(d_.state_count());
            }
        }

        std::vector<double> v = path_probabilities(*f.path);
        std::vector<StateIndex> sat;
        for (std::size_t s = 0; s < v.size(); ++s)
            if (detail::compare(v[s], f.comparison, f.bound)) sat.push_back(static_cast<StateIndex>(s));
        return StateSet(std::move(sat));
    }

    // Fills the exact probability-1 and probability-0 satisfaction sets when
    // the path formula admits pure graph analysis.
    bool qualitative_sets(const PathFormula& p, StateSet& one, StateSet& zero) {
        switch (p.kind) {
            case PathFormula::Kind::Next: {
                StateSet target = sat_set(*p.left);
                std::vector<StateIndex> ones, zeros;
                for (std::size_t s = 0; s < d_.state_count(); ++s) {
                    bool all_in = true, none_in = true;
                    for (const auto& [t, pr] : d_.row(static_cast<StateIndex>(s))) {
                        (void)pr;
                        (target.contains(t) ? none_in : all_in) = false;
                    }
                    if (all_in) ones.push_back(static_cast<StateIndex>(s));
                    if (none_in) zeros.push_back(static_cast<StateIndex>(s));
                }
                one = StateSet(std::move(ones));
                zero = StateSet(std::move(zeros));
                return true;
            }
            case PathFormula::Kind::Until: {
                StateSet phi = sat_set(*p.left), psi = sat_set(*p.right);
                one = prob1_until(d_, phi, psi);
                zero = prob0_until(d_, phi, psi);
                return true;
            }
            case PathFormula::Kind::Eventually: {
                StateSet psi = sat_set(*p.left);
                one = prob1_reach(d_, psi);
                zero = prob0_until(d_, all_, psi);
                return true;
            }
            case PathFormula::Kind::Globally: {
                // Pr(G a) = 1 iff Pr(F !a) = 0, and vice versa.
                StateSet not_a = sat_set(*p.left).complement(d_.state_count());
                one = prob0_until(d_, all_, not_a);
                zero = prob1_reach(d_, not_a);
                return true;
            }
            case PathFormula::Kind::EventuallyGlobally: {
                StateSet a = sat_set(*p.left);
                BsccDecomposition dec = bsccs(d_);
                std::vector<StateIndex> goal;
                for (const StateSet& comp : dec.components) {
                    bool inside = true;
                    for (StateIndex s : comp)
                        if (!a.contains(s)) {
                            inside = false;
                            break;
                        }
                    if (inside)
                        for (StateIndex s : comp) goal.push_back(s);
                }
                StateSet goal_set(std::move(goal));
                one = prob1_reach(d_, goal_set);
                zero = prob0_until(d_, all_, goal_set);
                return true;
            }
            case PathFormula::Kind::BoundedUntil:
                return bounded_qualitative_sets(p, one, zero);
        }
        return false;
    }

    bool bounded_qualitative_sets(const PathFormula& p, StateSet& one, StateSet& zero) {
        StateSet phi = sat_set(*p.left), psi = sat_set(*p.right);
        const std::size_t n = d_.state_count();
        std::size_t t = static_cast<std::size_t>(p.step_bound);
        // one: guaranteed to hit psi within t steps; pos: positive probability.
        std::vector<bool> sure(n, false), pos(n, false);
        for (StateIndex s : psi) sure[s] = pos[s] = true;
        for (std::size_t step = 0; step < t; ++step) {
            std::vector<bool> nsure = sure, npos = pos;
            bool changed = false;
            for (std::size_t s = 0; s < n; ++s) {
                StateIndex si = static_cast<StateIndex>(s);
                if (psi.contains(si) || !phi.contains(si)) continue;
                bool all_sure = true, any_pos = false;
                for (const auto& [tt, pr] : d_.row(si)) {
                    (void)pr;
                    all_sure = all_sure && sure[tt];
                    any_pos = any_pos || pos[tt];
                }
                if (all_sure && !nsure[s]) nsure[s] = changed = true;
                if (any_pos && !npos[s]) npos[s] = changed = true;
            }
            sure.swap(nsure);
            pos.swap(npos);
            if (!changed) break;
        }
        std::vector<StateIndex> ones, zeros;
        for (std::size_t s = 0; s < n; ++s) {
            if (sure[s]) ones.push_back(static_cast<StateIndex>(s));
            if (!pos[s]) zeros.push_back(static_cast<StateIndex>(s));
        }
        one = StateSet(std::move(ones));
        zero = StateSet(std::move(zeros));
        return true;
    }
};

inline CheckResult check(const Dtmc& d, const StateFormula& f) { return Checker(d).check(f); }
inline StateSet sat_set(const Dtmc& d, const StateFormula& f) { return Checker(d).sat_set(f); }

}  // namespace fujimi
