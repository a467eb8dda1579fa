#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fujimi/dtmc.hpp"
#include "fujimi/graph.hpp"

namespace fujimi {

constexpr double kSolverTolerance = 1e-10;
constexpr std::size_t kDenseSolveLimit = 512;

inline std::size_t solver_iteration_cap(std::size_t unknowns) {
    // 10 * n * ceil(log10(1/tol))
    return 10 * std::max<std::size_t>(unknowns, 1) * 10;
}

namespace detail {

// Dense Gaussian elimination with partial pivoting. A is row-major n x n.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) < 1e-300)
            throw SolverDivergence("singular linear system");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
        x[ri] = acc / a[ri * n + ri];
    }
    return x;
}

}  // namespace detail

// One-step probability mass into `target` from every state.
inline std::vector<double> prob_next(const Dtmc& d, const StateSet& target) {
    std::vector<double> out(d.state_count(), 0.0);
    for (std::size_t s = 0; s < d.state_count(); ++s)
        for (const auto& [t, p] : d.row(static_cast<StateIndex>(s)))
            if (target.contains(t)) out[s] += p;
    return out;
}

// Probability of phi U psi from every state. Graph precomputation pins the
// prob-0 / prob-1 states exactly; the rest is a linear solve (dense below
// kDenseSolveLimit unknowns, Gauss-Seidel otherwise).
inline std::vector<double> prob_until(const Dtmc& d, const StateSet& phi, const StateSet& psi) {
    const std::size_t n = d.state_count();
    StateSet zero = prob0_until(d, phi, psi);
    StateSet one = prob1_until(d, phi, psi);

    std::vector<double> x(n, 0.0);
    for (StateIndex s : one) x[s] = 1.0;

    std::vector<StateIndex> maybe;
    for (std::size_t s = 0; s < n; ++s) {
        StateIndex si = static_cast<StateIndex>(s);
        if (!zero.contains(si) && !one.contains(si)) maybe.push_back(si);
    }
    if (maybe.empty()) return x;

    std::vector<std::uint32_t> pos(n, kTransient);
    for (std::size_t i = 0; i < maybe.size(); ++i) pos[maybe[i]] = static_cast<std::uint32_t>(i);
    const std::size_t m = maybe.size();

    // x_s = sum_{t maybe} P(s,t) x_t + P(s, one-set)
    if (m < kDenseSolveLimit) {
        std::vector<double> a(m * m, 0.0), b(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            a[i * m + i] = 1.0;
            for (const auto& [t, p] : d.row(maybe[i])) {
                if (pos[t] != kTransient)
                    a[i * m + pos[t]] -= p;
                else if (one.contains(t))
                    b[i] += p;
            }
        }
        std::vector<double> sol = detail::dense_solve(std::move(a), std::move(b));
        for (std::size_t i = 0; i < m; ++i) x[maybe[i]] = sol[i];
        return x;
    }

    const std::size_t cap = solver_iteration_cap(m);
    for (std::size_t iter = 0;; ++iter) {
        if (iter >= cap)
            throw SolverDivergence("prob_until: Gauss-Seidel hit iteration cap " +
                                   std::to_string(cap));
        double max_delta = 0.0;
        for (StateIndex s : maybe) {
            double acc = 0.0;
            for (const auto& [t, p] : d.row(s)) acc += p * x[t];
            max_delta = std::max(max_delta, std::abs(acc - x[s]));
            x[s] = acc;
        }
        if (max_delta < kSolverTolerance) break;
    }
    return x;
}

// Probability of reaching psi within t steps along phi-states.
inline std::vector<double> prob_bounded_until(const Dtmc& d, const StateSet& phi,
                                              const StateSet& psi, std::size_t t) {
    const std::size_t n = d.state_count();
    std::vector<double> x(n, 0.0);
    for (StateIndex s : psi) x[s] = 1.0;
    for (std::size_t step = 0; step < t; ++step) {
        std::vector<double> next(n, 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            StateIndex si = static_cast<StateIndex>(s);
            if (psi.contains(si)) {
                next[s] = 1.0;
            } else if (phi.contains(si)) {
                double acc = 0.0;
                for (const auto& [tt, p] : d.row(si)) acc += p * x[tt];
                next[s] = acc;
            }
        }
        x = std::move(next);
    }
    return x;
}

// P(F target) as the special case true U target.
inline std::vector<double> prob_reach(const Dtmc& d, const StateSet& target) {
    return prob_until(d, StateSet::all(d.state_count()), target);
}

// Probability of eventually staying in `a` forever: the probability of
// reaching a BSCC entirely contained in `a`.
inline std::vector<double> prob_fg(const Dtmc& d, const StateSet& a) {
    BsccDecomposition dec = bsccs(d);
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
    return prob_until(d, StateSet::all(d.state_count()), StateSet(std::move(goal)));
}

namespace detail {

// Stationary distribution of one closed component, indexed like `comp`.
// Dense solve of pi (P - I) = 0 with a normalization row for small
// components; normalized Gauss-Seidel sweeps on the balance equations
// otherwise.
inline std::vector<double> component_stationary(const Dtmc& d, const StateSet& comp) {
    const std::size_t m = comp.size();
    std::vector<StateIndex> states(comp.begin(), comp.end());
    std::vector<std::uint32_t> pos(d.state_count(), kTransient);
    for (std::size_t i = 0; i < m; ++i) pos[states[i]] = static_cast<std::uint32_t>(i);

    if (m == 1) return {1.0};

    if (m < kDenseSolveLimit) {
        // Rows are the balance equations (P^T - I) pi = 0; the last row is
        // replaced by sum(pi) = 1.
        std::vector<double> a(m * m, 0.0), b(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            a[i * m + i] -= 1.0;
            for (const auto& [t, p] : d.row(states[i])) a[pos[t] * m + i] += p;
        }
        for (std::size_t c = 0; c < m; ++c) a[(m - 1) * m + c] = 1.0;
        b[m - 1] = 1.0;
        std::vector<double> pi = detail::dense_solve(std::move(a), std::move(b));
        for (double& v : pi) v = std::max(v, 0.0);
        double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
        for (double& v : pi) v /= sum;
        return pi;
    }

    // Gauss-Seidel on the balance equations pi_j = sum_i pi_i P_ij with
    // in-place updates and per-sweep normalization. In-place propagation
    // makes long deterministic corridors (countdown chains) converge in a
    // handful of sweeps where plain power iteration needs O(m^2) steps;
    // renormalization keeps periodic components stable.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> incoming(m);
    std::vector<double> self_loop(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (const auto& [t, p] : d.row(states[i])) {
            if (pos[t] == static_cast<std::uint32_t>(i))
                self_loop[i] = p;
            else
                incoming[pos[t]].emplace_back(static_cast<std::uint32_t>(i), p);
        }

    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    const std::size_t cap = solver_iteration_cap(m);
    for (std::size_t iter = 0;; ++iter) {
        if (iter >= cap)
            throw SolverDivergence("steady_state: Gauss-Seidel hit cap " + std::to_string(cap));
        double max_delta = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (const auto& [i, p] : incoming[j]) acc += pi[i] * p;
            double v = acc / (1.0 - self_loop[j]);  // P_jj < 1 in a multi-state BSCC
            max_delta = std::max(max_delta, std::abs(v - pi[j]));
            pi[j] = v;
        }
        double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
        for (double& v : pi) v /= sum;
        if (max_delta < kSolverTolerance * sum) break;
    }
    return pi;
}

}  // namespace detail

// Long-run fraction-of-time distribution seen from the initial state:
// per-BSCC stationary vectors weighted by the probability of reaching each
// component; transient states get 0. Periodic components are handled in the
// Cesaro (stationary) sense.
inline std::vector<double> steady_state(const Dtmc& d) {
    const std::size_t n = d.state_count();
    BsccDecomposition dec = bsccs(d);
    std::vector<double> out(n, 0.0);
    for (const StateSet& comp : dec.components) {
        std::vector<double> reach_prob = prob_reach(d, comp);
        double weight = reach_prob[d.initial()];
        if (weight <= 0.0) continue;
        std::vector<double> pi = detail::component_stationary(d, comp);
        std::size_t i = 0;
        for (StateIndex s : comp) out[s] = weight * pi[i++];
    }
    return out;
}

inline double steady_state_mass(const Dtmc& d, const StateSet& set) {
    std::vector<double> pi = steady_state(d);
    double mass = 0.0;
    for (StateIndex s : set) mass += pi[s];
    return mass;
}

// (sum_s pi_s * numerator(s)) / (sum_s pi_s * denominator(s))
inline double long_run_ratio(const Dtmc& d, const RewardStructure& numerator,
                             const RewardStructure& denominator) {
    std::vector<double> pi = steady_state(d);
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < pi.size(); ++s) {
        if (pi[s] == 0.0) continue;
        num += pi[s] * numerator.at(static_cast<StateIndex>(s));
        den += pi[s] * denominator.at(static_cast<StateIndex>(s));
    }
    if (den <= 0.0) throw ZeroDenominator();
    return num / den;
}

}  // namespace fujimi
