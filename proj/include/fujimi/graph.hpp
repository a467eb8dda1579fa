#pragma once

#include <cstdint>
#include <vector>

#include "fujimi/dtmc.hpp"

namespace fujimi {

// Forward-reachable set from `from`, inclusive.
inline StateSet reachable(const Dtmc& d, StateIndex from) {
    if (from >= d.state_count())
        throw IndexError("state " + std::to_string(from) + " out of range");
    std::vector<bool> seen(d.state_count(), false);
    std::vector<StateIndex> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        StateIndex s = stack.back();
        stack.pop_back();
        for (const auto& [t, p] : d.row(s)) {
            (void)p;
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
        }
    }
    std::vector<StateIndex> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(static_cast<StateIndex>(i));
    return StateSet(std::move(out));
}

// Backward-reachable set: states that can reach `target` (inclusive),
// optionally moving only through states of `through` (targets are exempt).
inline StateSet backward_reachable(const Dtmc& d, const StateSet& target,
                                   const StateSet* through = nullptr) {
    std::vector<std::vector<StateIndex>> pred(d.state_count());
    for (std::size_t s = 0; s < d.state_count(); ++s)
        for (const auto& [t, p] : d.row(static_cast<StateIndex>(s))) {
            (void)p;
            pred[t].push_back(static_cast<StateIndex>(s));
        }
    std::vector<bool> seen(d.state_count(), false);
    std::vector<StateIndex> stack;
    for (StateIndex s : target) {
        seen[s] = true;
        stack.push_back(s);
    }
    while (!stack.empty()) {
        StateIndex s = stack.back();
        stack.pop_back();
        for (StateIndex p : pred[s]) {
            if (seen[p]) continue;
            if (through && !through->contains(p)) continue;
            seen[p] = true;
            stack.push_back(p);
        }
    }
    std::vector<StateIndex> out;
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(static_cast<StateIndex>(i));
    return StateSet(std::move(out));
}

constexpr std::uint32_t kTransient = 0xffffffffu;

// Bottom strongly connected components: SCCs with no outgoing edge.
// `component[s]` is the BSCC index of s, or kTransient.
struct BsccDecomposition {
    std::vector<StateSet> components;
    std::vector<std::uint32_t> component;  // state -> component index or kTransient

    bool is_transient(StateIndex s) const { return component[s] == kTransient; }
};

// Iterative Tarjan followed by a closedness check per SCC.
inline BsccDecomposition bsccs(const Dtmc& d) {
    const std::size_t n = d.state_count();
    std::vector<std::uint32_t> index(n, kTransient), lowlink(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateIndex> stack;
    std::vector<std::vector<StateIndex>> sccs;
    std::uint32_t next_index = 0;

    struct Frame {
        StateIndex state;
        std::size_t edge;
    };
    std::vector<Frame> call_stack;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kTransient) continue;
        call_stack.push_back({static_cast<StateIndex>(root), 0});
        while (!call_stack.empty()) {
            Frame& f = call_stack.back();
            StateIndex v = f.state;
            if (f.edge == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            const auto& row = d.row(v);
            bool descended = false;
            while (f.edge < row.size()) {
                StateIndex w = row[f.edge].first;
                ++f.edge;
                if (index[w] == kTransient) {
                    call_stack.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<StateIndex> comp;
                StateIndex w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp.push_back(w);
                } while (w != v);
                sccs.push_back(std::move(comp));
            }
            call_stack.pop_back();
            if (!call_stack.empty()) {
                Frame& parent = call_stack.back();
                lowlink[parent.state] = std::min(lowlink[parent.state], lowlink[v]);
            }
        }
    }

    BsccDecomposition out;
    out.component.assign(n, kTransient);
    for (auto& scc : sccs) {
        std::vector<bool> member(n, false);
        for (StateIndex s : scc) member[s] = true;
        bool closed = true;
        for (StateIndex s : scc) {
            for (const auto& [t, p] : d.row(s)) {
                (void)p;
                if (!member[t]) {
                    closed = false;
                    break;
                }
            }
            if (!closed) break;
        }
        if (!closed) continue;
        std::uint32_t id = static_cast<std::uint32_t>(out.components.size());
        for (StateIndex s : scc) out.component[s] = id;
        out.components.push_back(StateSet(std::move(scc)));
    }
    return out;
}

// Exact prob-0 set of phi U psi: states from which psi is unreachable along
// phi-states. Graph analysis only.
inline StateSet prob0_until(const Dtmc& d, const StateSet& phi, const StateSet& psi) {
    StateSet can_reach = backward_reachable(d, psi, &phi);
    return can_reach.complement(d.state_count());
}

// Exact prob-1 set of phi U psi: states that cannot reach the prob-0 region
// while moving through phi \ psi states.
inline StateSet prob1_until(const Dtmc& d, const StateSet& phi, const StateSet& psi) {
    StateSet zero = prob0_until(d, phi, psi);
    StateSet phi_not_psi = phi.intersect(psi.complement(d.state_count()));
    StateSet can_fail = backward_reachable(d, zero, &phi_not_psi);
    return can_fail.complement(d.state_count());
}

// States reaching `target` with probability exactly 1 (F target).
inline StateSet prob1_reach(const Dtmc& d, const StateSet& target) {
    return prob1_until(d, StateSet::all(d.state_count()), target);
}

}  // namespace fujimi
