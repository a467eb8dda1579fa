#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fujimi/errors.hpp"

namespace fujimi {

using StateIndex = std::uint32_t;

// Ordered set of state indices (sorted, duplicate-free).
class StateSet {
public:
    StateSet() = default;
    explicit StateSet(std::vector<StateIndex> indices) : states_(std::move(indices)) {
        std::sort(states_.begin(), states_.end());
        states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    }

    static StateSet all(std::size_t state_count) {
        std::vector<StateIndex> v(state_count);
        for (std::size_t i = 0; i < state_count; ++i) v[i] = static_cast<StateIndex>(i);
        StateSet s;
        s.states_ = std::move(v);
        return s;
    }

    bool contains(StateIndex s) const {
        return std::binary_search(states_.begin(), states_.end(), s);
    }
    bool empty() const { return states_.empty(); }
    std::size_t size() const { return states_.size(); }
    void insert(StateIndex s) {
        auto it = std::lower_bound(states_.begin(), states_.end(), s);
        if (it == states_.end() || *it != s) states_.insert(it, s);
    }

    const std::vector<StateIndex>& indices() const { return states_; }
    auto begin() const { return states_.begin(); }
    auto end() const { return states_.end(); }

    StateSet complement(std::size_t state_count) const {
        std::vector<StateIndex> out;
        out.reserve(state_count - states_.size());
        for (std::size_t i = 0; i < state_count; ++i)
            if (!contains(static_cast<StateIndex>(i))) out.push_back(static_cast<StateIndex>(i));
        return StateSet(std::move(out));
    }

    StateSet intersect(const StateSet& other) const {
        std::vector<StateIndex> out;
        std::set_intersection(states_.begin(), states_.end(), other.states_.begin(),
                              other.states_.end(), std::back_inserter(out));
        return StateSet(std::move(out));
    }

    StateSet unite(const StateSet& other) const {
        std::vector<StateIndex> out;
        std::set_union(states_.begin(), states_.end(), other.states_.begin(),
                       other.states_.end(), std::back_inserter(out));
        return StateSet(std::move(out));
    }

    bool operator==(const StateSet& other) const { return states_ == other.states_; }

private:
    std::vector<StateIndex> states_;
};

// Per-state nonnegative reward assignment; unkeyed states default to 0.
class RewardStructure {
public:
    RewardStructure() = default;
    explicit RewardStructure(std::string name) : name_(std::move(name)) {}

    void set(StateIndex s, double value) {
        if (value < 0.0) throw ConfigError("reward for state " + std::to_string(s) + " is negative");
        if (value != 0.0) rewards_[s] = value;
    }
    double at(StateIndex s) const {
        auto it = rewards_.find(s);
        return it == rewards_.end() ? 0.0 : it->second;
    }
    const std::string& name() const { return name_; }
    const std::map<StateIndex, double>& entries() const { return rewards_; }

private:
    std::string name_;
    std::map<StateIndex, double> rewards_;
};

struct Transition {
    StateIndex source;
    StateIndex target;
    double probability;
};

// Explicit-state DTMC: sparse row-stochastic transition matrix, one initial
// state, and named label sets. Immutable after construction; construction
// validates row sums (tolerance 1e-9), index ranges, and edge uniqueness.
class Dtmc {
public:
    static constexpr double kRowSumTolerance = 1e-9;

    Dtmc(std::size_t state_count, StateIndex initial, const std::vector<Transition>& transitions,
         std::map<std::string, StateSet> labels)
        : state_count_(state_count), initial_(initial), labels_(std::move(labels)) {
        if (state_count_ == 0) throw ConfigError("state_count must be positive");
        if (initial_ >= state_count_)
            throw IndexError("initial state " + std::to_string(initial_) + " out of range");

        rows_.resize(state_count_);
        for (const Transition& t : transitions) {
            if (t.source >= state_count_ || t.target >= state_count_)
                throw IndexError("edge (" + std::to_string(t.source) + ", " +
                                 std::to_string(t.target) + ") out of range");
            if (!(t.probability > 0.0) || t.probability > 1.0)
                throw NonPositiveProbabilityError(t.source, t.target, t.probability);
            rows_[t.source].emplace_back(t.target, t.probability);
        }
        for (std::size_t s = 0; s < state_count_; ++s) {
            auto& row = rows_[s];
            std::sort(row.begin(), row.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double sum = 0.0;
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (k > 0 && row[k].first == row[k - 1].first)
                    throw DuplicateEdgeError(s, row[k].first);
                sum += row[k].second;
            }
            if (std::abs(sum - 1.0) > kRowSumTolerance) throw RowSumError(s, sum);
        }
        for (const auto& [name, set] : labels_) {
            if (name.empty()) throw ConfigError("empty label name");
            for (StateIndex s : set)
                if (s >= state_count_)
                    throw IndexError("label '" + name + "' indexes state " + std::to_string(s) +
                                     " out of range");
        }
    }

    std::size_t state_count() const { return state_count_; }
    StateIndex initial() const { return initial_; }

    // Successors of s, sorted by target index.
    const std::vector<std::pair<StateIndex, double>>& row(StateIndex s) const {
        if (s >= state_count_) throw IndexError("state " + std::to_string(s) + " out of range");
        return rows_[s];
    }

    const std::map<std::string, StateSet>& labels() const { return labels_; }

    bool has_label(const std::string& name) const { return labels_.count(name) != 0; }

    const StateSet& label(const std::string& name) const {
        auto it = labels_.find(name);
        if (it == labels_.end()) throw UnknownLabel(name);
        return it->second;
    }

    double probability(StateIndex from, StateIndex to) const {
        const auto& r = row(from);
        auto it = std::lower_bound(r.begin(), r.end(), to,
                                   [](const auto& e, StateIndex t) { return e.first < t; });
        return (it != r.end() && it->first == to) ? it->second : 0.0;
    }

    std::vector<Transition> transitions() const {
        std::vector<Transition> out;
        for (std::size_t s = 0; s < state_count_; ++s)
            for (const auto& [t, p] : rows_[s]) out.push_back({static_cast<StateIndex>(s), t, p});
        return out;
    }

private:
    std::size_t state_count_;
    StateIndex initial_;
    std::vector<std::vector<std::pair<StateIndex, double>>> rows_;
    std::map<std::string, StateSet> labels_;
};

inline Dtmc build_dtmc(std::size_t state_count, StateIndex initial,
                       const std::vector<Transition>& transitions,
                       std::map<std::string, StateSet> labels = {}) {
    return Dtmc(state_count, initial, transitions, std::move(labels));
}

}  // namespace fujimi
