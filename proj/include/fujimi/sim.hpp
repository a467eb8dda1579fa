#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fujimi/dtmc.hpp"
#include "fujimi/fujimi_model.hpp"

namespace fujimi {

// Deterministic noise/detection schedule. Noise fires on the transition
// leaving the listed global tick; detection outcomes are consumed in order
// at every NMI check of corrupt data.
struct NoiseScript {
    std::vector<std::uint64_t> noise_ticks;  // strictly increasing
    std::vector<bool> detected;

    void validate() const {
        for (std::size_t i = 1; i < noise_ticks.size(); ++i)
            if (noise_ticks[i] <= noise_ticks[i - 1])
                throw ConfigError("noise ticks must be strictly increasing");
    }
    bool noise_at(std::uint64_t tick) const {
        return std::binary_search(noise_ticks.begin(), noise_ticks.end(), tick);
    }
};

// A sampled or replayed path through a model; entry k is the state at global
// tick k.
struct Trajectory {
    std::vector<StateIndex> states;

    std::size_t size() const { return states.size(); }
    StateIndex at(std::size_t tick) const { return states[tick]; }
};

inline const char* kGeneratorName = "mt19937_64";

// Samples a trajectory of `steps` transitions from the chain. Identical seed,
// identical trajectory.
inline Trajectory simulate(const Dtmc& d, std::size_t steps, std::uint64_t seed) {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Trajectory out;
    out.states.reserve(steps + 1);
    StateIndex s = d.initial();
    out.states.push_back(s);
    for (std::size_t k = 0; k < steps; ++k) {
        double u = unit(rng);
        double acc = 0.0;
        const auto& row = d.row(s);
        StateIndex next = row.back().first;
        for (const auto& [t, p] : row) {
            acc += p;
            if (u < acc) {
                next = t;
                break;
            }
        }
        s = next;
        out.states.push_back(s);
    }
    return out;
}

struct FrequencyEstimate {
    std::string label;
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t sample_ticks = 0;
    std::uint64_t seed = 0;
    std::string generator = kGeneratorName;
};

// Long-run frequency of a label by simulation: 10% burn-in, then batch-means
// standard error over 30 batches.
inline FrequencyEstimate estimate_label_frequency(const Dtmc& d, const std::string& label,
                                                  std::size_t steps, std::uint64_t seed) {
    if (steps < 10'000) throw ConfigError("need at least 10^4 steps for a frequency estimate");
    const StateSet& set = d.label(label);
    Trajectory traj = simulate(d, steps, seed);

    const std::size_t burn = steps / 10;
    const std::size_t kBatches = 30;
    const std::size_t usable = steps - burn;
    const std::size_t batch = usable / kBatches;

    std::vector<double> means;
    means.reserve(kBatches);
    for (std::size_t b = 0; b < kBatches; ++b) {
        std::size_t begin = burn + b * batch;
        std::size_t count = 0;
        for (std::size_t k = begin; k < begin + batch; ++k)
            if (set.contains(traj.at(k))) ++count;
        means.push_back(static_cast<double>(count) / static_cast<double>(batch));
    }
    double mean = 0.0;
    for (double v : means) mean += v;
    mean /= static_cast<double>(kBatches);
    double var = 0.0;
    for (double v : means) var += (v - mean) * (v - mean);
    var /= static_cast<double>(kBatches - 1);

    FrequencyEstimate est;
    est.label = label;
    est.estimate = mean;
    est.std_error = std::sqrt(var / static_cast<double>(kBatches));
    est.sample_ticks = usable;
    est.seed = seed;
    return est;
}

namespace detail {

// Runs the protocol tick semantics with scripted (or recorded) noise and
// detection outcomes. `draw_noise`/`draw_detect` abstract over script replay
// and random simulation.
template <typename NoiseFn, typename DetectFn>
std::vector<FujimiState> run_protocol(const FujimiConfig& cfg, std::size_t steps,
                                      NoiseFn&& draw_noise, DetectFn&& draw_detect) {
    std::vector<FujimiState> traj;
    traj.reserve(steps + 1);
    FujimiState s = detail::initial_fujimi_state(cfg);
    traj.push_back(s);
    const BuildOptions opt{};
    for (std::uint64_t tick = 0; tick < steps; ++tick) {
        bool noise_window = s.phase == Phase::UserApplication ||
                            (cfg.noise_in_wait && s.phase == Phase::ResetWaiting);
        bool noise = noise_window && draw_noise(tick);

        s.t = (s.t + 1) % cfg.tc;
        if (noise) s.cdata_correct = false;

        if (s.t == cfg.t_nmi) {
            if (s.cdata_correct) {
                detail::shift_save(s, cfg.m);
                s.phase = Phase::CopyProcess;
            } else if (draw_detect(tick)) {
                s.phase = Phase::ResetWaiting;
            } else {
                detail::shift_save(s, cfg.m);
                s.phase = Phase::CopyProcess;
            }
        } else {
            detail::apply_arrival_deterministic(s, cfg, opt);
        }
        traj.push_back(s);
    }
    return traj;
}

}  // namespace detail

// Deterministic replay of the protocol under a noise script. The trajectory
// is returned as decoded protocol states; lookup against a built model's
// state table gives the matching DTMC indices.
inline std::vector<FujimiState> replay(const FujimiConfig& cfg, const NoiseScript& script,
                                       std::size_t steps) {
    cfg.validate();
    script.validate();
    std::size_t next_outcome = 0;
    auto traj = detail::run_protocol(
        cfg, steps, [&](std::uint64_t tick) { return script.noise_at(tick); },
        [&](std::uint64_t) {
            if (next_outcome >= script.detected.size()) throw ScriptExhausted();
            return script.detected[next_outcome++];
        });
    return traj;
}

// Protocol-level simulation that also records the draws it made, so that
// replaying the recorded script reproduces the trajectory exactly.
inline std::vector<FujimiState> simulate_protocol(const FujimiConfig& cfg, std::size_t steps,
                                                  std::uint64_t seed, NoiseScript* recorded = nullptr) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto traj = detail::run_protocol(
        cfg, steps,
        [&](std::uint64_t tick) {
            bool fired = unit(rng) < cfg.p_noise;
            if (fired && recorded) recorded->noise_ticks.push_back(tick);
            return fired;
        },
        [&](std::uint64_t) {
            bool detected = unit(rng) < cfg.p_detect;
            if (recorded) recorded->detected.push_back(detected);
            return detected;
        });
    return traj;
}

// The published worst-case recovery walkthrough for n = 2, m = 2 on the
// default 3-tick cycle: noise in the 1st, 4th and 5th cycles, detection
// failing at the first corrupt save and succeeding afterwards.
inline NoiseScript figure_trace_script(const FujimiConfig& cfg) {
    NoiseScript s;
    s.noise_ticks = {0, 3ull * cfg.tc, 4ull * cfg.tc};
    s.detected = {false, true, true, true, true};
    return s;
}

// --- text formats ---

// Two-column script file: each line is `tick outcome`, where either field may
// be `-`. The first column appends a noise tick, the second a detection
// outcome (`detected` / `missed` / 1 / 0).
inline NoiseScript load_noise_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open");
    NoiseScript script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tick, outcome;
        if (!(ls >> tick)) continue;
        if (!(ls >> outcome)) outcome = "-";
        if (tick != "-") script.noise_ticks.push_back(std::stoull(tick));
        if (outcome != "-") {
            if (outcome == "detected" || outcome == "1")
                script.detected.push_back(true);
            else if (outcome == "missed" || outcome == "0")
                script.detected.push_back(false);
            else
                throw IoError(path, "line " + std::to_string(line_no) +
                                        ": bad detection outcome '" + outcome + "'");
        }
    }
    script.validate();
    return script;
}

// CSV rows: tick, phase, cdata_correct, usage_1..usage_n.
inline void write_trajectory_csv(std::ostream& os, const std::vector<FujimiState>& traj) {
    std::size_t n = traj.empty() ? 0 : traj.front().buffers.size();
    os << "tick,phase,cdata_correct";
    for (std::size_t i = 1; i <= n; ++i) os << ",usage_" << i;
    os << "\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << k << "," << phase_name(traj[k].phase) << "," << (traj[k].cdata_correct ? 1 : 0);
        for (const auto& b : traj[k].buffers) os << "," << b.usage;
        os << "\n";
    }
}

}  // namespace fujimi
