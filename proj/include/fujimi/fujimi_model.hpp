#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fujimi/dtmc.hpp"

namespace fujimi {

// Protocol and environment parameters for one modeled configuration.
//
// Costs are expressed in the same unit as the published per-tick weights
// (1 unit = 10 us of real time); reward_scale converts cost units to
// tick-weights, so reward_scale equals the tick duration in 10 us units.
struct FujimiConfig {
    unsigned n = 2;           // recovery buffers
    unsigned m = 2;           // usage times per buffer
    unsigned tc = 3;          // cycle length in ticks
    unsigned t_nmi = 1;       // NMI tick offset within the cycle
    unsigned t_rst = 2;       // RST tick offset within the cycle
    double p_noise = 0.005;   // per-tick noise occurrence probability
    double p_detect = 0.5;    // error detection probability at NMI
    double cost_hot_start = 7600.0;
    double cost_cold_start = 78000.0;
    double reward_scale = 1.0;
    std::size_t max_states = 5'000'000;

    // Noise strikes user_application ticks always; this flag additionally
    // enables it on reset_waiting ticks (the default reading).
    bool noise_in_wait = true;

    void validate() const {
        if (n < 1) throw ConfigError("n must be >= 1");
        if (m < 1) throw ConfigError("m must be >= 1");
        if (tc < 3) throw ConfigError("tc must be >= 3");
        if (!(0 < t_nmi && t_nmi < t_rst && t_rst < tc))
            throw ConfigError("need 0 < t_nmi < t_rst < tc");
        if (p_noise < 0.0 || p_noise > 1.0) throw ConfigError("p_noise must be in [0, 1]");
        if (p_detect < 0.0 || p_detect > 1.0) throw ConfigError("p_detect must be in [0, 1]");
        if (!(cost_hot_start > 0.0)) throw ConfigError("cost_hot_start must be > 0");
        if (!(cost_cold_start > 0.0)) throw ConfigError("cost_cold_start must be > 0");
        if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be > 0");
    }
};

enum class Phase : std::uint8_t {
    UserApplication,
    CopyProcess,
    ResetWaiting,
    FujimiReset,
    HotStart,
    ColdStart,  // baseline model only
};

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::UserApplication: return "user_application";
        case Phase::CopyProcess: return "copy_process";
        case Phase::ResetWaiting: return "reset_waiting";
        case Phase::FujimiReset: return "fujimi_reset";
        case Phase::HotStart: return "hot_start";
        case Phase::ColdStart: return "cold_start";
    }
    return "?";
}

struct BufferStatus {
    bool correct = true;
    std::uint32_t usage = 0;  // 0 means invalid

    bool valid() const { return usage > 0; }
    bool operator==(const BufferStatus&) const = default;
};

struct FujimiState {
    std::uint32_t t = 0;
    Phase phase = Phase::UserApplication;
    bool cdata_correct = true;
    bool noise_free_env = false;  // grafted variant models only
    std::vector<BufferStatus> buffers;

    bool has_valid_buffer() const {
        for (const auto& b : buffers)
            if (b.valid()) return true;
        return false;
    }
    bool operator==(const FujimiState&) const = default;

    std::string key() const {
        std::string k;
        k.reserve(8 + 5 * buffers.size());
        k.push_back(static_cast<char>(t & 0xff));
        k.push_back(static_cast<char>((t >> 8) & 0xff));
        k.push_back(static_cast<char>((t >> 16) & 0xff));
        k.push_back(static_cast<char>(phase));
        k.push_back(cdata_correct ? 1 : 0);
        k.push_back(noise_free_env ? 1 : 0);
        for (const auto& b : buffers) {
            k.push_back(b.correct ? 1 : 0);
            k.push_back(static_cast<char>(b.usage & 0xff));
            k.push_back(static_cast<char>((b.usage >> 8) & 0xff));
        }
        return k;
    }
};

// A DTMC together with its reward structures and the decoded protocol state
// behind each index.
struct LabeledModel {
    Dtmc dtmc;
    RewardStructure weight_total;
    RewardStructure weight_available;
    std::vector<FujimiState> states;
};

struct BuildOptions {
    // Fault-injection hook for checker validation: a builder that forgets to
    // consume buffer usages must be caught by the qualitative suite.
    bool skip_usage_decrement = false;
    // Probability of jumping from each noisy-environment state to its
    // noise-free twin; > 0 builds the grafted two-environment variant used
    // for the recovery-under-silence property. Only graph structure matters
    // to that property, so the exact value is immaterial.
    double graft_epsilon = 0.0;
};

namespace detail {

inline FujimiState initial_fujimi_state(const FujimiConfig& cfg) {
    FujimiState s;
    s.t = 0;
    s.phase = Phase::UserApplication;
    s.cdata_correct = true;
    s.buffers.assign(cfg.n, BufferStatus{true, cfg.m});
    return s;
}

inline void shift_save(FujimiState& s, std::uint32_t m) {
    // pdata_i -> pdata_{i+1} for i = n-1..1, cdata correctness into pdata_1;
    // every buffer becomes valid with usage m.
    for (std::size_t i = s.buffers.size(); i-- > 1;) s.buffers[i].correct = s.buffers[i - 1].correct;
    s.buffers[0].correct = s.cdata_correct;
    for (auto& b : s.buffers) b.usage = m;
}

// Applies the event fired on arrival at tick `t` (already stored in s.t).
inline void apply_arrival_deterministic(FujimiState& s, const FujimiConfig& cfg,
                                        const BuildOptions& opt) {
    if (s.t == cfg.t_rst) {
        // RST: restore from the smallest-index valid buffer, or hot start.
        bool restored = false;
        for (std::size_t i = 0; i < s.buffers.size(); ++i) {
            if (s.buffers[i].valid()) {
                s.cdata_correct = s.buffers[i].correct;
                if (!opt.skip_usage_decrement) --s.buffers[i].usage;
                s.phase = Phase::FujimiReset;
                restored = true;
                break;
            }
        }
        if (!restored) s.phase = Phase::HotStart;
    } else if (s.t == 0) {
        if (s.phase == Phase::HotStart) {
            // Restart from the beginning of the application: full reinit.
            s.cdata_correct = true;
            for (auto& b : s.buffers) b = BufferStatus{true, cfg.m};
        }
        s.phase = Phase::UserApplication;
    }
}

// Successor distribution of one state under the per-tick semantics.
inline std::vector<std::pair<FujimiState, double>> fujimi_step(const FujimiState& from,
                                                               const FujimiConfig& cfg,
                                                               const BuildOptions& opt) {
    std::vector<std::pair<FujimiState, double>> out;

    double p_noise = from.noise_free_env ? 0.0 : cfg.p_noise;
    bool noise_here = (from.phase == Phase::UserApplication ||
                       (cfg.noise_in_wait && from.phase == Phase::ResetWaiting)) &&
                      p_noise > 0.0;

    std::vector<std::pair<bool, double>> noise_branches;  // (noise fired, prob)
    if (noise_here) {
        if (p_noise < 1.0) noise_branches.emplace_back(false, 1.0 - p_noise);
        noise_branches.emplace_back(true, p_noise);
    } else {
        noise_branches.emplace_back(false, 1.0);
    }

    for (auto [noise, p_branch] : noise_branches) {
        FujimiState mid = from;
        mid.t = (from.t + 1) % cfg.tc;
        if (noise) mid.cdata_correct = false;

        if (mid.t == cfg.t_nmi) {
            if (mid.cdata_correct) {
                FujimiState next = mid;
                shift_save(next, cfg.m);
                next.phase = Phase::CopyProcess;
                out.emplace_back(std::move(next), p_branch);
            } else {
                if (cfg.p_detect > 0.0) {
                    FujimiState detected = mid;
                    detected.phase = Phase::ResetWaiting;
                    out.emplace_back(std::move(detected), p_branch * cfg.p_detect);
                }
                if (cfg.p_detect < 1.0) {
                    FujimiState missed = mid;
                    shift_save(missed, cfg.m);
                    missed.phase = Phase::CopyProcess;
                    out.emplace_back(std::move(missed), p_branch * (1.0 - cfg.p_detect));
                }
            }
        } else {
            FujimiState next = mid;
            apply_arrival_deterministic(next, cfg, opt);
            out.emplace_back(std::move(next), p_branch);
        }
    }
    return out;
}

}  // namespace detail

// Builds the explicit reachable-state DTMC of the recovery protocol, with
// phase labels, buffer-usage labels, and the per-tick reward structures.
inline LabeledModel build_fujimi(const FujimiConfig& cfg, const BuildOptions& opt = {}) {
    cfg.validate();
    const bool graft = opt.graft_epsilon > 0.0;
    if (graft && opt.graft_epsilon >= 1.0)
        throw ConfigError("graft_epsilon must be in (0, 1)");

    std::vector<FujimiState> states;
    std::unordered_map<std::string, StateIndex> index_of;
    std::vector<Transition> transitions;

    auto intern = [&](const FujimiState& s) -> StateIndex {
        auto [it, inserted] = index_of.try_emplace(s.key(), static_cast<StateIndex>(states.size()));
        if (inserted) {
            if (states.size() >= cfg.max_states) throw StateSpaceLimit(cfg.max_states);
            states.push_back(s);
        }
        return it->second;
    };

    StateIndex initial = intern(detail::initial_fujimi_state(cfg));
    for (std::size_t i = 0; i < states.size(); ++i) {
        FujimiState from = states[i];  // copy: `states` may reallocate below
        std::map<StateIndex, double> row;
        double stay = 1.0;
        if (graft && !from.noise_free_env) {
            FujimiState twin = from;
            twin.noise_free_env = true;
            row[intern(twin)] += opt.graft_epsilon;
            stay = 1.0 - opt.graft_epsilon;
        }
        for (auto& [succ, p] : detail::fujimi_step(from, cfg, opt)) row[intern(succ)] += stay * p;
        for (auto& [t, p] : row)
            transitions.push_back({static_cast<StateIndex>(i), t, p});
    }

    std::map<std::string, StateSet> labels;
    auto add = [&](const std::string& name, StateIndex s) {
        labels[name].insert(s);
    };
    // Make every advertised label present even when empty.
    for (const char* name : {"user_application", "copy_process", "reset_waiting", "fujimi_reset",
                             "hot_start", "cdata_error", "has_valid"})
        labels[name];
    for (unsigned i = 1; i <= cfg.n; ++i) labels["usage_pdata" + std::to_string(i) + "_gt0"];
    if (graft) labels["noise_env"];

    RewardStructure total("weight_total"), available("weight_available");
    for (std::size_t i = 0; i < states.size(); ++i) {
        const FujimiState& s = states[i];
        StateIndex si = static_cast<StateIndex>(i);
        add(phase_name(s.phase), si);
        if (!s.cdata_correct) add("cdata_error", si);
        if (s.has_valid_buffer()) add("has_valid", si);
        for (std::size_t b = 0; b < s.buffers.size(); ++b)
            if (s.buffers[b].valid()) add("usage_pdata" + std::to_string(b + 1) + "_gt0", si);
        if (graft && !s.noise_free_env) add("noise_env", si);

        // One tick of elapsed time weighs 1 everywhere except hot start,
        // which carries the hot-start cost; available time is
        // user-application time.
        total.set(si, s.phase == Phase::HotStart ? cfg.cost_hot_start / cfg.reward_scale : 1.0);
        if (s.phase == Phase::UserApplication) available.set(si, 1.0);
    }

    Dtmc dtmc(states.size(), initial, transitions, std::move(labels));
    return LabeledModel{std::move(dtmc), std::move(total), std::move(available),
                        std::move(states)};
}

// No-recovery baseline: user application runs until a noise hit, then a cold
// restart of ceil(cost_cold_start / reward_scale) ticks.
inline LabeledModel build_baseline(const FujimiConfig& cfg) {
    cfg.validate();
    const std::size_t restart_ticks =
        static_cast<std::size_t>(std::ceil(cfg.cost_cold_start / cfg.reward_scale));
    const std::size_t n_states = 1 + restart_ticks;

    std::vector<Transition> transitions;
    if (cfg.p_noise > 0.0) {
        if (cfg.p_noise < 1.0) transitions.push_back({0, 0, 1.0 - cfg.p_noise});
        transitions.push_back({0, 1, cfg.p_noise});
        for (std::size_t i = 1; i < restart_ticks; ++i)
            transitions.push_back({static_cast<StateIndex>(i), static_cast<StateIndex>(i + 1), 1.0});
        transitions.push_back({static_cast<StateIndex>(restart_ticks), 0, 1.0});
    } else {
        transitions.push_back({0, 0, 1.0});
    }

    // Cold states are dropped entirely when noise cannot occur.
    const std::size_t kept = cfg.p_noise > 0.0 ? n_states : 1;

    std::map<std::string, StateSet> labels;
    labels["user_application"].insert(0);
    labels["cold_start"];
    for (std::size_t i = 1; i < kept; ++i)
        labels["cold_start"].insert(static_cast<StateIndex>(i));

    RewardStructure total("weight_total"), available("weight_available");
    std::vector<FujimiState> states(kept);
    for (std::size_t i = 0; i < kept; ++i) {
        total.set(static_cast<StateIndex>(i), 1.0);
        states[i].t = static_cast<std::uint32_t>(i);
        states[i].phase = i == 0 ? Phase::UserApplication : Phase::ColdStart;
        states[i].cdata_correct = (i == 0);
    }
    available.set(0, 1.0);

    Dtmc dtmc(kept, 0, transitions, std::move(labels));
    return LabeledModel{std::move(dtmc), std::move(total), std::move(available),
                        std::move(states)};
}

// --- physical-time to tick conversion ---

struct TimingSpec {
    double nmi_process_us = 0.0;
    double rst_process_us = 0.0;
    double ntor_duration_us = 0.0;
    double user_app_time_us = 0.0;
    double hot_start_time_us = 0.0;
    double cold_start_time_us = 0.0;
    double tick_duration_us = 0.0;
    unsigned requested_tc = 0;  // 0 = derive minimal cycle
};

// Converts physical times to the integer tick layout (ceiling per window) and
// the matching cost constants (1 cost unit = 10 us).
inline FujimiConfig ticks_from_timing(const TimingSpec& spec, FujimiConfig base = {}) {
    if (!(spec.tick_duration_us > 0.0)) throw ConfigError("tick_duration must be > 0");
    for (double v : {spec.nmi_process_us, spec.rst_process_us, spec.ntor_duration_us,
                     spec.user_app_time_us, spec.hot_start_time_us, spec.cold_start_time_us})
        if (!(v > 0.0)) throw ConfigError("all timing values must be > 0");

    auto ticks = [&](double us) {
        return static_cast<unsigned>(std::ceil(us / spec.tick_duration_us));
    };
    unsigned ua = ticks(spec.user_app_time_us);
    unsigned ntor = ticks(spec.ntor_duration_us);
    unsigned rst = ticks(spec.rst_process_us);
    unsigned minimal = ua + ntor + rst;

    FujimiConfig cfg = base;
    if (spec.requested_tc != 0) {
        if (spec.requested_tc < minimal)
            throw CycleTooShort("tc=" + std::to_string(spec.requested_tc) +
                                " below user_app + ntor + rst = " + std::to_string(minimal));
        cfg.tc = spec.requested_tc;
        ua = spec.requested_tc - ntor - rst;
    } else {
        cfg.tc = minimal;
    }
    cfg.t_nmi = ua;
    cfg.t_rst = ua + ntor;
    cfg.cost_hot_start = spec.hot_start_time_us / 10.0;
    cfg.cost_cold_start = spec.cold_start_time_us / 10.0;
    cfg.reward_scale = spec.tick_duration_us / 10.0;
    cfg.validate();
    return cfg;
}

// --- measured application presets ---

struct ApplicationPreset {
    std::string name;
    TimingSpec timing;
};

inline const std::vector<ApplicationPreset>& application_presets() {
    static const std::vector<ApplicationPreset> presets = {
        {"sensor", {9.6, 16.2, 500.0, 14900.0, 110.0, 117.0, 100.0, 0}},
        {"logger", {94.0, 114.0, 300.0, 49600.0, 170000.0, 220000.0, 100.0, 0}},
        {"balloon", {66.0, 84.0, 25.0, 14400.0, 76000.0, 780000.0, 100.0, 0}},
    };
    return presets;
}

inline FujimiConfig preset_config(const std::string& name, FujimiConfig base = {}) {
    for (const auto& p : application_presets())
        if (p.name == name) return ticks_from_timing(p.timing, base);
    throw ConfigError("unknown application preset '" + name + "'");
}

// --- flat key = value config files ---

inline FujimiConfig parse_config_text(std::istream& in) {
    FujimiConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        auto eq_pos = line.find('=');
        if (eq_pos == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq_pos));
        std::string value = trim(line.substr(eq_pos + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");

        try {
            if (key == "n") cfg.n = static_cast<unsigned>(std::stoul(value));
            else if (key == "m") cfg.m = static_cast<unsigned>(std::stoul(value));
            else if (key == "tc") cfg.tc = static_cast<unsigned>(std::stoul(value));
            else if (key == "t_nmi") cfg.t_nmi = static_cast<unsigned>(std::stoul(value));
            else if (key == "t_rst") cfg.t_rst = static_cast<unsigned>(std::stoul(value));
            else if (key == "p_noise") cfg.p_noise = std::stod(value);
            else if (key == "p_detect") cfg.p_detect = std::stod(value);
            else if (key == "cost_hot_start") cfg.cost_hot_start = std::stod(value);
            else if (key == "cost_cold_start") cfg.cost_cold_start = std::stod(value);
            else if (key == "reward_scale") cfg.reward_scale = std::stod(value);
            else if (key == "max_states") cfg.max_states = std::stoull(value);
            else if (key == "noise_in_wait") cfg.noise_in_wait = (value == "1" || value == "true");
            else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + value + "'");
        }
    }
    return cfg;
}

inline FujimiConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open");
    return parse_config_text(in);
}

}  // namespace fujimi
