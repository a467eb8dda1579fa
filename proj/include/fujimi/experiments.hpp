#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fujimi/checker.hpp"
#include "fujimi/fujimi_model.hpp"
#include "fujimi/io.hpp"
#include "fujimi/solvers.hpp"

namespace fujimi {

// ------------------------------------------------------------------
// qualitative property suite
// ------------------------------------------------------------------

struct PropertyResult {
    std::string name;
    std::string formula;  // empty for the structural (non-PCTL) check
    bool holds = false;
    std::optional<StateIndex> counterexample;
    std::string note;
};

namespace detail {

// Structural check of the restore discipline: every transition into a
// fujimi_reset state must consume the smallest-index valid buffer of its
// source, copy that buffer's correctness into cdata, and leave the others
// untouched.
inline PropertyResult check_restore_order(const LabeledModel& model) {
    PropertyResult res;
    res.name = "restore_order";
    res.holds = true;
    const StateSet& resets = model.dtmc.label("fujimi_reset");
    for (const Transition& tr : model.dtmc.transitions()) {
        if (!resets.contains(tr.target)) continue;
        const FujimiState& from = model.states[tr.source];
        const FujimiState& to = model.states[tr.target];
        if (from.phase == Phase::FujimiReset) continue;  // staying in the phase

        std::optional<std::size_t> consumed;
        bool others_intact = true;
        for (std::size_t i = 0; i < from.buffers.size(); ++i) {
            if (from.buffers[i].usage == to.buffers[i].usage) continue;
            if (consumed || to.buffers[i].usage + 1 != from.buffers[i].usage) {
                others_intact = false;
                break;
            }
            consumed = i;
        }
        bool ok = others_intact && consumed.has_value() && from.buffers[*consumed].valid() &&
                  to.cdata_correct == from.buffers[*consumed].correct;
        if (ok)
            for (std::size_t i = 0; i < *consumed; ++i)
                if (from.buffers[i].valid()) ok = false;
        if (!ok) {
            res.holds = false;
            res.counterexample = tr.source;
            res.note = "restore into fujimi_reset does not consume the first valid buffer";
            return res;
        }
    }
    return res;
}

inline PropertyResult check_formula(const LabeledModel& model, std::string name,
                                    const std::string& text) {
    PropertyResult res;
    res.name = std::move(name);
    res.formula = text;
    CheckResult cr = check(model.dtmc, *parse_formula(text));
    res.holds = cr.verdict;
    res.counterexample = cr.counterexample;
    return res;
}

}  // namespace detail

// Runs the six qualitative guarantees of the recovery protocol against the
// model built from `cfg`. Degenerate parameter corners (noise that can never
// occur, detection that never fires) are checked as-is; the note field
// explains a failure when one is structural rather than a modeling bug.
inline std::vector<PropertyResult> verify_qualitative(const FujimiConfig& cfg) {
    cfg.validate();
    LabeledModel model = build_fujimi(cfg);
    std::vector<PropertyResult> out;

    // 1. corrupt data does not persist forever
    out.push_back(detail::check_formula(model, "no_persistent_error",
                                        "P<=0 [ F G cdata_error ]"));

    // 2. restores consume buffers newest-first (structural scan)
    out.push_back(detail::check_restore_order(model));

    // 3. every state can still degrade to a hot start
    out.push_back(detail::check_formula(model, "hot_start_reachable",
                                        "AG ( P>=1 [ F hot_start ] )"));

    // 4. with a valid buffer in hand, recovery is certain once noise stops;
    //    checked on the grafted variant where the environment may fall
    //    permanently silent
    {
        BuildOptions opt;
        opt.graft_epsilon = 0.5;
        LabeledModel grafted = build_fujimi(cfg, opt);
        PropertyResult res;
        res.name = "recovery_under_silence";
        res.formula = "AG ( (reset_waiting & has_valid & !noise_env) => P>=1 [ F !cdata_error ] )";
        CheckResult cr = check(grafted.dtmc, *parse_formula(res.formula));
        res.holds = cr.verdict;
        res.counterexample = cr.counterexample;
        out.push_back(std::move(res));
    }

    // 5. waiting with no valid buffer left inevitably ends in a hot start
    out.push_back(detail::check_formula(model, "exhaustion_forces_hot_start",
                                        "AG ( (reset_waiting & !has_valid) => P>=1 [ F hot_start ] )"));

    // 6. hot starts are no more frequent than the data errors that cause them
    {
        PropertyResult res;
        res.name = "hot_starts_bounded_by_errors";
        res.formula = "S[hot_start] <= S[cdata_error]";
        double hot = steady_state_mass(model.dtmc, model.dtmc.label("hot_start"));
        double err = steady_state_mass(model.dtmc, model.dtmc.label("cdata_error"));
        res.holds = hot <= err + kBoundTolerance;
        if (!res.holds)
            res.note = "hot=" + std::to_string(hot) + " err=" + std::to_string(err);
        out.push_back(std::move(res));
    }
    return out;
}

inline bool all_hold(const std::vector<PropertyResult>& results) {
    for (const auto& r : results)
        if (!r.holds) return false;
    return true;
}

// ------------------------------------------------------------------
// quantitative assessments
// ------------------------------------------------------------------

// Failure measure: long-run fraction of time spent in hot start (recovery
// model) or cold start (baseline).
inline double compute_failure(const LabeledModel& model) {
    const char* label = model.dtmc.has_label("hot_start") ? "hot_start" : "cold_start";
    return steady_state_mass(model.dtmc, model.dtmc.label(label));
}

// Effectiveness: long-run ratio of correctly-delivered application time to
// total weighted time.
inline double compute_effectiveness(const LabeledModel& model) {
    return long_run_ratio(model.dtmc, model.weight_available, model.weight_total);
}

// Annual downtime in hours, from an effectiveness ratio.
inline double compute_adt(double effectiveness) { return 8760.0 * (1.0 - effectiveness); }

struct Assessment {
    double failure = 0.0;
    double effectiveness = 0.0;
    double adt = 0.0;
};

inline Assessment assess(const LabeledModel& model) {
    Assessment a;
    a.failure = compute_failure(model);
    a.effectiveness = compute_effectiveness(model);
    a.adt = compute_adt(a.effectiveness);
    return a;
}

// ------------------------------------------------------------------
// parameter sweeps
// ------------------------------------------------------------------

// Applies `parameter = value` to a copy of `base`. Sweeping tc keeps the
// NMI-to-RST and RST-to-cycle-end window widths fixed and grows the
// application window.
inline FujimiConfig with_parameter(FujimiConfig base, const std::string& parameter, double value) {
    if (parameter == "n") base.n = static_cast<unsigned>(value);
    else if (parameter == "m") base.m = static_cast<unsigned>(value);
    else if (parameter == "tc") {
        unsigned ntor = base.t_rst - base.t_nmi;
        unsigned tail = base.tc - base.t_rst;
        unsigned tc = static_cast<unsigned>(value);
        if (tc <= ntor + tail)
            throw CycleTooShort("tc=" + std::to_string(tc) + " leaves no application window");
        base.tc = tc;
        base.t_nmi = tc - ntor - tail;
        base.t_rst = tc - tail;
    } else if (parameter == "p_noise") base.p_noise = value;
    else if (parameter == "p_detect") base.p_detect = value;
    else if (parameter == "cost_hot_start") base.cost_hot_start = value;
    else if (parameter == "cost_cold_start") base.cost_cold_start = value;
    else if (parameter == "reward_scale") base.reward_scale = value;
    else throw ConfigError("unknown sweep parameter '" + parameter + "'");
    base.validate();
    return base;
}

struct SweepRow {
    double value = 0.0;
    double failure = 0.0;
    double effectiveness = 0.0;
    double adt = 0.0;
    double failure_baseline = 0.0;
    double adt_baseline = 0.0;
    std::size_t states = 0;  // model size at this point
    std::string error;       // non-empty when this point could not be evaluated
};

struct SweepResult {
    std::string parameter;
    std::vector<SweepRow> rows;
};

inline SweepResult run_sweep(const FujimiConfig& base, const std::string& parameter,
                             const std::vector<double>& values) {
    SweepResult result;
    result.parameter = parameter;
    for (double v : values) {
        SweepRow row;
        row.value = v;
        try {
            FujimiConfig cfg = with_parameter(base, parameter, v);
            LabeledModel model = build_fujimi(cfg);
            row.states = model.dtmc.state_count();
            Assessment a = assess(model);
            row.failure = a.failure;
            row.effectiveness = a.effectiveness;
            row.adt = a.adt;
            LabeledModel baseline = build_baseline(cfg);
            row.failure_baseline = compute_failure(baseline);
            row.adt_baseline = compute_adt(compute_effectiveness(baseline));
        } catch (const Error& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << sweep.parameter
       << ",failure,effectiveness,adt,failure_baseline,adt_baseline,states,error\n";
    for (const SweepRow& r : sweep.rows) {
        os << detail::format_probability(r.value) << ",";
        if (r.error.empty()) {
            os << detail::format_probability(r.failure) << ","
               << detail::format_probability(r.effectiveness) << ","
               << detail::format_probability(r.adt) << ","
               << detail::format_probability(r.failure_baseline) << ","
               << detail::format_probability(r.adt_baseline) << ","
               << r.states << ",";
        } else {
            os << ",,,,,,";
        }
        os << r.error << "\n";
    }
}

// ------------------------------------------------------------------
// property files
// ------------------------------------------------------------------

// One formula per line, `#` comments. Returns (formula text, result) pairs.
inline std::vector<std::pair<std::string, CheckResult>> run_properties(const Dtmc& d,
                                                                       std::istream& in) {
    std::vector<std::pair<std::string, CheckResult>> out;
    Checker checker(d);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r\n");
        std::string text = line.substr(b, e - b + 1);
        out.emplace_back(text, checker.check(*parse_formula(text)));
    }
    return out;
}

}  // namespace fujimi
