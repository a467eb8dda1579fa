// Command-line front end: builds recovery / baseline models from flags,
// config files, or application presets, and runs the verification and
// assessment workflows against them.
//
// Exit codes: 0 success, 1 property violation, 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fujimi/fujimi.hpp"

using namespace fujimi;

namespace {

struct ConfigArgs {
    std::string config_file;
    std::string preset;
    double tick_duration_us = 100.0;
    std::optional<unsigned> n, m, tc, t_nmi, t_rst;
    std::optional<double> p_noise_per_10k, p_detect;
    std::optional<double> cost_hot_start, cost_cold_start, reward_scale;
    std::optional<std::size_t> max_states;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key = value config file");
        cmd->add_option("--preset", preset, "application preset: sensor, logger, balloon");
        cmd->add_option("--tick-duration-us", tick_duration_us,
                        "tick granularity for --preset timing (default 100)");
        cmd->add_option("--n", n, "recovery buffers");
        cmd->add_option("--m", m, "usage times per buffer");
        cmd->add_option("--tc", tc, "cycle length in ticks");
        cmd->add_option("--t-nmi", t_nmi, "NMI tick offset");
        cmd->add_option("--t-rst", t_rst, "RST tick offset");
        cmd->add_option("--p-noise-per-10k", p_noise_per_10k,
                        "per-tick noise probability, base 10,000 (57.5 means 57.5/10,000)");
        cmd->add_option("--p-detect", p_detect, "error detection probability");
        cmd->add_option("--cost-hot-start", cost_hot_start, "hot-start weight per tick");
        cmd->add_option("--cost-cold-start", cost_cold_start, "baseline cold-restart weight");
        cmd->add_option("--reward-scale", reward_scale, "divisor applied to cost weights");
        cmd->add_option("--max-states", max_states, "reachable state cap");
    }

    FujimiConfig resolve() const {
        FujimiConfig cfg;
        if (!config_file.empty()) cfg = load_config_file(config_file);
        if (!preset.empty()) {
            FujimiConfig base = cfg;
            bool found = false;
            for (const auto& p : application_presets())
                if (p.name == preset) {
                    TimingSpec t = p.timing;
                    t.tick_duration_us = tick_duration_us;
                    if (tc) t.requested_tc = *tc;
                    cfg = ticks_from_timing(t, base);
                    found = true;
                }
            if (!found) throw ConfigError("unknown preset '" + preset + "'");
        } else if (tc) {
            cfg.tc = *tc;
        }
        if (n) cfg.n = *n;
        if (m) cfg.m = *m;
        if (t_nmi) cfg.t_nmi = *t_nmi;
        if (t_rst) cfg.t_rst = *t_rst;
        if (p_noise_per_10k) cfg.p_noise = *p_noise_per_10k / 10000.0;
        if (p_detect) cfg.p_detect = *p_detect;
        if (cost_hot_start) cfg.cost_hot_start = *cost_hot_start;
        if (cost_cold_start) cfg.cost_cold_start = *cost_cold_start;
        if (reward_scale) cfg.reward_scale = *reward_scale;
        if (max_states) cfg.max_states = *max_states;
        cfg.validate();
        return cfg;
    }
};

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw IoError(path, "cannot open for writing");
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit-state DTMC toolkit for the FUJIMI recovery strategy"};
    app.require_subcommand(1);

    ConfigArgs cfg_args;
    std::string out_path, props_path, script_path, formula_text, param, values_text, label;
    bool baseline = false;
    std::uint64_t seed = 1;
    std::size_t steps = 1'000'000;

    auto* build = app.add_subcommand("build", "build a model and export it");
    cfg_args.attach(build);
    build->add_flag("--baseline", baseline, "build the no-recovery baseline model");
    build->add_option("--out", out_path, "output file prefix")->required();

    auto* check_cmd = app.add_subcommand("check", "evaluate one formula against the model");
    cfg_args.attach(check_cmd);
    check_cmd->add_option("formula", formula_text, "state formula")->required();

    auto* verify = app.add_subcommand("verify", "run the qualitative property suite");
    cfg_args.attach(verify);
    verify->add_option("--props", props_path,
                       "check formulas from a file (one per line) instead of the built-in suite");

    auto* failure = app.add_subcommand("failure", "long-run failure probability");
    cfg_args.attach(failure);
    failure->add_flag("--baseline", baseline, "evaluate the no-recovery baseline");

    auto* effectiveness = app.add_subcommand("effectiveness", "long-run availability ratio");
    cfg_args.attach(effectiveness);
    effectiveness->add_flag("--baseline", baseline, "evaluate the no-recovery baseline");

    auto* adt = app.add_subcommand("adt", "average downtime, hours per year");
    cfg_args.attach(adt);
    adt->add_flag("--baseline", baseline, "evaluate the no-recovery baseline");

    auto* sweep = app.add_subcommand("sweep", "sweep one parameter, CSV output");
    cfg_args.attach(sweep);
    sweep->add_option("--param", param, "parameter to sweep")->required();
    sweep->add_option("--values", values_text,
                      "comma-separated values (p_noise values in the per-10,000 unit)")
        ->required();
    sweep->add_option("--out", out_path, "CSV path (default stdout)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte-Carlo frequency estimate");
    cfg_args.attach(simulate_cmd);
    simulate_cmd->add_option("--label", label, "label to estimate (default hot_start)");
    simulate_cmd->add_option("--steps", steps, "trajectory length (default 10^6)");
    simulate_cmd->add_option("--seed", seed, "RNG seed");

    auto* replay_cmd = app.add_subcommand("replay", "deterministic scripted replay, CSV output");
    cfg_args.attach(replay_cmd);
    replay_cmd->add_option("--script", script_path,
                           "noise script file (default: the published walkthrough schedule)");
    replay_cmd->add_option("--steps", steps, "ticks to replay (default 15 for the walkthrough)");
    replay_cmd->add_option("--out", out_path, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        FujimiConfig cfg = cfg_args.resolve();

        if (build->parsed()) {
            LabeledModel model = baseline ? build_baseline(cfg) : build_fujimi(cfg);
            export_model(model.dtmc, out_path);
            for (const RewardStructure* r : {&model.weight_total, &model.weight_available}) {
                std::ofstream os(out_path + "." + r->name());
                if (!os) throw IoError(out_path + "." + r->name(), "cannot open for writing");
                write_rewards_file(os, *r, model.dtmc.state_count());
            }
            std::cout << "states " << model.dtmc.state_count() << "\n";
            return 0;
        }

        if (check_cmd->parsed()) {
            LabeledModel model = build_fujimi(cfg);
            CheckResult r = check(model.dtmc, *parse_formula(formula_text));
            if (r.kind == CheckResult::Kind::Value) {
                std::cout << detail::format_probability(r.value) << "\n";
                return 0;
            }
            std::cout << (r.verdict ? "true" : "false");
            if (r.counterexample) std::cout << "  counterexample state " << *r.counterexample;
            std::cout << "\n";
            return r.verdict ? 0 : 1;
        }

        if (verify->parsed()) {
            LabeledModel model = build_fujimi(cfg);
            bool ok = true;
            if (!props_path.empty()) {
                std::ifstream in(props_path);
                if (!in) throw IoError(props_path, "cannot open");
                for (const auto& [text, r] : run_properties(model.dtmc, in)) {
                    if (r.kind == CheckResult::Kind::Value) {
                        std::cout << detail::format_probability(r.value) << "  " << text << "\n";
                    } else {
                        std::cout << (r.verdict ? "pass " : "FAIL ") << " " << text << "\n";
                        ok = ok && r.verdict;
                    }
                }
            } else {
                for (const PropertyResult& r : verify_qualitative(cfg)) {
                    std::cout << (r.holds ? "pass " : "FAIL ") << " " << r.name;
                    if (!r.formula.empty()) std::cout << "  " << r.formula;
                    if (!r.holds && r.counterexample)
                        std::cout << "  counterexample state " << *r.counterexample;
                    if (!r.note.empty()) std::cout << "  (" << r.note << ")";
                    std::cout << "\n";
                    ok = ok && r.holds;
                }
            }
            return ok ? 0 : 1;
        }

        if (failure->parsed() || effectiveness->parsed() || adt->parsed()) {
            LabeledModel model = baseline ? build_baseline(cfg) : build_fujimi(cfg);
            double v;
            if (failure->parsed()) v = compute_failure(model);
            else if (effectiveness->parsed()) v = compute_effectiveness(model);
            else v = compute_adt(compute_effectiveness(model));
            std::cout << detail::format_probability(v) << "\n";
            return 0;
        }

        if (sweep->parsed()) {
            std::vector<double> values;
            std::stringstream ss(values_text);
            std::string item;
            while (std::getline(ss, item, ','))
                values.push_back(std::stod(item) / (param == "p_noise" ? 10000.0 : 1.0));
            SweepResult result = run_sweep(cfg, param, values);
            std::ofstream file;
            write_sweep_csv(open_out(file, out_path), result);
            return 0;
        }

        if (simulate_cmd->parsed()) {
            LabeledModel model = build_fujimi(cfg);
            if (label.empty()) label = "hot_start";
            FrequencyEstimate est = estimate_label_frequency(model.dtmc, label, steps, seed);
            std::cout << est.label << " " << detail::format_probability(est.estimate)
                      << " +- " << detail::format_probability(est.std_error) << "  (ticks "
                      << est.sample_ticks << ", seed " << est.seed << ", " << est.generator
                      << ")\n";
            return 0;
        }

        if (replay_cmd->parsed()) {
            NoiseScript script =
                script_path.empty() ? figure_trace_script(cfg) : load_noise_script(script_path);
            if (!replay_cmd->count("--steps") && script_path.empty()) steps = 15;
            std::ofstream file;
            write_trajectory_csv(open_out(file, out_path), replay(cfg, script, steps));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
