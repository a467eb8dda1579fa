#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "fujimi/checker.hpp"
#include "fujimi/experiments.hpp"
#include "fujimi/fujimi_model.hpp"
#include "fujimi/pctl.hpp"
#include "fujimi/sim.hpp"
#include "oracle.hpp"

using namespace fujimi;

TEST_CASE("config validation") {
    FujimiConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.t_rst = 1;  // violates t_nmi < t_rst
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.p_noise = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("noise-free model never reaches hot start") {
    FujimiConfig cfg;
    cfg.p_noise = 0.0;
    LabeledModel model = build_fujimi(cfg);
    CHECK(model.dtmc.label("hot_start").empty());
    CHECK(check(model.dtmc, *parse_formula("P=? [ F hot_start ]")).value == 0.0);
    CHECK(model.dtmc.label("cdata_error").empty());
}

TEST_CASE("reachable state count matches the brute-force enumerator") {
    // written straight from the tick rules, sharing no code with the builder
    FujimiConfig cfgs[] = {{}, {}, {}, {}};
    cfgs[1].n = 2, cfgs[1].m = 2, cfgs[1].tc = 6, cfgs[1].t_nmi = 2, cfgs[1].t_rst = 4,
    cfgs[1].p_noise = 0.01;
    cfgs[2].n = 3, cfgs[2].m = 1, cfgs[2].p_detect = 1.0;
    cfgs[3].n = 1, cfgs[3].m = 3, cfgs[3].tc = 5, cfgs[3].t_nmi = 2, cfgs[3].t_rst = 3,
    cfgs[3].p_detect = 0.25;
    for (const FujimiConfig& cfg : cfgs) {
        LabeledModel model = build_fujimi(cfg);
        auto raw = oracle::enumerate_protocol_states(cfg);
        INFO("n=" << cfg.n << " m=" << cfg.m << " tc=" << cfg.tc);
        CHECK(model.dtmc.state_count() == raw.size());
    }
}

TEST_CASE("reachable invariants: usage bounds and label consistency") {
    FujimiConfig cfg;
    cfg.n = 3;
    cfg.m = 2;
    LabeledModel model = build_fujimi(cfg);
    const StateSet& err = model.dtmc.label("cdata_error");
    const StateSet& valid = model.dtmc.label("has_valid");
    for (std::size_t i = 0; i < model.states.size(); ++i) {
        const FujimiState& s = model.states[i];
        StateIndex si = static_cast<StateIndex>(i);
        for (const auto& b : s.buffers) CHECK(b.usage <= cfg.m);
        CHECK(err.contains(si) == !s.cdata_correct);
        CHECK(valid.contains(si) == s.has_valid_buffer());
        CHECK(s.t < cfg.tc);
    }
    // hot_start and fujimi_reset are mutually exclusive
    CHECK(model.dtmc.label("hot_start").intersect(model.dtmc.label("fujimi_reset")).empty());
}

TEST_CASE("noisy chain has a single BSCC containing the initial state") {
    FujimiConfig cfg;
    cfg.p_noise = 0.02;
    LabeledModel model = build_fujimi(cfg);
    auto dec = bsccs(model.dtmc);
    REQUIRE(dec.components.size() == 1);
    CHECK(dec.components[0].contains(model.dtmc.initial()));
}

TEST_CASE("published walkthrough: two recoveries, then exhaustion") {
    FujimiConfig cfg;  // n=2, m=2, 3-tick cycle
    auto traj = replay(cfg, figure_trace_script(cfg), 15);
    REQUIRE(traj.size() == 16);

    auto first_invalid = [&](std::size_t buf) {
        for (std::size_t k = 0; k < traj.size(); ++k)
            if (traj[k].buffers[buf].usage == 0) return k;
        return traj.size();
    };
    // pdata_1 spent after its second restore, pdata_2 after its second,
    // then the third noise finds nothing valid and forces the hot start.
    CHECK(first_invalid(0) == 5);
    CHECK(first_invalid(1) == 11);
    CHECK(traj[14].phase == Phase::HotStart);
    for (std::size_t k = 0; k < 14; ++k) CHECK(traj[k].phase != Phase::HotStart);
    // both recoveries restored correct data
    CHECK(traj[8].cdata_correct);
    CHECK(traj[11].cdata_correct);
    // hot start reinitializes everything
    CHECK(traj[15].phase == Phase::UserApplication);
    CHECK(traj[15].cdata_correct);
    CHECK(traj[15].buffers[0].usage == cfg.m);
    CHECK(traj[15].buffers[1].usage == cfg.m);
}

TEST_CASE("mutated builder is caught by the restore-order check") {
    FujimiConfig cfg;
    BuildOptions broken;
    broken.skip_usage_decrement = true;
    LabeledModel model = build_fujimi(cfg, broken);
    auto res = detail::check_restore_order(model);
    CHECK_FALSE(res.holds);
    CHECK(res.counterexample.has_value());
    // the intact builder passes
    CHECK(detail::check_restore_order(build_fujimi(cfg)).holds);
}

TEST_CASE("baseline model") {
    SECTION("no noise: full availability") {
        FujimiConfig cfg;
        cfg.p_noise = 0.0;
        LabeledModel base = build_baseline(cfg);
        CHECK(base.dtmc.state_count() == 1);
        CHECK(compute_effectiveness(base) == Catch::Approx(1.0));
    }
    SECTION("renewal balance: p=0.5, one restart tick -> 1/3 cold") {
        FujimiConfig cfg;
        cfg.p_noise = 0.5;
        cfg.cost_cold_start = 1.0;
        LabeledModel base = build_baseline(cfg);
        CHECK(compute_failure(base) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SECTION("long restart corridor") {
        FujimiConfig cfg;
        cfg.p_noise = 0.01;
        cfg.cost_cold_start = 390.0;
        LabeledModel base = build_baseline(cfg);
        // cold fraction = pL / (1 + pL)
        CHECK(compute_failure(base) == Catch::Approx(3.9 / 4.9).epsilon(1e-10));
    }
}

TEST_CASE("tick layout from physical timings") {
    SECTION("balloon row") {
        TimingSpec t{66.0, 84.0, 25.0, 14400.0, 76000.0, 780000.0, 100.0, 0};
        FujimiConfig cfg = ticks_from_timing(t);
        CHECK(cfg.t_nmi == 144);   // 14.4 ms application window at 100 us ticks
        CHECK(cfg.t_rst == 145);   // 25 us NtoR rounds up to one tick
        CHECK(cfg.tc == 146);      // 84 us RST rounds up to one tick
        CHECK(cfg.cost_hot_start == Catch::Approx(7600.0));
        CHECK(cfg.cost_cold_start == Catch::Approx(78000.0));
        CHECK(cfg.reward_scale == Catch::Approx(10.0));
    }
    SECTION("explicit tc below the minimal cycle") {
        TimingSpec t{66.0, 84.0, 25.0, 14400.0, 76000.0, 780000.0, 100.0, 100};
        CHECK_THROWS_AS(ticks_from_timing(t), CycleTooShort);
    }
    SECTION("coarsest granularity gives the 3-tick cycle") {
        TimingSpec t{10.0, 10.0, 10.0, 10.0, 50.0, 100.0, 10.0, 0};
        FujimiConfig cfg = ticks_from_timing(t);
        CHECK(cfg.tc == 3);
        CHECK(cfg.t_nmi == 1);
        CHECK(cfg.t_rst == 2);
    }
    SECTION("named presets resolve") {
        for (const char* name : {"sensor", "logger", "balloon"})
            CHECK_NOTHROW(preset_config(name));
        CHECK_THROWS_AS(preset_config("toaster"), ConfigError);
    }
}

TEST_CASE("key = value config files") {
    std::istringstream in(
        "# comment\n"
        "n = 3\n"
        "m = 1\n"
        "tc = 5\n"
        "t_nmi = 2\n"
        "t_rst = 3\n"
        "p_noise = 0.0025   # inline comment\n"
        "p_detect = 1\n");
    FujimiConfig cfg = parse_config_text(in);
    CHECK(cfg.n == 3);
    CHECK(cfg.m == 1);
    CHECK(cfg.tc == 5);
    CHECK(cfg.p_noise == 0.0025);
    CHECK(cfg.p_detect == 1.0);

    std::istringstream bad("frobnicate = 7\n");
    CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
    std::istringstream junk("n 3\n");
    CHECK_THROWS_AS(parse_config_text(junk), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/path.cfg"), IoError);
}

TEST_CASE("state space cap") {
    FujimiConfig cfg;
    cfg.max_states = 10;
    CHECK_THROWS_AS(build_fujimi(cfg), StateSpaceLimit);
}
