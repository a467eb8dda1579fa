#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>
#include <sstream>

#include "fujimi/experiments.hpp"
#include "fujimi/io.hpp"
#include "fujimi/pctl.hpp"

using namespace fujimi;

TEST_CASE("qualitative suite passes on the default configuration") {
    FujimiConfig cfg;
    auto results = verify_qualitative(cfg);
    REQUIRE(results.size() == 6);
    for (const auto& r : results) {
        INFO(r.name << (r.formula.empty() ? "" : "  " + r.formula) << "  " << r.note);
        CHECK(r.holds);
    }
    CHECK(all_hold(results));
}

TEST_CASE("qualitative suite reports the degenerate corners honestly") {
    SECTION("noise that can never occur leaves hot start unreachable") {
        FujimiConfig cfg;
        cfg.p_noise = 0.0;
        auto results = verify_qualitative(cfg);
        for (const auto& r : results)
            if (r.name == "hot_start_reachable") CHECK_FALSE(r.holds);
    }
    SECTION("detection that never fires leaves corruption permanent") {
        FujimiConfig cfg;
        cfg.p_detect = 0.0;
        auto results = verify_qualitative(cfg);
        bool no_persist = true, reachable_hot = true;
        for (const auto& r : results) {
            if (r.name == "no_persistent_error") no_persist = r.holds;
            if (r.name == "hot_start_reachable") reachable_hot = r.holds;
            if (r.name == "hot_starts_bounded_by_errors") CHECK(r.holds);
        }
        CHECK_FALSE(no_persist);
        CHECK_FALSE(reachable_hot);
    }
}

TEST_CASE("failure and effectiveness basics") {
    SECTION("noise-free") {
        FujimiConfig cfg;
        cfg.p_noise = 0.0;
        LabeledModel model = build_fujimi(cfg);
        CHECK(compute_failure(model) == 0.0);
        // 3-tick cycle: one application tick out of three
        CHECK(compute_effectiveness(model) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SECTION("effectiveness below 1 with any cycle overhead") {
        FujimiConfig cfg;
        cfg.p_noise = 0.001;
        CHECK(compute_effectiveness(build_fujimi(cfg)) < 1.0);
    }
    SECTION("failure bounded by error mass") {
        FujimiConfig cfg;
        cfg.p_noise = 0.02;
        LabeledModel model = build_fujimi(cfg);
        double hot = compute_failure(model);
        double err = steady_state_mass(model.dtmc, model.dtmc.label("cdata_error"));
        CHECK(hot <= err + kBoundTolerance);
    }
}

TEST_CASE("adt identity") {
    FujimiConfig cfg;
    Assessment a = assess(build_fujimi(cfg));
    CHECK(a.adt == 8760.0 * (1.0 - a.effectiveness));
    CHECK(compute_adt(1.0) == 0.0);
    CHECK(compute_adt(0.999) == Catch::Approx(8.76));
}

TEST_CASE("with_parameter semantics") {
    FujimiConfig base;
    base.tc = 10;
    base.t_nmi = 6;
    base.t_rst = 9;
    SECTION("tc sweep keeps the overhead windows fixed") {
        FujimiConfig c = with_parameter(base, "tc", 20);
        CHECK(c.tc == 20);
        CHECK(c.t_rst - c.t_nmi == 3);
        CHECK(c.tc - c.t_rst == 1);
        CHECK_THROWS_AS(with_parameter(base, "tc", 4), CycleTooShort);
    }
    SECTION("plain parameters") {
        CHECK(with_parameter(base, "m", 3).m == 3);
        CHECK(with_parameter(base, "p_noise", 0.25).p_noise == 0.25);
        CHECK_THROWS_AS(with_parameter(base, "volume", 11), ConfigError);
        CHECK_THROWS_AS(with_parameter(base, "p_noise", 2.0), ConfigError);
    }
}

TEST_CASE("sweeps") {
    FujimiConfig base;
    SECTION("single-point sweep equals the direct computation") {
        SweepResult sweep = run_sweep(base, "p_noise", {0.01});
        REQUIRE(sweep.rows.size() == 1);
        FujimiConfig cfg = with_parameter(base, "p_noise", 0.01);
        LabeledModel model = build_fujimi(cfg);
        CHECK(sweep.rows[0].failure == compute_failure(model));
        CHECK(sweep.rows[0].effectiveness == compute_effectiveness(model));
        CHECK(sweep.rows[0].states == model.dtmc.state_count());
        CHECK(sweep.rows[0].error.empty());
    }
    SECTION("empty sweep gives a header-only CSV") {
        std::ostringstream os;
        write_sweep_csv(os, run_sweep(base, "m", {}));
        CHECK(os.str() ==
              "m,failure,effectiveness,adt,failure_baseline,adt_baseline,states,error\n");
    }
    SECTION("bad points land in the error column, good points survive") {
        FujimiConfig wide = base;
        wide.tc = 10, wide.t_nmi = 6, wide.t_rst = 9;
        SweepResult sweep = run_sweep(wide, "tc", {4, 12});
        REQUIRE(sweep.rows.size() == 2);
        CHECK_FALSE(sweep.rows[0].error.empty());
        CHECK(sweep.rows[1].error.empty());
        std::ostringstream os;
        write_sweep_csv(os, sweep);
        CHECK(os.str().find("leaves no application window") != std::string::npos);
    }
    SECTION("byte-identical output on identical input") {
        std::ostringstream a, b;
        write_sweep_csv(a, run_sweep(base, "p_noise", {0.001, 0.00575, 0.02}));
        write_sweep_csv(b, run_sweep(base, "p_noise", {0.001, 0.00575, 0.02}));
        CHECK(a.str() == b.str());
    }
}

TEST_CASE("model export / import round trip") {
    FujimiConfig cfg;
    LabeledModel model = build_fujimi(cfg);
    const std::string prefix = "test_experiments_model";
    export_model(model.dtmc, prefix);
    Dtmc imported = import_model(prefix);

    CHECK(imported.state_count() == model.dtmc.state_count());
    CHECK(imported.initial() == model.dtmc.initial());
    CHECK(imported.labels() == model.dtmc.labels());

    double before = steady_state_mass(model.dtmc, model.dtmc.label("hot_start"));
    double after = steady_state_mass(imported, imported.label("hot_start"));
    CHECK(std::abs(before - after) < 1e-12);

    for (const char* ext : {".states", ".transitions", ".labels"})
        std::remove((prefix + ext).c_str());
    CHECK_THROWS_AS(import_model(prefix), IoError);
}

TEST_CASE("properties file agrees with the built-in suite") {
    FujimiConfig cfg;
    LabeledModel model = build_fujimi(cfg);
    std::istringstream props(
        "# recovery guarantees\n"
        "P<=0 [ F G cdata_error ]\n"
        "AG ( P>=1 [ F hot_start ] )\n"
        "AG ( (reset_waiting & !has_valid) => P>=1 [ F hot_start ] )\n"
        "\n"
        "S=? [ hot_start ]\n");
    auto results = run_properties(model.dtmc, props);
    REQUIRE(results.size() == 4);
    CHECK(results[0].second.verdict);
    CHECK(results[1].second.verdict);
    CHECK(results[2].second.verdict);
    CHECK(results[3].second.kind == CheckResult::Kind::Value);
    CHECK(results[3].second.value == Catch::Approx(compute_failure(model)).margin(1e-15));

    auto suite = verify_qualitative(cfg);
    CHECK(suite[0].holds == results[0].second.verdict);
    CHECK(suite[2].holds == results[1].second.verdict);
    CHECK(suite[4].holds == results[2].second.verdict);
}

TEST_CASE("long-run ratio invariance under 100 random reward rescalings") {
    FujimiConfig cfg;
    LabeledModel model = build_fujimi(cfg);
    double reference = compute_effectiveness(model);
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> scale_dist(1e-3, 1e3);
    for (int k = 0; k < 100; ++k) {
        double c = scale_dist(rng);
        RewardStructure num("n"), den("d");
        for (const auto& [s, v] : model.weight_available.entries()) num.set(s, c * v);
        for (const auto& [s, v] : model.weight_total.entries()) den.set(s, c * v);
        double scaled = long_run_ratio(model.dtmc, num, den);
        CHECK(scaled == Catch::Approx(reference).epsilon(1e-9));
    }
}
