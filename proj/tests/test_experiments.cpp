#include "mosindy/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mosindy;

namespace {

SweepSpec only(std::vector<DataConfig> configs, bool mo) {
    SweepSpec s;
    s.standard_configs = std::move(configs);
    s.multi_objective = mo;
    return s;
}

const SweepCell& best_of(const SweepResult& r, DataConfig c, Method m) {
    for (const auto& b : r.best) {
        if (b.config == c && b.method == m) return b;
    }
    throw std::runtime_error("no best cell");
}

}  // namespace

TEST(Hyperparameters, SweepBestValuesVerbatim) {
    const auto s = sweep_hyperparameters("saddle_node");
    EXPECT_EQ(s.lambda_single_transient, 1.0);
    EXPECT_EQ(s.lambda_attractors, 0.0001);
    EXPECT_EQ(s.lambda_combined, 0.0105);
    EXPECT_EQ(s.lambda_full, 0.0095);
    EXPECT_EQ(s.lambda_multi_objective, 0.0045);
    EXPECT_EQ(s.alpha_multi_objective, 1e20);
    const auto h = sweep_hyperparameters("hopf");
    EXPECT_EQ(h.lambda_attractors, 0.3944);
    EXPECT_EQ(h.lambda_combined, 0.2719);
    EXPECT_EQ(h.lambda_full, 0.0003);
    EXPECT_EQ(h.lambda_multi_objective, 0.0060);
    EXPECT_EQ(h.alpha_multi_objective, 1e4);
    const auto sl = sweep_hyperparameters("stuart_landau");
    EXPECT_EQ(sl.lambda_single_transient, 0.0001);
    EXPECT_EQ(sl.lambda_attractors, 0.0152);
    EXPECT_EQ(sl.lambda_combined, 0.0034);
    EXPECT_EQ(sl.lambda_multi_objective, 0.0087);
    EXPECT_EQ(sl.alpha_multi_objective, 1e4);
    const auto l = sweep_hyperparameters("lorenz");
    EXPECT_EQ(l.lambda_single_transient, 0.0072);
    EXPECT_EQ(l.lambda_full, 0.0001);
    EXPECT_EQ(l.alpha_multi_objective, 1e20);
    EXPECT_THROW((void)sweep_hyperparameters("duffing"), Error);
}

TEST(Hyperparameters, RobustnessValuesVerbatim) {
    auto check = [](const char* sys, double ls, double lm, double a) {
        const auto r = robustness_hyperparameters(sys);
        EXPECT_EQ(r.lambda_standard, ls) << sys;
        EXPECT_EQ(r.lambda_multi_objective, lm) << sys;
        EXPECT_EQ(r.alpha_multi_objective, a) << sys;
        EXPECT_EQ(default_robustness_spec(sys).hyperparameters.alpha_multi_objective, a) << sys;
    };
    check("saddle_node", 0.15, 0.15, 1e14);
    check("hopf", 0.06, 0.06, 1e14);
    check("stuart_landau", 0.0087, 0.0087, 1e10);
    check("lorenz", 0.01, 0.01, 1e14);
}

TEST(SweepSpec, DefaultGrids) {
    const SweepSpec s;
    ASSERT_EQ(s.lambda_grid.size(), 100u);
    EXPECT_NEAR(s.lambda_grid.front(), 1e-4, 1e-18);
    EXPECT_NEAR(s.lambda_grid.back(), 1.0, 1e-14);
    for (std::size_t i = 2; i < s.lambda_grid.size(); ++i) {
        EXPECT_NEAR(s.lambda_grid[i] / s.lambda_grid[i - 1], s.lambda_grid[1] / s.lambda_grid[0], 1e-12);
    }
    ASSERT_EQ(s.alpha_grid.size(), 11u);
    for (std::size_t i = 0; i < 11; ++i) {
        const double want = std::pow(10.0, -20.0 + 4.0 * static_cast<double>(i));
        EXPECT_NEAR(s.alpha_grid[i] / want, 1.0, 1e-12);
    }
    EXPECT_EQ(s.standard_configs.size(), 4u);
    EXPECT_NO_THROW(s.validate());
}

TEST(SweepSpec, ValidationRejectsBadGrids) {
    auto bad = [](auto mutate) {
        SweepSpec s;
        mutate(s);
        try {
            s.validate();
            return false;
        } catch (const Error& e) {
            return e.code() == ErrorCode::Config;
        }
    };
    EXPECT_TRUE(bad([](SweepSpec& s) { s.lambda_grid.clear(); }));
    EXPECT_TRUE(bad([](SweepSpec& s) { s.alpha_grid = {1.0, -1.0}; }));
    EXPECT_TRUE(bad([](SweepSpec& s) { s.lambda_grid = {0.1, 0.01}; }));
    EXPECT_TRUE(bad([](SweepSpec& s) { s.lambda_grid = {0.0, 0.1}; }));
    EXPECT_TRUE(bad([](SweepSpec& s) { s.lambda_grid = {0.5, 2.0}; }));
}

TEST(Sweep, CellCountCoversEveryConfigAndAlpha) {
    const Dataset ds = generate_dataset("saddle_node");
    const SweepResult r = run_sweep(ds, SweepSpec{});
    EXPECT_EQ(r.cells.size(), 4u * 100u + 11u * 100u);
    EXPECT_EQ(r.best.size(), 5u);
    EXPECT_EQ(r.system, "saddle_node");
}

TEST(Sweep, HopfMultiObjectiveBestMatches) {
    const Dataset ds = generate_dataset("hopf");
    const SweepResult r = run_sweep(ds, only({}, true));
    const SweepCell& b = best_of(r, DataConfig::Combined, Method::MultiObjective);
    EXPECT_FALSE(b.failed);
    EXPECT_TRUE(b.structure_match);
}

TEST(Sweep, HopfSingleTransientNeverMatches) {
    const Dataset ds = generate_dataset("hopf");
    const SweepResult r = run_sweep(ds, only({DataConfig::SingleTransient}, false));
    ASSERT_EQ(r.cells.size(), 100u);
    for (const auto& c : r.cells) EXPECT_FALSE(c.structure_match) << "lambda=" << c.lambda;
}

TEST(Sweep, LorenzAttractorsMatchSomewhere) {
    const Dataset ds = generate_dataset("lorenz");
    const SweepResult r = run_sweep(ds, only({DataConfig::Attractors}, false));
    bool any = false;
    for (const auto& c : r.cells) any = any || c.structure_match;
    EXPECT_TRUE(any);
    EXPECT_TRUE(best_of(r, DataConfig::Attractors, Method::Standard).structure_match);
}

TEST(Sweep, BestIsArgMinWithTiesToLargerLambda) {
    const Dataset ds = generate_dataset("saddle_node", {}, true);
    const SweepResult r = run_sweep(ds, only({DataConfig::Full}, false));
    const SweepCell& b = best_of(r, DataConfig::Full, Method::Standard);
    for (const auto& c : r.cells) {
        if (c.failed) continue;
        EXPECT_GE(c.error, b.error);
        if (c.error == b.error) {
            EXPECT_LE(c.lambda, b.lambda);
        }
    }
}

TEST(Sweep, FailedCellsCarrySentinel) {
    // with every transient emptied the single-transient selection has no rows at all
    Dataset ds = generate_dataset("saddle_node");
    for (auto& t : ds.transients) {
        t.states.resize(0, 1);
        t.derivatives.resize(0, 1);
        t.parameters.resize(0);
    }
    SweepSpec s = only({DataConfig::SingleTransient}, false);
    s.lambda_grid = {0.01, 0.1};
    const SweepResult r = run_sweep(ds, s);
    ASSERT_EQ(r.cells.size(), 2u);
    for (const auto& c : r.cells) {
        EXPECT_TRUE(c.failed);
        EXPECT_TRUE(std::isnan(c.error));
        EXPECT_FALSE(c.message.empty());
    }
    ASSERT_EQ(r.best.size(), 1u);
    EXPECT_TRUE(r.best[0].failed);
}

TEST(Comparison, RowsUseSweepHyperparameters) {
    const Dataset ds = generate_dataset("stuart_landau");
    const auto rows = compare_methods(ds);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[4].method, Method::MultiObjective);
    EXPECT_EQ(rows[4].config, DataConfig::Combined);
    EXPECT_EQ(rows[4].lambda, 0.0087);
    EXPECT_EQ(rows[4].alpha, 1e4);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(rows[i].alpha, 1.0);
    EXPECT_EQ(rows[0].lambda, 0.0001);
    EXPECT_EQ(rows[0].report.provenance["data"], "single_transient");
    EXPECT_TRUE(rows[0].report.condition_numbers.count("theta"));

    const auto saddle = compare_methods(generate_dataset("saddle_node"));
    EXPECT_EQ(saddle[4].lambda, 0.0045);
    EXPECT_EQ(saddle[4].alpha, 1e20);
    const auto lorenz = compare_methods(generate_dataset("lorenz"));
    EXPECT_EQ(lorenz[3].config, DataConfig::Full);
    EXPECT_EQ(lorenz[3].lambda, 0.0001);
}

TEST(Robustness, SeedDependsOnValuesNotPosition) {
    EXPECT_EQ(realization_seed(7, 0.05, 0.5, 3), realization_seed(7, 0.05, 0.5, 3));
    EXPECT_NE(realization_seed(7, 0.05, 0.5, 3), realization_seed(7, 0.05, 0.5, 4));
    EXPECT_NE(realization_seed(7, 0.05, 0.5, 3), realization_seed(8, 0.05, 0.5, 3));
    EXPECT_NE(realization_seed(7, 0.05, 0.5, 3), realization_seed(7, 0.10, 0.5, 3));

    // growing the grid leaves existing cells untouched
    const Dataset ds = generate_dataset("hopf");
    RobustnessSpec small = default_robustness_spec("hopf");
    small.noise_levels = {0.05};
    small.keep_fractions = {0.5};
    small.n_realizations = 4;
    RobustnessSpec big = small;
    big.noise_levels = {0.0, 0.05};
    big.keep_fractions = {1.0, 0.5};
    const HeatmapResult a = run_robustness(ds, small);
    const HeatmapResult b = run_robustness(ds, big);
    ASSERT_EQ(b.cells.size(), 4u);
    EXPECT_EQ(a.cells[0].multi_objective_error, b.cells[3].multi_objective_error);
    EXPECT_EQ(a.cells[0].standard_error, b.cells[3].standard_error);
}

TEST(Robustness, DeterministicAndCleanCellSucceeds) {
    const Dataset ds = generate_dataset("hopf");
    RobustnessSpec s = default_robustness_spec("hopf");
    s.noise_levels = {0.0, 0.1};
    s.keep_fractions = {1.0};
    s.n_realizations = 5;
    const HeatmapResult a = run_robustness(ds, s);
    const HeatmapResult b = run_robustness(ds, s);
    ASSERT_EQ(a.cells.size(), 2u);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        EXPECT_EQ(a.cells[i].multi_objective_error, b.cells[i].multi_objective_error);
        EXPECT_EQ(a.cells[i].standard_success, b.cells[i].standard_success);
        EXPECT_EQ(a.cells[i].realizations, 5);
    }
    EXPECT_EQ(a.cells[0].multi_objective_success, 1.0);
}

TEST(Robustness, SuccessFallsWithNoiseUpToMonteCarloSlack) {
    for (const char* sys : {"saddle_node", "hopf"}) {
        const Dataset ds = generate_dataset(sys);
        RobustnessSpec s = default_robustness_spec(sys);
        s.keep_fractions = {1.0};
        s.n_realizations = 10;
        const HeatmapResult h = run_robustness(ds, s);
        const double slack = 2.0 / std::sqrt(static_cast<double>(s.n_realizations));
        for (std::size_t i = 1; i < h.cells.size(); ++i) {
            EXPECT_LE(h.cells[i].multi_objective_success, h.cells[i - 1].multi_objective_success + slack) << sys;
            EXPECT_LE(h.cells[i].standard_success, h.cells[i - 1].standard_success + slack) << sys;
        }
    }
}

TEST(Robustness, LorenzMultiObjectiveNotWorse) {
    const Dataset ds = generate_dataset("lorenz");
    RobustnessSpec s = default_robustness_spec("lorenz");
    s.n_realizations = 10;
    const HeatmapResult h = run_robustness(ds, s);
    EXPECT_EQ(h.cells.size(), 30u);
    for (const auto& c : h.cells) {
        EXPECT_GE(c.multi_objective_success, c.standard_success - 0.1)
            << "noise=" << c.noise_level << " keep=" << c.keep_fraction;
    }
}

TEST(Robustness, SpecValidation) {
    const Dataset ds = generate_dataset("saddle_node");
    RobustnessSpec s = default_robustness_spec("saddle_node");
    s.n_realizations = 0;
    EXPECT_THROW((void)run_robustness(ds, s), Error);
    s = default_robustness_spec("saddle_node");
    s.noise_levels = {-0.1};
    EXPECT_THROW((void)run_robustness(ds, s), Error);
    s = default_robustness_spec("saddle_node");
    s.keep_fractions = {1.5};
    EXPECT_THROW((void)run_robustness(ds, s), Error);
}
