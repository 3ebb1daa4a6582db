#pragma once

// Hyperparameter sweeps, fixed-hyperparameter comparisons and Monte Carlo
// noise/data-removal studies.

#include "mosindy/common.hpp"
#include "mosindy/datasets.hpp"
#include "mosindy/metrics.hpp"
#include "mosindy/regression.hpp"
#include "mosindy/rng.hpp"
#include "mosindy/sampling.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mosindy {

/// Best-by-error hyperparameters from the sweep protocol, per system.
struct SweepHyperparameters {
    double lambda_single_transient;
    double lambda_attractors;
    double lambda_combined;
    double lambda_full;
    double lambda_multi_objective;
    double alpha_multi_objective;
};

[[nodiscard]] inline SweepHyperparameters sweep_hyperparameters(const std::string& system) {
    if (system == "saddle_node") return {1.000, 0.0001, 0.0105, 0.0095, 0.0045, 1e20};
    if (system == "hopf") return {1.000, 0.3944, 0.2719, 0.0003, 0.0060, 1e4};
    if (system == "stuart_landau") return {0.0001, 0.0152, 0.0034, 0.0001, 0.0087, 1e4};
    if (system == "lorenz") return {0.0072, 0.0001, 0.0001, 0.0001, 0.0001, 1e20};
    (void)system_by_name(system);
    return {};
}

/// Fixed hyperparameters of the robustness study, per system.
struct RobustnessHyperparameters {
    double lambda_standard;
    double lambda_multi_objective;
    double alpha_multi_objective;
};

[[nodiscard]] inline RobustnessHyperparameters robustness_hyperparameters(const std::string& system) {
    if (system == "saddle_node") return {0.15, 0.15, 1e14};
    if (system == "hopf") return {0.06, 0.06, 1e14};
    if (system == "stuart_landau") return {0.0087, 0.0087, 1e10};
    if (system == "lorenz") return {0.01, 0.01, 1e14};
    (void)system_by_name(system);
    return {};
}

enum class Method { Standard, MultiObjective };

[[nodiscard]] inline std::string to_string(Method m) {
    return m == Method::Standard ? "standard" : "multi_objective";
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
    std::vector<double> lambda_grid = logspace(1e-4, 1.0, 100);
    std::vector<double> alpha_grid = logspace(1e-20, 1e20, 11);
    std::vector<DataConfig> standard_configs{DataConfig::SingleTransient, DataConfig::Attractors,
                                             DataConfig::Combined, DataConfig::Full};
    bool multi_objective = true;  // over alpha_grid on the combined selection

    void validate() const {
        auto check = [](const std::vector<double>& g, const char* name) {
            require(!g.empty(), ErrorCode::Config, std::string(name) + " is empty");
            for (std::size_t i = 0; i < g.size(); ++i) {
                require(g[i] > 0.0 && std::isfinite(g[i]), ErrorCode::Config, std::string(name) + " must be positive");
                require(i == 0 || g[i] > g[i - 1], ErrorCode::Config, std::string(name) + " must be sorted");
            }
        };
        check(lambda_grid, "lambda_grid");
        check(alpha_grid, "alpha_grid");
        require(lambda_grid.back() <= 1.0, ErrorCode::Config, "lambda_grid values must be <= 1");
    }
};

struct SweepCell {
    DataConfig config;
    Method method;
    double lambda;
    double alpha;
    double error = std::numeric_limits<double>::quiet_NaN();
    bool structure_match = false;
    bool failed = false;
    std::string message;
};

struct SweepResult {
    std::string system;
    std::vector<SweepCell> cells;
    /// Arg-min-error cell per (config, method); ties go to the larger lambda.
    std::vector<SweepCell> best;
};

namespace detail {

inline void sweep_block(const Dataset& ds, DataConfig config, Method method, double alpha,
                        const std::vector<double>& lambdas, SweepResult& out) {
    const DataSelection sel = select(ds, config);
    const MonomialLibrary lib = ds.system.library();
    const CoefficientMatrix truth = ds.system.true_coefficients();
    std::optional<StlsSolver> solver;
    std::string setup_error;
    try {
        solver.emplace(assemble_weighted(sel.transients, sel.attractors, lib, alpha));
    } catch (const Error& e) {
        setup_error = e.what();
    }
    for (double lambda : lambdas) {
        SweepCell cell{config, method, lambda, alpha, std::numeric_limits<double>::quiet_NaN(), false, false, {}};
        if (!solver) {
            cell.failed = true;
            cell.message = setup_error;
        } else {
            try {
                const StlsFit fit = solver->solve(lambda);
                cell.error = coefficient_error(fit.coefficients, truth);
                cell.structure_match = structure_match(fit.coefficients, truth);
                if (!std::isfinite(cell.error)) {
                    cell.failed = true;
                    cell.message = "non-finite coefficients";
                }
            } catch (const Error& e) {
                cell.failed = true;
                cell.message = e.what();
            }
        }
        out.cells.push_back(std::move(cell));
    }
}

}  // namespace detail

[[nodiscard]] inline SweepResult run_sweep(const Dataset& ds, const SweepSpec& spec) {
    spec.validate();
    SweepResult res;
    res.system = ds.system.name;
    struct Group {
        DataConfig config;
        Method method;
        std::size_t begin, end;
    };
    std::vector<Group> groups;
    for (DataConfig c : spec.standard_configs) {
        const std::size_t b = res.cells.size();
        detail::sweep_block(ds, c, Method::Standard, 1.0, spec.lambda_grid, res);
        groups.push_back({c, Method::Standard, b, res.cells.size()});
    }
    if (spec.multi_objective) {
        const std::size_t b = res.cells.size();
        for (double alpha : spec.alpha_grid) {
            detail::sweep_block(ds, DataConfig::Combined, Method::MultiObjective, alpha, spec.lambda_grid, res);
        }
        groups.push_back({DataConfig::Combined, Method::MultiObjective, b, res.cells.size()});
    }
    for (const Group& g : groups) {
        const SweepCell* best = nullptr;
        for (std::size_t i = g.begin; i < g.end; ++i) {
            const SweepCell& c = res.cells[i];
            if (c.failed) continue;
            if (!best || c.error < best->error || (c.error == best->error && c.lambda > best->lambda)) best = &c;
        }
        if (best) {
            res.best.push_back(*best);
        } else {
            SweepCell none{g.config, g.method, std::numeric_limits<double>::quiet_NaN(),
                           std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                           false, true, {}};
            none.message = "every cell failed";
            res.best.push_back(none);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Fixed-hyperparameter comparison (the five-bar summary per system)

struct ComparisonRow {
    std::string system;
    DataConfig config;
    Method method;
    double lambda;
    double alpha;
    FitReport report;
};

[[nodiscard]] inline FitReport fit_selection(const Dataset& ds, DataConfig config, double lambda, double alpha) {
    const DataSelection sel = select(ds, config);
    const MonomialLibrary lib = ds.system.library();
    const WeightedProblem p = assemble_weighted(sel.transients, sel.attractors, lib, alpha);
    const StlsFit fit = fit_stls(p, lambda);
    FitReport r = make_report(fit, ds.system.true_coefficients(), lambda, alpha);
    r.condition_numbers["theta"] = condition_number(p.theta);
    r.condition_numbers["theta_normalized"] = condition_number(column_normalized(p.theta));
    r.provenance = {{"system", ds.system.name},
                    {"data", to_string(config)},
                    {"single_transient_mu", ds.single_transient_mu()},
                    {"transient_rows", sel.transients.rows()},
                    {"attractor_rows", sel.attractors.rows()},
                    {"analytic_derivatives", ds.analytic_derivatives}};
    return r;
}

[[nodiscard]] inline std::vector<ComparisonRow> compare_methods(const Dataset& ds) {
    const SweepHyperparameters h = sweep_hyperparameters(ds.system.name);
    const std::vector<std::tuple<DataConfig, Method, double, double>> cases{
        {DataConfig::SingleTransient, Method::Standard, h.lambda_single_transient, 1.0},
        {DataConfig::Attractors, Method::Standard, h.lambda_attractors, 1.0},
        {DataConfig::Combined, Method::Standard, h.lambda_combined, 1.0},
        {DataConfig::Full, Method::Standard, h.lambda_full, 1.0},
        {DataConfig::Combined, Method::MultiObjective, h.lambda_multi_objective, h.alpha_multi_objective},
    };
    std::vector<ComparisonRow> rows;
    for (const auto& [config, method, lambda, alpha] : cases) {
        rows.push_back({ds.system.name, config, method, lambda, alpha, fit_selection(ds, config, lambda, alpha)});
    }
    return rows;
}

struct Figure3System {
    std::string system;
    std::vector<ComparisonRow> rows;
    ConditionCurve curve;  // combined selection over the default alpha grid
};

/// The five-configuration comparison plus condition curves, for each system.
[[nodiscard]] inline std::vector<Figure3System> reproduce_figure3(const std::vector<std::string>& systems,
                                                                 const IntegrationConfig& config = {}) {
    std::vector<Figure3System> out;
    for (const auto& name : systems) {
        const Dataset ds = generate_dataset(name, config);
        const DataSelection sel = select(ds, DataConfig::Combined);
        out.push_back({name, compare_methods(ds),
                       condition_curve(sel.transients, sel.attractors, ds.system.library(), SweepSpec{}.alpha_grid)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Robustness to noise and data removal

struct RobustnessSpec {
    std::vector<double> noise_levels{0.0, 0.025, 0.05, 0.10, 0.20, 0.40};
    std::vector<double> keep_fractions{1.0, 0.75, 0.50, 0.25, 0.10};
    int n_realizations = 20;
    RobustnessHyperparameters hyperparameters{};
    std::uint64_t base_seed = 0;
    NoiseDerivatives derivatives = NoiseDerivatives::Clean;

    void validate() const {
        require(n_realizations >= 1, ErrorCode::Config, "n_realizations must be >= 1");
        require(!noise_levels.empty() && !keep_fractions.empty(), ErrorCode::Config, "robustness grids are empty");
        for (double v : noise_levels) require(v >= 0.0, ErrorCode::Config, "noise levels must be >= 0");
        for (double v : keep_fractions) require(v > 0.0 && v <= 1.0, ErrorCode::Config, "keep fractions must be in (0, 1]");
    }
};

[[nodiscard]] inline RobustnessSpec default_robustness_spec(const std::string& system) {
    RobustnessSpec spec;
    spec.hyperparameters = robustness_hyperparameters(system);
    return spec;
}

/// Realization seed: depends on the cell's values (not its grid position) so
/// growing a grid never perturbs existing cells.
[[nodiscard]] inline std::uint64_t realization_seed(std::uint64_t base_seed, double noise, double keep, int k) {
    return base_seed ^ hash_words({bits_of(noise), bits_of(keep), static_cast<std::uint64_t>(k)});
}

struct HeatmapCell {
    double noise_level;
    double keep_fraction;
    int realizations = 0;
    double standard_success = 0.0;
    double standard_error = 0.0;
    double multi_objective_success = 0.0;
    double multi_objective_error = 0.0;
};

struct HeatmapResult {
    std::string system;
    RobustnessSpec spec;
    std::vector<HeatmapCell> cells;  // noise-major order
};

[[nodiscard]] inline HeatmapResult run_robustness(const Dataset& ds, const RobustnessSpec& spec) {
    spec.validate();
    const MonomialLibrary lib = ds.system.library();
    const CoefficientMatrix truth = ds.system.true_coefficients();
    const SampleSet attractors = ds.all_attractors();
    const SampleSet& clean = ds.single_transient();
    const auto& hp = spec.hyperparameters;

    HeatmapResult res;
    res.system = ds.system.name;
    res.spec = spec;
    for (double noise : spec.noise_levels) {
        for (double keep : spec.keep_fractions) {
            HeatmapCell cell{noise, keep};
            for (int k = 0; k < spec.n_realizations; ++k) {
                const std::uint64_t seed = realization_seed(spec.base_seed, noise, keep, k);
                const SampleSet tr = decimate(add_noise(clean, noise, seed, spec.derivatives), keep, seed);
                auto score = [&](double lambda, double alpha, double& success, double& error) {
                    try {
                        const StlsFit fit = fit_stls(assemble_weighted(tr, attractors, lib, alpha), lambda);
                        const double e = coefficient_error(fit.coefficients, truth);
                        error += e;
                        success += structure_match(fit.coefficients, truth) ? 1.0 : 0.0;
                    } catch (const Error&) {
                        // a degenerate regression counts as a failed identification with Xi = 0
                        error += 1.0;
                    }
                };
                score(hp.lambda_standard, 1.0, cell.standard_success, cell.standard_error);
                score(hp.lambda_multi_objective, hp.alpha_multi_objective, cell.multi_objective_success,
                      cell.multi_objective_error);
                ++cell.realizations;
            }
            const double inv = 1.0 / cell.realizations;
            cell.standard_success *= inv;
            cell.standard_error *= inv;
            cell.multi_objective_success *= inv;
            cell.multi_objective_error *= inv;
            res.cells.push_back(cell);
        }
    }
    return res;
}

}  // namespace mosindy
