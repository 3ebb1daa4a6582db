#pragma once

// Sampling recipes for the four benchmark systems and the data selections
// used when fitting (single transient, attractors, both, everything).

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"
#include "mosindy/integrate.hpp"
#include "mosindy/sampling.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mosindy {

[[nodiscard]] inline std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = count == 1 ? a : a + (b - a) * i / (count - 1);
    }
    if (count > 1) out.back() = b;
    return out;
}

[[nodiscard]] inline std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out = linspace(std::log10(lo), std::log10(hi), count);
    for (double& v : out) v = std::pow(10.0, v);
    if (count >= 1) out.front() = lo;
    if (count > 1) out.back() = hi;
    return out;
}

struct DatasetRecipe {
    ScheduleSpec schedule;
    std::size_t single_transient = 0;  // index into parameter_values
};

/// Hopf cycles settle at rate 2 mu; at mu = 0.01 this needs ~10^3 time units.
inline constexpr double hopf_settle_time = 1500.0;
inline constexpr double lorenz_subcritical_hopf = 24.74;

/// Attractor sampling rule for one scheduled parameter value.
[[nodiscard]] inline AttractorRule attractor_rule(const std::string& system, double mu) {
    if (system == "saddle_node") {
        // negative branch for negative mu, positive branch otherwise
        return FixedPointRule{Vector::Constant(1, mu < 0 ? -2.0 : 2.0)};
    }
    if (system == "hopf") {
        if (mu < 0) return FixedPointRule{Vector::Zero(2)};
        return BurstRule{5, 1.1, hopf_settle_time};
    }
    if (system == "stuart_landau") return BurstRule{12, 1.0, 2000.0};
    if (system == "lorenz") {
        if (mu < lorenz_subcritical_hopf) {
            const double q = std::sqrt(LorenzConstants{}.beta * (mu - 1.0));
            return FixedPointRule{(Vector(3) << 1.1 * q, 1.1 * q, mu).finished()};
        }
        return BurstRule{25, 0.2, 70.0};
    }
    (void)system_by_name(system);  // throws UnknownSystem listing valid names
    return {};
}

inline void rebuild_attractor_rules(const std::string& system, ScheduleSpec& s) {
    s.attractor_rules.clear();
    for (double mu : s.parameter_values) s.attractor_rules.push_back(attractor_rule(system, mu));
}

[[nodiscard]] inline DatasetRecipe standard_recipe(const std::string& system) {
    DatasetRecipe r;
    ScheduleSpec& s = r.schedule;
    if (system == "saddle_node") {
        s.parameter_values = linspace(-6.0, -0.182, 10);
        const auto upper = linspace(0.182, 6.0, 10);
        s.parameter_values.insert(s.parameter_values.end(), upper.begin(), upper.end());
        s.initial_condition = Vector::Zero(1);
        s.n_points = 1000;
        s.dt = 0.01;
        r.single_transient = 9;
    } else if (system == "hopf") {
        s.parameter_values = {-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.01, 0.5, 1.0, 1.5, 2.0, 0.3, 0.4, 0.5};
        s.initial_condition = (Vector(2) << 2.0, 0.0).finished();
        s.n_points = 2000;
        s.dt = 0.01;
        r.single_transient = 6;
    } else if (system == "stuart_landau") {
        s.parameter_values = linspace(0.0, 1.817, 10);
        s.initial_condition = (Vector(4) << 1e-4, 0.0, 1e-2, 0.0).finished();
        s.n_points = 5020;
        s.dt = 0.01;
        r.single_transient = 9;
    } else if (system == "lorenz") {
        for (int mu = 16; mu <= 28; ++mu) s.parameter_values.push_back(mu);
        s.initial_condition = (Vector(3) << 30.0, -30.0, 50.0).finished();
        s.n_points = 500;
        s.dt = 0.001;
        r.single_transient = 10;
    } else {
        (void)system_by_name(system);
    }
    rebuild_attractor_rules(system, s);
    return r;
}

/// Generated on/off-attractor data for one system.
struct Dataset {
    SystemDefinition system;
    DatasetRecipe recipe;
    IntegrationConfig config;
    std::vector<SampleSet> transients;  // aligned with recipe.schedule.parameter_values
    std::vector<SampleSet> attractors;  // aligned with recipe.schedule.parameter_values
    bool analytic_derivatives = false;

    [[nodiscard]] const SampleSet& single_transient() const { return transients.at(recipe.single_transient); }
    [[nodiscard]] double single_transient_mu() const {
        return recipe.schedule.parameter_values.at(recipe.single_transient);
    }
    [[nodiscard]] SampleSet all_transients() const { return concat(transients, system.state_dim); }
    [[nodiscard]] SampleSet all_attractors() const {
        SampleSet s = concat(attractors, system.state_dim);
        s.kind = SampleKind::Attractor;
        return s;
    }
};

/// Replaces derivative rows by the exact right-hand side at the sampled states.
inline void use_analytic_derivatives(SampleSet& s, const SystemDefinition& system) {
    for (Index i = 0; i < s.rows(); ++i) {
        s.derivatives.row(i) = system(s.states.row(i).transpose(), s.parameters[i]).transpose();
    }
    s.meta["derivatives"] = "analytic";
}

[[nodiscard]] inline Dataset generate_dataset(const SystemDefinition& system, const DatasetRecipe& recipe,
                                              const IntegrationConfig& config = {},
                                              bool analytic_derivatives = false) {
    Dataset ds;
    ds.system = system;
    ds.recipe = recipe;
    ds.config = config;
    ds.analytic_derivatives = analytic_derivatives;
    TransientBatch batch = generate_transients(system, recipe.schedule, config);
    if (!batch.failures.empty()) {
        std::string msg;
        for (const auto& [mu, why] : batch.failures) msg += " mu=" + std::to_string(mu) + ": " + why;
        throw Error(ErrorCode::NonFinite, system.name + " transient generation failed:" + msg);
    }
    ds.transients = std::move(batch.sets);
    ds.attractors = generate_attractors(system, recipe.schedule, config);
    if (analytic_derivatives) {
        for (auto& s : ds.transients) use_analytic_derivatives(s, system);
        for (auto& s : ds.attractors) {
            if (s.meta.value("rule", "") != "fixed_point") use_analytic_derivatives(s, system);
        }
    }
    return ds;
}

[[nodiscard]] inline Dataset generate_dataset(const std::string& system_name, const IntegrationConfig& config = {},
                                              bool analytic_derivatives = false) {
    return generate_dataset(system_by_name(system_name), standard_recipe(system_name), config, analytic_derivatives);
}

enum class DataConfig { SingleTransient, Attractors, Combined, Full };

[[nodiscard]] inline std::string to_string(DataConfig c) {
    switch (c) {
        case DataConfig::SingleTransient: return "single_transient";
        case DataConfig::Attractors: return "attractors";
        case DataConfig::Combined: return "combined";
        case DataConfig::Full: return "full";
    }
    return "unknown";
}

[[nodiscard]] inline DataConfig data_config_from_string(const std::string& s) {
    for (DataConfig c : {DataConfig::SingleTransient, DataConfig::Attractors, DataConfig::Combined, DataConfig::Full}) {
        if (to_string(c) == s) return c;
    }
    throw Error(ErrorCode::Config,
                "unknown data selection '" + s + "'; valid: single_transient, attractors, combined, full");
}

struct DataSelection {
    SampleSet transients;
    SampleSet attractors;
};

[[nodiscard]] inline DataSelection select(const Dataset& ds, DataConfig c) {
    DataSelection sel;
    const Index n = ds.system.state_dim;
    const SampleSet empty_tr = concat({}, n);
    SampleSet empty_att = concat({}, n);
    empty_att.kind = SampleKind::Attractor;
    switch (c) {
        case DataConfig::SingleTransient:
            sel.transients = ds.single_transient();
            sel.attractors = empty_att;
            break;
        case DataConfig::Attractors:
            sel.transients = empty_tr;
            sel.attractors = ds.all_attractors();
            break;
        case DataConfig::Combined:
            sel.transients = ds.single_transient();
            sel.attractors = ds.all_attractors();
            break;
        case DataConfig::Full:
            sel.transients = ds.all_transients();
            sel.attractors = ds.all_attractors();
            break;
    }
    return sel;
}

}  // namespace mosindy
