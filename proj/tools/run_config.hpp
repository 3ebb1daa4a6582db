#pragma once

// Strict JSON run configuration. Every key is known up front; anything else
// is rejected. The effective (fully populated) document is what gets
// persisted, so a run can be replayed from its own manifest.

#include "mosindy/datasets.hpp"
#include "mosindy/experiments.hpp"
#include "mosindy/io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mosindy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) config_error(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            std::string valid;
            for (const auto& k : allowed) valid += (valid.empty() ? "" : ", ") + k;
            config_error("unknown key '" + it.key() + "' in " + where + " (valid: " + valid + ")");
        }
    }
}

[[nodiscard]] inline double get_number(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return io::parse_double(v.get<std::string>());
        } catch (const Error&) {
        }
    }
    config_error("'" + key + "' must be a number");
}

[[nodiscard]] inline std::vector<double> get_numbers(const json& v, const std::string& key) {
    if (!v.is_array()) config_error("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(get_number(e, key));
    return out;
}

[[nodiscard]] inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(io::number(x));
    return a;
}

struct ScheduleOverride {
    std::optional<std::vector<double>> parameter_values;
    std::optional<double> single_transient_mu;
    std::optional<std::vector<double>> initial_condition;
    std::optional<int> n_points;
    std::optional<double> dt;
};

struct SweepSection {
    std::vector<double> lambda_grid = SweepSpec{}.lambda_grid;
    std::vector<double> alpha_grid = SweepSpec{}.alpha_grid;
    std::vector<std::string> data{"single_transient", "attractors", "combined", "full"};
    bool multi_objective = true;
};

struct RobustnessSection {
    std::vector<double> noise_levels = RobustnessSpec{}.noise_levels;
    std::vector<double> keep_fractions = RobustnessSpec{}.keep_fractions;
    int realizations = RobustnessSpec{}.n_realizations;
    std::uint64_t seed = 0;
    std::optional<double> lambda_standard, lambda_multi_objective, alpha;
    std::string derivatives = "clean";
};

struct RunConfig {
    std::string command;
    std::string system;
    std::optional<fs::path> output_dir;
    std::optional<fs::path> data_dir;
    std::string selection = "combined";
    std::optional<double> lambda;
    double alpha = 1.0;
    bool analytic_derivatives = false;
    IntegrationConfig integration;
    ScheduleOverride schedule;
    SweepSection sweep;
    RobustnessSection robustness;
    std::vector<std::string> systems = system_names();
    std::vector<double> alpha_grid = SweepSpec{}.alpha_grid;
};

/// Loads a config document or a manifest written by a previous run.
[[nodiscard]] inline RunConfig load_config(const fs::path& path, const std::string& command) {
    json doc = io::read_json(path);
    if (doc.is_object() && doc.contains("config") && doc.contains("command")) {
        reject_unknown(doc, {"command", "config", "outputs", "tool", "version"}, "manifest");
        if (doc["command"] != command) {
            config_error("manifest was written by '" + doc["command"].get<std::string>() + "', not '" + command + "'");
        }
        doc = doc["config"];
    }
    reject_unknown(doc,
                   {"system", "output_dir", "data_dir", "selection", "lambda", "alpha", "analytic_derivatives",
                    "integration", "schedule", "sweep", "robustness", "systems", "alpha_grid"},
                   "config");
    const fs::path base = fs::absolute(path).parent_path();
    auto resolve = [&](const json& v, const std::string& key) {
        if (!v.is_string()) config_error("'" + key + "' must be a path string");
        fs::path p = v.get<std::string>();
        return (p.is_absolute() ? p : base / p).lexically_normal();
    };
    RunConfig c;
    c.command = command;
    if (doc.contains("system")) {
        if (!doc["system"].is_string()) config_error("'system' must be a string");
        c.system = doc["system"].get<std::string>();
    }
    if (doc.contains("output_dir")) c.output_dir = resolve(doc["output_dir"], "output_dir");
    if (doc.contains("data_dir")) c.data_dir = resolve(doc["data_dir"], "data_dir");
    if (doc.contains("selection")) {
        if (!doc["selection"].is_string()) config_error("'selection' must be a string");
        c.selection = doc["selection"].get<std::string>();
    }
    if (doc.contains("lambda")) c.lambda = get_number(doc["lambda"], "lambda");
    if (doc.contains("alpha")) c.alpha = get_number(doc["alpha"], "alpha");
    if (doc.contains("analytic_derivatives")) {
        if (!doc["analytic_derivatives"].is_boolean()) config_error("'analytic_derivatives' must be a boolean");
        c.analytic_derivatives = doc["analytic_derivatives"].get<bool>();
    }
    if (doc.contains("integration")) {
        const json& g = doc["integration"];
        reject_unknown(g, {"rel_tol", "abs_tol", "max_step"}, "integration");
        if (g.contains("rel_tol")) c.integration.rel_tol = get_number(g["rel_tol"], "rel_tol");
        if (g.contains("abs_tol")) c.integration.abs_tol = get_number(g["abs_tol"], "abs_tol");
        if (g.contains("max_step")) c.integration.max_step = get_number(g["max_step"], "max_step");
    }
    if (doc.contains("schedule")) {
        const json& s = doc["schedule"];
        reject_unknown(s, {"parameter_values", "single_transient_mu", "initial_condition", "n_points", "dt"},
                       "schedule");
        if (s.contains("parameter_values")) c.schedule.parameter_values = get_numbers(s["parameter_values"], "parameter_values");
        if (s.contains("single_transient_mu")) c.schedule.single_transient_mu = get_number(s["single_transient_mu"], "single_transient_mu");
        if (s.contains("initial_condition")) c.schedule.initial_condition = get_numbers(s["initial_condition"], "initial_condition");
        if (s.contains("n_points")) {
            if (!s["n_points"].is_number_integer()) config_error("'n_points' must be an integer");
            c.schedule.n_points = s["n_points"].get<int>();
        }
        if (s.contains("dt")) c.schedule.dt = get_number(s["dt"], "dt");
    }
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        reject_unknown(s, {"lambda_grid", "alpha_grid", "data", "multi_objective"}, "sweep");
        if (s.contains("lambda_grid")) c.sweep.lambda_grid = get_numbers(s["lambda_grid"], "lambda_grid");
        if (s.contains("alpha_grid")) c.sweep.alpha_grid = get_numbers(s["alpha_grid"], "alpha_grid");
        if (s.contains("data")) {
            if (!s["data"].is_array()) config_error("'sweep.data' must be an array of strings");
            c.sweep.data.clear();
            for (const auto& e : s["data"]) {
                if (!e.is_string()) config_error("'sweep.data' must be an array of strings");
                c.sweep.data.push_back(e.get<std::string>());
            }
        }
        if (s.contains("multi_objective")) {
            if (!s["multi_objective"].is_boolean()) config_error("'sweep.multi_objective' must be a boolean");
            c.sweep.multi_objective = s["multi_objective"].get<bool>();
        }
    }
    if (doc.contains("robustness")) {
        const json& r = doc["robustness"];
        reject_unknown(r,
                       {"noise_levels", "keep_fractions", "realizations", "seed", "lambda_standard",
                        "lambda_multi_objective", "alpha", "derivatives"},
                       "robustness");
        if (r.contains("noise_levels")) c.robustness.noise_levels = get_numbers(r["noise_levels"], "noise_levels");
        if (r.contains("keep_fractions")) c.robustness.keep_fractions = get_numbers(r["keep_fractions"], "keep_fractions");
        if (r.contains("realizations")) {
            if (!r["realizations"].is_number_integer()) config_error("'realizations' must be an integer");
            c.robustness.realizations = r["realizations"].get<int>();
        }
        if (r.contains("seed")) {
            if (!r["seed"].is_number_unsigned()) config_error("'seed' must be a non-negative integer");
            c.robustness.seed = r["seed"].get<std::uint64_t>();
        }
        if (r.contains("lambda_standard")) c.robustness.lambda_standard = get_number(r["lambda_standard"], "lambda_standard");
        if (r.contains("lambda_multi_objective"))
            c.robustness.lambda_multi_objective = get_number(r["lambda_multi_objective"], "lambda_multi_objective");
        if (r.contains("alpha")) c.robustness.alpha = get_number(r["alpha"], "robustness.alpha");
        if (r.contains("derivatives")) {
            if (!r["derivatives"].is_string()) config_error("'robustness.derivatives' must be a string");
            c.robustness.derivatives = r["derivatives"].get<std::string>();
        }
    }
    if (doc.contains("systems")) {
        if (!doc["systems"].is_array()) config_error("'systems' must be an array of strings");
        c.systems.clear();
        for (const auto& e : doc["systems"]) {
            if (!e.is_string()) config_error("'systems' must be an array of strings");
            c.systems.push_back(e.get<std::string>());
        }
    }
    if (doc.contains("alpha_grid")) c.alpha_grid = get_numbers(doc["alpha_grid"], "alpha_grid");
    return c;
}

/// Standard recipe with the config's schedule overrides applied.
[[nodiscard]] inline DatasetRecipe effective_recipe(const RunConfig& c) {
    DatasetRecipe r = standard_recipe(c.system);
    ScheduleSpec& s = r.schedule;
    const double designated = s.parameter_values.at(r.single_transient);
    if (c.schedule.parameter_values) {
        s.parameter_values = *c.schedule.parameter_values;
        rebuild_attractor_rules(c.system, s);
    }
    if (c.schedule.initial_condition) {
        s.initial_condition = Eigen::Map<const Vector>(c.schedule.initial_condition->data(),
                                                       static_cast<Index>(c.schedule.initial_condition->size()));
    }
    if (c.schedule.n_points) s.n_points = *c.schedule.n_points;
    if (c.schedule.dt) s.dt = *c.schedule.dt;
    const double target = c.schedule.single_transient_mu.value_or(designated);
    bool found = false;
    for (std::size_t i = 0; i < s.parameter_values.size(); ++i) {
        if (s.parameter_values[i] == target) {
            r.single_transient = i;
            found = true;
            break;
        }
    }
    if (!found) config_error("single transient mu " + io::format_double(target) + " is not in parameter_values");
    try {
        s.validate(system_by_name(c.system));
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, std::string("schedule: ") + e.what());
    }
    return r;
}

[[nodiscard]] inline json integration_json(const IntegrationConfig& g) {
    return {{"rel_tol", io::number(g.rel_tol)}, {"abs_tol", io::number(g.abs_tol)}, {"max_step", io::number(g.max_step)}};
}

[[nodiscard]] inline json schedule_json(const DatasetRecipe& r) {
    const ScheduleSpec& s = r.schedule;
    return {{"parameter_values", numbers(s.parameter_values)},
            {"single_transient_mu", io::number(s.parameter_values.at(r.single_transient))},
            {"initial_condition", numbers(std::vector<double>(s.initial_condition.data(),
                                                              s.initial_condition.data() + s.initial_condition.size()))},
            {"n_points", s.n_points},
            {"dt", io::number(s.dt)}};
}

}  // namespace mosindy::cli
