// mosindy: dataset generation, fitting, sweeps and robustness studies.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 IO.

#include "run_config.hpp"

#include "mosindy/datasets.hpp"
#include "mosindy/experiments.hpp"
#include "mosindy/io.hpp"
#include "mosindy/metrics.hpp"
#include "mosindy/regression.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mosindy;
using namespace mosindy::cli;

namespace {

struct Flags {
    std::string config_path;
    std::string output;
    std::string system;
    std::string data;
    std::string selection;
    double lambda = 0.0;
    double alpha = 1.0;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    bool analytic = false;
    int realizations = 0;
    std::uint64_t seed = 0;
    std::vector<double> noise_levels;
    std::vector<double> keep_fractions;
    std::string derivatives;
    std::vector<std::string> systems;
};

struct Opts {
    CLI::Option* output = nullptr;
    CLI::Option* system = nullptr;
    CLI::Option* data = nullptr;
    CLI::Option* selection = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* alpha = nullptr;
    CLI::Option* rel_tol = nullptr;
    CLI::Option* abs_tol = nullptr;
    CLI::Option* analytic = nullptr;
    CLI::Option* realizations = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* noise_levels = nullptr;
    CLI::Option* keep_fractions = nullptr;
    CLI::Option* derivatives = nullptr;
    CLI::Option* systems = nullptr;
};

bool given(const CLI::Option* o) { return o && o->count() > 0; }

int exit_code_for(ErrorCode code) {
    if (code == ErrorCode::Io) return 4;
    if (is_numerical(code)) return 3;
    return 2;
}

void report_error(ErrorCode code, const std::string& message) {
    const json j = {{"error", {{"code", std::string(to_string(code))}, {"message", message},
                               {"exit_code", exit_code_for(code)}}}};
    std::cerr << j.dump() << std::endl;
}

RunConfig build_config(const std::string& command, const Flags& f, const Opts& o) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path, command);
    c.command = command;
    if (given(o.output)) c.output_dir = fs::absolute(f.output).lexically_normal();
    if (given(o.system)) c.system = f.system;
    if (given(o.data)) c.data_dir = fs::absolute(f.data).lexically_normal();
    if (given(o.selection)) c.selection = f.selection;
    if (given(o.lambda)) c.lambda = f.lambda;
    if (given(o.alpha)) c.alpha = f.alpha;
    if (given(o.rel_tol)) c.integration.rel_tol = f.rel_tol;
    if (given(o.abs_tol)) c.integration.abs_tol = f.abs_tol;
    if (given(o.analytic)) c.analytic_derivatives = true;
    if (given(o.realizations)) c.robustness.realizations = f.realizations;
    if (given(o.seed)) c.robustness.seed = f.seed;
    if (given(o.noise_levels)) c.robustness.noise_levels = f.noise_levels;
    if (given(o.keep_fractions)) c.robustness.keep_fractions = f.keep_fractions;
    if (given(o.derivatives)) c.robustness.derivatives = f.derivatives;
    if (given(o.systems)) c.systems = f.systems;
    return c;
}

void require_system(const RunConfig& c) {
    if (c.system.empty()) {
        std::string names;
        for (const auto& n : system_names()) names += (names.empty() ? "" : ", ") + n;
        throw Error(ErrorCode::Config, "no system given; valid: " + names);
    }
    (void)system_by_name(c.system);
}

fs::path output_dir(const RunConfig& c) {
    if (c.output_dir) return *c.output_dir;
    const char* root = std::getenv("MOSINDY_OUTPUT_ROOT");
    fs::path base = root && *root ? fs::path(root) : fs::path("mosindy_output");
    std::string leaf = c.command;
    if (!c.system.empty() && c.command != "figure3") leaf += "_" + c.system;
    return fs::absolute(base / leaf).lexically_normal();
}

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    void text(const std::string& rel, const std::string& content) {
        io::atomic_write(dir_ / rel, content);
        files_.push_back(rel);
    }
    void json_file(const std::string& rel, const json& j) { text(rel, j.dump(2) + "\n"); }
    void sample_set(const std::string& rel, const SampleSet& s, const std::vector<std::string>& names,
                    const json& extra) {
        io::write_sample_set(dir_ / rel, s, names, extra);
        files_.push_back(rel);
        files_.push_back(fs::path(rel).replace_extension(".json").generic_string());
    }
    void manifest(const std::string& command, const json& config) {
        json j;
        j["tool"] = "mosindy";
        j["version"] = tool_version;
        j["command"] = command;
        j["config"] = config;
        std::vector<std::string> sorted = files_;
        std::sort(sorted.begin(), sorted.end());
        j["outputs"] = sorted;
        io::write_json(dir_ / "manifest.json", j);
    }
    [[nodiscard]] const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

json dataset_config_json(const RunConfig& c, const DatasetRecipe& r) {
    return {{"system", c.system},
            {"integration", integration_json(c.integration)},
            {"schedule", schedule_json(r)},
            {"analytic_derivatives", c.analytic_derivatives}};
}

void check_lambda(const std::optional<double>& lambda, const char* what) {
    if (!lambda) throw Error(ErrorCode::Config, std::string(what) + " is required");
    if (!(*lambda >= 0.0 && *lambda <= 1.0)) {
        throw Error(ErrorCode::Config, std::string(what) + " must be in [0, 1], got " + io::format_double(*lambda));
    }
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && std::isfinite(alpha))) {
        throw Error(ErrorCode::Config, "alpha must be finite and >= 0, got " + io::format_double(alpha));
    }
}

json cells_json(const std::vector<SweepCell>& cells) {
    json a = json::array();
    for (const auto& c : cells) {
        a.push_back({{"data", to_string(c.config)},
                     {"method", to_string(c.method)},
                     {"lambda", io::number(c.lambda)},
                     {"alpha", io::number(c.alpha)},
                     {"error", io::number(c.error)},
                     {"structure_match", c.structure_match},
                     {"failed", c.failed},
                     {"message", c.message}});
    }
    return a;
}

json heatmap_json(const HeatmapResult& h) {
    json a = json::array();
    for (const auto& c : h.cells) {
        a.push_back({{"noise_level", io::number(c.noise_level)},
                     {"keep_fraction", io::number(c.keep_fraction)},
                     {"realizations", c.realizations},
                     {"standard_success", io::number(c.standard_success)},
                     {"standard_error", io::number(c.standard_error)},
                     {"multi_objective_success", io::number(c.multi_objective_success)},
                     {"multi_objective_error", io::number(c.multi_objective_error)}});
    }
    return {{"system", h.system}, {"cells", a}};
}

std::string indexed(const char* stem, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%02zu.csv", stem, i);
    return buf;
}

// ---------------------------------------------------------------------------

void cmd_generate(const RunConfig& c) {
    require_system(c);
    const DatasetRecipe recipe = effective_recipe(c);
    const Dataset ds = generate_dataset(system_by_name(c.system), recipe, c.integration, c.analytic_derivatives);
    Outputs out(output_dir(c));
    const auto names = ds.system.library().variable_names();
    const std::vector<std::string> state_names(names.begin(), names.end() - 1);
    json index;
    index["system"] = c.system;
    index["state_names"] = state_names;
    index["library"] = ds.system.library().to_json();
    index["transients"] = json::array();
    index["attractors"] = json::array();
    const auto& mus = recipe.schedule.parameter_values;
    for (std::size_t i = 0; i < ds.transients.size(); ++i) {
        const bool single = i == recipe.single_transient;
        const std::string rel = "transients/" + indexed("transient", i);
        out.sample_set(rel, ds.transients[i], state_names, {{"index", i}, {"single_transient", single}});
        index["transients"].push_back({{"file", rel}, {"mu", mus[i]}, {"single_transient", single}});
    }
    for (std::size_t i = 0; i < ds.attractors.size(); ++i) {
        const std::string rel = "attractors/" + indexed("attractor", i);
        out.sample_set(rel, ds.attractors[i], state_names, {{"index", i}});
        index["attractors"].push_back({{"file", rel}, {"mu", mus[i]}, {"rows", ds.attractors[i].rows()}});
    }
    index["single_transient"] = {{"index", recipe.single_transient},
                                 {"mu", mus[recipe.single_transient]},
                                 {"file", "transients/" + indexed("transient", recipe.single_transient)}};
    out.json_file("dataset.json", index);
    out.manifest("generate", dataset_config_json(c, recipe));
}

Dataset load_dataset_dir(const fs::path& dir) {
    const json index = io::read_json(dir / "dataset.json");
    Dataset ds;
    try {
        ds.system = system_by_name(index.at("system").get<std::string>());
        ds.recipe.single_transient = index.at("single_transient").at("index").get<std::size_t>();
        for (const auto& t : index.at("transients")) {
            ds.transients.push_back(io::read_sample_set(dir / t.at("file").get<std::string>()));
            ds.recipe.schedule.parameter_values.push_back(t.at("mu").get<double>());
        }
        for (const auto& a : index.at("attractors")) {
            SampleSet s = io::read_sample_set(dir / a.at("file").get<std::string>());
            s.kind = SampleKind::Attractor;
            ds.attractors.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, (dir / "dataset.json").string() + ": " + e.what());
    }
    require(ds.recipe.single_transient < ds.transients.size(), ErrorCode::Io, "single transient index out of range");
    return ds;
}

void cmd_fit(RunConfig c) {
    check_lambda(c.lambda, "lambda");
    check_alpha(c.alpha);
    const DataConfig selection = data_config_from_string(c.selection);
    Dataset ds;
    json config;
    if (c.data_dir) {
        ds = load_dataset_dir(*c.data_dir);
        if (!c.system.empty() && c.system != ds.system.name) {
            throw Error(ErrorCode::Config, "dataset holds '" + ds.system.name + "', not '" + c.system + "'");
        }
        c.system = ds.system.name;
        config = {{"system", c.system}, {"data_dir", c.data_dir->generic_string()}};
    } else {
        require_system(c);
        const DatasetRecipe recipe = effective_recipe(c);
        ds = generate_dataset(system_by_name(c.system), recipe, c.integration, c.analytic_derivatives);
        config = dataset_config_json(c, recipe);
    }
    config["selection"] = c.selection;
    config["lambda"] = io::number(*c.lambda);
    config["alpha"] = io::number(c.alpha);

    FitReport report;
    try {
        report = fit_selection(ds, selection, *c.lambda, c.alpha);
    } catch (const Error& e) {
        throw Error(e.code(), "fitting " + c.system + " on " + c.selection + " data: " + e.what());
    }
    const MonomialLibrary lib = ds.system.library();
    Outputs out(output_dir(c));
    out.json_file("fit_report.json", io::fit_report_json(report, lib));
    std::string model;
    for (const auto& line : io::symbolic_model(report.coefficients, lib)) model += line + "\n";
    out.text("model.txt", model);
    out.manifest("fit", config);
    std::cout << model;
}

void cmd_sweep(const RunConfig& c) {
    require_system(c);
    const DatasetRecipe recipe = effective_recipe(c);
    SweepSpec spec;
    spec.lambda_grid = c.sweep.lambda_grid;
    spec.alpha_grid = c.sweep.alpha_grid;
    spec.multi_objective = c.sweep.multi_objective;
    spec.standard_configs.clear();
    for (const auto& d : c.sweep.data) spec.standard_configs.push_back(data_config_from_string(d));
    spec.validate();
    const Dataset ds = generate_dataset(system_by_name(c.system), recipe, c.integration, c.analytic_derivatives);
    const SweepResult res = run_sweep(ds, spec);

    Outputs out(output_dir(c));
    out.text("sweep_cells.csv", io::sweep_cells_csv(res.system, res.cells));
    out.text("sweep_best.csv", io::sweep_cells_csv(res.system, res.best));
    out.json_file("sweep.json", {{"system", res.system}, {"cells", res.cells.size()}, {"best", cells_json(res.best)}});
    json config = dataset_config_json(c, recipe);
    config["sweep"] = {{"lambda_grid", numbers(spec.lambda_grid)},
                       {"alpha_grid", numbers(spec.alpha_grid)},
                       {"data", c.sweep.data},
                       {"multi_objective", spec.multi_objective}};
    out.manifest("sweep", config);
}

void cmd_robustness(const RunConfig& c) {
    require_system(c);
    const DatasetRecipe recipe = effective_recipe(c);
    RobustnessSpec spec = default_robustness_spec(c.system);
    spec.noise_levels = c.robustness.noise_levels;
    spec.keep_fractions = c.robustness.keep_fractions;
    spec.n_realizations = c.robustness.realizations;
    spec.base_seed = c.robustness.seed;
    spec.derivatives = noise_derivatives_from_string(c.robustness.derivatives);
    if (c.robustness.lambda_standard) spec.hyperparameters.lambda_standard = *c.robustness.lambda_standard;
    if (c.robustness.lambda_multi_objective) spec.hyperparameters.lambda_multi_objective = *c.robustness.lambda_multi_objective;
    if (c.robustness.alpha) spec.hyperparameters.alpha_multi_objective = *c.robustness.alpha;
    check_lambda(spec.hyperparameters.lambda_standard, "robustness.lambda_standard");
    check_lambda(spec.hyperparameters.lambda_multi_objective, "robustness.lambda_multi_objective");
    check_alpha(spec.hyperparameters.alpha_multi_objective);
    try {
        spec.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Config, e.what());
    }
    const Dataset ds = generate_dataset(system_by_name(c.system), recipe, c.integration, c.analytic_derivatives);
    const HeatmapResult res = run_robustness(ds, spec);

    Outputs out(output_dir(c));
    out.text("heatmap.csv", io::heatmap_csv(res));
    out.json_file("heatmap.json", heatmap_json(res));
    json config = dataset_config_json(c, recipe);
    config["robustness"] = {{"noise_levels", numbers(spec.noise_levels)},
                            {"keep_fractions", numbers(spec.keep_fractions)},
                            {"realizations", spec.n_realizations},
                            {"seed", spec.base_seed},
                            {"lambda_standard", io::number(spec.hyperparameters.lambda_standard)},
                            {"lambda_multi_objective", io::number(spec.hyperparameters.lambda_multi_objective)},
                            {"alpha", io::number(spec.hyperparameters.alpha_multi_objective)},
                            {"derivatives", to_string(spec.derivatives)}};
    out.manifest("robustness", config);
}

void cmd_figure3(const RunConfig& c) {
    if (c.schedule.parameter_values || c.schedule.n_points || c.schedule.dt || c.schedule.initial_condition ||
        c.schedule.single_transient_mu) {
        throw Error(ErrorCode::Config, "schedule overrides are not supported by figure3");
    }
    for (const auto& s : c.systems) (void)system_by_name(s);
    const auto results = reproduce_figure3(c.systems, c.integration);
    Outputs out(output_dir(c));
    std::vector<ComparisonRow> all;
    json summary = json::array();
    for (const auto& r : results) {
        all.insert(all.end(), r.rows.begin(), r.rows.end());
        out.text("condition_curve_" + r.system + ".csv", io::condition_curve_csv(r.curve));
        out.text("condition_curve_normalized_" + r.system + ".csv", io::condition_curve_csv(r.curve, true));
        const MonomialLibrary lib = system_by_name(r.system).library();
        json reports = json::array();
        for (const auto& row : r.rows) {
            json rep = io::fit_report_json(row.report, lib);
            rep["data"] = to_string(row.config);
            rep["method"] = to_string(row.method);
            reports.push_back(rep);
        }
        summary.push_back({{"system", r.system}, {"fits", reports}, {"condition_curve", io::condition_curve_json(r.curve)}});
    }
    out.text("figure3_table.csv", io::comparison_csv(all));
    out.json_file("figure3.json", summary);
    out.manifest("figure3", {{"systems", c.systems}, {"integration", integration_json(c.integration)}});
}

void cmd_condition_curve(const RunConfig& c) {
    require_system(c);
    const DatasetRecipe recipe = effective_recipe(c);
    const Dataset ds = generate_dataset(system_by_name(c.system), recipe, c.integration, c.analytic_derivatives);
    const DataSelection sel = select(ds, data_config_from_string(c.selection));
    const ConditionCurve curve = condition_curve(sel.transients, sel.attractors, ds.system.library(), c.alpha_grid);
    Outputs out(output_dir(c));
    out.text("condition_curve.csv", io::condition_curve_csv(curve));
    out.text("condition_curve_normalized.csv", io::condition_curve_csv(curve, true));
    out.json_file("condition_curve.json", io::condition_curve_json(curve));
    json config = dataset_config_json(c, recipe);
    config["selection"] = c.selection;
    config["alpha_grid"] = numbers(c.alpha_grid);
    out.manifest("condition-curve", config);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameterized sparse system identification from on- and off-attractor data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    Flags f;
    struct Sub {
        CLI::App* app;
        Opts opts;
    };
    std::vector<Sub> subs;
    auto add = [&](const char* name, const char* desc) {
        Sub s{app.add_subcommand(name, desc), {}};
        s.app->add_option("--config", f.config_path, "JSON config or a manifest.json from an earlier run");
        s.opts.output = s.app->add_option("-o,--output", f.output, "Output directory (default: $MOSINDY_OUTPUT_ROOT/<command>_<system>)");
        s.opts.rel_tol = s.app->add_option("--rel-tol", f.rel_tol, "Integrator relative tolerance");
        s.opts.abs_tol = s.app->add_option("--abs-tol", f.abs_tol, "Integrator absolute tolerance");
        subs.push_back(s);
        return &subs.back();
    };
    auto add_system = [&](Sub* s) {
        s->opts.system = s->app->add_option("-s,--system", f.system, "saddle_node | hopf | stuart_landau | lorenz");
        s->opts.analytic = s->app->add_flag("--analytic-derivatives", f.analytic, "Replace finite differences by the exact right-hand side");
    };

    subs.reserve(6);
    Sub* gen = add("generate", "Write transient and attractor sample sets");
    add_system(gen);
    Sub* fit = add("fit", "Fit one model at fixed lambda and alpha");
    add_system(fit);
    fit->opts.data = fit->app->add_option("--data", f.data, "Directory written by 'generate' (generated in memory if omitted)");
    fit->opts.selection = fit->app->add_option("--selection", f.selection, "single_transient | attractors | combined | full");
    fit->opts.lambda = fit->app->add_option("--lambda", f.lambda, "Relative sparsity threshold in [0, 1]");
    fit->opts.alpha = fit->app->add_option("--alpha", f.alpha, "Attractor weight (1 = standard)");
    Sub* sweep = add("sweep", "Lambda/alpha grid search");
    add_system(sweep);
    Sub* rob = add("robustness", "Monte Carlo noise and data-removal study");
    add_system(rob);
    rob->opts.realizations = rob->app->add_option("--realizations", f.realizations, "Realizations per cell");
    rob->opts.seed = rob->app->add_option("--seed", f.seed, "Base seed");
    rob->opts.noise_levels = rob->app->add_option("--noise-levels", f.noise_levels, "Comma-separated noise fractions")->delimiter(',');
    rob->opts.keep_fractions = rob->app->add_option("--keep-fractions", f.keep_fractions, "Comma-separated keep fractions")->delimiter(',');
    rob->opts.derivatives = rob->app->add_option("--derivatives", f.derivatives, "clean | recompute");
    Sub* fig = add("figure3", "Five-configuration comparison and condition curves for each system");
    fig->opts.systems = fig->app->add_option("--systems", f.systems, "Comma-separated systems")->delimiter(',');
    Sub* cc = add("condition-curve", "Condition number of the weighted library over alpha");
    add_system(cc);
    cc->opts.selection = cc->app->add_option("--selection", f.selection, "Data selection (default: combined)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(ErrorCode::Config, e.what());
        return 2;
    }

    try {
        for (const Sub& s : subs) {
            if (!s.app->parsed()) continue;
            const std::string name = s.app->get_name();
            const RunConfig c = build_config(name, f, s.opts);
            if (name == "generate") cmd_generate(c);
            else if (name == "fit") cmd_fit(c);
            else if (name == "sweep") cmd_sweep(c);
            else if (name == "robustness") cmd_robustness(c);
            else if (name == "figure3") cmd_figure3(c);
            else if (name == "condition-curve") cmd_condition_curve(c);
        }
    } catch (const Error& e) {
        report_error(e.code(), e.what());
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        report_error(ErrorCode::Io, e.what());
        return 4;
    } catch (const std::exception& e) {
        report_error(ErrorCode::InvalidArgument, e.what());
        return 2;
    }
    return 0;
}
