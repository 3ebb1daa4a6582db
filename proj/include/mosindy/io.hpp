#pragma once

// CSV/JSON serialization. Numbers are written with 17 significant digits so
// every value round-trips; no output contains timestamps or host paths
// beyond what the caller puts in.

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"
#include "mosindy/experiments.hpp"
#include "mosindy/library.hpp"
#include "mosindy/metrics.hpp"
#include "mosindy/sampling.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mosindy::io {

namespace fs = std::filesystem;
using nlohmann::json;

[[nodiscard]] inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorCode::Io, "not a number: '" + s + "'");
    return v;
}

/// JSON has no inf/nan; non-finite values become strings so they survive a round trip.
[[nodiscard]] inline json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

/// Writes to a sibling temporary file and renames it over the target.
inline void atomic_write(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        require(!ec, ErrorCode::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    require(!ec, ErrorCode::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

[[nodiscard]] inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline json read_json(const fs::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Config, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Sample sets

[[nodiscard]] inline std::string sample_set_csv(const SampleSet& s, const std::vector<std::string>& state_names) {
    require(static_cast<Index>(state_names.size()) == s.state_dim(), ErrorCode::DimensionMismatch,
            "state name count differs from state_dim");
    std::string out = "mu";
    for (const auto& n : state_names) out += "," + n;
    for (const auto& n : state_names) out += ",d" + n;
    out += ",kind\n";
    const std::string kind = to_string(s.kind);
    for (Index i = 0; i < s.rows(); ++i) {
        out += format_double(s.parameters[i]);
        for (Index j = 0; j < s.state_dim(); ++j) out += "," + format_double(s.states(i, j));
        for (Index j = 0; j < s.state_dim(); ++j) out += "," + format_double(s.derivatives(i, j));
        out += "," + kind + "\n";
    }
    return out;
}

/// CSV plus a JSON sidecar (same stem, .json) with the set's metadata.
inline void write_sample_set(const fs::path& csv_path, const SampleSet& s, const std::vector<std::string>& state_names,
                             const json& extra_meta = json::object()) {
    atomic_write(csv_path, sample_set_csv(s, state_names));
    json meta = s.meta;
    meta["kind"] = to_string(s.kind);
    meta["rows"] = s.rows();
    meta["state_names"] = state_names;
    for (auto it = extra_meta.begin(); it != extra_meta.end(); ++it) meta[it.key()] = it.value();
    fs::path side = csv_path;
    side.replace_extension(".json");
    write_json(side, meta);
}

[[nodiscard]] inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[nodiscard]] inline SampleSet read_sample_set(const fs::path& csv_path) {
    std::istringstream in(read_text(csv_path));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, csv_path.string() + ": empty file");
    const auto header = split(line, ',');
    require(header.size() >= 4 && header.front() == "mu" && header.back() == "kind" && (header.size() - 2) % 2 == 0,
            ErrorCode::Io, csv_path.string() + ": unexpected header");
    const auto n = static_cast<Index>((header.size() - 2) / 2);
    std::vector<std::vector<double>> rows;
    std::string kind;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        require(cells.size() == header.size(), ErrorCode::Io, csv_path.string() + ": ragged row");
        std::vector<double> r;
        for (std::size_t k = 0; k + 1 < cells.size(); ++k) r.push_back(parse_double(cells[k]));
        require(kind.empty() || kind == cells.back(), ErrorCode::Io, csv_path.string() + ": mixed kinds");
        kind = cells.back();
        rows.push_back(std::move(r));
    }
    SampleSet s;
    require(kind.empty() || kind == "transient" || kind == "attractor", ErrorCode::Io,
            csv_path.string() + ": unknown kind '" + kind + "'");
    s.kind = kind == "attractor" ? SampleKind::Attractor : SampleKind::Transient;
    const auto m = static_cast<Index>(rows.size());
    s.states.resize(m, n);
    s.derivatives.resize(m, n);
    s.parameters.resize(m);
    for (Index i = 0; i < m; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        s.parameters[i] = r[0];
        for (Index j = 0; j < n; ++j) {
            s.states(i, j) = r[static_cast<std::size_t>(1 + j)];
            s.derivatives(i, j) = r[static_cast<std::size_t>(1 + n + j)];
        }
    }
    fs::path side = csv_path;
    side.replace_extension(".json");
    if (fs::exists(side)) s.meta = read_json(side);
    return s;
}

// ---------------------------------------------------------------------------
// Models and reports

/// "dx/dt = 1 mu + 1 x - 1 x^3" per equation.
[[nodiscard]] inline std::vector<std::string> symbolic_model(const CoefficientMatrix& c, const MonomialLibrary& lib) {
    require(c.values.rows() == lib.size(), ErrorCode::ShapeMismatch, "coefficients do not match the library");
    const auto labels = lib.labels();
    const auto names = lib.variable_names();
    std::vector<std::string> out;
    for (Index i = 0; i < c.values.cols(); ++i) {
        std::string eq = "d" + names[static_cast<std::size_t>(i)] + "/dt =";
        bool first = true;
        for (Index j = 0; j < c.values.rows(); ++j) {
            const double v = c.values(j, i);
            if (v == 0.0) continue;
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.6g", std::abs(v));
            eq += first ? (v < 0 ? " -" : " ") : (v < 0 ? " - " : " + ");
            eq += buf;
            if (labels[static_cast<std::size_t>(j)] != "1") eq += " " + labels[static_cast<std::size_t>(j)];
            first = false;
        }
        if (first) eq += " 0";
        out.push_back(eq);
    }
    return out;
}

[[nodiscard]] inline json coefficients_json(const CoefficientMatrix& c, const MonomialLibrary& lib) {
    json j;
    j["library"] = lib.to_json();
    j["library_ref"] = c.library_ref.empty() ? lib.reference() : c.library_ref;
    const auto labels = lib.labels();
    const auto names = lib.variable_names();
    json values = json::array();
    json sparsity = json::array();
    for (Index r = 0; r < c.values.rows(); ++r) {
        json row = json::array();
        for (Index k = 0; k < c.values.cols(); ++k) {
            row.push_back(number(c.values(r, k)));
            if (c.values(r, k) != 0.0) {
                sparsity.push_back({{"term", labels[static_cast<std::size_t>(r)]},
                                    {"equation", names[static_cast<std::size_t>(k)]},
                                    {"row", r},
                                    {"column", k}});
            }
        }
        values.push_back(row);
    }
    j["values"] = values;
    j["sparsity"] = sparsity;
    j["model"] = symbolic_model(c, lib);
    return j;
}

[[nodiscard]] inline json fit_report_json(const FitReport& r, const MonomialLibrary& lib) {
    json j;
    j["coefficients"] = coefficients_json(r.coefficients, lib);
    j["coefficient_error"] = number(r.coefficient_error);
    j["structure_match"] = r.structure_match;
    json cn = json::object();
    for (const auto& [k, v] : r.condition_numbers) cn[k] = number(v);
    j["condition_numbers"] = cn;
    j["hyperparameters"] = {{"lambda", number(r.lambda)}, {"alpha", number(r.alpha)}};
    j["provenance"] = r.provenance;
    j["all_thresholded_equations"] = r.all_thresholded;
    return j;
}

// ---------------------------------------------------------------------------
// Experiment tables

[[nodiscard]] inline std::string condition_curve_csv(const ConditionCurve& c, bool normalized = false) {
    std::string out = "alpha,kappa\n";
    for (const auto& p : c.points) {
        out += format_double(p.alpha) + "," + format_double(normalized ? p.kappa_normalized : p.kappa) + "\n";
    }
    return out;
}

[[nodiscard]] inline json condition_curve_json(const ConditionCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points) {
        pts.push_back({{"alpha", number(p.alpha)},
                       {"kappa", number(p.kappa)},
                       {"kappa_normalized", number(p.kappa_normalized)}});
    }
    return {{"points", pts},
            {"kappa_transient", number(c.kappa_transient)},
            {"kappa_transient_normalized", number(c.kappa_transient_normalized)},
            {"kappa_attractor", number(c.kappa_attractor)},
            {"kappa_attractor_normalized", number(c.kappa_attractor_normalized)}};
}

[[nodiscard]] inline std::string sweep_cells_csv(const std::string& system, const std::vector<SweepCell>& cells) {
    std::string out = "system,data,method,lambda,alpha,coefficient_error,structure_match,failed,message\n";
    for (const auto& c : cells) {
        std::string msg = c.message;
        for (char& ch : msg) {
            if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
        }
        out += system + "," + to_string(c.config) + "," + to_string(c.method) + "," + format_double(c.lambda) + "," +
               format_double(c.alpha) + "," + format_double(c.error) + "," + (c.structure_match ? "1" : "0") + "," +
               (c.failed ? "1" : "0") + "," + msg + "\n";
    }
    return out;
}

[[nodiscard]] inline std::string heatmap_csv(const HeatmapResult& h) {
    std::string out =
        "system,noise_level,keep_fraction,realizations,standard_success,standard_error,multi_objective_success,"
        "multi_objective_error\n";
    for (const auto& c : h.cells) {
        out += h.system + "," + format_double(c.noise_level) + "," + format_double(c.keep_fraction) + "," +
               std::to_string(c.realizations) + "," + format_double(c.standard_success) + "," +
               format_double(c.standard_error) + "," + format_double(c.multi_objective_success) + "," +
               format_double(c.multi_objective_error) + "\n";
    }
    return out;
}

[[nodiscard]] inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "system,data,method,lambda,alpha,coefficient_error,structure_match,kappa,kappa_normalized\n";
    for (const auto& r : rows) {
        const auto k = r.report.condition_numbers.find("theta");
        const auto kn = r.report.condition_numbers.find("theta_normalized");
        out += r.system + "," + to_string(r.config) + "," + to_string(r.method) + "," + format_double(r.lambda) + "," +
               format_double(r.alpha) + "," + format_double(r.report.coefficient_error) + "," +
               (r.report.structure_match ? "1" : "0") + "," +
               format_double(k == r.report.condition_numbers.end() ? std::nan("") : k->second) + "," +
               format_double(kn == r.report.condition_numbers.end() ? std::nan("") : kn->second) + "\n";
    }
    return out;
}

}  // namespace mosindy::io
