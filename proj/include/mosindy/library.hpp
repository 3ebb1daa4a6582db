#pragma once

// Polynomial candidate-function libraries over (x1, ..., xn, mu).

#include "mosindy/common.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace mosindy {

using Exponents = std::vector<int>;

/// Monomials in (x1, ..., xn, mu) up to a total degree, graded-lex ordered
/// with the constant first. The parameter is always the last variable.
class MonomialLibrary {
public:
    MonomialLibrary() = default;

    MonomialLibrary(std::vector<std::string> variable_names, int max_degree)
        : names_(std::move(variable_names)), max_degree_(max_degree) {
        require(!names_.empty(), ErrorCode::InvalidArgument, "library needs at least one variable");
        require(max_degree_ >= 0, ErrorCode::InvalidArgument, "max_degree must be non-negative");
        Exponents current(names_.size(), 0);
        for (int degree = 0; degree <= max_degree_; ++degree) {
            enumerate(current, 0, degree);
        }
        labels_.reserve(exponents_.size());
        for (const auto& e : exponents_) labels_.push_back(make_label(e));
    }

    [[nodiscard]] int n_vars() const noexcept { return static_cast<int>(names_.size()); }
    [[nodiscard]] int state_dim() const noexcept { return n_vars() - 1; }
    [[nodiscard]] int max_degree() const noexcept { return max_degree_; }
    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(exponents_.size()); }
    [[nodiscard]] const std::vector<Exponents>& exponents() const noexcept { return exponents_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::vector<std::string>& variable_names() const noexcept { return names_; }

    /// Row index of a multi-index, or -1 if it is not in the library.
    [[nodiscard]] Index index_of(const Exponents& e) const {
        for (std::size_t k = 0; k < exponents_.size(); ++k) {
            if (exponents_[k] == e) return static_cast<Index>(k);
        }
        return -1;
    }

    /// Identifier tying coefficient rows to this library.
    [[nodiscard]] std::string reference() const {
        std::string ref = "monomial(";
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (i) ref += ",";
            ref += names_[i];
        }
        return ref + ";degree=" + std::to_string(max_degree_) + ")";
    }

    /// One row of the library evaluated at (x, mu).
    template <class StateVec>
    void evaluate_row(const StateVec& x, double mu, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const {
        const int nv = n_vars();
        // powers[v][k] = var_v^k, built by repeated multiplication so integer inputs stay exact
        std::vector<double> powers(static_cast<std::size_t>(nv * (max_degree_ + 1)));
        for (int v = 0; v < nv; ++v) {
            const double value = v < nv - 1 ? static_cast<double>(x[v]) : mu;
            double p = 1.0;
            for (int k = 0; k <= max_degree_; ++k) {
                powers[static_cast<std::size_t>(v * (max_degree_ + 1) + k)] = p;
                p *= value;
            }
        }
        for (std::size_t j = 0; j < exponents_.size(); ++j) {
            double term = 1.0;
            for (int v = 0; v < nv; ++v) {
                const int k = exponents_[j][static_cast<std::size_t>(v)];
                if (k) term *= powers[static_cast<std::size_t>(v * (max_degree_ + 1) + k)];
            }
            out[static_cast<Index>(j)] = term;
        }
    }

    /// Theta matrix for m samples: states is m x n, parameters has length m.
    [[nodiscard]] Matrix evaluate(const Matrix& states, const Vector& parameters) const {
        require(states.cols() + 1 == n_vars(), ErrorCode::DimensionMismatch,
                "state columns (" + std::to_string(states.cols()) + ") + 1 != library variables (" +
                    std::to_string(n_vars()) + ")");
        require(states.rows() == parameters.size(), ErrorCode::DimensionMismatch,
                "states and parameters are not row-aligned");
        Matrix theta(states.rows(), size());
        for (Index i = 0; i < states.rows(); ++i) {
            evaluate_row(states.row(i), parameters[i], theta.row(i));
        }
        return theta;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["reference"] = reference();
        j["variables"] = names_;
        j["max_degree"] = max_degree_;
        j["exponents"] = exponents_;
        j["labels"] = labels_;
        return j;
    }

private:
    // Within one degree, the first variable's exponent runs from high to low.
    void enumerate(Exponents& current, std::size_t var, int remaining) {
        if (var + 1 == current.size()) {
            current[var] = remaining;
            exponents_.push_back(current);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            current[var] = k;
            enumerate(current, var + 1, remaining - k);
        }
        current[var] = 0;
    }

    [[nodiscard]] std::string make_label(const Exponents& e) const {
        std::string label;
        for (std::size_t v = 0; v < e.size(); ++v) {
            if (e[v] == 0) continue;
            if (!label.empty()) label += " ";
            label += names_[v];
            if (e[v] > 1) label += "^" + std::to_string(e[v]);
        }
        return label.empty() ? "1" : label;
    }

    std::vector<std::string> names_;
    int max_degree_ = 0;
    std::vector<Exponents> exponents_;
    std::vector<std::string> labels_;
};

/// Default state names: "x" for scalar systems, otherwise x1..xn.
[[nodiscard]] inline std::vector<std::string> default_state_names(int state_dim) {
    if (state_dim == 1) return {"x"};
    std::vector<std::string> names;
    for (int i = 1; i <= state_dim; ++i) names.push_back("x" + std::to_string(i));
    return names;
}

[[nodiscard]] inline MonomialLibrary build_library(int state_dim, int max_degree,
                                                   std::vector<std::string> state_names = {}) {
    require(state_dim >= 1, ErrorCode::InvalidArgument, "state_dim must be >= 1");
    if (state_names.empty()) state_names = default_state_names(state_dim);
    require(static_cast<int>(state_names.size()) == state_dim, ErrorCode::InvalidArgument,
            "state name count does not match state_dim");
    state_names.emplace_back("mu");
    return MonomialLibrary(std::move(state_names), max_degree);
}

}  // namespace mosindy
