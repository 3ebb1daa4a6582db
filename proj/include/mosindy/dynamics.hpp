#pragma once

// The four benchmark parameterized systems and their ground-truth coefficients.

#include "mosindy/common.hpp"
#include "mosindy/library.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace mosindy {

/// Coefficient matrix Xi (d x n) with the library it refers to.
struct CoefficientMatrix {
    Matrix values;
    std::string library_ref;

    [[nodiscard]] Index nonzeros() const { return (values.array() != 0.0).count(); }
};

/// One monomial term of one equation: coefficient * prod(vars^exponents).
struct Term {
    int equation;
    Exponents exponents;
    double coefficient;
};

/// Parameterized ODE with analytic right-hand side and declared monomial ground truth.
struct SystemDefinition {
    using Rhs = std::function<void(const Vector& x, double mu, Vector& dxdt)>;

    std::string name;
    int state_dim = 0;
    Rhs rhs;
    int library_degree = 0;
    std::vector<std::string> state_names;
    std::vector<Term> terms;
    /// Box where the right-hand side identity is exercised by the tests.
    double state_range = 1.0;
    double mu_min = 0.0;
    double mu_max = 0.0;

    [[nodiscard]] Vector operator()(const Vector& x, double mu) const {
        Vector out(state_dim);
        rhs(x, mu, out);
        return out;
    }

    [[nodiscard]] MonomialLibrary library() const {
        return build_library(state_dim, library_degree, state_names);
    }

    [[nodiscard]] CoefficientMatrix true_coefficients() const {
        const MonomialLibrary lib = library();
        CoefficientMatrix xi{Matrix::Zero(lib.size(), state_dim), lib.reference()};
        for (const Term& t : terms) {
            const Index row = lib.index_of(t.exponents);
            require(row >= 0, ErrorCode::InvalidArgument, name + ": term outside library");
            xi.values(row, t.equation) += t.coefficient;
        }
        return xi;
    }
};

inline SystemDefinition saddle_node() {
    SystemDefinition s;
    s.name = "saddle_node";
    s.state_dim = 1;
    s.library_degree = 5;
    s.state_names = {"x"};
    s.rhs = [](const Vector& x, double mu, Vector& dx) { dx[0] = mu + x[0] - x[0] * x[0] * x[0]; };
    // exponents over (x, mu)
    s.terms = {{0, {0, 1}, 1.0}, {0, {1, 0}, 1.0}, {0, {3, 0}, -1.0}};
    s.state_range = 2.5;
    s.mu_min = -6.0;
    s.mu_max = 6.0;
    return s;
}

inline SystemDefinition hopf_normal_form() {
    SystemDefinition s;
    s.name = "hopf";
    s.state_dim = 2;
    s.library_degree = 4;
    s.state_names = {"x", "y"};
    s.rhs = [](const Vector& v, double mu, Vector& dv) {
        const double x = v[0], y = v[1];
        const double r2 = x * x + y * y;
        dv[0] = mu * x - y - x * r2;
        dv[1] = x + mu * y - y * r2;
    };
    // exponents over (x, y, mu)
    s.terms = {
        {0, {1, 0, 1}, 1.0}, {0, {0, 1, 0}, -1.0}, {0, {3, 0, 0}, -1.0}, {0, {1, 2, 0}, -1.0},
        {1, {1, 0, 0}, 1.0}, {1, {0, 1, 1}, 1.0},  {1, {2, 1, 0}, -1.0}, {1, {0, 3, 0}, -1.0},
    };
    s.state_range = 2.0;
    s.mu_min = -3.0;
    s.mu_max = 2.0;
    return s;
}

struct StuartLandauConstants {
    double r1 = 1.0;
    double r2 = 0.2;
    double omega1 = 1.0 / std::numbers::pi;
    double omega2 = 1.0;
};

inline SystemDefinition coupled_stuart_landau(StuartLandauConstants k = {}) {
    SystemDefinition s;
    s.name = "stuart_landau";
    s.state_dim = 4;
    s.library_degree = 3;
    s.state_names = {"x1", "y1", "x2", "y2"};
    s.rhs = [k](const Vector& v, double mu, Vector& dv) {
        const double x1 = v[0], y1 = v[1], x2 = v[2], y2 = v[3];
        const double g1 = k.r1 * k.r1 - (x1 * x1 + y1 * y1);
        const double g2 = k.r2 * k.r2 - (x2 * x2 + y2 * y2);
        dv[0] = -k.omega1 * y1 + g1 * x1 + mu * (x1 * x2 + y1 * y2);
        dv[1] = k.omega1 * x1 + g1 * y1 + mu * (x1 * y2 - y1 * x2);
        dv[2] = -k.omega2 * y2 + g2 * x2;
        dv[3] = k.omega2 * x2 + g2 * y2;
    };
    const double r1sq = k.r1 * k.r1, r2sq = k.r2 * k.r2;
    // exponents over (x1, y1, x2, y2, mu)
    s.terms = {
        {0, {0, 1, 0, 0, 0}, -k.omega1}, {0, {1, 0, 0, 0, 0}, r1sq}, {0, {3, 0, 0, 0, 0}, -1.0},
        {0, {1, 2, 0, 0, 0}, -1.0},      {0, {1, 0, 1, 0, 1}, 1.0},  {0, {0, 1, 0, 1, 1}, 1.0},

        {1, {1, 0, 0, 0, 0}, k.omega1},  {1, {0, 1, 0, 0, 0}, r1sq}, {1, {2, 1, 0, 0, 0}, -1.0},
        {1, {0, 3, 0, 0, 0}, -1.0},      {1, {1, 0, 0, 1, 1}, 1.0},  {1, {0, 1, 1, 0, 1}, -1.0},

        {2, {0, 0, 0, 1, 0}, -k.omega2}, {2, {0, 0, 1, 0, 0}, r2sq}, {2, {0, 0, 3, 0, 0}, -1.0},
        {2, {0, 0, 1, 2, 0}, -1.0},

        {3, {0, 0, 1, 0, 0}, k.omega2},  {3, {0, 0, 0, 1, 0}, r2sq}, {3, {0, 0, 2, 1, 0}, -1.0},
        {3, {0, 0, 0, 3, 0}, -1.0},
    };
    s.state_range = 1.5;
    s.mu_min = 0.0;
    s.mu_max = 1.817;
    return s;
}

/// Coupling strength at which 2:1 synchronization sets in.
[[nodiscard]] inline double stuart_landau_sync_threshold(StuartLandauConstants k = {}) {
    return std::abs(k.omega2 - 2.0 * k.omega1) / (2.0 * k.r2);
}

struct LorenzConstants {
    double sigma = 10.0;
    double beta = 8.0 / 3.0;
};

inline SystemDefinition lorenz(LorenzConstants k = {}) {
    SystemDefinition s;
    s.name = "lorenz";
    s.state_dim = 3;
    s.library_degree = 4;
    s.state_names = {"x", "y", "z"};
    s.rhs = [k](const Vector& v, double mu, Vector& dv) {
        const double x = v[0], y = v[1], z = v[2];
        dv[0] = k.sigma * (y - x);
        dv[1] = x * (mu - z) - y;
        dv[2] = x * y - k.beta * z;
    };
    // exponents over (x, y, z, mu)
    s.terms = {
        {0, {0, 1, 0, 0}, k.sigma}, {0, {1, 0, 0, 0}, -k.sigma},
        {1, {1, 0, 0, 1}, 1.0},     {1, {1, 0, 1, 0}, -1.0},     {1, {0, 1, 0, 0}, -1.0},
        {2, {1, 1, 0, 0}, 1.0},     {2, {0, 0, 1, 0}, -k.beta},
    };
    s.state_range = 40.0;
    s.mu_min = 16.0;
    s.mu_max = 28.0;
    return s;
}

[[nodiscard]] inline std::vector<std::string> system_names() {
    return {"saddle_node", "hopf", "stuart_landau", "lorenz"};
}

[[nodiscard]] inline SystemDefinition system_by_name(const std::string& name) {
    if (name == "saddle_node") return saddle_node();
    if (name == "hopf") return hopf_normal_form();
    if (name == "stuart_landau") return coupled_stuart_landau();
    if (name == "lorenz") return lorenz();
    std::string valid;
    for (const auto& n : system_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::UnknownSystem, "unknown system '" + name + "'; valid names: " + valid);
}

}  // namespace mosindy
