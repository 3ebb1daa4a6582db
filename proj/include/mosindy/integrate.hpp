#pragma once

// Adaptive Dormand-Prince 5(4) integration with dense output.

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace mosindy {

/// Defaults keep interpolation error in burst derivatives below the
/// finite-difference truncation error.
struct IntegrationConfig {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double max_step = std::numeric_limits<double>::infinity();
    double dense_dt = 0.01;

    void validate() const {
        require(rel_tol > 0 && abs_tol > 0, ErrorCode::InvalidArgument, "tolerances must be positive");
        require(max_step > 0, ErrorCode::InvalidArgument, "max_step must be positive");
        require(dense_dt > 0, ErrorCode::InvalidArgument, "dense_dt must be positive");
    }
};

struct Trajectory {
    std::vector<double> times;
    Matrix states;  // one row per time
    double parameter = 0.0;
};

namespace detail {

// Butcher tableau
inline constexpr std::array<double, 7> dp_c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr std::array<std::array<double, 6>, 7> dp_a{{
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
}};
// 5th-order weights minus embedded 4th-order weights
inline constexpr std::array<double, 7> dp_e{-71.0 / 57600, 0.0, 71.0 / 16695, -71.0 / 1920,
                                            17253.0 / 339200, -22.0 / 525, 1.0 / 40};
// Continuous extension: y(t + s h) = y + h * sum_k K_k * sum_j P[k][j] s^(j+1)
inline constexpr std::array<std::array<double, 4>, 7> dp_p{{
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0, 0, 0, 0},
    {0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
}};

inline constexpr double min_step = 1e-14;

[[nodiscard]] inline double rms_scaled(const Vector& v, const Vector& y0, const Vector& y1, double atol,
                                       double rtol) {
    double acc = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = v[i] / scale;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

inline void check_finite(const Vector& y, double t) {
    if (!y.allFinite()) throw Error(ErrorCode::NonFinite, "state became non-finite at t=" + std::to_string(t));
}

}  // namespace detail

/// Integrates from t = 0 and returns states at the requested times (sorted,
/// non-negative). Times that fall inside a step are filled from the
/// continuous extension of that step.
[[nodiscard]] inline Matrix integrate_at(const SystemDefinition& system, const Vector& x0, double mu,
                                         std::span<const double> times, const IntegrationConfig& config) {
    using namespace detail;
    config.validate();
    require(x0.size() == system.state_dim, ErrorCode::DimensionMismatch, "initial condition has wrong length");
    require(std::is_sorted(times.begin(), times.end()), ErrorCode::InvalidArgument, "output times must be sorted");
    require(times.empty() || times.front() >= 0.0, ErrorCode::InvalidArgument, "output times must be >= 0");

    const Index n = system.state_dim;
    Matrix out(static_cast<Index>(times.size()), n);
    if (times.empty()) return out;
    const double t_end = times.back();

    std::size_t next = 0;
    while (next < times.size() && times[next] == 0.0) out.row(static_cast<Index>(next++)) = x0.transpose();

    Vector y = x0;
    Vector f(n);
    system.rhs(y, mu, f);
    detail::check_finite(f, 0.0);

    double t = 0.0;
    // initial step heuristic (Hairer, Norsett & Wanner II.4)
    double h;
    {
        Vector scale = (config.abs_tol + config.rel_tol * y.array().abs()).matrix();
        const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
        const double d1 = std::sqrt((f.array() / scale.array()).square().mean());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_end);
        Vector y1 = y + h0 * f;
        Vector f1(n);
        system.rhs(y1, mu, f1);
        const double d2 = std::sqrt((((f1 - f).array() / scale.array())).square().mean()) / h0;
        const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                        : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min({100 * h0, h1, config.max_step});
    }

    std::array<Vector, 7> k;
    for (auto& ki : k) ki.resize(n);
    Vector stage(n), y_new(n), err(n);

    while (next < times.size()) {
        h = std::min({h, config.max_step, t_end - t});
        if (h < min_step) {
            throw Error(ErrorCode::StepUnderflow, "step size fell below 1e-14 at t=" + std::to_string(t));
        }

        k[0] = f;
        for (int s = 1; s < 7; ++s) {
            stage = y;
            for (int j = 0; j < s; ++j) {
                if (dp_a[s][j] != 0.0) stage.noalias() += h * dp_a[s][j] * k[j];
            }
            system.rhs(stage, mu, k[s]);
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        y_new = stage;
        err.setZero();
        for (int s = 0; s < 7; ++s) err.noalias() += h * dp_e[s] * k[s];
        const double err_norm = rms_scaled(err, y, y_new, config.abs_tol, config.rel_tol);

        if (!std::isfinite(err_norm)) {
            h *= 0.2;
            if (!y_new.allFinite() && h < min_step) detail::check_finite(y_new, t);
            continue;
        }

        if (err_norm <= 1.0) {
            const double t_new = (t_end - t - h <= 1e-12 * std::max(1.0, t_end)) ? t_end : t + h;
            detail::check_finite(y_new, t_new);
            while (next < times.size() && times[next] <= t_new) {
                const double s_frac = (times[next] - t) / h;
                Vector q = Vector::Zero(n);
                double sp = s_frac;
                for (int j = 0; j < 4; ++j) {
                    for (int s = 0; s < 7; ++s) {
                        if (dp_p[s][j] != 0.0) q.noalias() += (dp_p[s][j] * sp) * k[s];
                    }
                    sp *= s_frac;
                }
                out.row(static_cast<Index>(next++)) = (y + h * q).transpose();
            }
            t = t_new;
            y = y_new;
            f = k[6];
            const double factor = err_norm == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err_norm, -0.2));
            h *= factor;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
        }
    }
    return out;
}

/// States sampled at t = 0, dense_dt, 2 dense_dt, ... up to t_final.
[[nodiscard]] inline Trajectory integrate(const SystemDefinition& system, const Vector& x0, double mu,
                                         double t_final, const IntegrationConfig& config) {
    config.validate();
    require(t_final > 0.0, ErrorCode::InvalidArgument, "t_final must be positive");
    const auto count = static_cast<std::size_t>(std::floor(t_final / config.dense_dt + 1e-9)) + 1;
    Trajectory traj;
    traj.parameter = mu;
    traj.times.resize(count);
    for (std::size_t i = 0; i < count; ++i) traj.times[i] = static_cast<double>(i) * config.dense_dt;
    traj.states = integrate_at(system, x0, mu, traj.times, config);
    return traj;
}

}  // namespace mosindy
