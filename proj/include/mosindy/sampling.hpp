#pragma once

// Dataset generation: transients, burst-sampled attractors, fixed points,
// finite-difference derivatives, measurement noise and decimation.

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"
#include "mosindy/integrate.hpp"
#include "mosindy/library.hpp"
#include "mosindy/rng.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mosindy {

enum class SampleKind { Transient, Attractor };

[[nodiscard]] inline std::string to_string(SampleKind k) {
    return k == SampleKind::Transient ? "transient" : "attractor";
}

/// Row-aligned states, parameter values and time derivatives of one measurement kind.
struct SampleSet {
    SampleKind kind = SampleKind::Transient;
    Matrix states;
    Vector parameters;
    Matrix derivatives;
    nlohmann::json meta = nlohmann::json::object();
    // Transients keep the uniformly sampled record the rows were differentiated
    // from, so noise can be injected before differentiation. Empty otherwise.
    Matrix raw_states;
    double dt = 0.0;

    [[nodiscard]] Index rows() const noexcept { return states.rows(); }
    [[nodiscard]] Index state_dim() const noexcept { return states.cols(); }
    [[nodiscard]] bool empty() const noexcept { return states.rows() == 0; }
};

/// Five-point fourth-order central differences at the interior nodes; two
/// points at each end are dropped.
[[nodiscard]] inline Matrix differentiate_central4(const Matrix& states, double dt) {
    require(states.rows() >= 5, ErrorCode::TooFewSamples,
            "central stencil needs at least 5 samples, got " + std::to_string(states.rows()));
    require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    const Index m = states.rows() - 4;
    Matrix d(m, states.cols());
    const double inv = 1.0 / (12.0 * dt);
    for (Index i = 0; i < m; ++i) {
        d.row(i) = (states.row(i) - 8.0 * states.row(i + 1) + 8.0 * states.row(i + 3) - states.row(i + 4)) * inv;
    }
    return d;
}

[[nodiscard]] inline Matrix evaluate(const MonomialLibrary& lib, const SampleSet& samples) {
    return lib.evaluate(samples.states, samples.parameters);
}

/// Stacks sample sets of one kind; empty input gives an empty set of dimension n.
[[nodiscard]] inline SampleSet concat(const std::vector<SampleSet>& sets, Index state_dim) {
    SampleSet out;
    Index rows = 0;
    for (const auto& s : sets) {
        require(s.empty() || s.state_dim() == state_dim, ErrorCode::DimensionMismatch, "state dimensions differ");
        rows += s.rows();
    }
    if (!sets.empty()) out.kind = sets.front().kind;
    out.states.resize(rows, state_dim);
    out.derivatives.resize(rows, state_dim);
    out.parameters.resize(rows);
    Index at = 0;
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& s : sets) {
        if (s.empty()) continue;
        out.states.middleRows(at, s.rows()) = s.states;
        out.derivatives.middleRows(at, s.rows()) = s.derivatives;
        out.parameters.segment(at, s.rows()) = s.parameters;
        at += s.rows();
        parts.push_back(s.meta);
    }
    out.meta["parts"] = std::move(parts);
    return out;
}

struct FixedPointRule {
    Vector initial_guess;
};

struct BurstRule {
    int count = 1;
    double interval = 1.0;
    double settle_time = 0.0;
};

using AttractorRule = std::variant<FixedPointRule, BurstRule>;

struct ScheduleSpec {
    std::vector<double> parameter_values;
    Vector initial_condition;
    int n_points = 0;
    double dt = 0.01;
    std::vector<AttractorRule> attractor_rules;  // aligned with parameter_values

    void validate(const SystemDefinition& system) const {
        require(!parameter_values.empty(), ErrorCode::InvalidArgument, "schedule has no parameter values");
        require(initial_condition.size() == system.state_dim, ErrorCode::DimensionMismatch,
                "initial condition length does not match the system");
        require(n_points >= 5, ErrorCode::InvalidArgument, "n_points must be >= 5");
        require(dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
        require(attractor_rules.empty() || attractor_rules.size() == parameter_values.size(),
                ErrorCode::InvalidArgument, "attractor rules must align with parameter values");
    }
};

/// Integrates one transient and keeps the n_points - 4 differentiable rows.
[[nodiscard]] inline SampleSet transient_sample(const SystemDefinition& system, const Vector& x0, double mu,
                                                int n_points, double dt, IntegrationConfig config) {
    require(n_points >= 5, ErrorCode::TooFewSamples, "n_points must be >= 5");
    config.dense_dt = dt;
    std::vector<double> times(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) times[static_cast<std::size_t>(i)] = i * dt;
    SampleSet s;
    s.kind = SampleKind::Transient;
    s.raw_states = integrate_at(system, x0, mu, times, config);
    s.dt = dt;
    s.derivatives = differentiate_central4(s.raw_states, dt);
    s.states = s.raw_states.middleRows(2, n_points - 4);
    s.parameters = Vector::Constant(n_points - 4, mu);
    s.meta = {{"system", system.name}, {"kind", "transient"}, {"mu", mu}, {"dt", dt}, {"n_points", n_points}};
    return s;
}

struct TransientBatch {
    std::vector<SampleSet> sets;                          // schedule order, failures skipped
    std::vector<std::pair<double, std::string>> failures;  // (mu, reason)
};

[[nodiscard]] inline TransientBatch generate_transients(const SystemDefinition& system,
                                                        const ScheduleSpec& schedule,
                                                        const IntegrationConfig& config) {
    schedule.validate(system);
    TransientBatch batch;
    for (double mu : schedule.parameter_values) {
        try {
            batch.sets.push_back(
                transient_sample(system, schedule.initial_condition, mu, schedule.n_points, schedule.dt, config));
        } catch (const Error& e) {
            batch.failures.emplace_back(mu, e.what());
        }
    }
    return batch;
}

/// Integrates past settle_time, then records 5-point bursts spaced by
/// `interval`; each burst contributes its centre state and its
/// central-difference derivative.
[[nodiscard]] inline SampleSet burst_sample_attractor(const SystemDefinition& system, const Vector& x0, double mu,
                                                      double settle_time, int count, double interval, double dt,
                                                      const IntegrationConfig& config) {
    require(count >= 1, ErrorCode::InvalidArgument, "burst count must be >= 1");
    require(interval > 4.0 * dt, ErrorCode::InvalidArgument, "burst interval must exceed 4 dt");
    require(settle_time >= 2.0 * dt, ErrorCode::InvalidArgument, "settle_time must leave room for the burst");
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(5 * count));
    for (int k = 0; k < count; ++k) {
        const double centre = settle_time + k * interval;
        for (int j = -2; j <= 2; ++j) times.push_back(centre + j * dt);
    }
    const Matrix raw = integrate_at(system, x0, mu, times, config);
    SampleSet s;
    s.kind = SampleKind::Attractor;
    s.states.resize(count, system.state_dim);
    s.derivatives.resize(count, system.state_dim);
    for (int k = 0; k < count; ++k) {
        const Matrix burst = raw.middleRows(5 * k, 5);
        s.states.row(k) = burst.row(2);
        s.derivatives.row(k) = differentiate_central4(burst, dt).row(0);
    }
    s.parameters = Vector::Constant(count, mu);
    s.meta = {{"system", system.name}, {"kind", "attractor"},   {"rule", "burst"},   {"mu", mu},
              {"settle_time", settle_time}, {"count", count}, {"interval", interval}, {"dt", dt}};
    return s;
}

/// Central-difference Jacobian of the right-hand side.
[[nodiscard]] inline Matrix numerical_jacobian(const SystemDefinition& system, const Vector& x, double mu) {
    const Index n = system.state_dim;
    Matrix jac(n, n);
    Vector xp = x, xm = x;
    for (Index j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        jac.col(j) = (system(xp, mu) - system(xm, mu)) / (2.0 * h);
        xp[j] = xm[j] = x[j];
    }
    return jac;
}

/// Newton iteration from a branch-selecting guess; returns one attractor row
/// with an exactly zero derivative.
[[nodiscard]] inline SampleSet fixed_point_sample(const SystemDefinition& system, double mu,
                                                  const Vector& initial_guess) {
    require(initial_guess.size() == system.state_dim, ErrorCode::DimensionMismatch, "guess has wrong length");
    Vector x = initial_guess;
    Vector f = system(x, mu);
    bool converged = f.lpNorm<Eigen::Infinity>() <= 1e-12;
    for (int iter = 0; iter < 100 && !converged; ++iter) {
        const Vector step = numerical_jacobian(system, x, mu).fullPivLu().solve(-f);
        // backtracking keeps Newton from jumping to another branch
        double t = 1.0;
        Vector trial = x + step;
        Vector ft = system(trial, mu);
        while (ft.norm() > f.norm() && t > 1e-4) {
            t *= 0.5;
            trial = x + t * step;
            ft = system(trial, mu);
        }
        x = trial;
        f = ft;
        converged = f.lpNorm<Eigen::Infinity>() <= 1e-12;
        if (!converged && step.norm() * t <= 1e-15 * std::max(1.0, x.norm())) {
            // stagnated at roundoff: accept if the residual is at the evaluation noise floor
            converged = f.lpNorm<Eigen::Infinity>() <= 1e-11 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
            break;
        }
    }
    if (!converged || !x.allFinite()) {
        throw Error(ErrorCode::NoConvergence,
                    system.name + ": fixed-point iteration did not converge at mu=" + std::to_string(mu));
    }
    const Eigen::VectorXcd eig = numerical_jacobian(system, x, mu).eigenvalues();
    for (Index i = 0; i < eig.size(); ++i) {
        if (eig[i].real() >= 0.0) {
            throw Error(ErrorCode::WrongStability,
                        system.name + ": equilibrium at mu=" + std::to_string(mu) + " is not stable");
        }
    }
    SampleSet s;
    s.kind = SampleKind::Attractor;
    s.states = x.transpose();
    s.parameters = Vector::Constant(1, mu);
    s.derivatives = Matrix::Zero(1, system.state_dim);
    s.meta = {{"system", system.name}, {"kind", "attractor"}, {"rule", "fixed_point"}, {"mu", mu}};
    return s;
}

[[nodiscard]] inline std::vector<SampleSet> generate_attractors(const SystemDefinition& system,
                                                                const ScheduleSpec& schedule,
                                                                const IntegrationConfig& config) {
    schedule.validate(system);
    std::vector<SampleSet> out;
    for (std::size_t i = 0; i < schedule.attractor_rules.size(); ++i) {
        const double mu = schedule.parameter_values[i];
        const auto& rule = schedule.attractor_rules[i];
        if (const auto* fp = std::get_if<FixedPointRule>(&rule)) {
            out.push_back(fixed_point_sample(system, mu, fp->initial_guess));
        } else {
            const auto& b = std::get<BurstRule>(rule);
            out.push_back(burst_sample_attractor(system, schedule.initial_condition, mu, b.settle_time, b.count,
                                                 b.interval, schedule.dt, config));
        }
    }
    return out;
}

[[nodiscard]] inline double rms(const Matrix& m) {
    return m.size() == 0 ? 0.0 : std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

/// How derivative rows are treated after noise is added to the states.
enum class NoiseDerivatives {
    Recompute,  // differentiate the noisy record
    Clean       // keep the clean-record derivatives; noise enters the library only
};

[[nodiscard]] inline std::string to_string(NoiseDerivatives m) {
    return m == NoiseDerivatives::Recompute ? "recompute" : "clean";
}

[[nodiscard]] inline NoiseDerivatives noise_derivatives_from_string(const std::string& s) {
    if (s == "recompute") return NoiseDerivatives::Recompute;
    if (s == "clean") return NoiseDerivatives::Clean;
    throw Error(ErrorCode::Config, "unknown noise derivative mode '" + s + "'; valid: recompute, clean");
}

/// Gaussian measurement noise on a transient: sigma = level * RMS of the
/// clean record.
[[nodiscard]] inline SampleSet add_noise(const SampleSet& samples, double level, std::uint64_t seed,
                                         NoiseDerivatives mode = NoiseDerivatives::Recompute) {
    require(samples.kind == SampleKind::Transient, ErrorCode::KindMismatch, "noise is applied to transients only");
    require(level >= 0.0, ErrorCode::InvalidArgument, "noise level must be non-negative");
    require(samples.raw_states.rows() >= 5 && samples.dt > 0.0, ErrorCode::InvalidArgument,
            "transient has no raw record to perturb (already decimated?)");
    SampleSet out = samples;
    out.meta["noise_level"] = level;
    out.meta["noise_seed"] = seed;
    out.meta["noise_derivatives"] = to_string(mode);
    if (level == 0.0) return out;
    const double sigma = level * rms(samples.raw_states);
    Philox4x32 rng(seed, 1);
    for (Index i = 0; i < out.raw_states.rows(); ++i) {
        for (Index j = 0; j < out.raw_states.cols(); ++j) out.raw_states(i, j) += sigma * rng.normal();
    }
    if (mode == NoiseDerivatives::Recompute) out.derivatives = differentiate_central4(out.raw_states, out.dt);
    out.states = out.raw_states.middleRows(2, out.raw_states.rows() - 4);
    return out;
}

/// Keeps ceil(keep_fraction * m) rows chosen uniformly without replacement,
/// in their original order.
[[nodiscard]] inline SampleSet decimate(const SampleSet& samples, double keep_fraction, std::uint64_t seed) {
    require(keep_fraction > 0.0 && keep_fraction <= 1.0, ErrorCode::InvalidArgument,
            "keep_fraction must be in (0, 1]");
    const Index m = samples.rows();
    const auto keep = static_cast<Index>(std::ceil(keep_fraction * static_cast<double>(m) - 1e-9));
    SampleSet out = samples;
    out.meta["keep_fraction"] = keep_fraction;
    out.meta["decimate_seed"] = seed;
    if (keep >= m) return out;

    std::vector<Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Index{0});
    Philox4x32 rng(seed, 2);
    for (Index i = 0; i < keep; ++i) {
        const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(keep));
    std::sort(idx.begin(), idx.end());

    out.states = samples.states(idx, Eigen::all);
    out.derivatives = samples.derivatives(idx, Eigen::all);
    out.parameters = samples.parameters(idx);
    out.raw_states.resize(0, samples.state_dim());
    return out;
}

}  // namespace mosindy
