#pragma once

// Sparse regression: row-weighted multi-objective assembly, sequentially
// thresholded least squares, and equality-constrained STLS.

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"
#include "mosindy/library.hpp"
#include "mosindy/linalg.hpp"
#include "mosindy/sampling.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mosindy {

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

[[nodiscard]] inline SupportMask support_of(const Matrix& xi) { return xi.array() != 0.0; }

/// Stacked problem [Theta_tr; sqrt(alpha) Theta_att] Xi ~ [Xdot_tr; sqrt(alpha) Xdot_att].
struct WeightedProblem {
    Matrix theta;
    Matrix xdot;
    double alpha = 1.0;
    Index transient_rows = 0;
    std::string library_ref;
};

[[nodiscard]] inline WeightedProblem assemble_weighted(const SampleSet& transients, const SampleSet& attractors,
                                                       const MonomialLibrary& lib, double alpha) {
    require(alpha >= 0.0 && std::isfinite(alpha), ErrorCode::InvalidArgument, "alpha must be finite and >= 0");
    require(!(transients.empty() && attractors.empty()), ErrorCode::EmptyData, "no transient or attractor rows");
    const Index n = lib.state_dim();
    const Index m_tr = transients.rows();
    const Index m_att = attractors.rows();
    WeightedProblem p;
    p.alpha = alpha;
    p.transient_rows = m_tr;
    p.library_ref = lib.reference();
    p.theta.resize(m_tr + m_att, lib.size());
    p.xdot.resize(m_tr + m_att, n);
    if (m_tr) {
        require(transients.derivatives.cols() == n, ErrorCode::DimensionMismatch, "transient derivative width");
        p.theta.topRows(m_tr) = evaluate(lib, transients);
        p.xdot.topRows(m_tr) = transients.derivatives;
    }
    if (m_att) {
        require(attractors.derivatives.cols() == n, ErrorCode::DimensionMismatch, "attractor derivative width");
        const double w = std::sqrt(alpha);
        p.theta.bottomRows(m_att) = w * evaluate(lib, attractors);
        p.xdot.bottomRows(m_att) = w * attractors.derivatives;
    }
    return p;
}

/// Per-column max-abs scale; all-zero columns get 1.
[[nodiscard]] inline Vector column_scales(const Matrix& theta) {
    Vector v(theta.cols());
    for (Index j = 0; j < theta.cols(); ++j) {
        const double s = theta.rows() ? theta.col(j).lpNorm<Eigen::Infinity>() : 0.0;
        v[j] = s > 0.0 && std::isfinite(s) ? s : 1.0;
    }
    return v;
}

struct StlsFit {
    CoefficientMatrix coefficients;
    /// Equations that ended with no surviving term (xdot_i = 0 is returned).
    std::vector<int> all_thresholded;

    [[nodiscard]] bool warning() const noexcept { return !all_thresholded.empty(); }
};

/// Thresholds entries below lambda * max|column| ("small"), in place; returns the surviving mask.
inline Eigen::Array<bool, Eigen::Dynamic, 1> threshold_column(Eigen::Ref<Vector> column, double lambda) {
    const double cut = lambda * column.lpNorm<Eigen::Infinity>();
    Eigen::Array<bool, Eigen::Dynamic, 1> big(column.size());
    for (Index j = 0; j < column.size(); ++j) {
        big[j] = !(std::abs(column[j]) < cut);
        if (!big[j]) column[j] = 0.0;
    }
    return big;
}

/// STLS with column normalization and per-equation relative thresholding.
/// The data are orthogonally compressed once, so the solver can be reused
/// across a lambda sweep at the cost of d x d subproblems.
class StlsSolver {
public:
    static constexpr int iterations = 5;

    StlsSolver(const Matrix& theta, const Matrix& xdot, std::string library_ref = {}, bool normalize = true)
        : library_ref_(std::move(library_ref)) {
        require(theta.rows() >= 1, ErrorCode::EmptyData, "regression needs at least one row");
        require(theta.rows() == xdot.rows(), ErrorCode::DimensionMismatch, "theta and xdot row counts differ");
        require(theta.allFinite() && xdot.allFinite(), ErrorCode::NonFinite, "regression data must be finite");
        scales_ = normalize ? column_scales(theta) : Vector::Ones(theta.cols());
        data_ = linalg::compress(theta * scales_.cwiseInverse().asDiagonal(), xdot);
        rank_threshold_ = static_cast<double>(std::max(theta.rows(), theta.cols())) *
                          std::numeric_limits<double>::epsilon();
    }

    explicit StlsSolver(const WeightedProblem& p, bool normalize = true)
        : StlsSolver(p.theta, p.xdot, p.library_ref, normalize) {}

    [[nodiscard]] Index library_size() const noexcept { return scales_.size(); }
    [[nodiscard]] Index state_dim() const noexcept { return data_.c.cols(); }
    [[nodiscard]] const Vector& scales() const noexcept { return scales_; }

    /// Least squares restricted to a support, in original (unnormalized) units.
    [[nodiscard]] Matrix regress_on_support(const SupportMask& support) const {
        Matrix xi = Matrix::Zero(library_size(), state_dim());
        for (Index i = 0; i < state_dim(); ++i) regress_column(xi, i, support.col(i));
        return scales_.cwiseInverse().asDiagonal() * xi;
    }

    [[nodiscard]] StlsFit solve(double lambda, const std::optional<SupportMask>& initial_support = {}) const {
        require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
        const Index d = library_size(), n = state_dim();
        Matrix xi;
        if (initial_support) {
            require(initial_support->rows() == d && initial_support->cols() == n, ErrorCode::ShapeMismatch,
                    "initial support has wrong shape");
            xi = Matrix::Zero(d, n);
            for (Index i = 0; i < n; ++i) regress_column(xi, i, initial_support->col(i));
        } else {
            xi = linalg::lstsq(data_.r, data_.c, rank_threshold_);
        }
        for (int k = 0; k < iterations; ++k) {
            for (Index i = 0; i < n; ++i) {
                const auto big = threshold_column(xi.col(i), lambda);
                regress_column(xi, i, big);
            }
        }
        StlsFit fit;
        fit.coefficients.values = scales_.cwiseInverse().asDiagonal() * xi;
        fit.coefficients.library_ref = library_ref_;
        for (Index i = 0; i < n; ++i) {
            if ((fit.coefficients.values.col(i).array() == 0.0).all()) fit.all_thresholded.push_back(static_cast<int>(i));
        }
        return fit;
    }

private:
    template <class Mask>
    void regress_column(Matrix& xi, Index i, const Mask& keep) const {
        std::vector<Index> cols;
        for (Index j = 0; j < keep.size(); ++j) {
            if (keep[j]) cols.push_back(j);
        }
        xi.col(i).setZero();
        if (cols.empty()) return;
        const Vector sol = linalg::lstsq(data_.r(Eigen::all, cols), data_.c.col(i), rank_threshold_);
        for (std::size_t k = 0; k < cols.size(); ++k) xi(cols[k], i) = sol[static_cast<Index>(k)];
    }

    std::string library_ref_;
    Vector scales_;
    linalg::Compressed data_;
    double rank_threshold_ = 0.0;
};

[[nodiscard]] inline StlsFit fit_stls(const WeightedProblem& problem, double lambda) {
    return StlsSolver(problem).solve(lambda);
}

// ---------------------------------------------------------------------------
// Hard constraints

/// Linear equality constraints C vec(Xi) = d with vec stacking equations:
/// vec(Xi)[i * d + j] = Xi(j, i).
struct ConstraintSet {
    Matrix matrix;
    Vector rhs;
    /// Leading rows that encode on-attractor dynamics; the rest are sparsity rows.
    Index attractor_rows = 0;

    [[nodiscard]] Index rows() const noexcept { return matrix.rows(); }
    [[nodiscard]] Index sparsity_rows() const noexcept { return rows() - attractor_rows; }
};

[[nodiscard]] inline ConstraintSet attractor_constraint_matrices(const SampleSet& attractors,
                                                                 const MonomialLibrary& lib, int state_dim) {
    require(!attractors.empty(), ErrorCode::EmptyData, "attractor set is empty");
    require(attractors.state_dim() == state_dim, ErrorCode::DimensionMismatch, "state_dim mismatch");
    const Matrix theta = evaluate(lib, attractors);
    const Index r = theta.rows(), d = theta.cols();
    ConstraintSet c;
    c.matrix = linalg::block_diagonal(theta, state_dim);
    c.rhs.resize(r * state_dim);
    for (int i = 0; i < state_dim; ++i) c.rhs.segment(i * r, r) = attractors.derivatives.col(i);
    c.attractor_rows = r * state_dim;
    (void)d;
    return c;
}

/// Appends unit rows e_k^T xi = 0.
[[nodiscard]] inline ConstraintSet with_zero_constraints(const ConstraintSet& base, Index coefficients,
                                                         const std::vector<Index>& zeroed) {
    ConstraintSet out;
    const Index p0 = base.rows();
    out.matrix = Matrix::Zero(p0 + static_cast<Index>(zeroed.size()), coefficients);
    out.rhs = Vector::Zero(out.matrix.rows());
    if (p0) {
        out.matrix.topRows(p0) = base.matrix;
        out.rhs.head(p0) = base.rhs;
    }
    for (std::size_t k = 0; k < zeroed.size(); ++k) out.matrix(p0 + static_cast<Index>(k), zeroed[k]) = 1.0;
    out.attractor_rows = base.attractor_rows;
    return out;
}

struct FeasibilityReport {
    bool rows_independent = true;     // C has linearly independent rows
    bool columns_independent = true;  // [Theta_hat; C] has linearly independent columns
    Index constraint_rank = 0;
    Index stacked_rank = 0;
    Index attractor_constraints = 0;  // n r
    Index sparsity_constraints = 0;   // p
    Index coefficients = 0;           // n d
    bool count_ok = true;             // n r <= n d - p

    [[nodiscard]] bool feasible() const noexcept { return rows_independent && columns_independent && count_ok; }

    [[nodiscard]] std::string describe() const {
        std::string out;
        auto add = [&](const std::string& s) { out += (out.empty() ? "" : "; ") + s; };
        if (!count_ok) {
            add("count bound violated: nr=" + std::to_string(attractor_constraints) +
                " > nd-p=" + std::to_string(coefficients - sparsity_constraints));
        }
        if (!rows_independent) {
            add("constraint rows dependent: rank " + std::to_string(constraint_rank) + " < " +
                std::to_string(attractor_constraints + sparsity_constraints));
        }
        if (!columns_independent) {
            add("[Theta; C] column-rank deficient: rank " + std::to_string(stacked_rank) + " < " +
                std::to_string(coefficients));
        }
        return out.empty() ? "feasible" : out;
    }
};

class InfeasibleConstraintsError : public Error {
public:
    explicit InfeasibleConstraintsError(FeasibilityReport report)
        : Error(ErrorCode::InfeasibleConstraints, report.describe()), report_(std::move(report)) {}
    [[nodiscard]] const FeasibilityReport& report() const noexcept { return report_; }

private:
    FeasibilityReport report_;
};

namespace detail {

// theta_compressed is any matrix with the same column space geometry as the
// block-diagonal Theta_hat (e.g. Q^T Theta_hat); singular values are identical.
[[nodiscard]] inline FeasibilityReport feasibility_report(const ConstraintSet& constraints,
                                                          const Matrix& theta_hat_like, Index coefficients) {
    FeasibilityReport rep;
    rep.coefficients = coefficients;
    rep.attractor_constraints = constraints.attractor_rows;
    rep.sparsity_constraints = constraints.sparsity_rows();
    rep.count_ok = rep.attractor_constraints <= rep.coefficients - rep.sparsity_constraints;
    if (constraints.rows() > 0) {
        require(constraints.matrix.cols() == coefficients, ErrorCode::DimensionMismatch,
                "constraint matrix width != n d");
        rep.constraint_rank = linalg::numerical_rank(constraints.matrix);
        rep.rows_independent = rep.constraint_rank == constraints.rows();
    }
    Matrix stacked(theta_hat_like.rows() + constraints.rows(), coefficients);
    stacked.topRows(theta_hat_like.rows()) = theta_hat_like;
    if (constraints.rows()) stacked.bottomRows(constraints.rows()) = constraints.matrix;
    rep.stacked_rank = linalg::numerical_rank(stacked);
    rep.columns_independent = rep.stacked_rank == coefficients;
    return rep;
}

}  // namespace detail

/// Existence conditions for the constrained least-squares solution.
[[nodiscard]] inline FeasibilityReport check_feasibility(const ConstraintSet& constraints, const Matrix& theta_hat,
                                                         int n, Index d) {
    require(theta_hat.cols() == n * d, ErrorCode::DimensionMismatch, "theta_hat width != n d");
    Matrix geometry = theta_hat;
    if (theta_hat.rows() > theta_hat.cols()) geometry = linalg::compress(theta_hat, Matrix::Zero(theta_hat.rows(), 0)).r;
    return detail::feasibility_report(constraints, geometry, n * d);
}

struct ConstrainedFit {
    CoefficientMatrix coefficients;
    FeasibilityReport feasibility;  // at the final solve
    double kkt_residual = 0.0;         // relative residual of the augmented system
    double constraint_residual = 0.0;  // max |C xi - d| in original units
};

/// STLS where every regression is an equality-constrained least squares
/// solved through the augmented KKT system
///   [ I   R   0  ] [res]   [c]
///   [ R^T 0   C^T] [xi ] = [0]
///   [ 0   C   0  ] [nu ]   [d]
/// with R, c an orthogonal compression of the block-diagonal transient data.
/// Small coefficients are removed by appending unit-row constraints.
[[nodiscard]] inline ConstrainedFit fit_constrained(const SampleSet& transients, const MonomialLibrary& lib,
                                                    const ConstraintSet& constraints, double lambda) {
    require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
    require(!transients.empty(), ErrorCode::EmptyData, "no transient rows");
    const int n = lib.state_dim();
    const Index d = lib.size();
    const Index nd = n * d;
    require(constraints.rows() == 0 || constraints.matrix.cols() == nd, ErrorCode::DimensionMismatch,
            "constraint matrix width != n d");

    const Matrix theta = evaluate(lib, transients);
    const Vector v = column_scales(theta);
    const linalg::Compressed comp = linalg::compress(theta * v.cwiseInverse().asDiagonal(), transients.derivatives);
    const Index k = comp.r.rows();

    // normalized unknowns xi' = V xi, so C xi = C V^-1 xi'
    Vector vhat(nd);
    for (int i = 0; i < n; ++i) vhat.segment(i * d, d) = v;
    ConstraintSet base = constraints;
    if (base.rows()) base.matrix = base.matrix * vhat.cwiseInverse().asDiagonal();

    const Matrix r_hat = linalg::block_diagonal(comp.r, n);
    Vector c_hat(n * k);
    for (int i = 0; i < n; ++i) c_hat.segment(i * k, k) = comp.c.col(i);

    ConstrainedFit result;
    auto solve = [&](const ConstraintSet& cs) {
        FeasibilityReport rep = detail::feasibility_report(cs, r_hat, nd);
        if (!rep.feasible()) throw InfeasibleConstraintsError(rep);
        const Index rr = r_hat.rows(), p = cs.rows();
        const Index size = rr + nd + p;
        Matrix kkt = Matrix::Zero(size, size);
        kkt.topLeftCorner(rr, rr).setIdentity();
        kkt.block(0, rr, rr, nd) = r_hat;
        kkt.block(rr, 0, nd, rr) = r_hat.transpose();
        if (p) {
            kkt.block(rr, rr + nd, nd, p) = cs.matrix.transpose();
            kkt.block(rr + nd, rr, p, nd) = cs.matrix;
        }
        Vector rhs = Vector::Zero(size);
        rhs.head(rr) = c_hat;
        if (p) rhs.tail(p) = cs.rhs;
        const Vector z = kkt.fullPivLu().solve(rhs);
        result.kkt_residual = (kkt * z - rhs).norm() / std::max(kkt.norm() * z.norm() + rhs.norm(), 1e-300);
        result.feasibility = rep;
        return Vector(z.segment(rr, nd));
    };

    Vector xi = solve(base);
    std::vector<bool> zeroed(static_cast<std::size_t>(nd), false);
    for (int iter = 0; iter < StlsSolver::iterations; ++iter) {
        std::vector<Index> zero_list;
        for (int i = 0; i < n; ++i) {
            Vector col = xi.segment(i * d, d);
            const auto big = threshold_column(col, lambda);
            for (Index j = 0; j < d; ++j) {
                if (!big[j]) zeroed[static_cast<std::size_t>(i * d + j)] = true;
            }
        }
        for (Index q = 0; q < nd; ++q) {
            if (zeroed[static_cast<std::size_t>(q)]) zero_list.push_back(q);
        }
        xi = solve(with_zero_constraints(base, nd, zero_list));
        for (Index q : zero_list) xi[q] = 0.0;
    }

    const Vector xi_orig = vhat.cwiseInverse().asDiagonal() * xi;
    result.coefficients.values.resize(d, n);
    for (int i = 0; i < n; ++i) result.coefficients.values.col(i) = xi_orig.segment(i * d, d);
    result.coefficients.library_ref = lib.reference();
    if (constraints.rows()) {
        result.constraint_residual = (constraints.matrix * xi_orig - constraints.rhs).lpNorm<Eigen::Infinity>();
    }
    return result;
}

}  // namespace mosindy
