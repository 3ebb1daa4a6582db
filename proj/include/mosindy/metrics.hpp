#pragma once

#include "mosindy/common.hpp"
#include "mosindy/dynamics.hpp"
#include "mosindy/library.hpp"
#include "mosindy/linalg.hpp"
#include "mosindy/regression.hpp"
#include "mosindy/sampling.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mosindy {

inline void require_same_shape(const CoefficientMatrix& a, const CoefficientMatrix& b) {
    require(a.values.rows() == b.values.rows() && a.values.cols() == b.values.cols(), ErrorCode::ShapeMismatch,
            "coefficient matrices differ in shape");
    require(a.library_ref.empty() || b.library_ref.empty() || a.library_ref == b.library_ref,
            ErrorCode::ShapeMismatch, "coefficient matrices refer to different libraries");
}

/// ||Xi - Xi_true||_F / ||Xi_true||_F
[[nodiscard]] inline double coefficient_error(const CoefficientMatrix& fit, const CoefficientMatrix& truth) {
    require_same_shape(fit, truth);
    const double denom = truth.values.norm();
    require(denom > 0.0, ErrorCode::InvalidArgument, "true coefficients are all zero");
    return (fit.values - truth.values).norm() / denom;
}

[[nodiscard]] inline bool structure_match(const CoefficientMatrix& fit, const CoefficientMatrix& truth) {
    require_same_shape(fit, truth);
    return (support_of(fit.values) == support_of(truth.values)).all();
}

/// sigma_max / sigma_min; +inf when sigma_min is below the numerical-rank tolerance.
[[nodiscard]] inline double condition_number(const Matrix& theta) {
    require(theta.size() > 0, ErrorCode::EmptyMatrix, "condition number of an empty matrix");
    const Vector s = linalg::singular_values(theta);
    require(s[0] > 0.0, ErrorCode::EmptyMatrix, "condition number of a zero matrix");
    const Index k = std::min(theta.rows(), theta.cols());
    // a wide matrix has at least one zero singular value in the column space
    if (theta.rows() < theta.cols()) return std::numeric_limits<double>::infinity();
    const double smin = s[k - 1];
    if (smin <= linalg::rank_tolerance(theta, s[0])) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

[[nodiscard]] inline Matrix column_normalized(const Matrix& theta) {
    return theta * column_scales(theta).cwiseInverse().asDiagonal();
}

struct ConditionPoint {
    double alpha;
    double kappa;             // raw stacked library
    double kappa_normalized;  // after max-abs column normalization
};

struct ConditionCurve {
    std::vector<ConditionPoint> points;
    double kappa_transient = 0, kappa_transient_normalized = 0;
    double kappa_attractor = 0, kappa_attractor_normalized = 0;
};

[[nodiscard]] inline ConditionCurve condition_curve(const SampleSet& transients, const SampleSet& attractors,
                                                    const MonomialLibrary& lib, const std::vector<double>& alpha_grid) {
    require(!alpha_grid.empty(), ErrorCode::InvalidArgument, "alpha grid is empty");
    ConditionCurve curve;
    for (double alpha : alpha_grid) {
        const WeightedProblem p = assemble_weighted(transients, attractors, lib, alpha);
        curve.points.push_back({alpha, condition_number(p.theta), condition_number(column_normalized(p.theta))});
    }
    if (!transients.empty()) {
        const Matrix t = evaluate(lib, transients);
        curve.kappa_transient = condition_number(t);
        curve.kappa_transient_normalized = condition_number(column_normalized(t));
    }
    if (!attractors.empty()) {
        const Matrix a = evaluate(lib, attractors);
        curve.kappa_attractor = condition_number(a);
        curve.kappa_attractor_normalized = condition_number(column_normalized(a));
    }
    return curve;
}

struct FitReport {
    CoefficientMatrix coefficients;
    double coefficient_error = 0.0;
    bool structure_match = false;
    std::map<std::string, double> condition_numbers;
    double lambda = 0.0;
    double alpha = 1.0;
    nlohmann::json provenance = nlohmann::json::object();
    std::vector<int> all_thresholded;
};

[[nodiscard]] inline FitReport make_report(const StlsFit& fit, const CoefficientMatrix& truth, double lambda,
                                           double alpha) {
    FitReport r;
    r.coefficients = fit.coefficients;
    r.coefficient_error = coefficient_error(fit.coefficients, truth);
    r.structure_match = structure_match(fit.coefficients, truth);
    r.lambda = lambda;
    r.alpha = alpha;
    r.all_thresholded = fit.all_thresholded;
    return r;
}

}  // namespace mosindy
