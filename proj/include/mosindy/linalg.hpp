#pragma once

#include "mosindy/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace mosindy::linalg {

/// Row permutation putting rows in order of decreasing max-abs entry. Row
/// order does not change a least-squares problem, but Householder QR is only
/// reliable on strongly row-weighted matrices when the heavy rows come first.
[[nodiscard]] inline std::vector<Index> rows_by_decreasing_norm(const Matrix& a) {
    std::vector<Index> order(static_cast<std::size_t>(a.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    Vector norms(a.rows());
    for (Index i = 0; i < a.rows(); ++i) norms[i] = a.cols() ? a.row(i).lpNorm<Eigen::Infinity>() : 0.0;
    std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) { return norms[l] > norms[r]; });
    return order;
}

/// Orthogonal compression of min ||B - A X||: returns (R, C) with
/// R = Q^T A and C = Q^T B truncated to k = min(m, cols) rows, so that for
/// any column subset S, ||B - A_S X||^2 = ||C - R_S X||^2 + const.
struct Compressed {
    Matrix r;
    Matrix c;
    double residual_floor = 0.0;  // squared norm of B outside range(Q)
};

[[nodiscard]] inline Compressed compress(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), ErrorCode::DimensionMismatch, "row counts differ");
    const auto order = rows_by_decreasing_norm(a);
    Matrix sa = a(order, Eigen::all);
    Matrix sb = b(order, Eigen::all);
    Compressed out;
    if (a.rows() <= a.cols()) {
        out.r = std::move(sa);
        out.c = std::move(sb);
        return out;
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(sa);
    const Index k = a.cols();
    Matrix qtb = qr.householderQ().adjoint() * sb;
    Matrix r = qr.matrixR().topRows(k).triangularView<Eigen::Upper>();
    // undo the column pivoting so columns of R line up with columns of A
    out.r = r * qr.colsPermutation().transpose();
    out.c = qtb.topRows(k);
    out.residual_floor = qtb.bottomRows(a.rows() - k).squaredNorm();
    return out;
}

/// Singular values, computed from the pivoted-QR triangle for tall matrices
/// so small singular values of graded matrices keep relative accuracy.
[[nodiscard]] inline Vector singular_values(const Matrix& a) {
    if (a.size() == 0) return Vector();
    if (a.rows() > a.cols()) {
        const Compressed c = compress(a, Matrix::Zero(a.rows(), 0));
        return Eigen::JacobiSVD<Matrix>(c.r).singularValues();
    }
    return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

[[nodiscard]] inline double rank_tolerance(const Matrix& a, double sigma_max) {
    return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * sigma_max;
}

[[nodiscard]] inline Index numerical_rank(const Matrix& a) {
    const Vector s = singular_values(a);
    if (s.size() == 0 || s[0] == 0.0) return 0;
    const double tol = rank_tolerance(a, s[0]);
    return (s.array() > tol).count();
}

/// Minimum-norm least squares solution. Pivots below
/// relative_threshold * max pivot are treated as zero (Eigen's default when < 0).
[[nodiscard]] inline Matrix lstsq(const Matrix& a, const Matrix& b, double relative_threshold = -1.0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    if (relative_threshold >= 0.0) cod.setThreshold(relative_threshold);
    cod.compute(a);
    return cod.solve(b);
}

[[nodiscard]] inline Matrix block_diagonal(const Matrix& block, int copies) {
    Matrix out = Matrix::Zero(block.rows() * copies, block.cols() * copies);
    for (int i = 0; i < copies; ++i) out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
    return out;
}

}  // namespace mosindy::linalg
