#include "mosindy/datasets.hpp"
#include "mosindy/metrics.hpp"
#include "mosindy/regression.hpp"

#include <gtest/gtest.h>

using namespace mosindy;

namespace {

SampleSet rows_of(const SampleSet& s, std::vector<Index> idx) {
    SampleSet out = s;
    out.states = s.states(idx, Eigen::all);
    out.derivatives = s.derivatives(idx, Eigen::all);
    out.parameters = s.parameters(idx);
    return out;
}

}  // namespace

TEST(Constraints, FixedPointRowGivesHomogeneousConstraints) {
    const SampleSet fp = fixed_point_sample(hopf_normal_form(), -1.0, Vector::Zero(2));
    const MonomialLibrary lib = hopf_normal_form().library();
    const ConstraintSet c = attractor_constraint_matrices(fp, lib, 2);
    EXPECT_EQ(c.rows(), 2);
    EXPECT_EQ(c.matrix.cols(), 2 * lib.size());
    EXPECT_TRUE(c.rhs.isZero(0.0));
}

TEST(Constraints, BlockDiagonalLayout) {
    const Dataset ds = generate_dataset("hopf");
    const SampleSet& cycle = ds.attractors[8];  // mu = 1, five burst rows
    ASSERT_EQ(cycle.rows(), 5);
    const MonomialLibrary lib = ds.system.library();
    const ConstraintSet c = attractor_constraint_matrices(cycle, lib, 2);
    EXPECT_EQ(c.rows(), 10);
    const Matrix theta = evaluate(lib, cycle);
    const Index d = lib.size();
    EXPECT_EQ(c.matrix.block(0, 0, 5, d), theta);
    EXPECT_EQ(c.matrix.block(5, d, 5, d), theta);
    EXPECT_TRUE(c.matrix.block(0, d, 5, d).isZero(0.0));
    EXPECT_TRUE(c.matrix.block(5, 0, 5, d).isZero(0.0));
    EXPECT_EQ(c.rhs.head(5), cycle.derivatives.col(0));
    EXPECT_EQ(c.rhs.tail(5), cycle.derivatives.col(1));
}

TEST(Feasibility, SquareSystemIsOnTheBoundary) {
    // n = 1, d = 3, three independent attractor rows: n r = n d with p = 0
    const MonomialLibrary lib = build_library(1, 1);
    SampleSet att;
    att.kind = SampleKind::Attractor;
    att.states = (Matrix(3, 1) << 0.0, 1.0, 2.0).finished();
    att.parameters = (Vector(3) << 1.0, 0.0, 5.0).finished();
    att.derivatives = Matrix::Zero(3, 1);
    const ConstraintSet c = attractor_constraint_matrices(att, lib, 1);
    const FeasibilityReport rep = check_feasibility(c, Matrix::Zero(0, 3), 1, 3);
    EXPECT_TRUE(rep.count_ok);
    EXPECT_TRUE(rep.rows_independent);
    EXPECT_EQ(rep.attractor_constraints, rep.coefficients);
}

TEST(Feasibility, DuplicatedRowsAreDetected) {
    const Dataset ds = generate_dataset("hopf");
    const SampleSet twice = rows_of(ds.attractors[8], {0, 0, 1});
    const MonomialLibrary lib = ds.system.library();
    const ConstraintSet c = attractor_constraint_matrices(twice, lib, 2);
    const Matrix theta_hat = linalg::block_diagonal(evaluate(lib, ds.single_transient()), 2);
    const FeasibilityReport rep = check_feasibility(c, theta_hat, 2, lib.size());
    EXPECT_FALSE(rep.rows_independent);
    EXPECT_FALSE(rep.feasible());
    EXPECT_NE(rep.describe().find("dependent"), std::string::npos);
}

TEST(Feasibility, FullHopfAttractorDataViolatesTheCountBound) {
    const Dataset ds = generate_dataset("hopf");
    const MonomialLibrary lib = ds.system.library();
    const SampleSet att = ds.all_attractors();
    const ConstraintSet c = attractor_constraint_matrices(att, lib, 2);
    const Index d = lib.size();
    // once the zeros of the true model are imposed, n r > n d - p
    std::vector<Index> zeros;
    const CoefficientMatrix truth = ds.system.true_coefficients();
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < d; ++j) {
            if (truth.values(j, i) == 0.0) zeros.push_back(i * d + j);
        }
    }
    const ConstraintSet with_sparsity = with_zero_constraints(c, 2 * d, zeros);
    const Matrix theta_hat = linalg::block_diagonal(evaluate(lib, ds.single_transient()), 2);
    const FeasibilityReport rep = check_feasibility(with_sparsity, theta_hat, 2, d);
    EXPECT_EQ(rep.attractor_constraints, 2 * att.rows());
    EXPECT_GT(rep.attractor_constraints, rep.coefficients - rep.sparsity_constraints);
    EXPECT_FALSE(rep.count_ok);
    EXPECT_NE(rep.describe().find("count bound"), std::string::npos);
}

TEST(ConstrainedFit, FullHopfAttractorConstraintsAreInfeasible) {
    const Dataset ds = generate_dataset("hopf");
    const MonomialLibrary lib = ds.system.library();
    const ConstraintSet c = attractor_constraint_matrices(ds.all_attractors(), lib, 2);
    try {
        (void)fit_constrained(ds.single_transient(), lib, c, 0.006);
        FAIL() << "expected InfeasibleConstraints";
    } catch (const InfeasibleConstraintsError& e) {
        EXPECT_EQ(e.code(), ErrorCode::InfeasibleConstraints);
        EXPECT_FALSE(e.report().feasible());
    }
}

TEST(ConstrainedFit, SingleFixedPointConstraintIsHonoured) {
    const Dataset ds = generate_dataset("saddle_node");
    const MonomialLibrary lib = ds.system.library();
    const SampleSet& fp = ds.attractors[0];  // mu = -6, negative branch
    const ConstraintSet c = attractor_constraint_matrices(fp, lib, 1);
    ASSERT_EQ(c.rows(), 1);
    // a single transient has constant mu and cannot give [Theta; C] full column rank
    const ConstrainedFit fit = fit_constrained(ds.all_transients(), lib, c, 0.01);
    EXPECT_TRUE(fit.feasibility.feasible());
    EXPECT_LE(fit.constraint_residual, 1e-8);
    EXPECT_LE(fit.kkt_residual, 1e-8);
    // the fitted model vanishes at the constrained equilibrium
    Matrix row(1, lib.size());
    lib.evaluate_row(fp.states.row(0), fp.parameters[0], row.row(0));
    const double rhs = (row * fit.coefficients.values)(0, 0);
    EXPECT_LE(std::abs(rhs), 1e-8);
}

TEST(ConstrainedFit, SingleTransientAloneIsColumnDeficient) {
    const Dataset ds = generate_dataset("saddle_node");
    const MonomialLibrary lib = ds.system.library();
    const ConstraintSet none{Matrix(0, lib.size()), Vector(0), 0};
    try {
        (void)fit_constrained(ds.single_transient(), lib, none, 0.01);
        FAIL();
    } catch (const InfeasibleConstraintsError& e) {
        EXPECT_FALSE(e.report().columns_independent);
        EXPECT_TRUE(e.report().count_ok);
    }
}

TEST(ConstrainedFit, EmptyConstraintsMatchStls) {
    const Dataset ds = generate_dataset("saddle_node");
    const MonomialLibrary lib = ds.system.library();
    const SampleSet tr = ds.all_transients();
    const ConstraintSet none{Matrix(0, lib.size()), Vector(0), 0};
    for (double lambda : {0.0, 0.01, 0.2}) {
        const ConstrainedFit cf = fit_constrained(tr, lib, none, lambda);
        SampleSet empty_att = tr;
        empty_att.kind = SampleKind::Attractor;
        empty_att.states.resize(0, 1);
        empty_att.derivatives.resize(0, 1);
        empty_att.parameters.resize(0);
        for (double alpha : {1.0, 1e6}) {
            const StlsFit sf = fit_stls(assemble_weighted(tr, empty_att, lib, alpha), lambda);
            EXPECT_TRUE((support_of(cf.coefficients.values) == support_of(sf.coefficients.values)).all())
                << "lambda=" << lambda;
            EXPECT_LT((cf.coefficients.values - sf.coefficients.values).norm(),
                      1e-6 * std::max(1.0, sf.coefficients.values.norm()))
                << "lambda=" << lambda;
        }
    }
}
