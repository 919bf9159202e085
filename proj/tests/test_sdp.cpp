/*
 Copyright 2026 The ddlqr Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/rng.hpp"
#include "ddlqr/sdp.hpp"

namespace ddlqr::sdp {
namespace {

MatrixXd random_symmetric(CounterRng& rng, int side) {
    MatrixXd M = MatrixXd::NullaryExpr(side, side, [&] { return rng.normal(); });
    return M + M.transpose();
}

TEST(Svec, Definition) {
    const VectorXd v = svec((MatrixXd(2, 2) << 1, 2, 2, 3).finished());
    ASSERT_EQ(v.size(), 3);
    EXPECT_EQ(v(0), 1.0);
    EXPECT_DOUBLE_EQ(v(1), 2 * std::sqrt(2.0));
    EXPECT_EQ(v(2), 3.0);
    const VectorXd id = svec(MatrixXd::Identity(3, 3));
    EXPECT_EQ(id, (VectorXd(6) << 1, 0, 1, 0, 0, 1).finished());
}

TEST(Svec, InnerProductIsTrace) {
    CounterRng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const MatrixXd A = random_symmetric(rng, 5);
        const MatrixXd B = random_symmetric(rng, 5);
        const double tr = (A * B).trace();
        EXPECT_NEAR(svec(A).dot(svec(B)), tr, 1e-12 * std::max(1.0, std::abs(tr)));
    }
}

/// Diagonal entries survive bitwise; off-diagonals pass through a multiply and a
/// divide by sqrt(2), which is only invertible to within an ulp or two.
void expect_round_trip(const MatrixXd& S) {
    const MatrixXd back = smat(svec(S));
    for (int j = 0; j < S.cols(); ++j) {
        EXPECT_EQ(back(j, j), S(j, j));
        for (int i = 0; i < j; ++i) {
            EXPECT_LE(std::abs(back(i, j) - S(i, j)), 2 * std::numeric_limits<double>::epsilon() * std::abs(S(i, j)));
            EXPECT_EQ(back(i, j), back(j, i));
        }
    }
}

TEST(Svec, SmatInvertsSvec) {
    CounterRng rng(2);
    for (int trial = 0; trial < 1000; ++trial) expect_round_trip(random_symmetric(rng, 1 + trial % 8));
    expect_round_trip((MatrixXd(2, 2) << 1, 2, 2, 3).finished());
    expect_round_trip(MatrixXd::Identity(3, 3));
    expect_round_trip(MatrixXd::Zero(1, 1));
    // Integers and powers of two come back bitwise.
    const MatrixXd ints = (MatrixXd(2, 2) << 1, 2, 2, 3).finished();
    EXPECT_EQ(smat(svec(ints)), ints);
}

TEST(Svec, RejectsBadInput) {
    EXPECT_THROW(svec((MatrixXd(2, 2) << 1, 2, 3, 4).finished()), InvalidInput);
    EXPECT_THROW(smat(VectorXd::Zero(4)), InvalidInput);
}

TEST(BlockLmi, SingleBlockGivesMatchingCone) {
    ConicProgram p;
    const AffineExpr Y = p.add_symmetric("Y", 2);
    EXPECT_EQ(assemble_block_lmi(p, {{-Y}}), 2);
    ASSERT_EQ(p.cones().size(), 1u);
    EXPECT_EQ(p.cones()[0].kind, ConeKind::psd);
    EXPECT_EQ(p.cones()[0].dim, 2);
    EXPECT_EQ(p.num_rows(), 3);
}

TEST(BlockLmi, ModelAndRobustLayoutsHaveExpectedSides) {
    {
        ConicProgram p;
        const AffineExpr Y = p.add_symmetric("Y", 1);
        const AffineExpr M = p.add_matrix("M", 1, 1);
        const MatrixXd one = MatrixXd::Ones(1, 1);
        const AffineExpr X = 0.9 * Y + M;
        const AffineExpr z = AffineExpr::zeros(1, 1, p.num_variables());
        EXPECT_EQ(assemble_block_lmi(p, {{-Y, Y, M.transpose(), X.transpose()},
                                         {Y, AffineExpr::constant(-one), z, z},
                                         {M, z, AffineExpr::constant(-one), z},
                                         {X, z, z, -1.0 * Y}}),
                  4);
    }
    {
        const int n = 4, m = 1, N = 10;
        ConicProgram p;
        p.add_symmetric("Y", n);
        auto zero = [](int r, int c) { return AffineExpr::zeros(r, c); };
        auto eye = [](int k) { return AffineExpr::constant(-MatrixXd::Identity(k, k)); };
        const std::vector<int> sizes = {n, n, m, n, N};
        std::vector<std::vector<AffineExpr>> grid(5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) grid[i].push_back(i == j ? eye(sizes[i]) : zero(sizes[i], sizes[j]));
        }
        EXPECT_EQ(assemble_block_lmi(p, grid), n + n + m + n + N);
    }
}

TEST(BlockLmi, AsymmetricGridRejected) {
    ConicProgram p;
    const AffineExpr a = p.add_matrix("a", 1, 1);
    const AffineExpr b = p.add_matrix("b", 1, 1);
    EXPECT_THROW(assemble_block_lmi(p, {{a, a}, {b, a}}), InvalidInput);
}

TEST(BlockLmi, SlackReproducesDenseMatrix) {
    CounterRng rng(3);
    ConicProgram p;
    const AffineExpr Y = p.add_symmetric("Y", 3);
    const AffineExpr F = p.add_matrix("F", 2, 3);
    const MatrixXd C = MatrixXd::NullaryExpr(3, 3, [&] { return rng.normal(); });
    const AffineExpr top = -1.0 * Y + C * Y + (C * Y).transpose();
    const std::vector<std::vector<AffineExpr>> grid = {
        {top, F.transpose()}, {F, AffineExpr::constant(-MatrixXd::Identity(2, 2), p.num_variables())}};
    assemble_block_lmi(p, grid);
    const AffineExpr dense = AffineExpr::blocks(grid);
    const MatrixXd A = MatrixXd(p.A());
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXd x = VectorXd::NullaryExpr(p.num_variables(), [&] { return rng.normal(); });
        const MatrixXd slack = smat(p.b() - A * x);
        const MatrixXd G = dense.evaluate(x);
        EXPECT_LT((slack + G).norm(), 1e-12 * (1 + G.norm()));
        const double lo = linalg::max_eigenvalue(G);
        EXPECT_EQ(lo <= 0, linalg::min_eigenvalue(slack) >= 0);
    }
}

TEST(Solve, LinearLowerBound) {
    ConicProgram p;
    const AffineExpr x = p.add_scalar("x");
    p.minimize(x);
    p.add_nonneg(x - MatrixXd::Ones(1, 1));
    const ConicSolution s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x(0), 1.0, 1e-7);
    EXPECT_NEAR(s.objective, 1.0, 1e-7);
}

TEST(Solve, TraceAboveIdentity) {
    ConicProgram p;
    const AffineExpr P = p.add_symmetric("P", 2);
    p.minimize(P.trace());
    p.add_psd(P - MatrixXd::Identity(2, 2));
    const ConicSolution s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_LT((p.value(s.x, "P") - MatrixXd::Identity(2, 2)).norm(), 1e-6);
    EXPECT_NEAR(s.objective, 2.0, 1e-7);
}

TEST(Solve, DeterminantCondition) {
    ConicProgram p;
    const AffineExpr t = p.add_scalar("t");
    p.maximize(t);
    const AffineExpr one = AffineExpr::constant(MatrixXd::Ones(1, 1), p.num_variables());
    p.add_psd(AffineExpr::blocks({{one, t}, {t, one}}));
    const ConicSolution s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.x(0), 1.0, 1e-6);
}

TEST(Solve, DetectsInfeasibleAndUnbounded) {
    {
        ConicProgram p;
        const AffineExpr x = p.add_scalar("x");
        p.minimize(x);
        p.add_nonneg(x - MatrixXd::Ones(1, 1));
        p.add_nonneg(-1.0 * x);
        EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
    }
    {
        ConicProgram p;
        const AffineExpr x = p.add_scalar("x");
        p.minimize(x);
        p.add_nonneg(-1.0 * x + MatrixXd::Ones(1, 1));
        EXPECT_EQ(solve(p).status, SolveStatus::unbounded);
    }
}

TEST(Solve, EqualityConstrainedPsd) {
    // minimize <C, X> s.t. Tr(X) = 1, X >= 0: the smallest eigenvalue of C.
    CounterRng rng(4);
    const MatrixXd C = random_symmetric(rng, 4);
    ConicProgram p;
    const AffineExpr X = p.add_symmetric("X", 4);
    p.minimize(X.inner(C));
    p.add_equality(X.trace() - MatrixXd::Ones(1, 1));
    p.add_psd(X);
    const ConicSolution s = solve(p);
    ASSERT_TRUE(s.optimal());
    EXPECT_NEAR(s.objective, linalg::min_eigenvalue(C), 1e-6);
}

TEST(Solve, DeterministicForIdenticalPrograms) {
    CounterRng rng(5);
    const MatrixXd C = random_symmetric(rng, 3);
    auto build = [&] {
        ConicProgram p;
        const AffineExpr X = p.add_symmetric("X", 3);
        p.minimize(X.inner(C));
        p.add_equality(X.trace() - MatrixXd::Ones(1, 1));
        p.add_psd(X);
        return p;
    };
    const ConicProgram a = build();
    const ConicProgram b = build();
    EXPECT_EQ(a.dump(), b.dump());
    const ConicSolution sa = solve(a);
    const ConicSolution sb = solve(b);
    EXPECT_EQ(sa.x, sb.x);
    EXPECT_EQ(sa.iterations, sb.iterations);
}

TEST(Program, BlocksCoverDisjointRanges) {
    ConicProgram p;
    p.add_symmetric("Y", 3);
    p.add_matrix("F", 4, 2);
    p.add_scalar("alpha");
    int next = 0;
    for (const VariableBlock& b : p.blocks()) {
        EXPECT_EQ(b.offset, next);
        next += b.size;
    }
    EXPECT_EQ(next, p.num_variables());
    EXPECT_EQ(p.block("Y").size, 6);
}

TEST(Program, DumpHeader) {
    ConicProgram p;
    const AffineExpr x = p.add_scalar("x");
    p.minimize(x);
    p.add_nonneg(x);
    EXPECT_EQ(p.dump().rfind("conic-program v1\n", 0), 0u);
}

}  // namespace
}  // namespace ddlqr::sdp
