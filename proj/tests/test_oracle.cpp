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

#include <gtest/gtest.h>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"
#include "ddlqr/oracle.hpp"
#include "support.hpp"

namespace ddlqr {
namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

CostSpec identity_spec(int n, double gamma) {
    return CostSpec{MatrixXd::Identity(n, n), scalar(1.0), gamma};
}

TEST(Dare, ZeroDynamics) {
    DiscreteLinearSystem sys{scalar(0.0), scalar(1.0), scalar(1.0)};
    const OptimalSolution s = solve_discounted_dare(sys, CostSpec{scalar(1.0), scalar(1.0), 0.9});
    EXPECT_NEAR(s.Pstar(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(s.Kstar(0, 0), 0.0, 1e-14);
}

TEST(Dare, ScalarClosedForm) {
    // With a = b = q = r = 1 the fixed point solves gamma P^2 + (1 - 2 gamma) P - 1 = 0.
    const double g = 0.99;
    const double P = (-(1 - 2 * g) + std::sqrt((1 - 2 * g) * (1 - 2 * g) + 4 * g)) / (2 * g);
    const double K = -g * P / (1 + g * P);
    DiscreteLinearSystem sys{scalar(1.0), scalar(1.0), scalar(1.0)};
    const OptimalSolution s = solve_discounted_dare(sys, CostSpec{scalar(1.0), scalar(1.0), g}, 1e-13);
    EXPECT_NEAR(s.Pstar(0, 0), P, 1e-11);
    EXPECT_NEAR(s.Kstar(0, 0), K, 1e-11);
}

TEST(Dare, QuarterCarFixture) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const OptimalSolution s = solve_discounted_dare(qc, identity_spec(4, 0.9999));
    const MatrixXd pinned = io::read_matrix(testing::fixture("quarter_car/Kstar.csv"));
    EXPECT_LE((s.Kstar - pinned).norm() / pinned.norm(), 1e-9);
    const Eigen::RowVector4d frozen(0.00122337, -0.00053716, -0.00646009, 0.000395897);
    EXPECT_LE((s.Kstar - MatrixXd(frozen)).norm() / frozen.norm(), 1e-5);
    EXPECT_LT(linalg::spectral_radius(qc.A + qc.B * s.Kstar), 1.0);
    EXPECT_LE(s.residual, 1e-9 * s.Pstar.norm());
    EXPECT_LT(linalg::spectral_radius(std::sqrt(0.9999) * (qc.A + qc.B * s.Kstar)), 1.0);
}

TEST(Dare, NonStabilizableThrows) {
    DiscreteLinearSystem sys{scalar(2.0), scalar(0.0), scalar(1.0)};
    EXPECT_THROW(solve_discounted_dare(sys, CostSpec{scalar(1.0), scalar(1.0), 0.99}, 1e-12, 10000),
                 ConvergenceError);
}

TEST(Dare, ValueIterationIsMonotone) {
    CounterRng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 4;
        const int m = 1 + trial % 2;
        DiscreteLinearSystem sys;
        sys.A = 0.6 * MatrixXd::NullaryExpr(n, n, [&] { return rng.normal(); });
        sys.B = MatrixXd::NullaryExpr(n, m, [&] { return rng.normal(); });
        sys.W = MatrixXd::Identity(n, n);
        CostSpec spec{MatrixXd::Identity(n, n), MatrixXd::Identity(m, m), 0.95};
        const auto path = value_iteration_path(sys, spec, 60);
        MatrixXd prev = MatrixXd::Zero(n, n);
        for (const MatrixXd& P : path) {
            EXPECT_GE(linalg::min_eigenvalue(P - prev), -1e-10 * std::max(1.0, P.norm()));
            prev = P;
        }
    }
}

TEST(Dare, OptimalValueBelowEmpiricalCost) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const CostSpec spec = identity_spec(4, 0.99);
    const OptimalSolution s = solve_discounted_dare(qc, spec);
    const VectorXd x0 = Eigen::Vector4d(0.3, -4, 0.1, -1);
    const int runs = 500;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < runs; ++t) {
        const Trajectory traj = simulate(qc, s.Kstar, x0, 2500, CounterRng(1000 + t));
        const double c = empirical_cost(traj, spec, s.Kstar, true);
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / runs;
    const double se = std::sqrt((sum_sq / runs - mean * mean) / runs);
    EXPECT_LE(optimal_value(x0, s), mean + 3 * se);
    EXPECT_GE(optimal_value(x0, s), mean - 3 * se);
}

TEST(CostHelpers, HandValues) {
    EXPECT_EQ(c_star(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), 0.5), 0.0);
    EXPECT_DOUBLE_EQ(c_star(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2), 0.5), 2.0);

    OptimalSolution sol;
    sol.Pstar = MatrixXd(Eigen::Vector2d(2, 3).asDiagonal());
    sol.cstar = 1.0;
    EXPECT_DOUBLE_EQ(optimal_value(Eigen::Vector2d(0, 0), sol), 1.0);
    EXPECT_DOUBLE_EQ(optimal_value(Eigen::Vector2d(1, 0), sol), 3.0);

    EXPECT_EQ(averaged_cost(MatrixXd::Identity(3, 3), MatrixXd::Zero(3, 3)), 0.0);
    EXPECT_DOUBLE_EQ(averaged_cost(MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3)), 3.0);

    InitialCondition ic{Eigen::Vector2d(1, 2), MatrixXd::Zero(2, 2)};
    const MatrixXd P = MatrixXd(Eigen::Vector2d(2, 5).asDiagonal());
    EXPECT_DOUBLE_EQ(cost_upper_bound(ic, P, MatrixXd::Zero(2, 2), 0.9), 2.0 + 20.0);
    InitialCondition origin{VectorXd::Zero(1), MatrixXd::Zero(1, 1)};
    EXPECT_DOUBLE_EQ(cost_upper_bound(origin, scalar(1.0), scalar(1.0), 0.5, 1.0), 1.0);
}

TEST(CostHelpers, QuarterCarPinnedValues) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const OptimalSolution s = solve_discounted_dare(qc, identity_spec(4, 0.9999));
    const double avg = averaged_cost(s.Pstar, qc.W);
    EXPECT_NEAR(s.cstar, 0.9999 / 0.0001 * avg, 1e-9 * s.cstar);
    const MatrixXd pinnedP = io::read_matrix(testing::fixture("quarter_car/Pstar.csv"));
    EXPECT_NEAR(avg, averaged_cost(pinnedP, qc.W), 1e-9 * avg);
    const VectorXd x0 = Eigen::Vector4d(0.3, -4, 0.1, -1);
    EXPECT_NEAR(optimal_value(x0, s), x0.dot(pinnedP * x0) + s.cstar, 1e-9 * optimal_value(x0, s));
}

TEST(GammaBound, Sentinels) {
    EXPECT_EQ(gamma_lower_bound_model(scalar(1.0), scalar(1.0), scalar(-1.0), scalar(1.0), scalar(1.0),
                                      scalar(1.0)),
              -std::numeric_limits<double>::infinity());
    // Q + K'RK = 1 and (A+BK)'P(A+BK) = 1.
    EXPECT_DOUBLE_EQ(gamma_lower_bound_model(scalar(1.0), scalar(0.0), scalar(0.0), scalar(1.0),
                                             scalar(1.0), scalar(1.0)),
                     0.0);
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const OptimalSolution s = solve_discounted_dare(qc, identity_spec(4, 0.9999));
    EXPECT_LT(gamma_lower_bound_model(qc.A, qc.B, s.Kstar, s.Pstar, MatrixXd::Identity(4, 4), scalar(1.0)),
              0.9999);
}

}  // namespace
}  // namespace ddlqr
