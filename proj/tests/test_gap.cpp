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
#include "ddlqr/gap.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/synth.hpp"
#include "support.hpp"

namespace ddlqr {
namespace {

TEST(TauDecay, TrivialCases) {
    EXPECT_EQ(tau_decay(MatrixXd::Zero(3, 3), 0.9, 0.5), 1.0);
    EXPECT_NEAR(tau_decay(0.5 * MatrixXd::Identity(2, 2), 1.0, 0.5), 1.0, 1e-12);
}

TEST(TauDecay, QuarterCarPinned) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const MatrixXd K = io::read_matrix(testing::fixture("quarter_car/Kstar.csv"));
    const MatrixXd L = qc.A + qc.B * K;
    const double rho = default_decay_rate(L, 0.9999);
    EXPECT_NEAR(rho, 0.99148988118520509, 1e-12);
    const DecayEstimate e = tau_decay_estimate(L, 0.9999, rho);
    EXPECT_NEAR(e.tau, 50.007610329241743, 1e-8);
    EXPECT_TRUE(e.tail_bounded);
}

TEST(TauDecay, AtLeastOneAndRejectsBadRates) {
    CounterRng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        MatrixXd L = MatrixXd::NullaryExpr(3, 3, [&] { return rng.normal(); });
        L *= 0.9 / linalg::spectral_radius(L);
        const double rho = default_decay_rate(L, 0.95);
        EXPECT_GE(tau_decay(L, 0.95, rho), 1.0);
    }
    const MatrixXd L = 0.8 * MatrixXd::Identity(2, 2);
    EXPECT_THROW(tau_decay(L, 1.0, 0.7), InvalidInput);
    EXPECT_THROW(tau_decay(L, 1.0, 1.0), InvalidInput);
    EXPECT_THROW(tau_decay(L, 1.0, 0.0), InvalidInput);
}

TEST(TauDecay, DefectiveMatrixWarns) {
    MatrixXd J(2, 2);
    J << 0.5, 1.0, 0.0, 0.5;
    const DecayEstimate e = tau_decay_estimate(J, 1.0, 0.5);
    EXPECT_FALSE(e.tail_bounded);
    EXPECT_FALSE(e.warning.empty());
}

TEST(NullSplit, SquareInvertibleHasNoNullPart) {
    CounterRng rng(2);
    const MatrixXd X0 = MatrixXd::NullaryExpr(3, 3, [&] { return rng.normal(); });
    EXPECT_LE(null_split(X0.inverse(), X0).norm(), 1e-12);
}

TEST(NullSplit, RecoversNullComponent) {
    CounterRng rng(3);
    const MatrixXd X0 = MatrixXd::NullaryExpr(4, 10, [&] { return rng.normal(); });
    const MatrixXd pinv = linalg::pinv(X0);
    const MatrixXd proj = MatrixXd::Identity(10, 10) - pinv * X0;
    const MatrixXd Z = proj * MatrixXd::NullaryExpr(10, 4, [&] { return rng.normal(); });
    const MatrixXd Gbar = null_split(pinv + Z, X0);
    EXPECT_LE((Gbar - Z).norm(), 1e-10);
    EXPECT_LE((X0 * Gbar).norm(), 1e-9 * (pinv + Z).norm());
}

TEST(NullSplit, RejectsInvalidParameterization) {
    const MatrixXd X0 = MatrixXd::Identity(2, 3);
    EXPECT_THROW(null_split(MatrixXd::Ones(3, 2), X0), InvalidParameterization);
}

/// The pinned two-state instance with d < 1 and its robust solution.
struct TwoState {
    DiscreteLinearSystem sys = load_system(testing::fixture("two_state"));
    DataSet ds = load_dataset(testing::fixture("two_state/data"));
    CostSpec spec{MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1),
                  io::read_json(testing::fixture("two_state/cost.json")).at("gamma").get<double>()};
    OptimalSolution opt = solve_discounted_dare(sys, spec);
    SynthesisResult sol = synth_robust_direct(ds, spec, sys.W);

    GapInputs inputs() const {
        GapInputs in;
        in.U0 = ds.U0;
        in.X0 = ds.X0;
        in.G = sol.G();
        in.A = sys.A;
        in.B = sys.B;
        in.Kstar = opt.Kstar;
        in.Pstar = opt.Pstar;
        in.W = sys.W;
        in.R = spec.R;
        in.gamma = spec.gamma;
        in.snr = snr_from(*ds.Omega0, ds.D0());
        return in;
    }
};

const TwoState& two_state() {
    static const TwoState t;
    return t;
}

TEST(GapBound, PinnedInstanceIsSound) {
    const TwoState& t = two_state();
    ASSERT_TRUE(t.sol.ok()) << t.sol.message;
    const GapBundle gb = gap_bound(t.inputs());
    ASSERT_TRUE(gb.valid) << "d = " << gb.d;
    EXPECT_GT(gb.d, 0.0);
    EXPECT_LT(gb.d, 1.0);
    EXPECT_GE(gb.tau, 1.0);
    EXPECT_NEAR(gb.delta, gb.delta1 / gb.delta2, 1e-12 * gb.delta);
    EXPECT_LE(linalg::norm2(t.sol.P - t.opt.Pstar), gb.delta);
}

TEST(GapBound, NoiseInflationIncreasesBound) {
    GapInputs in = two_state().inputs();
    const GapBundle base = gap_bound(in);
    in.snr.linear *= 0.5;
    const GapBundle noisier = gap_bound(in);
    EXPECT_GT(noisier.delta1, base.delta1);
    EXPECT_GT(noisier.d, base.d);
    EXPECT_GE(noisier.delta, base.delta);
}

TEST(GapBound, MonotoneInParameterNorm) {
    const TwoState& t = two_state();
    GapInputs in = t.inputs();
    const MatrixXd pinv = linalg::pinv(t.ds.X0);
    const MatrixXd Z = null_split(in.G, t.ds.X0);
    double prev_p = -1, prev_d1 = -1, prev_d = -1;
    for (double s : {0.0, 1.0, 4.0, 16.0}) {
        in.G = pinv + s * (Z.norm() > 0 ? Z / Z.norm() : Z);
        const GapBundle gb = gap_bound(in);
        if (gb.param_norm >= prev_p) {
            EXPECT_GE(gb.delta1, prev_d1);
            EXPECT_GE(gb.d, prev_d);
        }
        prev_p = gb.param_norm;
        prev_d1 = gb.delta1;
        prev_d = gb.d;
    }
}

TEST(GapBound, VacuousBoundIsReportedInvalid) {
    GapInputs in = two_state().inputs();
    in.snr.linear = 1e-3;
    const GapBundle gb = gap_bound(in);
    EXPECT_FALSE(gb.valid);
    EXPECT_TRUE(std::isinf(gb.delta));
}

TEST(GapBound, RecordHasStableKeys) {
    const std::string rec = to_record(gap_bound(two_state().inputs()));
    for (const char* key : {"tau=", "rho=", "delta1=", "delta2=", "d=", "delta=", "valid="}) {
        EXPECT_NE(rec.find(key), std::string::npos) << key;
    }
}

TEST(CostGap, HandValuesAndHomogeneity) {
    EXPECT_EQ(cost_gap_bound(Eigen::Vector2d(1, 1), 0.0, MatrixXd::Identity(2, 2), 0.5), 0.0);
    EXPECT_DOUBLE_EQ(cost_gap_bound(VectorXd::Zero(1), 2.0, MatrixXd::Identity(1, 1), 0.5), 2.0);
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const VectorXd x0 = Eigen::Vector4d(0.3, -4, 0.1, -1);
    EXPECT_NEAR(cost_gap_bound(x0, 1.0, qc.W, 0.9999), 38.197890000002317, 1e-9);
    const double base = cost_gap_bound(VectorXd::Zero(4), 1.0, qc.W, 0.9);
    EXPECT_NEAR(cost_gap_bound(VectorXd::Zero(4), 1.0, 3.0 * qc.W, 0.9), 3.0 * base, 1e-12 * base);
    EXPECT_THROW(cost_gap_bound(x0, 1.0, qc.W, 1.0), InvalidInput);
}

}  // namespace
}  // namespace ddlqr
