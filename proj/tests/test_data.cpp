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

#include "ddlqr/data.hpp"
#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "support.hpp"

namespace ddlqr {
namespace {

const VectorXd kX0 = Eigen::Vector4d(0.3, -4, 0.1, -1);

DiscreteLinearSystem quarter_car_plant(double r) { return discretize(quarter_car(r), 0.01); }

TEST(Collect, ShapesAndNoiseConsistency) {
    const DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    const DataSet ds = collect(sys, 10, kX0, 10.0, CounterRng(3));
    EXPECT_EQ(ds.U0.rows(), 1);
    EXPECT_EQ(ds.U0.cols(), 10);
    EXPECT_EQ(ds.X0.rows(), 4);
    EXPECT_EQ(ds.X1.cols(), 10);
    ASSERT_TRUE(ds.Omega0.has_value());
    EXPECT_LT((ds.X1 - sys.A * ds.X0 - sys.B * ds.U0 - *ds.Omega0).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(ds.X0.rightCols(9), ds.X1.leftCols(9));
}

TEST(Collect, ZeroNoisePlantGivesZeroOmega) {
    DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    sys.W.setZero();
    const DataSet ds = collect(sys, 10, kX0, 10.0, CounterRng(3));
    EXPECT_EQ(ds.Omega0->cwiseAbs().maxCoeff(), 0.0);
}

TEST(Collect, InputScaleSetsSpread) {
    const DataSet ds = collect(quarter_car_plant(1e-3), 1000, kX0, 10.0, CounterRng(11));
    const double mean = ds.U0.mean();
    const double sd = std::sqrt((ds.U0.array() - mean).square().sum() / (ds.N() - 1));
    EXPECT_GE(sd, 7.0);
    EXPECT_LE(sd, 13.0);
}

TEST(RankCheck, RichAndDeficientCases) {
    const DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    EXPECT_TRUE(rank_check(collect(sys, 10, kX0, 10.0, CounterRng(1))).rich);

    DataSet zero;
    zero.U0 = MatrixXd::Zero(1, 10);
    zero.X0 = MatrixXd::Zero(4, 10);
    zero.X1 = MatrixXd::Zero(4, 10);
    const RankReport z = rank_check(zero);
    EXPECT_FALSE(z.rich);
    EXPECT_EQ(z.rank, 0);

    const RankReport short_data = rank_check(collect(sys, 3, kX0, 10.0, CounterRng(1)));
    EXPECT_FALSE(short_data.rich);
    EXPECT_EQ(short_data.required, 5);
    EXPECT_LE(short_data.rank, 3);
}

TEST(RankCheck, RichWithHighProbability) {
    const DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    int rich = 0;
    for (int s = 0; s < 100; ++s) rich += rank_check(collect(sys, 7, kX0, 10.0, CounterRng(s))).rich;
    EXPECT_GE(rich, 99);
}

TEST(LeastSquares, NoiseFreeRecoversPlant) {
    DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    sys.W.setZero();
    const IdentifiedModel m = least_squares_id(collect(sys, 10, kX0, 10.0, CounterRng(2)));
    EXPECT_LE((m.Ahat - sys.A).norm() + (m.Bhat - sys.B).norm(), 1e-8);
}

TEST(LeastSquares, HandSolvedScalarFit) {
    DiscreteLinearSystem sys{MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 1.0), MatrixXd::Zero(1, 1)};
    DataSet ds;
    ds.U0 = (MatrixXd(1, 2) << 1.0, 0.0).finished();
    ds.X0 = (MatrixXd(1, 2) << 0.0, 1.0).finished();
    ds.X1 = sys.A * ds.X0 + sys.B * ds.U0;
    EXPECT_EQ(ds.X1, (MatrixXd(1, 2) << 1.0, 0.5).finished());
    const IdentifiedModel m = least_squares_id(ds);
    EXPECT_NEAR(m.Ahat(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(m.Bhat(0, 0), 1.0, 1e-14);
}

TEST(LeastSquares, ConsistentAtHighSnr) {
    const DiscreteLinearSystem sys = quarter_car_plant(1e-6);
    const DataSet ds = collect(sys, 200, kX0, 10.0, CounterRng(8));
    const IdentifiedModel m = least_squares_id(ds);
    MatrixXd truth(4, 5), est(4, 5);
    truth << sys.B, sys.A;
    est << m.Bhat, m.Ahat;
    EXPECT_LE((est - truth).norm() / truth.norm(), 1e-2);
}

TEST(LeastSquares, ResidualIsMinimal) {
    const DataSet ds = collect(quarter_car_plant(1e-3), 12, kX0, 10.0, CounterRng(4));
    const IdentifiedModel m = least_squares_id(ds);
    const double best = m.residual.norm();
    CounterRng rng(77);
    for (int i = 0; i < 100; ++i) {
        const MatrixXd dA = 1e-3 * MatrixXd::NullaryExpr(4, 4, [&] { return rng.normal(); });
        const MatrixXd dB = 1e-3 * MatrixXd::NullaryExpr(4, 1, [&] { return rng.normal(); });
        const MatrixXd res = ds.X1 - (m.Ahat + dA) * ds.X0 - (m.Bhat + dB) * ds.U0;
        EXPECT_GE(res.norm(), best * (1 - 1e-12));
    }
}

TEST(LeastSquares, DeficientDataThrows) {
    const DataSet ds = collect(quarter_car_plant(1e-3), 3, kX0, 10.0, CounterRng(1));
    EXPECT_THROW(least_squares_id(ds), RankDeficiency);
}

TEST(NoiseCovariance, ZeroForNoiseFreeData) {
    DiscreteLinearSystem sys = quarter_car_plant(1e-3);
    sys.W.setZero();
    const DataSet ds = collect(sys, 10, kX0, 10.0, CounterRng(2));
    const MatrixXd What = estimate_noise_cov(ds, least_squares_id(ds));
    EXPECT_LE(What.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NoiseCovariance, BoundedByRawNoiseEnergy) {
    const DataSet ds = collect(quarter_car_plant(1e-3), 10, kX0, 10.0, CounterRng(2));
    const MatrixXd What = estimate_noise_cov(ds, least_squares_id(ds));
    const MatrixXd raw = (*ds.Omega0) * ds.Omega0->transpose() / ds.N();
    EXPECT_GE(linalg::min_eigenvalue(raw + 1e-10 * MatrixXd::Identity(4, 4) - What), 0.0);
}

TEST(NoiseCovariance, ConvergesWithManySamples) {
    DiscreteLinearSystem sys{0.5 * MatrixXd::Identity(2, 2), MatrixXd::Ones(2, 1),
                             MatrixXd(Eigen::Vector2d(1.0, 4.0).asDiagonal())};
    const DataSet ds = collect(sys, 10000, VectorXd::Zero(2), 1.0, CounterRng(5));
    const MatrixXd What = estimate_noise_cov(ds, least_squares_id(ds));
    EXPECT_LE((What - sys.W).norm() / sys.W.norm(), 0.1);
}

TEST(Snr, DefinitionAndHomogeneity) {
    const Snr unit = snr_from(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
    EXPECT_NEAR(unit.db, 0.0, 1e-12);
    const DataSet ds = collect(quarter_car_plant(1e-3), 10, kX0, 10.0, CounterRng(2));
    const Snr base = snr_from(*ds.Omega0, ds.D0());
    const Snr doubled = snr_from(2.0 * *ds.Omega0, ds.D0());
    EXPECT_NEAR(base.db - doubled.db, 20 * std::log10(2.0), 1e-10);
    const Snr tripled = snr_from(3.0 * *ds.Omega0, ds.D0());
    EXPECT_NEAR(base.db - tripled.db, 20 * std::log10(3.0), 1e-10);
    EXPECT_TRUE(std::isinf(snr_from(MatrixXd::Zero(4, 10), ds.D0()).db));
}

TEST(Snr, EstimatedModeWithoutRecordedNoise) {
    DataSet ds = collect(quarter_car_plant(1e-3), 10, kX0, 10.0, CounterRng(2));
    EXPECT_EQ(snr_measured(ds).mode, SnrMode::oracle);
    ds.Omega0.reset();
    const Snr est = snr_measured(ds);
    EXPECT_EQ(est.mode, SnrMode::estimated);
    EXPECT_TRUE(std::isfinite(est.db));
}

TEST(DatasetIo, RoundTripIsExact) {
    const auto dir = testing::scratch_dir("data_io");
    const DataSet ds = collect(quarter_car_plant(1e-3), 10, kX0, 10.0, CounterRng(2));
    save_dataset(dir, ds);
    const DataSet back = load_dataset(dir);
    EXPECT_EQ(back.U0, ds.U0);
    EXPECT_EQ(back.X0, ds.X0);
    EXPECT_EQ(back.X1, ds.X1);
    EXPECT_EQ(*back.Omega0, *ds.Omega0);
    EXPECT_EQ(back.seed, ds.seed);
    std::filesystem::remove_all(dir);
}

TEST(DatasetValidate, MismatchedColumnsThrow) {
    DataSet ds;
    ds.U0 = MatrixXd::Zero(1, 5);
    ds.X0 = MatrixXd::Zero(2, 5);
    ds.X1 = MatrixXd::Zero(2, 4);
    EXPECT_THROW(ds.validate(), InvalidInput);
}

}  // namespace
}  // namespace ddlqr
