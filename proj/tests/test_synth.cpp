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

#include "ddlqr/bench.hpp"
#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"
#include "ddlqr/mss.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/synth.hpp"
#include "support.hpp"

namespace ddlqr {
namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

const CostSpec kSpec{MatrixXd::Identity(4, 4), MatrixXd::Identity(1, 1), 0.9999};

double rel(const MatrixXd& K, const MatrixXd& ref) { return (K - ref).norm() / ref.norm(); }

struct NoiseFree {
    DiscreteLinearSystem sys = load_system(testing::fixture("quarter_car_noise_free"));
    DataSet ds = load_dataset(testing::fixture("quarter_car_noise_free/data"));
    MatrixXd Kstar = io::read_matrix(testing::fixture("quarter_car/Kstar.csv"));
};

const NoiseFree& noise_free() {
    static const NoiseFree f;
    return f;
}

/// Twenty quarter-car datasets at a calibrated 50 dB, shared by the Monte Carlo checks.
struct Noisy {
    DiscreteLinearSystem sys;
    std::vector<DataSet> data;
};

const Noisy& noisy_50db() {
    static const Noisy n = [] {
        BenchConfig cfg;
        const Calibration cal = calibrate_noise(cfg, 50.0, 10, 99);
        Noisy out;
        out.sys = bench_plant(cfg, cal.r);
        for (int s = 0; s < 20; ++s) {
            CounterRng rng(derive_seed(2024, s));
            const VectorXd x0 = cfg.x0_dist.sample(rng);
            out.data.push_back(collect(out.sys, cfg.N, x0, cfg.input_scale, rng.substream(1)));
        }
        return out;
    }();
    return n;
}

TEST(ParseMethod, CliSpellings) {
    EXPECT_EQ(parse_method("model"), Method::model);
    EXPECT_EQ(parse_method("ce"), Method::indirect_ce);
    EXPECT_EQ(parse_method("direct-ce"), Method::direct_ce);
    EXPECT_EQ(parse_method("robust"), Method::robust_direct);
    EXPECT_EQ(parse_method("robust_direct"), Method::robust_direct);
    EXPECT_THROW(parse_method("lqg"), InvalidInput);
}

TEST(ModelBased, QuarterCarMatchesOracle) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const SynthesisResult r = synth_model_based(qc.A, qc.B, kSpec, qc.W);
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LE(rel(r.K, io::read_matrix(testing::fixture("quarter_car/Kstar.csv"))), 1e-2);
    EXPECT_LE((r.P * r.Y - MatrixXd::Identity(4, 4)).norm(), 1e-6);
    EXPECT_GT(linalg::min_eigenvalue(r.P), 0.0);
    EXPECT_LE(r.diag.lmi_max_eig, 1e-6 * std::max(1.0, r.Y.norm()));
}

TEST(ModelBased, StableScalarPlant) {
    const SynthesisResult r =
        synth_model_based(scalar(0.5), scalar(1.0), CostSpec{scalar(1.0), scalar(1.0), 0.9}, scalar(1.0));
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LT(std::abs(0.5 + r.K(0, 0)), 1.0);
}

TEST(ModelBased, OraclePointIsFeasible) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const OptimalSolution opt = solve_discounted_dare(qc, kSpec);
    const MatrixXd Y = opt.Pstar.inverse();
    const MatrixXd lmi = model_lmi(qc.A, qc.B, kSpec, Y, opt.Kstar * Y);
    EXPECT_LE(linalg::max_eigenvalue(lmi), 1e-7);
}

TEST(IndirectCe, NoiseFreeEqualsModelBased) {
    const auto& f = noise_free();
    const SynthesisResult ce = synth_indirect_ce(f.ds, kSpec, f.sys.W);
    const SynthesisResult mb = synth_model_based(f.sys.A, f.sys.B, kSpec, f.sys.W);
    ASSERT_TRUE(ce.ok() && mb.ok());
    EXPECT_LE(rel(ce.K, mb.K), 1e-6);
}

TEST(IndirectCe, DeficientDataIsRejected) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const DataSet short_data = collect(qc, 3, Eigen::Vector4d(0.3, -4, 0.1, -1), 10.0, CounterRng(1));
    EXPECT_THROW(synth_indirect_ce(short_data, kSpec, qc.W), RankDeficiency);
}

TEST(IndirectCe, StabilizesAt50dB) {
    const Noisy& n = noisy_50db();
    int stable = 0;
    for (const DataSet& ds : n.data) {
        const SynthesisResult r = synth_indirect_ce(ds, kSpec, n.sys.W);
        stable += r.ok() && true_spectral_radius(n.sys.A, n.sys.B, r.K) < 1.0;
    }
    EXPECT_GE(stable, 18);
}

TEST(DirectCe, NoiseFreeRecoversOptimalGain) {
    const auto& f = noise_free();
    const SynthesisResult r = synth_direct_ce(f.ds, kSpec, f.sys.W, 0.0);
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LE(rel(r.K, f.Kstar), 1e-3);
}

TEST(DirectCe, LargeRegularizationPicksRangeSpaceSolution) {
    const auto& f = noise_free();
    const SynthesisResult r = synth_direct_ce(f.ds, kSpec, f.sys.W, 1e6);
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_EQ(r.method, Method::direct_ce_reg);
    const MatrixXd D0 = f.ds.D0();
    const MatrixXd proj = MatrixXd::Identity(D0.cols(), D0.cols()) - linalg::pinv(D0) * D0;
    EXPECT_LE((proj * r.G()).norm(), 1e-4);
    const SynthesisResult ce = synth_indirect_ce(f.ds, kSpec, f.sys.W);
    EXPECT_LE(rel(r.K, ce.K), 5e-2);
}

TEST(RobustDirect, NoiseFreeRecoversOptimalGain) {
    const auto& f = noise_free();
    const SynthesisResult r = synth_robust_direct(f.ds, kSpec, f.sys.W);
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_LE(rel(r.K, f.Kstar), 1e-2);
}

TEST(RobustDirect, ConstraintGroupsHoldAt50dB) {
    const Noisy& n = noisy_50db();
    const int dim = 4;
    for (const DataSet& ds : n.data) {
        const SynthesisResult r = synth_robust_direct(ds, kSpec, n.sys.W);
        if (r.status != sdp::SolveStatus::optimal) continue;
        ASSERT_TRUE(r.alpha.has_value());
        const double a = *r.alpha;
        const MatrixXd lmi = robust_lmi(ds, kSpec, r.Y, *r.F, a);
        EXPECT_LE(linalg::max_eigenvalue(lmi), 1e-6 * std::max(1.0, lmi.norm()));
        EXPECT_LE((ds.X0 * *r.F - r.Y).norm(), 1e-6 * r.Y.norm());
        const double tr = (n.sys.W.inverse() * r.Y).trace();
        EXPECT_GE(tr - a * dim * dim, -1e-6 * a * dim * dim);
        // Cauchy-Schwarz form of the trace inequality.
        EXPECT_LT(1.0 / tr, (r.P * n.sys.W).trace() / (dim * dim) + 1e-9);
        EXPECT_GT(linalg::min_eigenvalue(r.P), 0.0);
    }
}

TEST(RobustDirect, StabilizesTruePlantAt50dB) {
    const Noisy& n = noisy_50db();
    int stable = 0;
    for (const DataSet& ds : n.data) {
        const SynthesisResult r = synth_robust_direct(ds, kSpec, n.sys.W);
        stable += r.ok() && true_spectral_radius(n.sys.A, n.sys.B, r.K) < 1.0;
    }
    EXPECT_EQ(stable, 20);
}

TEST(RobustDirect, EstimatedNoiseFallback) {
    const Noisy& n = noisy_50db();
    const DataSet& ds = n.data.front();
    const MatrixXd What = estimate_noise_cov(ds, least_squares_id(ds));
    const SynthesisResult r = synth_indirect_ce(ds, kSpec, MatrixXd());
    ASSERT_TRUE(r.ok()) << r.message;
    EXPECT_EQ(r.noise_source, "estimated");
    EXPECT_LT((r.W_used - What).norm(), 1e-12 + 1e-9 * What.norm());
}

TEST(BellmanCertificate, EqualityAtOracle) {
    const DiscreteLinearSystem qc = load_system(testing::fixture("quarter_car"));
    const OptimalSolution opt = solve_discounted_dare(qc, kSpec);
    const BellmanCertificate c = bellman_certificate(opt.Kstar, opt.Pstar, qc.A, qc.B, kSpec);
    EXPECT_LE(c.S.norm(), 1e-8 * opt.Pstar.norm());
    EXPECT_TRUE(c.passes);
}

TEST(BellmanCertificate, UnstableOpenLoopFails) {
    const CostSpec spec{scalar(1.0), scalar(1.0), 0.99};
    for (double p : {0.1, 1.0, 100.0}) {
        EXPECT_FALSE(bellman_certificate(scalar(0.0), scalar(p), scalar(2.0), scalar(1.0), spec).passes);
    }
}

TEST(GammaFloorData, Sentinels) {
    const CostSpec spec{MatrixXd::Identity(2, 2), scalar(1.0), 0.9};
    const MatrixXd X1 = MatrixXd::Identity(2, 3);
    const MatrixXd U0 = MatrixXd::Zero(1, 3);
    EXPECT_EQ(gamma_floor_data(MatrixXd::Zero(3, 2), MatrixXd::Identity(2, 2), X1, U0, MatrixXd::Zero(2, 2), spec),
              -std::numeric_limits<double>::infinity());
    MatrixXd G = MatrixXd::Zero(3, 2);
    G.topRows(2).setIdentity();
    // Q + (U0G)'R(U0G) = I and (X1G)'P(X1G) = I with W = 0.
    EXPECT_DOUBLE_EQ(gamma_floor_data(G, MatrixXd::Identity(2, 2), X1, U0, MatrixXd::Zero(2, 2), spec), 0.0);
}

TEST(SynthesisIo, RoundTrip) {
    const auto& f = noise_free();
    const SynthesisResult r = synth_robust_direct(f.ds, kSpec, f.sys.W);
    const auto dir = testing::scratch_dir("synth_io");
    save_synthesis(dir, r, sdp::SolverSettings{}, "abc");
    const SynthesisResult back = load_synthesis(dir);
    EXPECT_EQ(back.method, r.method);
    EXPECT_EQ(back.K, r.K);
    EXPECT_EQ(back.P, r.P);
    EXPECT_EQ(*back.F, *r.F);
    EXPECT_EQ(*back.alpha, *r.alpha);
    EXPECT_TRUE(back.ok());
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ddlqr
