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
#include "ddlqr/data.hpp"

#include <cmath>
#include <limits>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr {

MatrixXd DataSet::D0() const {
    MatrixXd D(m() + n(), N());
    D << U0, X0;
    return D;
}

void DataSet::validate() const {
    if (X0.cols() != X1.cols() || U0.cols() != X0.cols()) {
        throw InvalidInput("U0, X0 and X1 must have the same number of columns");
    }
    if (X0.rows() != X1.rows() || X0.rows() == 0 || U0.rows() == 0) {
        throw InvalidInput("X0 and X1 must share a nonzero row count, U0 must be nonempty");
    }
    if (N() < 1) {
        throw InvalidInput("data batch must contain at least one sample");
    }
    if (!U0.allFinite() || !X0.allFinite() || !X1.allFinite()) {
        throw InvalidInput("data matrices contain non-finite entries");
    }
    if (Omega0 && (Omega0->rows() != X0.rows() || Omega0->cols() != X0.cols())) {
        throw InvalidInput("Omega0 must have the shape of X0");
    }
}

DataSet collect(const DiscreteLinearSystem& sys, int N, const VectorXd& x0, double input_scale,
                const CounterRng& rng) {
    sys.validate();
    if (N < 1) {
        throw InvalidInput("data length N must be >= 1");
    }
    if (x0.size() != sys.n()) {
        throw InvalidInput("x0 must have " + std::to_string(sys.n()) + " entries");
    }
    const int n = sys.n();
    const int m = sys.m();
    const MatrixXd noise_factor = linalg::psd_sqrt(sys.W);
    const bool noiseless = sys.W.isZero(0.0);
    const CounterRng noise_root = rng.substream(0);
    const CounterRng input_root = rng.substream(1);

    DataSet ds;
    ds.U0.resize(m, N);
    ds.X0.resize(n, N);
    ds.X1.resize(n, N);
    ds.Omega0 = MatrixXd::Zero(n, N);
    ds.seed = rng.key();
    ds.input_scale = input_scale;
    ds.source_hash = io::hex64(io::content_hash({&sys.A, &sys.B, &sys.W}));

    VectorXd x = x0;
    for (int k = 0; k < N; ++k) {
        CounterRng input_rng = input_root.substream(static_cast<std::uint64_t>(k));
        const VectorXd u = input_scale * input_rng.normal_vector(m);
        VectorXd w = VectorXd::Zero(n);
        if (!noiseless) {
            CounterRng noise_rng = noise_root.substream(static_cast<std::uint64_t>(k));
            w = noise_rng.gaussian(noise_factor);
        }
        const VectorXd next = sys.A * x + sys.B * u + w;
        if (!next.allFinite()) {
            throw InvalidInput("data collection diverged at step " + std::to_string(k));
        }
        ds.U0.col(k) = u;
        ds.X0.col(k) = x;
        ds.X1.col(k) = next;
        ds.Omega0->col(k) = w;
        x = next;
    }
    return ds;
}

RankReport rank_check(const DataSet& ds) {
    RankReport report;
    report.required = ds.n() + ds.m();
    const MatrixXd D = ds.D0();
    if (D.size() == 0) {
        return report;
    }
    Eigen::JacobiSVD<MatrixXd> svd(D);
    report.singular_values = svd.singularValues();
    const double smax = report.singular_values(0);
    if (smax > 0.0) {
        report.rank = static_cast<int>((report.singular_values.array() > kRankThreshold * smax).count());
    }
    report.rich = ds.N() >= report.required && report.rank == report.required;
    return report;
}

IdentifiedModel least_squares_id(const DataSet& ds) {
    ds.validate();
    const RankReport rank = rank_check(ds);
    if (!rank.rich) {
        throw RankDeficiency(rank.rank, rank.required);
    }
    const MatrixXd D = ds.D0();
    const MatrixXd theta = ds.X1 * linalg::pinv(D, kRankThreshold);
    IdentifiedModel model;
    model.Bhat = theta.leftCols(ds.m());
    model.Ahat = theta.rightCols(ds.n());
    model.residual = ds.X1 - theta * D;
    return model;
}

MatrixXd estimate_noise_cov(const DataSet& ds, const IdentifiedModel& model) {
    const MatrixXd residual = ds.X1 - model.Ahat * ds.X0 - model.Bhat * ds.U0;
    return linalg::symmetrize(residual * residual.transpose() / static_cast<double>(ds.N()));
}

std::string to_string(SnrMode mode) { return mode == SnrMode::oracle ? "oracle" : "estimated"; }

Snr snr_from(const MatrixXd& Omega, const MatrixXd& D0, SnrMode mode) {
    Snr snr;
    snr.mode = mode;
    const double noise = linalg::norm2(Omega);
    const double pinv_norm = linalg::norm2(linalg::pinv(D0, kRankThreshold));
    if (noise == 0.0 || pinv_norm == 0.0) {
        snr.linear = std::numeric_limits<double>::infinity();
        snr.db = std::numeric_limits<double>::infinity();
        return snr;
    }
    snr.linear = 1.0 / (noise * pinv_norm);
    snr.db = 20.0 * std::log10(snr.linear);
    return snr;
}

Snr snr_measured(const DataSet& ds) {
    if (ds.Omega0) {
        return snr_from(*ds.Omega0, ds.D0(), SnrMode::oracle);
    }
    const IdentifiedModel model = least_squares_id(ds);
    return snr_from(model.residual, ds.D0(), SnrMode::estimated);
}

void save_dataset(const std::filesystem::path& dir, const DataSet& ds) {
    ds.validate();
    std::filesystem::create_directories(dir);
    io::write_matrix(dir / "U0.csv", ds.U0);
    io::write_matrix(dir / "X0.csv", ds.X0);
    io::write_matrix(dir / "X1.csv", ds.X1);
    if (ds.Omega0) {
        io::write_matrix(dir / "Omega0.csv", *ds.Omega0);
    } else {
        std::filesystem::remove(dir / "Omega0.csv");
    }
    nlohmann::json meta{{"seed", ds.seed},
                        {"N", ds.N()},
                        {"n", ds.n()},
                        {"m", ds.m()},
                        {"input_scale", ds.input_scale},
                        {"source_hash", ds.source_hash},
                        {"hash", io::hex64(io::content_hash({&ds.U0, &ds.X0, &ds.X1}))}};
    io::write_json(dir / "meta.json", meta);
}

DataSet load_dataset(const std::filesystem::path& dir) {
    DataSet ds;
    ds.U0 = io::read_matrix(dir / "U0.csv");
    ds.X0 = io::read_matrix(dir / "X0.csv");
    ds.X1 = io::read_matrix(dir / "X1.csv");
    if (std::filesystem::exists(dir / "Omega0.csv")) {
        ds.Omega0 = io::read_matrix(dir / "Omega0.csv");
    }
    if (std::filesystem::exists(dir / "meta.json")) {
        const auto meta = io::read_json(dir / "meta.json");
        ds.seed = meta.value("seed", std::uint64_t{0});
        ds.input_scale = meta.value("input_scale", 0.0);
        ds.source_hash = meta.value("source_hash", std::string{});
    }
    ds.validate();
    return ds;
}

}  // namespace ddlqr
