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
#include "ddlqr/mss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"

namespace ddlqr {

std::vector<MatrixXd> decompose(const MatrixXd& G, int n) {
    if (n <= 0) {
        throw InvalidInput("state dimension must be positive");
    }
    if (G.cols() != n) {
        throw InvalidInput("G must have n = " + std::to_string(n) + " columns");
    }
    const int N = static_cast<int>(G.rows());
    std::vector<MatrixXd> Ai;
    Ai.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(n));
    for (int t = 0; t < N; ++t) {
        for (int j = 0; j < n; ++j) {
            MatrixXd M = MatrixXd::Zero(n, n);
            M.row(j) = -G.row(t);
            Ai.push_back(std::move(M));
        }
    }
    return Ai;
}

VectorXd stack_noise(const MatrixXd& Omega0) {
    const Eigen::Index n = Omega0.rows();
    VectorXd theta(Omega0.size());
    for (Eigen::Index t = 0; t < Omega0.cols(); ++t) {
        theta.segment(t * n, n) = Omega0.col(t);
    }
    return theta;
}

MultiplicativeNoiseSystem multiplicative_system(const MatrixXd& X1, const MatrixXd& G) {
    if (X1.cols() != G.rows()) {
        throw InvalidInput("X1 columns must match G rows");
    }
    MultiplicativeNoiseSystem sys;
    sys.A0 = X1 * G;
    sys.Ai = decompose(G, static_cast<int>(G.cols()));
    sys.theta_dim = static_cast<int>(sys.Ai.size());
    return sys;
}

MssCertificate mss_certificate(const MatrixXd& G, const MatrixXd& P, const MatrixXd& X1,
                               const MatrixXd& U0, const MatrixXd& W, const CostSpec& spec) {
    const MatrixXd XG = X1 * G;
    const MatrixXd UG = U0 * G;
    const double g = spec.gamma;
    const MatrixXd S = P - g * XG.transpose() * P * XG - spec.Q - UG.transpose() * spec.R * UG -
                       g * (P * W).trace() * G.transpose() * G;
    MssCertificate cert;
    cert.S = linalg::symmetrize(S);
    cert.min_eig = linalg::min_eigenvalue(cert.S);
    cert.tolerance = 1e-6 * linalg::norm2(P);
    cert.passes = cert.min_eig >= -cert.tolerance;
    return cert;
}

double true_spectral_radius(const MatrixXd& A, const MatrixXd& B, const MatrixXd& K) {
    return linalg::spectral_radius(A + B * K);
}

MssEstimate empirical_mss(const DiscreteLinearSystem& sys, const MatrixXd& K, int trials,
                          int horizon, const CounterRng& rng) {
    if (trials < 30) {
        throw InvalidInput("empirical_mss needs at least 30 trials");
    }
    if (horizon < 10) {
        throw InvalidInput("empirical_mss needs a horizon of at least 10 steps");
    }
    const int n = sys.n();
    const VectorXd x0 = VectorXd::Zero(n);
    std::vector<MatrixXd> moment(static_cast<std::size_t>(horizon) + 1, MatrixXd::Zero(n, n));
    MssEstimate est;
    est.trials = trials;
    int kept = 0;
    for (int t = 0; t < trials; ++t) {
        const Trajectory traj = simulate(sys, K, x0, horizon, rng.substream(static_cast<std::uint64_t>(t)));
        if (traj.diverged) {
            ++est.diverged_trials;
            continue;
        }
        ++kept;
        for (int k = 0; k <= horizon; ++k) {
            const auto x = traj.states.col(k);
            moment[static_cast<std::size_t>(k)].noalias() += x * x.transpose();
        }
    }
    if (2 * est.diverged_trials > trials || kept == 0) {
        est.converged = false;
        est.tail_drift = std::numeric_limits<double>::infinity();
        est.sigma_inf = MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
        est.report = std::to_string(est.diverged_trials) + " of " + std::to_string(trials) +
                     " trials diverged";
        return est;
    }
    const int window = std::max(2, horizon / 5);
    const int first = horizon + 1 - window;
    const int half = window / 2;
    MatrixXd early = MatrixXd::Zero(n, n);
    MatrixXd late = MatrixXd::Zero(n, n);
    for (int k = first; k <= horizon; ++k) {
        const MatrixXd Mk = moment[static_cast<std::size_t>(k)] / static_cast<double>(kept);
        if (k < first + half) {
            early += Mk;
        } else {
            late += Mk;
        }
    }
    early /= static_cast<double>(half);
    late /= static_cast<double>(window - half);
    est.sigma_inf = linalg::symmetrize((early * half + late * (window - half)) / window);
    const double scale = est.sigma_inf.norm();
    est.tail_drift = scale > 0.0 ? (late - early).norm() / scale : 0.0;
    if (!std::isfinite(est.tail_drift)) {
        est.tail_drift = std::numeric_limits<double>::infinity();
    }
    est.converged = est.tail_drift <= 0.1;
    est.report = est.diverged_trials > 0
                     ? std::to_string(est.diverged_trials) + " of " + std::to_string(trials) +
                           " trials diverged"
                     : "no divergent trials";
    return est;
}

}  // namespace ddlqr
