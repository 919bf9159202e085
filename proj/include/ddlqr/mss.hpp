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
#ifndef DDLQR_MSS_HPP
#define DDLQR_MSS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddlqr/rng.hpp"
#include "ddlqr/sys.hpp"

namespace ddlqr {

/**
 * Closed loop written as x+ = (A0 + sum_i theta_i A_i) x + w, where the theta_i
 * are the entries of the data noise Omega0 and A0 = X1 G.
 */
struct MultiplicativeNoiseSystem {
    MatrixXd A0;
    std::vector<MatrixXd> Ai;
    int theta_dim = 0;
};

/// One n x n matrix per noise entry. Entry i = t*n + j stands for row j of
/// column t of Omega0; its matrix has row j equal to minus row t of G.
std::vector<MatrixXd> decompose(const MatrixXd& G, int n);

/// Noise vector theta matching `decompose`: theta(t*n + j) = Omega0(j, t).
VectorXd stack_noise(const MatrixXd& Omega0);

MultiplicativeNoiseSystem multiplicative_system(const MatrixXd& X1, const MatrixXd& G);

struct MssCertificate {
    MatrixXd S;
    double min_eig = 0.0;
    double tolerance = 0.0;  ///< 1e-6 ||P||_2
    bool passes = false;
};

/// S = P - gamma (X1G)'P(X1G) - Q - (U0G)'R(U0G) - gamma Tr(PW) G'G; passes iff
/// lambda_min(S) >= -1e-6 ||P||_2.
MssCertificate mss_certificate(const MatrixXd& G, const MatrixXd& P, const MatrixXd& X1,
                               const MatrixXd& U0, const MatrixXd& W, const CostSpec& spec);

/// rho(A + B K).
double true_spectral_radius(const MatrixXd& A, const MatrixXd& B, const MatrixXd& K);

struct MssEstimate {
    MatrixXd sigma_inf;
    bool converged = false;
    double tail_drift = 0.0;
    int trials = 0;
    int diverged_trials = 0;
    std::string report;
};

/**
 * Monte Carlo second moment of x_k from x_0 = 0. Trial t draws its noise from
 * rng.substream(t). The tail window is the last 20% of the horizon; its two
 * halves are averaged separately and the drift is their relative difference.
 * Converged iff drift <= 0.1 and at most half of the trials diverged.
 */
MssEstimate empirical_mss(const DiscreteLinearSystem& sys, const MatrixXd& K, int trials,
                          int horizon, const CounterRng& rng);

}  // namespace ddlqr

#endif  // DDLQR_MSS_HPP
