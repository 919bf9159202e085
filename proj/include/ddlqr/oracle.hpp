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
#ifndef DDLQR_ORACLE_HPP
#define DDLQR_ORACLE_HPP

#include <vector>

#include <Eigen/Dense>

#include "ddlqr/sys.hpp"

namespace ddlqr {

/// Ground-truth discounted LQR solution for a known plant.
struct OptimalSolution {
    MatrixXd Pstar;
    MatrixXd Kstar;
    double cstar = 0.0;
    int iterations = 0;
    double residual = 0.0;  ///< Bellman residual ||P - Q - K'RK - gamma L'PL||_F, L = A + BK
};

/// K = -gamma (R + gamma B'PB)^{-1} B'PA, the greedy gain for value matrix P.
MatrixXd greedy_gain(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec, const MatrixXd& P);

/// One value-iteration sweep on the scaled pair (sqrt(gamma) A, sqrt(gamma) B).
MatrixXd riccati_step(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec, const MatrixXd& P);

/// ||P - Q - K'RK - gamma (A+BK)' P (A+BK)||_F.
double bellman_residual(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                        const MatrixXd& P, const MatrixXd& K);

/**
 * Value iteration from P = 0 until ||P_{k+1} - P_k||_F <= tol ||P_{k+1}||_F.
 * Throws ConvergenceError (message carries the last residuals) when max_iter is
 * exhausted or the iterates blow up, which is how non-stabilizable pairs show up.
 */
OptimalSolution solve_discounted_dare(const DiscreteLinearSystem& sys, const CostSpec& spec,
                                      double tol = 1e-12, int max_iter = 1000000);

/// The first `count` value-iteration iterates P_1..P_count from P_0 = 0.
std::vector<MatrixXd> value_iteration_path(const DiscreteLinearSystem& sys, const CostSpec& spec,
                                           int count);

/// gamma / (1 - gamma) Tr(P W).
double c_star(const MatrixXd& P, const MatrixXd& W, double gamma);

/// x0' P* x0 + c*.
double optimal_value(const VectorXd& x0, const OptimalSolution& sol);

/// Tr(P W), the long-run average cost of the policy with value matrix P.
double averaged_cost(const MatrixXd& P, const MatrixXd& W);

/// mean' P mean + Tr(P cov) + beta gamma / (1 - gamma) Tr(P W).
double cost_upper_bound(const InitialCondition& x0, const MatrixXd& P, const MatrixXd& W,
                        double gamma, double beta = 1.0);

/// 1 - lambda_min(Q + K'RK) / lambda_max((A+BK)' P (A+BK)); -infinity when the
/// denominator vanishes (every gamma qualifies).
double gamma_lower_bound_model(const MatrixXd& A, const MatrixXd& B, const MatrixXd& K,
                               const MatrixXd& P, const MatrixXd& Q, const MatrixXd& R);

}  // namespace ddlqr

#endif  // DDLQR_ORACLE_HPP
