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
#include "ddlqr/oracle.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"

namespace ddlqr {

MatrixXd greedy_gain(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                     const MatrixXd& P) {
    const double g = spec.gamma;
    const MatrixXd H = spec.R + g * B.transpose() * P * B;
    return -g * H.ldlt().solve(B.transpose() * P * A);
}

MatrixXd riccati_step(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                      const MatrixXd& P) {
    const double g = spec.gamma;
    const MatrixXd PA = P * A;
    const MatrixXd BtPA = B.transpose() * PA;
    const MatrixXd H = spec.R + g * B.transpose() * P * B;
    const MatrixXd next =
        spec.Q + g * A.transpose() * PA - g * g * BtPA.transpose() * H.ldlt().solve(BtPA);
    return linalg::symmetrize(next);
}

double bellman_residual(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                        const MatrixXd& P, const MatrixXd& K) {
    const MatrixXd L = A + B * K;
    return (P - spec.Q - K.transpose() * spec.R * K - spec.gamma * L.transpose() * P * L).norm();
}

OptimalSolution solve_discounted_dare(const DiscreteLinearSystem& sys, const CostSpec& spec,
                                      double tol, int max_iter) {
    sys.validate();
    spec.validate_for(sys.n(), sys.m());
    if (!(tol > 0.0) || max_iter < 1) {
        throw InvalidInput("DARE tolerance must be positive and max_iter >= 1");
    }
    MatrixXd P = MatrixXd::Zero(sys.n(), sys.n());
    std::deque<double> history;
    int iter = 0;
    bool converged = false;
    for (; iter < max_iter; ++iter) {
        const MatrixXd next = riccati_step(sys.A, sys.B, spec, P);
        const double change = (next - P).norm();
        const double scale = next.norm();
        P = next;
        history.push_back(scale > 0.0 ? change / scale : change);
        if (history.size() > 5) history.pop_front();
        if (!P.allFinite() || scale > 1e300) {
            break;
        }
        if (change <= tol * scale) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "discounted DARE value iteration did not converge after " << iter
            << " iterations (pair not stabilizable or badly conditioned); last relative changes:";
        for (double h : history) msg << " " << h;
        throw ConvergenceError(msg.str());
    }
    OptimalSolution sol;
    sol.Pstar = P;
    sol.Kstar = greedy_gain(sys.A, sys.B, spec, P);
    sol.cstar = c_star(P, sys.W, spec.gamma);
    sol.iterations = iter;
    sol.residual = bellman_residual(sys.A, sys.B, spec, P, sol.Kstar);
    return sol;
}

std::vector<MatrixXd> value_iteration_path(const DiscreteLinearSystem& sys, const CostSpec& spec,
                                           int count) {
    sys.validate();
    spec.validate_for(sys.n(), sys.m());
    std::vector<MatrixXd> path;
    MatrixXd P = MatrixXd::Zero(sys.n(), sys.n());
    for (int k = 0; k < count; ++k) {
        P = riccati_step(sys.A, sys.B, spec, P);
        path.push_back(P);
    }
    return path;
}

double c_star(const MatrixXd& P, const MatrixXd& W, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidInput("discount factor must lie in (0, 1)");
    }
    return gamma / (1.0 - gamma) * (P * W).trace();
}

double optimal_value(const VectorXd& x0, const OptimalSolution& sol) {
    return x0.dot(sol.Pstar * x0) + sol.cstar;
}

double averaged_cost(const MatrixXd& P, const MatrixXd& W) { return (P * W).trace(); }

double cost_upper_bound(const InitialCondition& x0, const MatrixXd& P, const MatrixXd& W,
                        double gamma, double beta) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidInput("discount factor must lie in (0, 1)");
    }
    if (!(beta >= 1.0)) {
        throw InvalidInput("beta must be >= 1");
    }
    return x0.mean.dot(P * x0.mean) + (P * x0.cov).trace() +
           beta * gamma / (1.0 - gamma) * (P * W).trace();
}

double gamma_lower_bound_model(const MatrixXd& A, const MatrixXd& B, const MatrixXd& K,
                               const MatrixXd& P, const MatrixXd& Q, const MatrixXd& R) {
    const MatrixXd L = A + B * K;
    const double denom = linalg::max_eigenvalue(linalg::symmetrize(L.transpose() * P * L));
    if (!(denom > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double num = linalg::min_eigenvalue(linalg::symmetrize(Q + K.transpose() * R * K));
    return 1.0 - num / denom;
}

}  // namespace ddlqr
