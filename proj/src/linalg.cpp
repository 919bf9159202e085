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
#include "ddlqr/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "ddlqr/errors.hpp"

namespace ddlqr::linalg {

bool all_finite(const Ref<const MatrixXd>& M) { return M.allFinite(); }

bool is_symmetric(const Ref<const MatrixXd>& S, double rel_tol) {
    if (S.rows() != S.cols()) {
        return false;
    }
    if (S.size() == 0) {
        return true;
    }
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    return (S - S.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const Ref<const MatrixXd>& S, double rel_tol) {
    if (!is_symmetric(S, rel_tol)) {
        return false;
    }
    if (S.size() == 0) {
        return true;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -rel_tol * scale;
}

double min_eigenvalue(const Ref<const MatrixXd>& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Ref<const MatrixXd>& S) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double spectral_radius(const Ref<const MatrixXd>& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::EigenSolver<MatrixXd> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double norm2(const Ref<const MatrixXd>& M) {
    if (M.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<MatrixXd> svd(M);
    return svd.singularValues()(0);
}

MatrixXd pinv(const Ref<const MatrixXd>& M, double rel_threshold) {
    if (M.size() == 0) {
        return MatrixXd::Zero(M.cols(), M.rows());
    }
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double cutoff = rel_threshold * sv(0);
    VectorXd inv = VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            inv(i) = 1.0 / sv(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Ref<const MatrixXd>& M, double rel_threshold) {
    if (M.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const VectorXd& sv = svd.singularValues();
    if (sv(0) <= 0.0) {
        return 0;
    }
    const double cutoff = rel_threshold * sv(0);
    return static_cast<int>((sv.array() > cutoff).count());
}

MatrixXd psd_sqrt(const Ref<const MatrixXd>& C) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(C));
    const VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd solve_discrete_lyapunov(const Ref<const MatrixXd>& M, const Ref<const MatrixXd>& C,
                                 double tol, int max_doublings) {
    // Smith doubling: X_{k+1} = X_k + A_k X_k A_k^T, A_{k+1} = A_k^2.
    MatrixXd X = C;
    MatrixXd Ak = M;
    for (int i = 0; i < max_doublings; ++i) {
        const MatrixXd increment = Ak * X * Ak.transpose();
        X += increment;
        Ak = Ak * Ak;
        if (increment.norm() <= tol * std::max(1.0, X.norm())) {
            return symmetrize(X);
        }
        if (!X.allFinite()) {
            break;
        }
    }
    throw ConvergenceError("discrete Lyapunov doubling did not converge (is rho(M) < 1?)");
}

void require_shape(const Ref<const MatrixXd>& M, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what) {
    if (M.rows() != rows || M.cols() != cols) {
        throw InvalidInput(what + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", got " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
}

}  // namespace ddlqr::linalg
