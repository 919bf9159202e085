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
#ifndef DDLQR_LINALG_HPP
#define DDLQR_LINALG_HPP

#include <string>

#include <Eigen/Dense>

// Small dense helpers shared by every module.
namespace ddlqr::linalg {

using Eigen::MatrixXd;
using Eigen::Ref;
using Eigen::VectorXd;

inline MatrixXd symmetrize(const Ref<const MatrixXd>& S) { return 0.5 * (S + S.transpose()); }

bool all_finite(const Ref<const MatrixXd>& M);

/// ||S - S^T||_max <= rel_tol * max(1, ||S||_max).
bool is_symmetric(const Ref<const MatrixXd>& S, double rel_tol);

/// Symmetric, and every eigenvalue >= -rel_tol * max(1, ||S||_2).
bool is_psd(const Ref<const MatrixXd>& S, double rel_tol);

double min_eigenvalue(const Ref<const MatrixXd>& S);
double max_eigenvalue(const Ref<const MatrixXd>& S);

double spectral_radius(const Ref<const MatrixXd>& M);

/// Largest singular value.
double norm2(const Ref<const MatrixXd>& M);

/// Moore-Penrose pseudoinverse; singular values <= rel_threshold * sigma_max are dropped.
MatrixXd pinv(const Ref<const MatrixXd>& M, double rel_threshold = 1e-9);

/// Singular values <= rel_threshold * sigma_max count as zero.
int numerical_rank(const Ref<const MatrixXd>& M, double rel_threshold = 1e-9);

/// Symmetric square root factor S with S S^T = C for symmetric PSD C.
/// Negative roundoff eigenvalues are clamped to zero.
MatrixXd psd_sqrt(const Ref<const MatrixXd>& C);

/// Solves X = M X M^T + C by doubling; requires rho(M) < 1.
MatrixXd solve_discrete_lyapunov(const Ref<const MatrixXd>& M, const Ref<const MatrixXd>& C,
                                 double tol = 1e-14, int max_doublings = 200);

/// Throws InvalidInput naming `what` when the shape is wrong.
void require_shape(const Ref<const MatrixXd>& M, Eigen::Index rows, Eigen::Index cols,
                   const std::string& what);

}  // namespace ddlqr::linalg

#endif  // DDLQR_LINALG_HPP
