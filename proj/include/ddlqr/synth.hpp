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
#ifndef DDLQR_SYNTH_HPP
#define DDLQR_SYNTH_HPP

#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ddlqr/data.hpp"
#include "ddlqr/sdp.hpp"
#include "ddlqr/sys.hpp"

namespace ddlqr {

enum class Method { model, indirect_ce, direct_ce, direct_ce_reg, robust_direct };

/// Accepts the canonical names plus the CLI spellings `ce`, `direct-ce` and `robust`.
Method parse_method(const std::string& name);
std::string to_string(Method method);

/// Why no gain was produced. Closed-loop stability is judged later against the true plant.
enum class FailureKind { none, solver_infeasible, solver_numerical, extraction_conditioning };
std::string to_string(FailureKind kind);

/// Condition number of Y above which gain extraction is refused.
inline constexpr double kMaxConditionY = 1e10;

struct SynthDiagnostics {
    double bellman_residual = 0.0;  ///< lambda_min of the certificate the method guarantees
    double gamma_floor = 0.0;       ///< smallest discount factor the certificate covers
    double solve_time = 0.0;
    double condition_Y = 0.0;
    double lmi_max_eig = 0.0;       ///< method LMI re-evaluated densely at the solution
    bool degraded = false;          ///< robust certificate residual worse than its tolerance
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
};

struct SynthesisResult {
    Method method = Method::model;
    sdp::SolveStatus status = sdp::SolveStatus::numerical_failure;
    FailureKind failure = FailureKind::solver_numerical;
    std::string message;
    MatrixXd K;  ///< m x n gain (empty on failure)
    MatrixXd P;  ///< Y^{-1}
    MatrixXd Y;
    std::optional<MatrixXd> M;  ///< model-based and CE routes: K = M Y^{-1}
    std::optional<MatrixXd> F;  ///< direct routes: K = U0 F Y^{-1}
    std::optional<double> alpha;
    double reg_weight = 0.0;
    double objective = 0.0;
    MatrixXd W_used;  ///< noise covariance in the objective
    std::string noise_source = "supplied";
    SynthDiagnostics diag;

    bool ok() const { return failure == FailureKind::none; }
    /// G = F Y^{-1} for the direct routes.
    MatrixXd G() const;
};

/// maximize Tr(W^{-1}Y) s.t. the Schur-complement LMI in (Y, M) holds and Y >= eps I; K = M Y^{-1}.
SynthesisResult synth_model_based(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                                  const MatrixXd& W, const sdp::SolverSettings& settings = {});

/// Least-squares model then the model-based program on (Ahat, Bhat). An empty W selects the
/// residual covariance estimate.
SynthesisResult synth_indirect_ce(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                  const sdp::SolverSettings& settings = {});

/// Data-parameterized program in (F, Y) with X0 F = Y; reg_weight > 0 subtracts
/// reg_weight * ||(I - D0^+ D0) F||_F from the objective.
SynthesisResult synth_direct_ce(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                double reg_weight = 0.0, const sdp::SolverSettings& settings = {});

/// Robust program: maximize alpha over (F, Y, alpha) with the five-block LMI,
/// X0 F = Y, Tr(W^{-1}Y) >= alpha n^2, alpha >= eps and Y >= eps I.
SynthesisResult synth_robust_direct(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                    const sdp::SolverSettings& settings = {});

/// Dense LMI matrices (should be negative semidefinite at a feasible point).
MatrixXd model_lmi(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec, const MatrixXd& Y,
                   const MatrixXd& M);
MatrixXd direct_lmi(const DataSet& ds, const CostSpec& spec, const MatrixXd& Y, const MatrixXd& F);
MatrixXd robust_lmi(const DataSet& ds, const CostSpec& spec, const MatrixXd& Y, const MatrixXd& F,
                    double alpha);

struct BellmanCertificate {
    MatrixXd S;
    double min_eig = 0.0;
    bool passes = false;
};

/// S = P - Q - K'RK - gamma (A+BK)' P (A+BK); passes iff lambda_min(S) >= -1e-7 ||P||_2.
/// W does not enter S; it is accepted for signature symmetry with the data-driven certificate.
BellmanCertificate bellman_certificate(const MatrixXd& K, const MatrixXd& P, const MatrixXd& A,
                                       const MatrixXd& B, const CostSpec& spec,
                                       const MatrixXd& W = MatrixXd());

/// 1 - lambda_min(Q + (U0G)'R(U0G)) / lambda_max((X1G)'P(X1G) + Tr(PW) G'G); -infinity
/// when the denominator vanishes.
double gamma_floor_data(const MatrixXd& G, const MatrixXd& P, const MatrixXd& X1,
                        const MatrixXd& U0, const MatrixXd& W, const CostSpec& spec);

/// K.csv, P.csv, Y.csv, optional M.csv / F.csv and meta.json.
void save_synthesis(const std::filesystem::path& dir, const SynthesisResult& result,
                    const sdp::SolverSettings& settings, const std::string& data_hash);
SynthesisResult load_synthesis(const std::filesystem::path& dir);

}  // namespace ddlqr

#endif  // DDLQR_SYNTH_HPP
