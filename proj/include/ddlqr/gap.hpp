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
#ifndef DDLQR_GAP_HPP
#define DDLQR_GAP_HPP

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ddlqr/data.hpp"

namespace ddlqr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Outcome of the power-decay search sup_k ||gamma^{k/2} L^k|| rho^{-k}.
struct DecayEstimate {
    double tau = 1.0;
    int k_max = 0;          ///< last power examined
    bool tail_bounded = true;  ///< false when L is (numerically) defective and the cap was used
    std::string warning;
};

/// Default decay rate: midway between the spectral radius of sqrt(gamma) L and one.
double default_decay_rate(const MatrixXd& L, double gamma);

/**
 * Smallest tau with ||gamma^{k/2} L^k||_2 <= tau rho^k for all k >= 0.
 *
 * The search runs over k = 0..k_max, where k_max starts at 10 n / (1 - rho)
 * and is extended (up to 10^4) until the eigenvector bound
 * cond(V) (r / rho)^k on the remaining terms drops below the running maximum.
 * Pass k_max > 0 to force a fixed horizon. Throws InvalidInput when rho does
 * not exceed the spectral radius of sqrt(gamma) L or rho >= 1.
 */
DecayEstimate tau_decay_estimate(const MatrixXd& L, double gamma, double rho, int k_max = 0);
double tau_decay(const MatrixXd& L, double gamma, double rho, int k_max = 0);

/// Null-space component of G: Gbar = (I - X0^+ X0) G, so that G = X0^+ + Gbar.
/// Throws InvalidParameterization when X0 G differs from I.
MatrixXd null_split(const MatrixXd& G, const MatrixXd& X0);

struct GapInputs {
    MatrixXd U0;
    MatrixXd X0;
    MatrixXd D0;  ///< [U0; X0]; built from U0 and X0 when empty
    MatrixXd G;
    MatrixXd A;
    MatrixXd B;
    MatrixXd Kstar;
    MatrixXd Pstar;
    MatrixXd W;
    MatrixXd R;
    double gamma = 0.0;
    Snr snr;                     ///< linear SNR and how it was obtained
    std::optional<double> rho;   ///< default_decay_rate when absent
};

/// Every quantity entering the bound on ||P - P*||, kept for inspection.
struct GapBundle {
    double snr = 0.0;
    SnrMode snr_mode = SnrMode::oracle;
    double tau = 1.0;
    double tau_bar = 1.0;
    double rho = 0.0;
    MatrixXd Gbar;
    double Theta_norm = 0.0;
    MatrixXd L;
    double param_norm = 0.0;  ///< ||X0^+ + Gbar||_2
    double delta1 = 0.0;
    double delta2 = 0.0;
    double d = 0.0;
    double delta = 0.0;  ///< delta1 / delta2 when valid, +infinity otherwise
    bool valid = false;  ///< d < 1
    std::string warning;
};

GapBundle gap_bound(const GapInputs& in);

/// ||P - P*|| (||x0||^2 + gamma / (1 - gamma) |Tr W|). Throws InvalidInput unless 0 < gamma < 1.
double cost_gap_bound(const VectorXd& x0, double deltaP_norm, const MatrixXd& W, double gamma);

/// Flat key=value view of a bundle, in a fixed key order.
std::string to_record(const GapBundle& bundle);

}  // namespace ddlqr

#endif  // DDLQR_GAP_HPP
