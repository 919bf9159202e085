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
#include "ddlqr/gap.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr {

namespace {

constexpr int kPowerCap = 10000;
// Eigenvector matrices worse conditioned than this are treated as defective.
constexpr double kDefectiveCondition = 1e12;

double eigenvector_condition(const MatrixXd& M) {
    Eigen::EigenSolver<MatrixXd> es(M);
    if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(es.eigenvectors());
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

}  // namespace

double default_decay_rate(const MatrixXd& L, double gamma) {
    return 0.5 * (1.0 + linalg::spectral_radius(std::sqrt(gamma) * L));
}

DecayEstimate tau_decay_estimate(const MatrixXd& L, double gamma, double rho, int k_max) {
    if (L.rows() != L.cols() || L.size() == 0) {
        throw InvalidInput("tau_decay: L must be square and nonempty");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw InvalidInput("tau_decay: gamma must lie in (0, 1]");
    }
    const MatrixXd Lg = std::sqrt(gamma) * L;
    const double radius = linalg::spectral_radius(Lg);
    // rho equal to the radius still gives a finite sup for diagonalizable L
    // (every normal L with rho = radius has tau = 1), so only rho strictly
    // below the radius is rejected.
    if (!(rho > 0.0 && rho < 1.0) || rho < radius * (1.0 - 1e-12)) {
        throw InvalidInput("tau_decay: need spectral radius of sqrt(gamma) L (" +
                           io::format_double(radius) + ") <= rho < 1, got rho = " +
                           io::format_double(rho));
    }

    const int n = static_cast<int>(L.rows());
    const double kappa = radius == 0.0 ? 1.0 : eigenvector_condition(Lg);
    const double ratio = radius / rho;
    const bool fixed = k_max > 0;
    int horizon = fixed ? k_max
                        : std::min(kPowerCap, static_cast<int>(std::ceil(10.0 * n / (1.0 - rho))));

    DecayEstimate est;
    // Powers of a nilpotent matrix vanish after n steps.
    if (radius == 0.0 && !fixed) horizon = std::max(horizon, n);

    // Remaining terms are bounded by kappa * ratio^k; the smallest k at which
    // that bound falls below the running maximum closes the search.
    auto tail_start = [&](double current) -> double {
        if (radius == 0.0) return static_cast<double>(n);
        if (!std::isfinite(kappa) || kappa > kDefectiveCondition) return std::numeric_limits<double>::infinity();
        if (kappa <= current) return 0.0;
        if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
        return std::ceil(std::log(current / kappa) / std::log(ratio));
    };

    const MatrixXd step = Lg / rho;
    MatrixXd power = MatrixXd::Identity(n, n);
    double tau = 1.0;
    int k = 0;
    while (true) {
        if (k >= horizon) {
            if (fixed) break;
            const double need = tail_start(tau);
            if (need <= k) break;
            if (k >= kPowerCap) break;
            horizon = static_cast<int>(std::min<double>(kPowerCap, need));
        }
        ++k;
        power = power * step;
        tau = std::max(tau, linalg::norm2(power));
    }
    est.tau = tau;
    est.k_max = k;
    est.tail_bounded = tail_start(tau) <= k;
    if (!est.tail_bounded) {
        est.warning = fixed ? "tau_decay: fixed horizon " + std::to_string(k) +
                                  " does not certify the tail"
                            : "tau_decay: L is defective or rho is at the spectral radius; "
                              "search capped at k = " + std::to_string(k);
    }
    return est;
}

double tau_decay(const MatrixXd& L, double gamma, double rho, int k_max) {
    return tau_decay_estimate(L, gamma, rho, k_max).tau;
}

MatrixXd null_split(const MatrixXd& G, const MatrixXd& X0) {
    if (G.rows() != X0.cols() || G.cols() != X0.rows()) {
        throw InvalidInput("null_split: G must be N x n for an n x N X0");
    }
    const int n = static_cast<int>(X0.rows());
    const double scale = std::max(1.0, linalg::norm2(X0) * linalg::norm2(G));
    const double violation = (X0 * G - MatrixXd::Identity(n, n)).norm();
    if (!(violation <= 1e-6 * scale)) {
        throw InvalidParameterization("null_split: X0 G differs from I by " +
                                      io::format_double(violation) +
                                      " (Frobenius); G is not a data parameterization");
    }
    const MatrixXd X0pinv = linalg::pinv(X0, kRankThreshold);
    const MatrixXd Gbar = G - X0pinv * (X0 * G);
    // G = X0^+ + Gbar follows from X0 G = I; confirm it numerically.
    const double split_error = (X0pinv + Gbar - G).norm();
    if (!(split_error <= 1e-6 * std::max(1.0, G.norm()))) {
        throw InvalidParameterization("null_split: G - X0^+ leaves the null space of X0 (error " +
                                      io::format_double(split_error) + ")");
    }
    return Gbar;
}

GapBundle gap_bound(const GapInputs& in) {
    const int n = static_cast<int>(in.A.rows());
    const int m = static_cast<int>(in.B.cols());
    linalg::require_shape(in.A, n, n, "A");
    linalg::require_shape(in.B, n, m, "B");
    linalg::require_shape(in.Kstar, m, n, "Kstar");
    linalg::require_shape(in.Pstar, n, n, "Pstar");
    linalg::require_shape(in.W, n, n, "W");
    linalg::require_shape(in.R, m, m, "R");
    if (in.X0.rows() != n || in.U0.rows() != m || in.U0.cols() != in.X0.cols()) {
        throw InvalidInput("gap_bound: U0 (m x N) and X0 (n x N) do not match the plant");
    }
    if (!(in.gamma > 0.0 && in.gamma < 1.0)) {
        throw InvalidInput("gap_bound: gamma must lie in (0, 1)");
    }
    if (!(in.snr.linear > 0.0)) {
        throw InvalidInput("gap_bound: SNR must be positive");
    }
    MatrixXd D0 = in.D0;
    if (D0.size() == 0) {
        D0.resize(m + n, in.X0.cols());
        D0 << in.U0, in.X0;
    }

    GapBundle out;
    out.snr = in.snr.linear;
    out.snr_mode = in.snr.mode;
    out.L = in.A + in.B * in.Kstar;
    out.rho = in.rho ? *in.rho : default_decay_rate(out.L, in.gamma);
    const DecayEstimate decay = tau_decay_estimate(out.L, in.gamma, out.rho);
    out.tau = decay.tau;
    out.warning = decay.warning;
    out.tau_bar = out.tau / (1.0 - out.rho * out.rho);

    MatrixXd Theta(n, n + m);
    Theta << in.A, in.B;
    out.Theta_norm = linalg::norm2(Theta);
    out.Gbar = null_split(in.G, in.X0);
    out.param_norm = linalg::norm2(linalg::pinv(in.X0, kRankThreshold) + out.Gbar);

    const double g = in.gamma;
    const double tb = out.tau_bar;
    const double p2 = out.param_norm * out.param_norm;
    const double inv_snr2 = std::isinf(out.snr) ? 0.0 : 1.0 / (out.snr * out.snr);
    const double d0_2 = std::pow(linalg::norm2(D0), 2);
    const double pstar = linalg::norm2(in.Pstar);
    const double l_norm = linalg::norm2(out.L);
    const double model_term = out.Theta_norm * out.Theta_norm + inv_snr2;
    const double trW = in.W.trace();

    out.delta1 = tb * p2 *
                     (std::pow(linalg::norm2(in.U0), 2) * linalg::norm2(in.R) +
                      2.0 * g * d0_2 * pstar * model_term + g * pstar * trW) +
                 tb * g * linalg::norm2(in.A) * pstar * l_norm;
    out.d = tb * g * p2 * (2.0 * d0_2 * model_term + trW) + tb * g * l_norm * l_norm;
    out.delta2 = 1.0 - out.d;
    out.valid = out.d < 1.0;
    out.delta = out.valid ? out.delta1 / out.delta2 : std::numeric_limits<double>::infinity();
    return out;
}

double cost_gap_bound(const VectorXd& x0, double deltaP_norm, const MatrixXd& W, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidInput("cost_gap_bound: gamma must lie in (0, 1)");
    }
    return deltaP_norm * (x0.squaredNorm() + gamma / (1.0 - gamma) * std::abs(W.trace()));
}

std::string to_record(const GapBundle& b) {
    std::ostringstream os;
    os << "snr=" << io::format_double(b.snr) << " snr_mode=" << to_string(b.snr_mode)
       << " tau=" << io::format_double(b.tau) << " tau_bar=" << io::format_double(b.tau_bar)
       << " rho=" << io::format_double(b.rho) << " theta_norm=" << io::format_double(b.Theta_norm)
       << " param_norm=" << io::format_double(b.param_norm)
       << " gbar_norm=" << io::format_double(linalg::norm2(b.Gbar))
       << " delta1=" << io::format_double(b.delta1) << " delta2=" << io::format_double(b.delta2)
       << " d=" << io::format_double(b.d) << " delta=" << io::format_double(b.delta)
       << " valid=" << (b.valid ? 1 : 0);
    return os.str();
}

}  // namespace ddlqr
