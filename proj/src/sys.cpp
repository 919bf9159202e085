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
#include "ddlqr/sys.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr {

namespace {

void require_covariance(const MatrixXd& W, int n, const std::string& what) {
    linalg::require_shape(W, n, n, what);
    if (!W.allFinite()) {
        throw InvalidInput(what + " has non-finite entries");
    }
    if (!linalg::is_symmetric(W, 1e-12)) {
        throw InvalidInput(what + " is not symmetric");
    }
    if (n > 0) {
        const double scale = linalg::norm2(W);
        if (linalg::min_eigenvalue(W) < -1e-12 * scale) {
            throw InvalidInput(what + " is not positive semidefinite");
        }
    }
}

}  // namespace

void DiscreteLinearSystem::validate() const {
    const int nx = n();
    if (nx <= 0) {
        throw InvalidInput("system must have at least one state");
    }
    linalg::require_shape(A, nx, nx, "A");
    if (B.rows() != nx || B.cols() <= 0) {
        throw InvalidInput("B must be " + std::to_string(nx) + "xm with m >= 1");
    }
    if (!A.allFinite() || !B.allFinite()) {
        throw InvalidInput("A and B must be finite");
    }
    require_covariance(W, nx, "W");
}

void ContinuousLinearSystem::validate() const {
    const int nx = n();
    if (nx <= 0) {
        throw InvalidInput("system must have at least one state");
    }
    linalg::require_shape(Ac, nx, nx, "Ac");
    if (Bc.rows() != nx || Bc.cols() <= 0) {
        throw InvalidInput("Bc must be " + std::to_string(nx) + "xm with m >= 1");
    }
    if (!Ac.allFinite() || !Bc.allFinite()) {
        throw InvalidInput("non-finite entries in Ac or Bc");
    }
    require_covariance(Wc, nx, "Wc");
}

void CostSpec::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidInput("discount factor must lie in (0, 1)");
    }
    if (Q.rows() == 0 || Q.rows() != Q.cols() || R.rows() == 0 || R.rows() != R.cols()) {
        throw InvalidInput("Q and R must be square and nonempty");
    }
    if (!Q.allFinite() || !R.allFinite()) {
        throw InvalidInput("Q and R must be finite");
    }
    if (!linalg::is_symmetric(Q, 1e-12) || linalg::min_eigenvalue(Q) <= 0.0) {
        throw InvalidInput("Q must be symmetric positive definite");
    }
    if (!linalg::is_symmetric(R, 1e-12) || linalg::min_eigenvalue(R) <= 0.0) {
        throw InvalidInput("R must be symmetric positive definite");
    }
}

void CostSpec::validate_for(int n, int m) const {
    validate();
    linalg::require_shape(Q, n, n, "Q");
    linalg::require_shape(R, m, m, "R");
}

void InitialCondition::validate() const {
    if (mean.size() == 0 || !mean.allFinite()) {
        throw InvalidInput("initial mean must be a finite nonempty vector");
    }
    require_covariance(cov, static_cast<int>(mean.size()), "initial covariance");
}

VectorXd InitialCondition::sample(CounterRng& rng) const {
    if (cov.isZero(0.0)) {
        return mean;
    }
    return mean + rng.gaussian(linalg::psd_sqrt(cov));
}

Discretization parse_discretization(const std::string& name) {
    if (name == "zoh") {
        return Discretization::zoh;
    }
    if (name == "euler") {
        return Discretization::euler;
    }
    throw InvalidInput("unknown discretization '" + name + "' (expected zoh or euler)");
}

std::string to_string(Discretization method) {
    return method == Discretization::zoh ? "zoh" : "euler";
}

DiscreteLinearSystem discretize(const ContinuousLinearSystem& cs, double Ts,
                                Discretization method) {
    if (!(Ts > 0.0) || !std::isfinite(Ts)) {
        throw InvalidInput("sampling time must be positive and finite");
    }
    cs.validate();
    const int n = cs.n();
    const int m = cs.m();
    DiscreteLinearSystem out;
    out.W = cs.Wc;
    if (method == Discretization::euler) {
        out.A = MatrixXd::Identity(n, n) + cs.Ac * Ts;
        out.B = cs.Bc * Ts;
        return out;
    }
    // exp([[Ac, Bc], [0, 0]] Ts) = [[Ad, Bd], [0, I]]
    MatrixXd aug = MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = cs.Ac * Ts;
    aug.topRightCorner(n, m) = cs.Bc * Ts;
    const MatrixXd E = aug.exp();
    out.A = E.topLeftCorner(n, n);
    out.B = E.topRightCorner(n, m);
    if (!out.A.allFinite() || !out.B.allFinite()) {
        throw InvalidInput("matrix exponential overflowed");
    }
    return out;
}

QuarterCarNoise parse_quarter_car_noise(const std::string& name) {
    if (name == "single_channel") {
        return QuarterCarNoise::single_channel;
    }
    if (name == "proportional") {
        return QuarterCarNoise::proportional;
    }
    throw InvalidInput("unknown noise model '" + name + "' (expected single_channel or proportional)");
}

std::string to_string(QuarterCarNoise model) {
    return model == QuarterCarNoise::single_channel ? "single_channel" : "proportional";
}

MatrixXd quarter_car_noise(double r, QuarterCarNoise model) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidInput("road-displacement variance r must be positive and finite");
    }
    Eigen::Vector4d diag;
    if (model == QuarterCarNoise::single_channel) {
        diag << 0.0001, 0.00001, r, 0.001;
    } else {
        diag << 0.1 * r, 0.01 * r, r, r;
    }
    return diag.asDiagonal();
}

ContinuousLinearSystem quarter_car(double r, const QuarterCarParams& p, QuarterCarNoise noise) {
    const double ms = p.sprung_mass;
    const double mu = p.unsprung_mass;
    const double bs = p.damping;
    const double ks = p.spring;
    const double kt = p.tire_stiffness;
    ContinuousLinearSystem cs;
    cs.Ac.resize(4, 4);
    // clang-format off
    cs.Ac <<  0.0,      1.0,      0.0,      -1.0,
             -ks / ms, -bs / ms,  0.0,       bs / ms,
              0.0,      0.0,      0.0,       1.0,
              ks / mu,  bs / mu, -kt / mu,  -bs / mu;
    // clang-format on
    cs.Bc.resize(4, 1);
    cs.Bc << 0.0, 1.0 / ms, 0.0, -1.0 / mu;
    cs.Wc = quarter_car_noise(r, noise);
    return cs;
}

Trajectory simulate(const DiscreteLinearSystem& sys, const MatrixXd& K, const VectorXd& x0,
                    int steps, const CounterRng& rng) {
    sys.validate();
    const int n = sys.n();
    const int m = sys.m();
    linalg::require_shape(K, m, n, "K");
    if (x0.size() != n) {
        throw InvalidInput("x0 must have " + std::to_string(n) + " entries");
    }
    if (steps < 1) {
        throw InvalidInput("steps must be >= 1");
    }
    const MatrixXd closed = sys.A + sys.B * K;
    const MatrixXd noise_factor = linalg::psd_sqrt(sys.W);
    const bool noiseless = sys.W.isZero(0.0);
    const CounterRng noise_root = rng.substream(0);

    Trajectory traj;
    traj.seed = rng.key();
    traj.states.resize(n, steps + 1);
    traj.inputs.resize(m, steps);
    traj.states.col(0) = x0;
    int k = 0;
    for (; k < steps; ++k) {
        const VectorXd x = traj.states.col(k);
        traj.inputs.col(k) = K * x;
        VectorXd next = closed * x;
        if (!noiseless) {
            CounterRng step_rng = noise_root.substream(static_cast<std::uint64_t>(k));
            next += step_rng.gaussian(noise_factor);
        }
        if (!next.allFinite() || next.norm() > kDivergenceGuard) {
            traj.diverged = true;
            break;
        }
        traj.states.col(k + 1) = next;
    }
    if (traj.diverged) {
        traj.states.conservativeResize(n, k + 1);
        traj.inputs.conservativeResize(m, k);
    }
    return traj;
}

double empirical_cost(const Trajectory& traj, const CostSpec& spec, const MatrixXd& K,
                      bool discounted) {
    if (traj.diverged) {
        return std::numeric_limits<double>::infinity();
    }
    const MatrixXd weight = spec.Q + K.transpose() * spec.R * K;
    double total = 0.0;
    double discount = 1.0;
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) {
        const auto x = traj.states.col(k);
        total += discount * x.dot(weight * x);
        if (discounted) {
            discount *= spec.gamma;
        }
    }
    return total;
}

void save_system(const std::filesystem::path& dir, const DiscreteLinearSystem& sys, double Ts,
                 const std::string& provenance) {
    sys.validate();
    std::filesystem::create_directories(dir);
    io::write_matrix(dir / "A.csv", sys.A);
    io::write_matrix(dir / "B.csv", sys.B);
    io::write_matrix(dir / "W.csv", sys.W);
    nlohmann::json meta{{"n", sys.n()},
                        {"m", sys.m()},
                        {"Ts", Ts},
                        {"provenance", provenance},
                        {"hash", io::hex64(io::content_hash({&sys.A, &sys.B, &sys.W}))}};
    io::write_json(dir / "meta.json", meta);
}

DiscreteLinearSystem load_system(const std::filesystem::path& dir) {
    DiscreteLinearSystem sys;
    sys.A = io::read_matrix(dir / "A.csv");
    sys.B = io::read_matrix(dir / "B.csv");
    sys.W = io::read_matrix(dir / "W.csv");
    if (std::filesystem::exists(dir / "meta.json")) {
        const auto meta = io::read_json(dir / "meta.json");
        if (meta.contains("n") && meta["n"].get<int>() != sys.n()) {
            throw InvalidInput(dir.string() + ": meta.json n disagrees with A.csv");
        }
        if (meta.contains("m") && meta["m"].get<int>() != sys.m()) {
            throw InvalidInput(dir.string() + ": meta.json m disagrees with B.csv");
        }
    }
    sys.validate();
    return sys;
}

}  // namespace ddlqr
