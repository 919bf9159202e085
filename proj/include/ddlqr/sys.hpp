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
#ifndef DDLQR_SYS_HPP
#define DDLQR_SYS_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "ddlqr/rng.hpp"

namespace ddlqr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// States beyond this Euclidean norm mark a trajectory as diverged.
inline constexpr double kDivergenceGuard = 1e12;

/**
 * @brief Discrete-time plant x_{k+1} = A x_k + B u_k + w_k, w_k ~ N(0, W).
 *
 * Ground truth for simulation and evaluation. Only the model-based
 * synthesis route ever reads A and B directly.
 */
struct DiscreteLinearSystem {
    MatrixXd A;
    MatrixXd B;
    MatrixXd W;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }

    /// Throws InvalidInput on shape mismatch, non-finite entries, or W not symmetric PSD.
    void validate() const;
};

/// Continuous-time plant dx = (Ac x + Bc u) dt + noise with covariance Wc.
struct ContinuousLinearSystem {
    MatrixXd Ac;
    MatrixXd Bc;
    MatrixXd Wc;

    int n() const { return static_cast<int>(Ac.rows()); }
    int m() const { return static_cast<int>(Bc.cols()); }
    void validate() const;
};

/// Discounted quadratic cost sum_k gamma^k (x'Qx + u'Ru).
struct CostSpec {
    MatrixXd Q;
    MatrixXd R;
    double gamma = 0.9999;

    /// Throws InvalidInput unless Q > 0, R > 0 and 0 < gamma < 1.
    void validate() const;
    void validate_for(int n, int m) const;
};

/// x0 ~ N(mean, cov). A zero covariance means a deterministic start.
struct InitialCondition {
    VectorXd mean;
    MatrixXd cov;

    void validate() const;
    VectorXd sample(CounterRng& rng) const;
};

/// States x_0..x_T as columns of an n x (T+1) matrix, inputs u_0..u_{T-1}.
/// A diverged trajectory is truncated at the first offending state.
struct Trajectory {
    MatrixXd states;
    MatrixXd inputs;
    std::uint64_t seed = 0;
    bool diverged = false;

    int steps() const { return static_cast<int>(inputs.cols()); }
};

enum class Discretization { zoh, euler };

Discretization parse_discretization(const std::string& name);
std::string to_string(Discretization method);

/// zoh: A = exp(Ac Ts), B = int_0^Ts exp(Ac s) ds Bc via the augmented exponential.
/// euler: A = I + Ac Ts, B = Bc Ts. W is carried over unchanged as the per-step covariance.
DiscreteLinearSystem discretize(const ContinuousLinearSystem& cs, double Ts,
                                Discretization method = Discretization::zoh);

struct QuarterCarParams {
    double sprung_mass = 240.0;     // kg
    double unsprung_mass = 36.0;    // kg
    double damping = 980.0;         // N s / m
    double spring = 16000.0;        // N / m
    double tire_stiffness = 160000.0;  // N / m
};

/// How the road-displacement variance r enters the noise covariance.
///   single_channel: W = diag(1e-4, 1e-5, r, 1e-3)
///   proportional:   W = r * diag(0.1, 0.01, 1, 1)  (equals `single_channel` at r = 1e-3)
enum class QuarterCarNoise { single_channel, proportional };

QuarterCarNoise parse_quarter_car_noise(const std::string& name);
std::string to_string(QuarterCarNoise model);

MatrixXd quarter_car_noise(double r, QuarterCarNoise model = QuarterCarNoise::single_channel);

/// Two-degree-of-freedom suspension with states (suspension deflection,
/// sprung-mass velocity, tire deflection, unsprung-mass velocity) and an
/// active force actuator. Throws InvalidInput for r <= 0.
ContinuousLinearSystem quarter_car(double r, const QuarterCarParams& params = {},
                                   QuarterCarNoise noise = QuarterCarNoise::single_channel);

/// Closed-loop rollout x_{k+1} = (A + B K) x_k + w_k for `steps` steps.
/// Step k draws its noise from rng.substream(0).substream(k).
Trajectory simulate(const DiscreteLinearSystem& sys, const MatrixXd& K, const VectorXd& x0,
                    int steps, const CounterRng& rng);

/// Sum over every stored state of x_k'(Q + K'RK)x_k, weighted by gamma^k when
/// `discounted`. Returns +infinity for a diverged trajectory.
double empirical_cost(const Trajectory& traj, const CostSpec& spec, const MatrixXd& K,
                      bool discounted);

/// Directory bundle: A.csv, B.csv, W.csv and meta.json {n, m, Ts, provenance}.
void save_system(const std::filesystem::path& dir, const DiscreteLinearSystem& sys, double Ts,
                 const std::string& provenance);
DiscreteLinearSystem load_system(const std::filesystem::path& dir);

}  // namespace ddlqr

#endif  // DDLQR_SYS_HPP
