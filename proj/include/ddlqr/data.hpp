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
#ifndef DDLQR_DATA_HPP
#define DDLQR_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ddlqr/rng.hpp"
#include "ddlqr/sys.hpp"

namespace ddlqr {

/// Relative singular-value cutoff for rank decisions and pseudoinverses.
inline constexpr double kRankThreshold = 1e-9;

/**
 * @brief One batch of input-state data.
 *
 * Columns are time samples: X0 = [x_0 .. x_{N-1}], X1 = [x_1 .. x_N],
 * U0 = [u_0 .. u_{N-1}]. Omega0 holds the noise that generated X1 when the
 * data came from a simulation; synthesis never reads it.
 */
struct DataSet {
    MatrixXd U0;
    MatrixXd X0;
    MatrixXd X1;
    std::optional<MatrixXd> Omega0;

    std::uint64_t seed = 0;
    double input_scale = 0.0;
    std::string source_hash;

    int N() const { return static_cast<int>(X0.cols()); }
    int n() const { return static_cast<int>(X0.rows()); }
    int m() const { return static_cast<int>(U0.rows()); }

    /// D0 = [U0; X0].
    MatrixXd D0() const;

    /// Throws InvalidInput on inconsistent column counts or row dimensions.
    void validate() const;
};

/// Least-squares model plus its residual X1 - [Bhat Ahat] D0.
struct IdentifiedModel {
    MatrixXd Ahat;
    MatrixXd Bhat;
    MatrixXd What;
    MatrixXd residual;
};

/// Simulates N steps of x_{k+1} = A x_k + B u_k + w_k with u_k = input_scale * v_k,
/// v_k ~ N(0, I). Noise for step k comes from rng.substream(0).substream(k), the
/// excitation from rng.substream(1).substream(k).
DataSet collect(const DiscreteLinearSystem& sys, int N, const VectorXd& x0, double input_scale,
                const CounterRng& rng);

struct RankReport {
    bool rich = false;
    int rank = 0;
    int required = 0;
    VectorXd singular_values;
};

/// Rich iff rank([U0; X0]) = n + m with the kRankThreshold cutoff. Never throws.
RankReport rank_check(const DataSet& ds);

/// [Bhat Ahat] = X1 D0^+. Throws RankDeficiency on deficient data.
/// What is left empty; see estimate_noise_cov.
IdentifiedModel least_squares_id(const DataSet& ds);

/// What = (1/N) sum_k w_k w_k' over the least-squares residuals, symmetrized.
MatrixXd estimate_noise_cov(const DataSet& ds, const IdentifiedModel& model);

enum class SnrMode { oracle, estimated };
std::string to_string(SnrMode mode);

struct Snr {
    double linear = 0.0;  ///< 1 / (||Omega0||_2 ||D0^+||_2)
    double db = 0.0;      ///< 20 log10(linear)
    SnrMode mode = SnrMode::oracle;
};

/// SNR from an explicit noise matrix. Omega = 0 gives +infinity.
Snr snr_from(const MatrixXd& Omega, const MatrixXd& D0, SnrMode mode = SnrMode::oracle);

/// Oracle mode when Omega0 is recorded, otherwise the least-squares residual
/// stands in for it and the result is labelled `estimated`.
Snr snr_measured(const DataSet& ds);

/// Directory with U0.csv, X0.csv, X1.csv, optional Omega0.csv and meta.json.
void save_dataset(const std::filesystem::path& dir, const DataSet& ds);
DataSet load_dataset(const std::filesystem::path& dir);

}  // namespace ddlqr

#endif  // DDLQR_DATA_HPP
