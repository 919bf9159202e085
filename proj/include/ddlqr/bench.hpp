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
#ifndef DDLQR_BENCH_HPP
#define DDLQR_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ddlqr/data.hpp"
#include "ddlqr/sdp.hpp"
#include "ddlqr/synth.hpp"
#include "ddlqr/sys.hpp"

namespace ddlqr {

/// A synthesis method as it appears in a benchmark sweep.
struct BenchMethod {
    Method method = Method::robust_direct;
    double reg_weight = 0.0;  ///< used by direct_ce_reg only
};

/// Which noise covariance the data-driven syntheses are given.
enum class DesignNoise { truth, estimated };
DesignNoise parse_design_noise(const std::string& name);
std::string to_string(DesignNoise mode);

/**
 * Monte Carlo protocol on the quarter-car plant.
 *
 * Config files are `key = value` lines with `#` comments; list values are
 * comma separated. Keys (all optional, defaults in brackets):
 *   sprung_mass [240]  unsprung_mass [36]  damping [980]  spring [16000]
 *   tire_stiffness [160000]  Ts [0.01]  discretization [zoh]
 *   noise_model [proportional]  Q [1,1,1,1] (diagonal)  R [1] (diagonal)
 *   gamma [0.9999]  N [10]  N_K [20]  N_S [50]  N_P [150]  input_scale [10]
 *   x0_mean [0.3,-4,0.1,-1]  x0_cov [0.0006] (scalar times I, or a diagonal)
 *   snr_targets_db [50]  r_values (explicit noise levels, replaces SNR targets)
 *   methods [model,robust_direct]  reg_weight [0.01]  design_noise [truth]
 *   seed [1]  tol_feas [1e-8]  tol_gap [1e-8]  max_iter [200]
 *   calibration_seeds [10]  timing [on]
 * Unknown keys, repeated keys and malformed values raise InvalidInput.
 */
struct BenchConfig {
    QuarterCarParams car;
    double Ts = 0.01;
    Discretization discretization = Discretization::zoh;
    QuarterCarNoise noise_model = QuarterCarNoise::proportional;
    CostSpec spec;
    int N = 10;
    int N_K = 20;
    int N_S = 50;
    int N_P = 150;
    double input_scale = 10.0;
    InitialCondition x0_dist;
    std::vector<double> snr_targets_db;
    std::vector<double> r_values;
    std::vector<BenchMethod> methods;
    DesignNoise design_noise = DesignNoise::truth;
    std::uint64_t seed = 1;
    sdp::SolverSettings solver;
    int calibration_seeds = 10;
    bool timing = true;  ///< off: wall times are reported as 0 so output is byte-stable

    BenchConfig();
    /// Throws InvalidInput for empty methods, non-positive counts, missing or
    /// conflicting noise levels, non-finite SNR targets or r <= 0.
    void validate() const;
    /// Number of sweep cells (noise levels).
    int levels() const;
};

BenchConfig parse_bench_config(const std::string& text, const std::string& origin = "<config>");
BenchConfig load_bench_config(const std::filesystem::path& path);

struct Calibration {
    double r = 0.0;
    double snr_db = 0.0;  ///< median oracle SNR at r
    int steps = 0;
};

/// Discrete quarter-car plant at noise level r under the config's model.
DiscreteLinearSystem bench_plant(const BenchConfig& cfg, double r);

/// Median oracle-mode SNR (dB) over `seeds` datasets collected at noise level r.
double median_snr_db(const BenchConfig& cfg, double r, int seeds, std::uint64_t seed);

/**
 * Bisection on log r until the median oracle SNR over `seeds` datasets is
 * within 1 dB of `target_db`. The bracket starts at [1e-12, 1] and is widened
 * by decades when needed; every widening or halving counts as one of at most
 * 60 steps. Throws InvalidInput for a non-finite target and ConvergenceError
 * when no bracket or no 1 dB hit is found.
 */
Calibration calibrate_noise(const BenchConfig& cfg, double target_db, int seeds,
                            std::uint64_t seed);

/// Per-controller outcome, kept so callers can audit a table cell.
struct ControllerOutcome {
    FailureKind failure = FailureKind::none;
    bool unstable = false;
    double spectral_radius = 0.0;
    double snr_db = 0.0;
    double mean_cost = 0.0;  ///< per-sample cost averaged over the N_S rollouts
    std::optional<double> alpha;
    std::string message;
};

struct BenchRow {
    std::string method;
    double snr_target_db = 0.0;  ///< nan when the sweep used explicit r values
    double snr_achieved_db = 0.0;
    double r = 0.0;
    int n_designed = 0;
    int n_fail_solver = 0;
    int n_fail_extract = 0;
    int n_fail_unstable = 0;
    double mean_cost = 0.0;   ///< nan when every design failed
    double mean_alpha = 0.0;  ///< nan for methods without alpha
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<ControllerOutcome> controllers;

    int n_failures() const { return n_fail_solver + n_fail_extract + n_fail_unstable; }
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

/// Label used in tables: the method name, with the weight for direct_ce_reg.
std::string method_label(const BenchMethod& m);

/**
 * Runs the sweep. The seed tree is root -> level i (derive_seed(root, i)) ->
 * controller c (derive_seed(level, 1000 + c)) -> {data: substream 0,
 * rollout j: substream 1 then j}; calibration draws from derive_seed(level, 0).
 * Data and rollouts do not depend on the method, so every method sees the
 * same datasets and the same rollout noise. Work is spread over `workers`
 * threads; the report does not depend on the worker count.
 */
BenchReport run_benchmark(const BenchConfig& cfg, int workers = 1);

enum class TableFormat { csv, text };

std::string report_csv(const BenchReport& report);
std::string report_text(const BenchReport& report);
/// Inverse of report_csv (controller details are not part of the CSV).
BenchReport parse_report_csv(const std::string& text);
/// Writes report.csv or report.txt under `dir` and returns the path.
std::filesystem::path emit_tables(const BenchReport& report, const std::filesystem::path& dir,
                                  TableFormat format);

}  // namespace ddlqr

#endif  // DDLQR_BENCH_HPP
