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
#include "ddlqr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kCalibrationSteps = 60;
constexpr std::uint64_t kControllerBranch = 1000;

// Dataset for one seed: x0 from the configured distribution, then the
// standard collection protocol.
DataSet bench_data(const BenchConfig& cfg, const DiscreteLinearSystem& sys, std::uint64_t seed) {
    const CounterRng rng(seed);
    CounterRng start = rng.substream(2);
    const VectorXd x0 = cfg.x0_dist.sample(start);
    return collect(sys, cfg.N, x0, cfg.input_scale, rng);
}

double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double oracle_snr_db(const DataSet& ds) {
    return snr_from(*ds.Omega0, ds.D0(), SnrMode::oracle).db;
}

struct CellResult {
    ControllerOutcome outcome;
    double seconds = 0.0;
};

SynthesisResult design(const BenchMethod& bm, const DiscreteLinearSystem& sys, const DataSet& ds,
                       const BenchConfig& cfg) {
    const MatrixXd W = cfg.design_noise == DesignNoise::truth ? sys.W : MatrixXd();
    switch (bm.method) {
        case Method::model:
            return synth_model_based(sys.A, sys.B, cfg.spec, sys.W, cfg.solver);
        case Method::indirect_ce:
            return synth_indirect_ce(ds, cfg.spec, W, cfg.solver);
        case Method::direct_ce:
            return synth_direct_ce(ds, cfg.spec, W, 0.0, cfg.solver);
        case Method::direct_ce_reg:
            return synth_direct_ce(ds, cfg.spec, W, bm.reg_weight, cfg.solver);
        case Method::robust_direct:
            return synth_robust_direct(ds, cfg.spec, W, cfg.solver);
    }
    throw InvalidInput("unknown method");
}

ControllerOutcome evaluate(const BenchMethod& bm, const DiscreteLinearSystem& sys,
                           const DataSet& ds, const BenchConfig& cfg, const CounterRng& rollouts) {
    ControllerOutcome out;
    SynthesisResult res;
    try {
        res = design(bm, sys, ds, cfg);
    } catch (const std::exception& e) {
        out.failure = FailureKind::solver_numerical;
        out.message = e.what();
        return out;
    }
    out.failure = res.ok() ? FailureKind::none : res.failure;
    out.message = res.message;
    if (out.failure != FailureKind::none) return out;
    out.alpha = res.alpha;
    out.spectral_radius = linalg::spectral_radius(sys.A + sys.B * res.K);
    out.unstable = !(out.spectral_radius < 1.0);
    if (out.unstable) return out;

    double total = 0.0;
    for (int j = 0; j < cfg.N_S; ++j) {
        const CounterRng sim = rollouts.substream(static_cast<std::uint64_t>(j));
        CounterRng start = sim.substream(0);
        const VectorXd x0 = cfg.x0_dist.sample(start);
        // N_P sample points: x_0 .. x_{N_P - 1}.
        const Trajectory traj = simulate(sys, res.K, x0, cfg.N_P - 1, sim.substream(1));
        total += empirical_cost(traj, cfg.spec, res.K, false);
    }
    out.mean_cost = total / (static_cast<double>(cfg.N_S) * cfg.N_P);
    return out;
}

template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next++; i < count; i = next++) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

DiscreteLinearSystem bench_plant(const BenchConfig& cfg, double r) {
    return discretize(quarter_car(r, cfg.car, cfg.noise_model), cfg.Ts, cfg.discretization);
}

double median_snr_db(const BenchConfig& cfg, double r, int seeds, std::uint64_t seed) {
    const DiscreteLinearSystem sys = bench_plant(cfg, r);
    std::vector<double> values;
    for (int j = 0; j < seeds; ++j) {
        try {
            values.push_back(oracle_snr_db(bench_data(cfg, sys, derive_seed(seed, static_cast<std::uint64_t>(j)))));
        } catch (const InvalidInput&) {
            values.push_back(-std::numeric_limits<double>::infinity());
        }
    }
    return median(values);
}

Calibration calibrate_noise(const BenchConfig& cfg, double target_db, int seeds,
                            std::uint64_t seed) {
    if (!std::isfinite(target_db)) {
        throw InvalidInput("calibrate_noise: target SNR must be finite");
    }
    if (seeds < 1) throw InvalidInput("calibrate_noise: need at least one seed");
    Calibration cal;
    auto probe = [&](double log_r) {
        ++cal.steps;
        const double r = std::pow(10.0, log_r);
        const double snr = median_snr_db(cfg, r, seeds, seed);
        if (std::abs(snr - target_db) <= 1.0) {
            cal.r = r;
            cal.snr_db = snr;
            return true;
        }
        return false;
    };
    // SNR falls as r grows: lo must sit above the target, hi below it.
    double lo = -12.0;
    double hi = 0.0;
    double snr_lo = kNaN;
    double snr_hi = kNaN;
    auto measure = [&](double log_r, double& snr) {
        if (probe(log_r)) return true;
        snr = median_snr_db(cfg, std::pow(10.0, log_r), seeds, seed);
        return false;
    };
    if (measure(lo, snr_lo)) return cal;
    while (!(snr_lo > target_db)) {
        if (cal.steps >= kCalibrationSteps) break;
        lo -= 1.0;
        if (measure(lo, snr_lo)) return cal;
    }
    if (measure(hi, snr_hi)) return cal;
    while (!(snr_hi < target_db)) {
        if (cal.steps >= kCalibrationSteps) break;
        hi += 1.0;
        if (measure(hi, snr_hi)) return cal;
    }
    if (!(snr_lo > target_db) || !(snr_hi < target_db)) {
        throw ConvergenceError("calibrate_noise: no bracket for " + io::format_double(target_db) +
                               " dB within " + std::to_string(kCalibrationSteps) +
                               " steps (SNR spans " + io::format_double(snr_hi) + " to " +
                               io::format_double(snr_lo) + " dB)");
    }
    while (cal.steps < kCalibrationSteps) {
        const double mid = 0.5 * (lo + hi);
        double snr_mid = kNaN;
        if (measure(mid, snr_mid)) return cal;
        if (snr_mid > target_db) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw ConvergenceError("calibrate_noise: no r within 1 dB of " + io::format_double(target_db) +
                           " dB after " + std::to_string(kCalibrationSteps) + " steps");
}

std::string method_label(const BenchMethod& m) {
    if (m.method == Method::direct_ce_reg) {
        return "direct_ce_reg(" + io::format_double(m.reg_weight) + ")";
    }
    return to_string(m.method);
}

BenchReport run_benchmark(const BenchConfig& cfg, int workers) {
    cfg.validate();
    const int levels = cfg.levels();
    const int methods = static_cast<int>(cfg.methods.size());
    const bool by_snr = cfg.r_values.empty();

    struct Level {
        std::uint64_t seed = 0;
        double target = kNaN;
        double r = kNaN;
        bool ok = false;
        DiscreteLinearSystem sys;
        std::vector<double> snr;  // per controller
    };
    std::vector<Level> lv(static_cast<std::size_t>(levels));
    parallel_for(levels, workers, [&](int i) {
        Level& L = lv[static_cast<std::size_t>(i)];
        L.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        try {
            if (by_snr) {
                L.target = cfg.snr_targets_db[static_cast<std::size_t>(i)];
                L.r = calibrate_noise(cfg, L.target, cfg.calibration_seeds, derive_seed(L.seed, 0)).r;
            } else {
                L.r = cfg.r_values[static_cast<std::size_t>(i)];
            }
            L.sys = bench_plant(cfg, L.r);
            L.ok = true;
        } catch (const std::exception&) {
            L.ok = false;
        }
        L.snr.assign(static_cast<std::size_t>(cfg.N_K), kNaN);
    });

    // One task per (level, controller): the dataset is shared by every method.
    const int tasks = levels * cfg.N_K;
    std::vector<CellResult> cells(static_cast<std::size_t>(tasks * methods));
    parallel_for(tasks, workers, [&](int t) {
        const int i = t / cfg.N_K;
        const int c = t % cfg.N_K;
        Level& L = lv[static_cast<std::size_t>(i)];
        auto cell = [&](int k) -> CellResult& {
            return cells[static_cast<std::size_t>(t * methods + k)];
        };
        if (!L.ok) {
            for (int k = 0; k < methods; ++k) {
                cell(k).outcome.failure = FailureKind::solver_numerical;
                cell(k).outcome.message = "noise calibration failed";
            }
            return;
        }
        const std::uint64_t ctrl_seed = derive_seed(L.seed, kControllerBranch + static_cast<std::uint64_t>(c));
        const CounterRng ctrl(ctrl_seed);
        DataSet ds;
        try {
            ds = bench_data(cfg, L.sys, ctrl.substream(0).key());
        } catch (const std::exception& e) {
            for (int k = 0; k < methods; ++k) {
                cell(k).outcome.failure = FailureKind::solver_numerical;
                cell(k).outcome.message = std::string("data collection failed: ") + e.what();
            }
            return;
        }
        const double snr = oracle_snr_db(ds);
        L.snr[static_cast<std::size_t>(c)] = snr;
        for (int k = 0; k < methods; ++k) {
            const auto start = std::chrono::steady_clock::now();
            CellResult& out = cell(k);
            out.outcome = evaluate(cfg.methods[static_cast<std::size_t>(k)], L.sys, ds, cfg, ctrl.substream(1));
            out.outcome.snr_db = snr;
            out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    });

    BenchReport report;
    for (int i = 0; i < levels; ++i) {
        const Level& L = lv[static_cast<std::size_t>(i)];
        const double achieved = L.ok ? median(L.snr) : kNaN;
        for (int k = 0; k < methods; ++k) {
            BenchRow row;
            row.method = method_label(cfg.methods[static_cast<std::size_t>(k)]);
            row.snr_target_db = L.target;
            row.snr_achieved_db = achieved;
            row.r = L.r;
            row.seed = L.seed;
            row.n_designed = L.ok ? cfg.N_K : 0;
            double cost_sum = 0.0;
            double alpha_sum = 0.0;
            int good = 0;
            int alphas = 0;
            for (int c = 0; c < cfg.N_K; ++c) {
                const CellResult& cr = cells[static_cast<std::size_t>((i * cfg.N_K + c) * methods + k)];
                row.controllers.push_back(cr.outcome);
                if (cfg.timing) row.wall_time_s += cr.seconds;
                if (!L.ok) continue;
                switch (cr.outcome.failure) {
                    case FailureKind::solver_infeasible:
                    case FailureKind::solver_numerical:
                        ++row.n_fail_solver;
                        continue;
                    case FailureKind::extraction_conditioning:
                        ++row.n_fail_extract;
                        continue;
                    case FailureKind::none:
                        break;
                }
                if (cr.outcome.unstable) {
                    ++row.n_fail_unstable;
                    continue;
                }
                ++good;
                cost_sum += cr.outcome.mean_cost;
                if (cr.outcome.alpha) {
                    alpha_sum += *cr.outcome.alpha;
                    ++alphas;
                }
            }
            row.mean_cost = good > 0 ? cost_sum / good : kNaN;
            row.mean_alpha = alphas > 0 ? alpha_sum / alphas : kNaN;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

namespace {

const char* const kCsvHeader =
    "method,snr_target_db,snr_achieved_db,r,n_designed,n_fail_solver,n_fail_extract,"
    "n_fail_unstable,mean_cost,mean_alpha,wall_time_s,seed";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput("report CSV line " + std::to_string(line) + ": bad number '" + s + "'");
}

}  // namespace

std::string report_csv(const BenchReport& report) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const BenchRow& r : report.rows) {
        os << r.method << ',' << io::format_double(r.snr_target_db) << ','
           << io::format_double(r.snr_achieved_db) << ',' << io::format_double(r.r) << ','
           << r.n_designed << ',' << r.n_fail_solver << ',' << r.n_fail_extract << ','
           << r.n_fail_unstable << ',' << io::format_double(r.mean_cost) << ','
           << io::format_double(r.mean_alpha) << ',' << io::format_double(r.wall_time_s) << ','
           << r.seed << '\n';
    }
    return os.str();
}

BenchReport parse_report_csv(const std::string& text) {
    BenchReport report;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw InvalidInput("report CSV: missing or unexpected header");
    }
    ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 12) {
            throw InvalidInput("report CSV line " + std::to_string(lineno) + ": expected 12 fields");
        }
        BenchRow r;
        r.method = f[0];
        r.snr_target_db = parse_real(f[1], lineno);
        r.snr_achieved_db = parse_real(f[2], lineno);
        r.r = parse_real(f[3], lineno);
        r.n_designed = static_cast<int>(parse_real(f[4], lineno));
        r.n_fail_solver = static_cast<int>(parse_real(f[5], lineno));
        r.n_fail_extract = static_cast<int>(parse_real(f[6], lineno));
        r.n_fail_unstable = static_cast<int>(parse_real(f[7], lineno));
        r.mean_cost = parse_real(f[8], lineno);
        r.mean_alpha = parse_real(f[9], lineno);
        r.wall_time_s = parse_real(f[10], lineno);
        try {
            r.seed = std::stoull(f[11]);
        } catch (const std::exception&) {
            throw InvalidInput("report CSV line " + std::to_string(lineno) + ": bad seed");
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string report_text(const BenchReport& report) {
    const std::vector<std::string> head = {"method", "snr_target_db", "snr_achieved_db", "r",
                                           "n_designed", "n_f(solver/extract/unstable)",
                                           "mean_cost", "mean_alpha", "wall_time_s"};
    std::vector<std::vector<std::string>> cells;
    auto fixed = [](double v, int prec) {
        if (std::isnan(v)) return std::string("-");
        std::ostringstream os;
        os << std::setprecision(prec) << v;
        return os.str();
    };
    for (const BenchRow& r : report.rows) {
        cells.push_back({r.method, fixed(r.snr_target_db, 4), fixed(r.snr_achieved_db, 4),
                         fixed(r.r, 4), std::to_string(r.n_designed),
                         std::to_string(r.n_failures()) + " (" + std::to_string(r.n_fail_solver) +
                             "/" + std::to_string(r.n_fail_extract) + "/" +
                             std::to_string(r.n_fail_unstable) + ")",
                         fixed(r.mean_cost, 6), fixed(r.mean_alpha, 6), fixed(r.wall_time_s, 3)});
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t j = 0; j < head.size(); ++j) {
        width[j] = head[j].size();
        for (const auto& row : cells) width[j] = std::max(width[j], row[j].size());
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            os << (j == 0 ? "" : "  ") << std::left << std::setw(static_cast<int>(width[j])) << row[j];
        }
        os << '\n';
    };
    emit(head);
    for (const auto& row : cells) emit(row);

    // Pivot: one line per method, one "alpha, J, n_f" cell per noise level.
    std::vector<std::string> methods;
    std::vector<double> levels;
    for (const BenchRow& r : report.rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        const double key = std::isnan(r.snr_target_db) ? r.r : r.snr_target_db;
        if (std::find(levels.begin(), levels.end(), key) == levels.end()) levels.push_back(key);
    }
    if (!report.rows.empty()) {
        os << '\n' << "method";
        for (double l : levels) os << " | " << fixed(l, 4) << (std::isnan(report.rows[0].snr_target_db) ? " (r)" : " dB");
        os << '\n';
        for (const std::string& m : methods) {
            os << m;
            for (double l : levels) {
                os << " | ";
                for (const BenchRow& r : report.rows) {
                    const double key = std::isnan(r.snr_target_db) ? r.r : r.snr_target_db;
                    if (r.method == m && key == l) {
                        os << fixed(r.mean_alpha, 5) << ", " << fixed(r.mean_cost, 5) << ", " << r.n_failures();
                    }
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

std::filesystem::path emit_tables(const BenchReport& report, const std::filesystem::path& dir,
                                  TableFormat format) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / (format == TableFormat::csv ? "report.csv" : "report.txt");
    io::write_text(path, format == TableFormat::csv ? report_csv(report) : report_text(report));
    return path;
}

}  // namespace ddlqr
