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
#include "ddlqr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddlqr/bench.hpp"
#include "ddlqr/data.hpp"
#include "ddlqr/errors.hpp"
#include "ddlqr/gap.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"
#include "ddlqr/mss.hpp"
#include "ddlqr/oracle.hpp"
#include "ddlqr/synth.hpp"
#include "ddlqr/sys.hpp"

namespace ddlqr::cli {

namespace fs = std::filesystem;

namespace {

/// Bad flag values, missing files and other problems the caller can fix.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The method ran but did not deliver (solver failure, failed certificate).
class MethodFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kCommandOrder = {"collect", "identify", "synth", "certify",
                                                "simulate", "gap",      "bench"};

const std::map<std::string, std::string> kCommandHelp = {
    {"collect", "Simulate an open-loop experiment and store the data matrices"},
    {"identify", "Least-squares estimate of (A, B) and the noise covariance"},
    {"synth", "Synthesize a discounted LQR gain"},
    {"certify", "Check the stability certificate of a stored solution"},
    {"simulate", "Closed-loop Monte Carlo rollouts of a gain"},
    {"gap", "Bound the distance between a learned and the optimal value matrix"},
    {"bench", "Run a Monte Carlo benchmark sweep"},
};

using Args = std::map<std::string, std::string>;

bool has(const Args& a, const std::string& flag) { return a.count(flag) > 0; }

const std::string& get(const Args& a, const std::string& flag) {
    auto it = a.find(flag);
    if (it == a.end()) throw UsageError(flag + " is required");
    return it->second;
}

int to_int(const std::string& flag, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size() && v >= INT32_MIN && v <= INT32_MAX) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(flag + ": expected an integer, got '" + text + "'");
}

std::uint64_t to_u64(const std::string& flag, const std::string& text) {
    try {
        std::size_t used = 0;
        if (!text.empty() && text[0] != '-') {
            const unsigned long long v = std::stoull(text, &used, 0);
            if (used == text.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw UsageError(flag + ": expected a non-negative integer, got '" + text + "'");
}

double to_double(const std::string& flag, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(flag + ": expected a finite number, got '" + text + "'");
}

int positive_int(const Args& a, const std::string& flag) {
    const int v = to_int(flag, get(a, flag));
    if (v < 1) throw UsageError(flag + ": must be at least 1");
    return v;
}

fs::path existing_dir(const Args& a, const std::string& flag) {
    fs::path p = get(a, flag);
    if (!fs::is_directory(p)) throw UsageError(flag + ": no such directory: " + p.string());
    return p;
}

fs::path existing_file(const Args& a, const std::string& flag) {
    fs::path p = get(a, flag);
    if (!fs::is_regular_file(p)) throw UsageError(flag + ": no such file: " + p.string());
    return p;
}

/// Square weight of size `dim`. A vector of length dim > 1 is read as a diagonal.
MatrixXd read_weight(const Args& a, const std::string& flag, int dim) {
    MatrixXd M = io::read_matrix(existing_file(a, flag));
    if (dim > 1 && std::min(M.rows(), M.cols()) == 1 && M.size() == dim) {
        return MatrixXd(M.reshaped().asDiagonal());
    }
    if (M.rows() != dim || M.cols() != dim) {
        throw UsageError(flag + ": expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                         " matrix or a diagonal of length " + std::to_string(dim) + ", got " +
                         std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
    return M;
}

VectorXd read_x0(const Args& a, int n) {
    if (!has(a, "--x0")) return VectorXd::Zero(n);
    MatrixXd M = io::read_matrix(existing_file(a, "--x0"));
    if (M.size() != n || std::min(M.rows(), M.cols()) != 1) {
        throw UsageError("--x0: expected a vector of length " + std::to_string(n));
    }
    return M.reshaped();
}

std::string matrix_hash(const MatrixXd& M) { return io::hex64(io::content_hash({&M})); }

/// FNV-1a 64 of raw text, matching the scheme used for matrix hashes.
std::string text_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) h = (h ^ ch) * 0x100000001b3ULL;
    return io::hex64(h);
}

/// Key=value pairs for the closing summary line. Spaces in values become underscores.
class Summary {
public:
    void add(const std::string& key, const std::string& value) {
        std::string v = value.empty() ? "-" : value;
        std::replace(v.begin(), v.end(), ' ', '_');
        pairs_.emplace_back(key, v);
    }
    void add(const std::string& key, double value) { add(key, io::format_double(value)); }
    void add(const std::string& key, int value) { add(key, std::to_string(value)); }
    void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
    void add(const std::string& key, const char* value) { add(key, std::string(value)); }

    std::string line(const std::string& command, const std::string& status, int code) const {
        std::ostringstream os;
        os << "ddlqr command=" << command << " status=" << status << " exit=" << code;
        for (const auto& [k, v] : pairs_) os << ' ' << k << '=' << v;
        return os.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

struct Context {
    const Args& args;
    std::ostream& out;
    std::ostream& err;
    Summary& summary;

    /// Human-readable "  key: value" line that also lands in the summary.
    template <typename T>
    void log(const std::string& key, const T& value) {
        summary.add(key, value);
        std::ostringstream os;
        if constexpr (std::is_same_v<T, double>) {
            os << io::format_double(value);
        } else if constexpr (std::is_same_v<T, bool>) {
            os << (value ? "true" : "false");
        } else {
            os << value;
        }
        out << "  " << key << ": " << os.str() << '\n';
    }
    void note(const std::string& text) { out << "  " << text << '\n'; }
};

// ---------------------------------------------------------------- cost spec

void save_cost(const fs::path& dir, const CostSpec& spec) {
    io::write_matrix(dir / "Q.csv", spec.Q);
    io::write_matrix(dir / "R.csv", spec.R);
    io::write_json(dir / "cost.json", nlohmann::json{{"gamma", spec.gamma}});
}

CostSpec load_cost(const fs::path& dir, const std::string& flag) {
    for (const char* name : {"Q.csv", "R.csv", "cost.json"}) {
        if (!fs::exists(dir / name)) {
            throw UsageError(flag + ": " + (dir / name).string() +
                             " is missing (solution directories are written by `synth`)");
        }
    }
    CostSpec spec;
    spec.Q = io::read_matrix(dir / "Q.csv");
    spec.R = io::read_matrix(dir / "R.csv");
    spec.gamma = io::read_json(dir / "cost.json").at("gamma").get<double>();
    spec.validate();
    return spec;
}

/// Data-side parameter G with K = U0 G and X0 G = I. Direct routes store it
/// through F and Y; for the others the least-norm solution of D0 G = [K; I] is used.
MatrixXd gain_parameter(const SynthesisResult& sol, const DataSet& ds) {
    if (sol.F && sol.Y.size() > 0) return sol.G();
    MatrixXd target(ds.m() + ds.n(), ds.n());
    target << sol.K, MatrixXd::Identity(ds.n(), ds.n());
    return linalg::pinv(ds.D0()) * target;
}

void check_gain_shape(const MatrixXd& K, int n, int m, const std::string& what) {
    if (K.rows() != m || K.cols() != n) {
        throw UsageError(what + ": gain is " + std::to_string(K.rows()) + "x" +
                         std::to_string(K.cols()) + ", the plant needs " + std::to_string(m) +
                         "x" + std::to_string(n));
    }
}

// ---------------------------------------------------------------- commands

void cmd_collect(Context& c) {
    const fs::path sys_dir = existing_dir(c.args, "--system");
    const int N = positive_int(c.args, "--n");
    const std::uint64_t seed = to_u64("--seed", get(c.args, "--seed"));
    const double scale = to_double("--input-scale", get(c.args, "--input-scale"));
    if (scale <= 0) throw UsageError("--input-scale: must be positive");
    const fs::path out = get(c.args, "--out");

    const DiscreteLinearSystem sys = load_system(sys_dir);
    const VectorXd x0 = read_x0(c.args, sys.n());
    c.log("system", sys_dir.string());
    c.log("N", N);
    c.log("seed", std::to_string(seed));
    c.log("input_scale", scale);

    DataSet ds = collect(sys, N, x0, scale, CounterRng(seed));
    ds.seed = seed;
    save_dataset(out, ds);
    const RankReport rank = rank_check(ds);
    c.log("rank", rank.rank);
    c.log("rich", rank.rich);
    c.log("snr_db", snr_measured(ds).db);
    c.log("data_hash", io::hex64(io::content_hash({&ds.U0, &ds.X0, &ds.X1})));
    c.log("out", out.string());
}

void cmd_identify(Context& c) {
    const fs::path data_dir = existing_dir(c.args, "--data");
    const fs::path out = get(c.args, "--out");
    const DataSet ds = load_dataset(data_dir);
    c.log("data", data_dir.string());
    c.log("N", ds.N());

    IdentifiedModel model = least_squares_id(ds);
    model.What = estimate_noise_cov(ds, model);
    fs::create_directories(out);
    io::write_matrix(out / "Ahat.csv", model.Ahat);
    io::write_matrix(out / "Bhat.csv", model.Bhat);
    io::write_matrix(out / "What.csv", model.What);
    const Snr snr = snr_from(model.residual, ds.D0(), SnrMode::estimated);
    const std::string hash = io::hex64(io::content_hash({&model.Ahat, &model.Bhat, &model.What}));
    io::write_json(out / "meta.json",
                   nlohmann::json{{"N", ds.N()},
                                  {"n", ds.n()},
                                  {"m", ds.m()},
                                  {"data_hash", io::hex64(io::content_hash({&ds.U0, &ds.X0, &ds.X1}))},
                                  {"residual_norm", model.residual.norm()},
                                  {"hash", hash}});
    c.log("residual_norm", model.residual.norm());
    c.log("snr_estimated_db", snr.db);
    c.log("model_hash", hash);
    c.log("out", out.string());
}

sdp::SolverSettings solver_settings(const Args& a) {
    sdp::SolverSettings s;
    if (has(a, "--tol-feas")) s.tol_feas = to_double("--tol-feas", get(a, "--tol-feas"));
    if (has(a, "--tol-gap")) s.tol_gap = to_double("--tol-gap", get(a, "--tol-gap"));
    if (has(a, "--max-iter")) s.max_iter = positive_int(a, "--max-iter");
    if (s.tol_feas <= 0 || s.tol_gap <= 0) throw UsageError("solver tolerances must be positive");
    return s;
}

void cmd_synth(Context& c) {
    Method method;
    try {
        method = parse_method(get(c.args, "--method"));
    } catch (const InvalidInput& e) {
        throw UsageError(std::string("--method: ") + e.what());
    }
    if (method == Method::model && !has(c.args, "--system")) {
        throw UsageError("--system is required for --method model (the model-based route needs the plant)");
    }
    if (method != Method::model && !has(c.args, "--data")) {
        throw UsageError("--data is required for --method " + to_string(method));
    }
    double reg_weight = 0.0;
    if (has(c.args, "--reg-weight")) {
        reg_weight = to_double("--reg-weight", get(c.args, "--reg-weight"));
        if (reg_weight < 0) throw UsageError("--reg-weight: must be non-negative");
        if (method == Method::direct_ce && reg_weight > 0) method = Method::direct_ce_reg;
    }
    const fs::path out = get(c.args, "--out");
    const sdp::SolverSettings settings = solver_settings(c.args);

    std::optional<DiscreteLinearSystem> sys;
    std::optional<DataSet> ds;
    if (has(c.args, "--system")) sys = load_system(existing_dir(c.args, "--system"));
    if (has(c.args, "--data")) ds = load_dataset(existing_dir(c.args, "--data"));
    if (sys && ds && (sys->n() != ds->n() || sys->m() != ds->m())) {
        throw UsageError("--system and --data disagree on the state or input dimension");
    }
    const int n = sys ? sys->n() : ds->n();
    const int m = sys ? sys->m() : ds->m();

    CostSpec spec;
    spec.Q = read_weight(c.args, "--q", n);
    spec.R = read_weight(c.args, "--r", m);
    spec.gamma = to_double("--gamma", get(c.args, "--gamma"));
    try {
        spec.validate_for(n, m);
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }

    c.log("method", to_string(method));
    c.log("gamma", spec.gamma);
    if (method == Method::direct_ce_reg) c.log("reg_weight", reg_weight);
    c.log("tol_feas", settings.tol_feas);

    // Noise covariance for the objective: the plant's when it is known,
    // otherwise the least-squares residual covariance of the data.
    MatrixXd W;
    std::string noise_source = "system";
    if (sys) {
        W = sys->W;
    } else if (method != Method::indirect_ce) {
        const IdentifiedModel model = least_squares_id(*ds);
        W = estimate_noise_cov(*ds, model);
        noise_source = "estimated";
    } else {
        noise_source = "estimated";
    }
    c.log("noise_source", noise_source);

    SynthesisResult res;
    switch (method) {
        case Method::model: res = synth_model_based(sys->A, sys->B, spec, W, settings); break;
        case Method::indirect_ce: res = synth_indirect_ce(*ds, spec, W, settings); break;
        case Method::direct_ce: res = synth_direct_ce(*ds, spec, W, 0.0, settings); break;
        case Method::direct_ce_reg: res = synth_direct_ce(*ds, spec, W, reg_weight, settings); break;
        case Method::robust_direct: res = synth_robust_direct(*ds, spec, W, settings); break;
    }
    if (noise_source == "estimated") res.noise_source = "estimated";

    const std::string data_hash =
        ds ? io::hex64(io::content_hash({&ds->U0, &ds->X0, &ds->X1})) : std::string();
    save_synthesis(out, res, settings, data_hash);
    save_cost(out, spec);

    c.log("solver_status", sdp::to_string(res.status));
    c.log("failure", to_string(res.failure));
    c.log("iterations", res.diag.iterations);
    c.log("out", out.string());
    if (!res.ok()) throw MethodFailure(to_string(method) + ": " + res.message);
    c.log("objective", res.objective);
    if (res.alpha) c.log("alpha", *res.alpha);
    c.log("gain_hash", matrix_hash(res.K));
    if (sys) c.log("spectral_radius", true_spectral_radius(sys->A, sys->B, res.K));
}

void cmd_certify(Context& c) {
    const fs::path sol_dir = existing_dir(c.args, "--solution");
    const DataSet ds = load_dataset(existing_dir(c.args, "--data"));
    std::optional<DiscreteLinearSystem> sys;
    if (has(c.args, "--system")) sys = load_system(existing_dir(c.args, "--system"));
    const SynthesisResult sol = load_synthesis(sol_dir);
    const CostSpec spec = load_cost(sol_dir, "--solution");
    c.log("solution", sol_dir.string());
    c.log("method", to_string(sol.method));
    if (!sol.ok()) throw MethodFailure("solution records a failed synthesis: " + sol.message);
    check_gain_shape(sol.K, ds.n(), ds.m(), "--solution");

    MatrixXd W = sol.W_used;
    if (W.size() == 0) W = sys ? sys->W : estimate_noise_cov(ds, least_squares_id(ds));
    const MatrixXd G = gain_parameter(sol, ds);
    const MssCertificate cert = mss_certificate(G, sol.P, ds.X1, ds.U0, W, spec);
    c.log("certificate_min_eig", cert.min_eig);
    c.log("certificate_tolerance", cert.tolerance);
    c.log("certificate_passes", cert.passes);
    c.log("gamma_floor_data", gamma_floor_data(G, sol.P, ds.X1, ds.U0, W, spec));
    if (sys) {
        check_gain_shape(sol.K, sys->n(), sys->m(), "--system");
        c.log("spectral_radius", true_spectral_radius(sys->A, sys->B, sol.K));
        const BellmanCertificate model_cert = bellman_certificate(sol.K, sol.P, sys->A, sys->B, spec);
        c.log("model_certificate_min_eig", model_cert.min_eig);
        c.log("gamma_floor_model",
              gamma_lower_bound_model(sys->A, sys->B, sol.K, sol.P, spec.Q, spec.R));
    }
    if (!cert.passes) throw MethodFailure("certificate violated: lambda_min = " + io::format_double(cert.min_eig));
}

void cmd_simulate(Context& c) {
    const DiscreteLinearSystem sys = load_system(existing_dir(c.args, "--system"));
    const MatrixXd K = io::read_matrix(existing_file(c.args, "--gain"));
    check_gain_shape(K, sys.n(), sys.m(), "--gain");
    const int steps = positive_int(c.args, "--steps");
    const int trials = positive_int(c.args, "--trials");
    const std::uint64_t seed = to_u64("--seed", get(c.args, "--seed"));
    const fs::path out = get(c.args, "--out");
    const VectorXd x0 = read_x0(c.args, sys.n());

    std::optional<CostSpec> spec;
    const bool any_cost = has(c.args, "--q") || has(c.args, "--r") || has(c.args, "--gamma");
    if (any_cost) {
        if (!(has(c.args, "--q") && has(c.args, "--r") && has(c.args, "--gamma"))) {
            throw UsageError("--q, --r and --gamma must be given together");
        }
        spec = CostSpec{read_weight(c.args, "--q", sys.n()), read_weight(c.args, "--r", sys.m()),
                        to_double("--gamma", get(c.args, "--gamma"))};
        try {
            spec->validate_for(sys.n(), sys.m());
        } catch (const InvalidInput& e) {
            throw UsageError(e.what());
        }
    }
    c.log("steps", steps);
    c.log("trials", trials);
    c.log("seed", std::to_string(seed));
    c.log("gain_hash", matrix_hash(K));

    std::ostringstream csv;
    csv << "trial,diverged,final_norm,mean_sq_norm" << (spec ? ",discounted_cost" : "") << '\n';
    const CounterRng root(seed);
    int diverged = 0;
    double msq_total = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Trajectory traj = simulate(sys, K, x0, steps, root.substream(static_cast<std::uint64_t>(t)));
        const double msq = traj.states.colwise().squaredNorm().mean();
        const double final_norm = traj.states.col(traj.states.cols() - 1).norm();
        diverged += traj.diverged ? 1 : 0;
        if (!traj.diverged) msq_total += msq;
        csv << t << ',' << (traj.diverged ? 1 : 0) << ',' << io::format_double(final_norm) << ','
            << io::format_double(msq);
        if (spec) csv << ',' << io::format_double(empirical_cost(traj, *spec, K, true));
        csv << '\n';
    }
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    io::write_text(out, csv.str());
    c.log("diverged", diverged);
    c.log("mean_sq_norm", trials > diverged ? msq_total / (trials - diverged)
                                            : std::numeric_limits<double>::quiet_NaN());
    c.log("out", out.string());
}

void cmd_gap(Context& c) {
    const DiscreteLinearSystem sys = load_system(existing_dir(c.args, "--system"));
    const DataSet ds = load_dataset(existing_dir(c.args, "--data"));
    const fs::path sol_dir = existing_dir(c.args, "--solution");
    const fs::path out = get(c.args, "--out");
    const SynthesisResult sol = load_synthesis(sol_dir);
    const CostSpec spec = load_cost(sol_dir, "--solution");
    if (!sol.ok()) throw MethodFailure("solution records a failed synthesis: " + sol.message);
    check_gain_shape(sol.K, sys.n(), sys.m(), "--solution");

    SnrMode mode = SnrMode::oracle;
    if (has(c.args, "--snr-mode")) {
        const std::string& s = get(c.args, "--snr-mode");
        if (s == "estimated") {
            mode = SnrMode::estimated;
        } else if (s != "oracle") {
            throw UsageError("--snr-mode: expected oracle or estimated, got '" + s + "'");
        }
    }

    const OptimalSolution opt = solve_discounted_dare(sys, spec);
    GapInputs in;
    in.U0 = ds.U0;
    in.X0 = ds.X0;
    in.G = gain_parameter(sol, ds);
    in.A = sys.A;
    in.B = sys.B;
    in.Kstar = opt.Kstar;
    in.Pstar = opt.Pstar;
    in.W = sys.W;
    in.R = spec.R;
    in.gamma = spec.gamma;
    if (mode == SnrMode::oracle && ds.Omega0) {
        in.snr = snr_from(*ds.Omega0, ds.D0(), SnrMode::oracle);
    } else {
        in.snr = snr_from(least_squares_id(ds).residual, ds.D0(), SnrMode::estimated);
    }
    if (has(c.args, "--rho")) in.rho = to_double("--rho", get(c.args, "--rho"));

    GapBundle gb;
    try {
        gb = gap_bound(in);
    } catch (const InvalidParameterization& e) {
        throw UsageError(std::string("--solution does not match --data: ") + e.what());
    }
    const double measured = linalg::norm2(sol.P - opt.Pstar);
    std::string record = to_record(gb);
    record += "\nmeasured_deltaP=" + io::format_double(measured) + "\n";
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    io::write_text(out, record);

    c.log("snr_mode", to_string(in.snr.mode));
    c.log("snr_db", in.snr.db);
    c.log("rho", gb.rho);
    c.log("d", gb.d);
    c.log("valid", gb.valid);
    c.log("delta", gb.delta);
    c.log("measured_deltaP", measured);
    if (!gb.warning.empty()) c.note("warning: " + gb.warning);
    c.log("out", out.string());
}

void cmd_bench(Context& c) {
    const fs::path cfg_path = existing_file(c.args, "--config");
    const fs::path out = get(c.args, "--out");
    int workers = 1;
    if (has(c.args, "--workers")) workers = positive_int(c.args, "--workers");
    std::string format = has(c.args, "--format") ? get(c.args, "--format") : "both";
    if (format != "csv" && format != "text" && format != "both") {
        throw UsageError("--format: expected csv, text or both, got '" + format + "'");
    }
    const BenchConfig cfg = load_bench_config(cfg_path);
    c.log("config", cfg_path.string());
    c.log("config_hash", text_hash(io::read_text(cfg_path)));
    c.log("seed", std::to_string(cfg.seed));
    c.log("levels", cfg.levels());
    c.log("methods", static_cast<int>(cfg.methods.size()));
    c.log("workers", workers);

    const BenchReport report = run_benchmark(cfg, workers);
    if (format != "text") c.log("csv", emit_tables(report, out, TableFormat::csv).string());
    if (format != "csv") c.log("table", emit_tables(report, out, TableFormat::text).string());
    int failures = 0;
    for (const BenchRow& row : report.rows) failures += row.n_failures();
    c.log("rows", static_cast<int>(report.rows.size()));
    c.log("failures", failures);
    c.out << report_text(report);
}

using Handler = void (*)(Context&);

Handler handler_for(const std::string& command) {
    static const std::map<std::string, Handler> table = {
        {"collect", cmd_collect},   {"identify", cmd_identify}, {"synth", cmd_synth},
        {"certify", cmd_certify},   {"simulate", cmd_simulate}, {"gap", cmd_gap},
        {"bench", cmd_bench},
    };
    return table.at(command);
}

/// Parser plus the storage its options write into.
struct Parser {
    std::unique_ptr<CLI::App> app;
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, CLI::App*> subs;
};

std::unique_ptr<Parser> build_parser() {
    auto p = std::make_unique<Parser>();
    p->app = std::make_unique<CLI::App>(
        "Discounted LQR synthesis from data: collection, identification, synthesis, "
        "certification, simulation, gap analysis and benchmarking.",
        "ddlqr");
    p->app->require_subcommand(1);
    p->app->footer("Exit codes: 0 success, 1 usage error, 2 method or solver failure, 3 internal error.");
    for (const std::string& cmd : kCommandOrder) {
        p->subs[cmd] = p->app->add_subcommand(cmd, kCommandHelp.at(cmd));
        p->values[cmd];
    }
    for (const FlagDoc& f : flag_registry()) {
        CLI::Option* opt = p->subs.at(f.command)->add_option(f.flag, p->values[f.command][f.flag], f.help);
        if (f.required) opt->required();
    }
    return p;
}

}  // namespace

const std::vector<FlagDoc>& flag_registry() {
    static const std::vector<FlagDoc> registry = {
        {"collect", "--system", "System directory (A.csv, B.csv, W.csv, meta.json)", true},
        {"collect", "--n", "Number of samples N", true},
        {"collect", "--seed", "Root seed of the experiment", true},
        {"collect", "--input-scale", "Standard deviation of the excitation input", true},
        {"collect", "--out", "Output data directory", true},
        {"collect", "--x0", "Initial state as a CSV vector (default: zero)", false},

        {"identify", "--data", "Data directory written by collect", true},
        {"identify", "--out", "Output directory for Ahat.csv, Bhat.csv, What.csv", true},

        {"synth", "--method", "model | ce | direct-ce | robust (canonical names also accepted)", true},
        {"synth", "--data", "Data directory (required for the data-driven methods)", false},
        {"synth", "--system", "System directory (required for model; supplies W when given)", false},
        {"synth", "--q", "State weight Q as a CSV matrix or diagonal", true},
        {"synth", "--r", "Input weight R as a CSV matrix or diagonal", true},
        {"synth", "--gamma", "Discount factor in (0, 1)", true},
        {"synth", "--reg-weight", "Regularization weight for direct-ce (default 0)", false},
        {"synth", "--out", "Output solution directory", true},
        {"synth", "--tol-feas", "Solver feasibility tolerance (default 1e-8)", false},
        {"synth", "--tol-gap", "Solver duality-gap tolerance (default 1e-8)", false},
        {"synth", "--max-iter", "Solver iteration limit (default 200)", false},

        {"certify", "--solution", "Solution directory written by synth", true},
        {"certify", "--data", "Data directory the solution was computed from", true},
        {"certify", "--system", "System directory for the true spectral radius and model certificate", false},

        {"simulate", "--system", "System directory", true},
        {"simulate", "--gain", "Gain K as a CSV matrix", true},
        {"simulate", "--steps", "Rollout length", true},
        {"simulate", "--trials", "Number of rollouts", true},
        {"simulate", "--seed", "Root seed; trial t uses substream t", true},
        {"simulate", "--out", "Output CSV with one row per trial", true},
        {"simulate", "--x0", "Initial state as a CSV vector (default: zero)", false},
        {"simulate", "--q", "State weight for the cost column", false},
        {"simulate", "--r", "Input weight for the cost column", false},
        {"simulate", "--gamma", "Discount factor for the cost column", false},

        {"gap", "--system", "System directory with the true (A, B, W)", true},
        {"gap", "--data", "Data directory the solution was computed from", true},
        {"gap", "--solution", "Solution directory written by synth", true},
        {"gap", "--rho", "Decay rate (default: midway between the spectral radius and 1)", false},
        {"gap", "--snr-mode", "oracle (uses recorded noise) | estimated (default oracle)", false},
        {"gap", "--out", "Output key=value record", true},

        {"bench", "--config", "Benchmark configuration file", true},
        {"bench", "--out", "Output directory for report.csv and report.txt", true},
        {"bench", "--workers", "Worker threads (default 1)", false},
        {"bench", "--format", "csv | text | both (default both)", false},
    };
    return registry;
}

std::vector<std::string> commands() { return kCommandOrder; }

std::vector<std::string> parser_flags(const std::string& command) {
    auto p = build_parser();
    auto it = p->subs.find(command);
    if (it == p->subs.end()) return {};
    std::vector<std::string> flags;
    for (const CLI::Option* opt : it->second->get_options()) {
        for (const std::string& name : opt->get_lnames()) {
            if (name != "help") flags.push_back("--" + name);
        }
    }
    return flags;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // Unknown flags are reported by name before CLI11 gets a chance to
    // complain about something else first (such as a missing required flag).
    for (std::size_t i = 1; i < args.size(); ++i) {
        const auto cmds = commands();
        if (std::find(cmds.begin(), cmds.end(), args[i]) == cmds.end()) continue;
        const auto known = parser_flags(args[i]);
        for (std::size_t j = i + 1; j < args.size(); ++j) {
            const std::string& tok = args[j];
            if (tok.rfind("--", 0) != 0 || tok == "--help") continue;
            const std::string name = tok.substr(0, tok.find('='));
            if (std::find(known.begin(), known.end(), name) == known.end()) {
                err << "error: unknown flag " << name << " for " << args[i] << '\n';
                out << Summary().line("none", "usage_error", kUserError) << '\n';
                return kUserError;
            }
        }
        break;
    }

    auto p = build_parser();
    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());  // CLI11 consumes a reversed vector
    try {
        p->app->parse(rest);
    } catch (const CLI::CallForHelp& e) {
        return p->app->exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return p->app->exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        out << Summary().line("none", "usage_error", kUserError) << '\n';
        return kUserError;
    }

    std::string command;
    for (const std::string& cmd : kCommandOrder) {
        if (p->subs.at(cmd)->parsed()) command = cmd;
    }
    Args parsed;
    for (const FlagDoc& f : flag_registry()) {
        if (f.command == command && p->subs.at(command)->count(f.flag) > 0) {
            parsed[f.flag] = p->values[command][f.flag];
        }
    }

    Summary summary;
    Context ctx{parsed, out, err, summary};
    out << "ddlqr " << command << '\n';
    int code = kOk;
    std::string status = "ok";
    try {
        handler_for(command)(ctx);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        code = kUserError;
        status = "usage_error";
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        code = kUserError;
        status = "usage_error";
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        code = kUserError;
        status = "usage_error";
    } catch (const MethodFailure& e) {
        err << "failure: " << e.what() << '\n';
        code = kMethodFailure;
        status = "method_failure";
    } catch (const RankDeficiency& e) {
        err << "failure: " << e.what() << '\n';
        code = kMethodFailure;
        status = "method_failure";
    } catch (const ConvergenceError& e) {
        err << "failure: " << e.what() << '\n';
        code = kMethodFailure;
        status = "method_failure";
    } catch (const ConditioningError& e) {
        err << "failure: " << e.what() << '\n';
        code = kMethodFailure;
        status = "method_failure";
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        code = kInternalError;
        status = "internal_error";
    }
    out << summary.line(command, status, code) << '\n';
    return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, out, err);
}

}  // namespace ddlqr::cli
