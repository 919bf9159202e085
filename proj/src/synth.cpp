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
#include "ddlqr/synth.hpp"

#include <cmath>
#include <limits>

#include "ddlqr/errors.hpp"
#include "ddlqr/linalg.hpp"
#include "ddlqr/matrix_io.hpp"
#include "ddlqr/mss.hpp"
#include "ddlqr/oracle.hpp"

namespace ddlqr {

using sdp::AffineExpr;
using sdp::ConicProgram;

namespace {

using Grid = std::vector<std::vector<AffineExpr>>;

AffineExpr constant(const MatrixXd& M) { return AffineExpr::constant(M); }

AffineExpr zeros(Eigen::Index rows, Eigen::Index cols) {
    return AffineExpr::zeros(static_cast<int>(rows), static_cast<int>(cols));
}

MatrixXd inverse_spd(const MatrixXd& S, const std::string& what) {
    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
        throw InvalidInput(what + " must be positive definite");
    }
    return linalg::symmetrize(llt.solve(MatrixXd::Identity(S.rows(), S.cols())));
}

// Objective weight W^{-1}, normalized so its average eigenvalue is one; the
// argmax is unchanged and the solver sees O(1) objective coefficients.
struct TraceWeight {
    MatrixXd Winv;
    double scale = 1.0;  // Tr(W) / n
};

TraceWeight trace_weight(const MatrixXd& W, int n) {
    linalg::require_shape(W, n, n, "W");
    if (!linalg::is_symmetric(W, 1e-12)) {
        throw InvalidInput("W must be symmetric");
    }
    TraceWeight tw;
    tw.Winv = inverse_spd(W, "W (the noise covariance in the objective)");
    tw.scale = W.trace() / n;
    return tw;
}

// Schur-complement LMI shared by every method:
//   [ -Y      Y     Uterm'  Xterm'  ]
//   [  Y    -Q^-1   0       0       ]
//   [ Uterm   0    -R^-1    0       ]
//   [ Xterm   0     0      -Y/gamma ]
// with an optional fifth row/column [F 0 0 0 -(alpha/gamma) I].
Grid lmi_grid(const AffineExpr& Y, const AffineExpr& Uterm, const AffineExpr& Xterm,
              const CostSpec& spec, const MatrixXd& Qinv, const MatrixXd& Rinv,
              const AffineExpr* F = nullptr, const AffineExpr* alpha = nullptr) {
    const int n = Y.rows();
    const int m = Uterm.rows();
    const double ig = 1.0 / spec.gamma;
    Grid g = {
        {-Y, Y, Uterm.transpose(), Xterm.transpose()},
        {Y, constant(-Qinv), zeros(n, m), zeros(n, n)},
        {Uterm, zeros(m, n), constant(-Rinv), zeros(m, n)},
        {Xterm, zeros(n, n), zeros(n, m), -ig * Y},
    };
    if (F != nullptr && alpha != nullptr) {
        const int N = F->rows();
        const AffineExpr diag = (-ig) * AffineExpr::scaled_identity(*alpha, N);
        g[0].push_back(F->transpose());
        g[1].push_back(zeros(n, N));
        g[2].push_back(zeros(m, N));
        g[3].push_back(zeros(n, N));
        g.push_back({*F, zeros(N, n), zeros(N, m), zeros(N, n), diag});
    }
    return g;
}

MatrixXd dense_lmi(const MatrixXd& Y, const MatrixXd& Uterm, const MatrixXd& Xterm,
                   const CostSpec& spec, const MatrixXd* F, double alpha) {
    const Eigen::Index n = Y.rows();
    const Eigen::Index m = Uterm.rows();
    const Eigen::Index N = F != nullptr ? F->rows() : 0;
    const Eigen::Index side = 3 * n + m + N;
    MatrixXd L = MatrixXd::Zero(side, side);
    L.block(0, 0, n, n) = -Y;
    L.block(0, n, n, n) = Y;
    L.block(n, 0, n, n) = Y;
    L.block(n, n, n, n) = -inverse_spd(spec.Q, "Q");
    L.block(0, 2 * n, n, m) = Uterm.transpose();
    L.block(2 * n, 0, m, n) = Uterm;
    L.block(2 * n, 2 * n, m, m) = -inverse_spd(spec.R, "R");
    L.block(0, 2 * n + m, n, n) = Xterm.transpose();
    L.block(2 * n + m, 0, n, n) = Xterm;
    L.block(2 * n + m, 2 * n + m, n, n) = -Y / spec.gamma;
    if (F != nullptr) {
        L.block(0, 3 * n + m, n, N) = F->transpose();
        L.block(3 * n + m, 0, N, n) = *F;
        L.block(3 * n + m, 3 * n + m, N, N) = -(alpha / spec.gamma) * MatrixXd::Identity(N, N);
    }
    return L;
}

FailureKind failure_from_status(sdp::SolveStatus status) {
    switch (status) {
        case sdp::SolveStatus::optimal:
            return FailureKind::none;
        case sdp::SolveStatus::infeasible:
        case sdp::SolveStatus::unbounded:
            return FailureKind::solver_infeasible;
        default:
            return FailureKind::solver_numerical;
    }
}

// Copies solver information; returns false (with the failure filled in) unless optimal.
bool absorb_solution(SynthesisResult& res, const sdp::ConicSolution& sol) {
    res.status = sol.status;
    res.diag.solve_time = sol.solve_time;
    res.diag.iterations = sol.iterations;
    res.diag.primal_residual = sol.primal_residual;
    res.diag.dual_residual = sol.dual_residual;
    res.diag.duality_gap = sol.gap;
    res.failure = failure_from_status(sol.status);
    if (res.failure != FailureKind::none) {
        res.message = "solver returned " + sdp::to_string(sol.status);
        return false;
    }
    return true;
}

// The LMI, after congruence with P = Y^{-1}, reads
//   P - Q - K'RK - gamma L'PL - extra >= 0
// with L the closed loop the method believes in. Solver tolerances act on Y,
// so small negative values here are expected; a violation of order |P| means
// the program was infeasible and only the strictness margin let the solver
// stop at Y ~ eps I. Such results are reported as infeasible.
inline constexpr double kGrossViolation = 1e-2;

bool reject_spurious(SynthesisResult& res, const MatrixXd& L, const MatrixXd& K, const MatrixXd& extra,
                     const CostSpec& spec) {
    const MatrixXd S = res.P - spec.Q - K.transpose() * spec.R * K -
                       spec.gamma * L.transpose() * res.P * L - extra;
    const double lo = linalg::min_eigenvalue(linalg::symmetrize(S));
    const double scale = linalg::norm2(res.P);
    if (lo >= -kGrossViolation * scale) return false;
    res.failure = FailureKind::solver_infeasible;
    res.message = "solver stopped at the strictness margin; the certified inequality fails by " +
                  io::format_double(lo / scale) + " |P|";
    return true;
}

// K = Mfac Y^{-1} and P = Y^{-1} through a Cholesky factor of Y.
bool extract_gain(SynthesisResult& res, const MatrixXd& Y, const MatrixXd& Mfac) {
    res.Y = linalg::symmetrize(Y);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(res.Y, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    res.diag.condition_Y = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    Eigen::LLT<MatrixXd> llt(res.Y);
    if (!(res.diag.condition_Y <= kMaxConditionY) || llt.info() != Eigen::Success) {
        res.failure = FailureKind::extraction_conditioning;
        res.message = "Y is too ill-conditioned for gain extraction (condition number " +
                      io::format_double(res.diag.condition_Y) + ")";
        return false;
    }
    res.K = llt.solve(Mfac.transpose()).transpose();
    res.P = linalg::symmetrize(llt.solve(MatrixXd::Identity(Y.rows(), Y.cols())));
    return true;
}

MatrixXd resolve_noise(const DataSet& ds, const MatrixXd& W, std::string& source) {
    if (W.size() > 0) {
        source = "supplied";
        return W;
    }
    source = "estimated";
    return estimate_noise_cov(ds, least_squares_id(ds));
}

void require_rich(const DataSet& ds) {
    ds.validate();
    const RankReport rank = rank_check(ds);
    if (!rank.rich) {
        throw RankDeficiency(rank.rank, rank.required);
    }
}

// Orthonormal basis of the right null space of D0 (columns), empty when D0 has full column rank.
MatrixXd null_basis(const MatrixXd& D0) {
    Eigen::JacobiSVD<MatrixXd> svd(D0, Eigen::ComputeFullV);
    const VectorXd sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kRankThreshold * smax) ++rank;
    }
    return svd.matrixV().rightCols(D0.cols() - rank);
}

}  // namespace

Method parse_method(const std::string& name) {
    if (name == "model") return Method::model;
    if (name == "indirect_ce" || name == "ce") return Method::indirect_ce;
    if (name == "direct_ce" || name == "direct-ce") return Method::direct_ce;
    if (name == "direct_ce_reg" || name == "direct-ce-reg") return Method::direct_ce_reg;
    if (name == "robust_direct" || name == "robust") return Method::robust_direct;
    throw InvalidInput("unknown synthesis method '" + name +
                       "' (expected model, ce, direct-ce, direct-ce-reg or robust)");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::model:
            return "model";
        case Method::indirect_ce:
            return "indirect_ce";
        case Method::direct_ce:
            return "direct_ce";
        case Method::direct_ce_reg:
            return "direct_ce_reg";
        case Method::robust_direct:
            return "robust_direct";
    }
    return "unknown";
}

std::string to_string(FailureKind kind) {
    switch (kind) {
        case FailureKind::none:
            return "none";
        case FailureKind::solver_infeasible:
            return "solver_infeasible";
        case FailureKind::solver_numerical:
            return "solver_numerical";
        case FailureKind::extraction_conditioning:
            return "extraction_conditioning";
    }
    return "unknown";
}

MatrixXd SynthesisResult::G() const {
    if (!F || P.size() == 0) {
        return MatrixXd();
    }
    return *F * P;
}

MatrixXd model_lmi(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec, const MatrixXd& Y,
                   const MatrixXd& M) {
    return dense_lmi(Y, M, A * Y + B * M, spec, nullptr, 0.0);
}

MatrixXd direct_lmi(const DataSet& ds, const CostSpec& spec, const MatrixXd& Y, const MatrixXd& F) {
    return dense_lmi(Y, ds.U0 * F, ds.X1 * F, spec, nullptr, 0.0);
}

MatrixXd robust_lmi(const DataSet& ds, const CostSpec& spec, const MatrixXd& Y, const MatrixXd& F,
                    double alpha) {
    return dense_lmi(Y, ds.U0 * F, ds.X1 * F, spec, &F, alpha);
}

SynthesisResult synth_model_based(const MatrixXd& A, const MatrixXd& B, const CostSpec& spec,
                                  const MatrixXd& W, const sdp::SolverSettings& settings) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    linalg::require_shape(A, n, n, "A");
    linalg::require_shape(B, n, m, "B");
    spec.validate_for(n, m);
    const TraceWeight tw = trace_weight(W, n);
    const MatrixXd Qinv = inverse_spd(spec.Q, "Q");
    const MatrixXd Rinv = inverse_spd(spec.R, "R");

    ConicProgram prog;
    const AffineExpr Y = prog.add_symmetric("Y", n);
    const AffineExpr M = prog.add_matrix("M", m, n);
    assemble_block_lmi(prog, lmi_grid(Y, M, A * Y + B * M, spec, Qinv, Rinv));
    prog.add_psd(Y - sdp::kStrictMargin * MatrixXd::Identity(n, n));
    prog.maximize(Y.inner(tw.scale * tw.Winv));

    SynthesisResult res;
    res.method = Method::model;
    res.W_used = W;
    const sdp::ConicSolution sol = sdp::solve(prog, settings);
    if (!absorb_solution(res, sol)) return res;
    const MatrixXd Yv = prog.value(sol.x, "Y");
    const MatrixXd Mv = prog.value(sol.x, "M");
    res.M = Mv;
    res.objective = (tw.Winv * Yv).trace();
    if (!extract_gain(res, Yv, Mv)) return res;
    res.diag.lmi_max_eig = linalg::max_eigenvalue(linalg::symmetrize(model_lmi(A, B, spec, res.Y, Mv)));
    if (reject_spurious(res, A + B * res.K, res.K, MatrixXd::Zero(n, n), spec)) return res;
    const BellmanCertificate cert = bellman_certificate(res.K, res.P, A, B, spec, W);
    res.diag.bellman_residual = cert.min_eig;
    res.diag.gamma_floor = gamma_lower_bound_model(A, B, res.K, res.P, spec.Q, spec.R);
    return res;
}

SynthesisResult synth_indirect_ce(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                  const sdp::SolverSettings& settings) {
    require_rich(ds);
    const IdentifiedModel model = least_squares_id(ds);
    std::string source;
    const MatrixXd Wuse = resolve_noise(ds, W, source);
    SynthesisResult res = synth_model_based(model.Ahat, model.Bhat, spec, Wuse, settings);
    res.method = Method::indirect_ce;
    res.noise_source = source;
    return res;
}

SynthesisResult synth_direct_ce(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                double reg_weight, const sdp::SolverSettings& settings) {
    require_rich(ds);
    if (!(reg_weight >= 0.0) || !std::isfinite(reg_weight)) {
        throw InvalidInput("reg_weight must be a finite nonnegative number");
    }
    const int n = ds.n();
    const int m = ds.m();
    const int N = ds.N();
    spec.validate_for(n, m);
    SynthesisResult res;
    res.method = reg_weight > 0.0 ? Method::direct_ce_reg : Method::direct_ce;
    res.reg_weight = reg_weight;
    res.W_used = resolve_noise(ds, W, res.noise_source);
    const TraceWeight tw = trace_weight(res.W_used, n);
    const MatrixXd Qinv = inverse_spd(spec.Q, "Q");
    const MatrixXd Rinv = inverse_spd(spec.R, "R");

    ConicProgram prog;
    const AffineExpr Y = prog.add_symmetric("Y", n);
    const AffineExpr F = prog.add_matrix("F", N, n);
    assemble_block_lmi(prog, lmi_grid(Y, ds.U0 * F, ds.X1 * F, spec, Qinv, Rinv));
    prog.add_equality(ds.X0 * F - Y);
    prog.add_psd(Y - sdp::kStrictMargin * MatrixXd::Identity(n, n));
    AffineExpr objective = Y.inner(tw.Winv);
    if (reg_weight > 0.0) {
        const MatrixXd V = null_basis(ds.D0());
        if (V.cols() > 0) {
            // t >= ||V'F||_F through [[t I, v], [v', t]] >= 0.
            const AffineExpr t = prog.add_scalar("reg_t");
            const AffineExpr v = (MatrixXd(V.transpose()) * F).vectorize();
            const int k = v.rows();
            const AffineExpr tI = AffineExpr::scaled_identity(t, k);
            prog.add_psd(AffineExpr::blocks({{tI, v}, {v.transpose(), t}}));
            objective -= reg_weight * t;
        }
    }
    prog.maximize(tw.scale * objective);

    const sdp::ConicSolution sol = sdp::solve(prog, settings);
    if (!absorb_solution(res, sol)) return res;
    const MatrixXd Yv = prog.value(sol.x, "Y");
    const MatrixXd Fv = prog.value(sol.x, "F");
    res.F = Fv;
    res.objective = sol.objective / tw.scale;
    if (!extract_gain(res, Yv, ds.U0 * Fv)) return res;
    res.diag.lmi_max_eig = linalg::max_eigenvalue(linalg::symmetrize(direct_lmi(ds, spec, res.Y, Fv)));
    const MatrixXd G = Fv * res.P;
    if (reject_spurious(res, ds.X1 * G, res.K, MatrixXd::Zero(n, n), spec)) return res;
    const MssCertificate cert =
        mss_certificate(G, res.P, ds.X1, ds.U0, MatrixXd::Zero(n, n), spec);
    res.diag.bellman_residual = cert.min_eig;
    res.diag.gamma_floor = gamma_floor_data(G, res.P, ds.X1, ds.U0, MatrixXd::Zero(n, n), spec);
    return res;
}

SynthesisResult synth_robust_direct(const DataSet& ds, const CostSpec& spec, const MatrixXd& W,
                                    const sdp::SolverSettings& settings) {
    require_rich(ds);
    const int n = ds.n();
    const int m = ds.m();
    const int N = ds.N();
    spec.validate_for(n, m);
    SynthesisResult res;
    res.method = Method::robust_direct;
    res.W_used = resolve_noise(ds, W, res.noise_source);
    const TraceWeight tw = trace_weight(res.W_used, n);
    const MatrixXd Qinv = inverse_spd(spec.Q, "Q");
    const MatrixXd Rinv = inverse_spd(spec.R, "R");

    ConicProgram prog;
    const AffineExpr Y = prog.add_symmetric("Y", n);
    const AffineExpr F = prog.add_matrix("F", N, n);
    // The solver works with alpha_n = alpha * Tr(W)/n. Congruence with
    // diag(I, I, I, I, sqrt(Tr(W)/n) I) turns the fifth row into
    // [sqrt(Tr(W)/n) F, 0, 0, 0, -(alpha_n/gamma) I], so every block stays O(1)
    // even when W is tiny and alpha correspondingly huge.
    const AffineExpr alpha_n = prog.add_scalar("alpha");
    const AffineExpr F_row = std::sqrt(tw.scale) * F;
    assemble_block_lmi(prog, lmi_grid(Y, ds.U0 * F, ds.X1 * F, spec, Qinv, Rinv, &F_row, &alpha_n));
    prog.add_equality(ds.X0 * F - Y);
    // Tr(W^{-1}Y) - alpha n^2 >= 0, multiplied through by Tr(W)/n.
    prog.add_nonneg(tw.scale * Y.inner(tw.Winv) - static_cast<double>(n * n) * alpha_n);
    prog.add_nonneg(alpha_n - MatrixXd::Constant(1, 1, tw.scale * sdp::kStrictMargin));
    prog.add_psd(Y - sdp::kStrictMargin * MatrixXd::Identity(n, n));
    prog.maximize(alpha_n);

    const sdp::ConicSolution sol = sdp::solve(prog, settings);
    if (!absorb_solution(res, sol)) return res;
    const MatrixXd Yv = prog.value(sol.x, "Y");
    const MatrixXd Fv = prog.value(sol.x, "F");
    const double av = prog.value(sol.x, "alpha")(0, 0) / tw.scale;
    res.F = Fv;
    res.alpha = av;
    res.objective = av;
    if (!extract_gain(res, Yv, ds.U0 * Fv)) return res;
    res.diag.lmi_max_eig =
        linalg::max_eigenvalue(linalg::symmetrize(robust_lmi(ds, spec, res.Y, Fv, av)));
    const MatrixXd G = Fv * res.P;
    if (reject_spurious(res, ds.X1 * G, res.K, (spec.gamma / av) * G.transpose() * G, spec)) return res;
    const MssCertificate cert = mss_certificate(G, res.P, ds.X1, ds.U0, res.W_used, spec);
    res.diag.bellman_residual = cert.min_eig;
    res.diag.degraded = !cert.passes;
    res.diag.gamma_floor = gamma_floor_data(G, res.P, ds.X1, ds.U0, res.W_used, spec);
    return res;
}

BellmanCertificate bellman_certificate(const MatrixXd& K, const MatrixXd& P, const MatrixXd& A,
                                       const MatrixXd& B, const CostSpec& spec,
                                       const MatrixXd& /*W*/) {
    const MatrixXd L = A + B * K;
    BellmanCertificate cert;
    cert.S = linalg::symmetrize(P - spec.Q - K.transpose() * spec.R * K -
                                spec.gamma * L.transpose() * P * L);
    cert.min_eig = linalg::min_eigenvalue(cert.S);
    cert.passes = cert.min_eig >= -1e-7 * linalg::norm2(P);
    return cert;
}

double gamma_floor_data(const MatrixXd& G, const MatrixXd& P, const MatrixXd& X1,
                        const MatrixXd& U0, const MatrixXd& W, const CostSpec& spec) {
    const MatrixXd XG = X1 * G;
    const MatrixXd UG = U0 * G;
    const double trpw = W.size() > 0 ? (P * W).trace() : 0.0;
    const MatrixXd den = linalg::symmetrize(XG.transpose() * P * XG + trpw * G.transpose() * G);
    const double hi = linalg::max_eigenvalue(den);
    if (!(hi > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double lo = linalg::min_eigenvalue(linalg::symmetrize(spec.Q + UG.transpose() * spec.R * UG));
    return 1.0 - lo / hi;
}

void save_synthesis(const std::filesystem::path& dir, const SynthesisResult& r,
                    const sdp::SolverSettings& settings, const std::string& data_hash) {
    std::filesystem::create_directories(dir);
    for (const char* name : {"K.csv", "P.csv", "Y.csv", "M.csv", "F.csv", "W.csv"}) {
        std::filesystem::remove(dir / name);
    }
    if (r.K.size() > 0) io::write_matrix(dir / "K.csv", r.K);
    if (r.P.size() > 0) io::write_matrix(dir / "P.csv", r.P);
    if (r.Y.size() > 0) io::write_matrix(dir / "Y.csv", r.Y);
    if (r.M) io::write_matrix(dir / "M.csv", *r.M);
    if (r.F) io::write_matrix(dir / "F.csv", *r.F);
    if (r.W_used.size() > 0) io::write_matrix(dir / "W.csv", r.W_used);
    auto num = [](double v) -> nlohmann::json {
        if (std::isfinite(v)) return v;
        return io::format_double(v);
    };
    nlohmann::json meta{
        {"method", to_string(r.method)},
        {"status", sdp::to_string(r.status)},
        {"failure", to_string(r.failure)},
        {"message", r.message},
        {"reg_weight", r.reg_weight},
        {"objective", num(r.objective)},
        {"noise_source", r.noise_source},
        {"data_hash", data_hash},
        {"margin", sdp::kStrictMargin},
        {"solver", {{"tol_feas", settings.tol_feas},
                    {"tol_gap", settings.tol_gap},
                    {"max_iter", settings.max_iter}}},
        {"diagnostics", {{"bellman_residual", num(r.diag.bellman_residual)},
                         {"gamma_floor", num(r.diag.gamma_floor)},
                         {"solve_time", r.diag.solve_time},
                         {"condition_Y", num(r.diag.condition_Y)},
                         {"lmi_max_eig", num(r.diag.lmi_max_eig)},
                         {"degraded", r.diag.degraded},
                         {"iterations", r.diag.iterations},
                         {"primal_residual", num(r.diag.primal_residual)},
                         {"dual_residual", num(r.diag.dual_residual)},
                         {"duality_gap", num(r.diag.duality_gap)}}},
    };
    if (r.alpha) meta["alpha"] = *r.alpha;
    io::write_json(dir / "meta.json", meta);
}

SynthesisResult load_synthesis(const std::filesystem::path& dir) {
    SynthesisResult r;
    const auto meta = io::read_json(dir / "meta.json");
    r.method = parse_method(meta.value("method", std::string("model")));
    const std::string failure = meta.value("failure", std::string("none"));
    r.failure = failure == "none"                      ? FailureKind::none
                : failure == "solver_infeasible"       ? FailureKind::solver_infeasible
                : failure == "extraction_conditioning" ? FailureKind::extraction_conditioning
                                                       : FailureKind::solver_numerical;
    const std::string status = meta.value("status", std::string("numerical_failure"));
    for (auto s : {sdp::SolveStatus::optimal, sdp::SolveStatus::infeasible, sdp::SolveStatus::unbounded,
                   sdp::SolveStatus::numerical_failure, sdp::SolveStatus::max_iter}) {
        if (sdp::to_string(s) == status) r.status = s;
    }
    r.message = meta.value("message", std::string());
    r.reg_weight = meta.value("reg_weight", 0.0);
    r.noise_source = meta.value("noise_source", std::string("supplied"));
    if (meta.contains("alpha")) r.alpha = meta["alpha"].get<double>();
    auto load_if = [&](const char* name) -> std::optional<MatrixXd> {
        if (std::filesystem::exists(dir / name)) return io::read_matrix(dir / name);
        return std::nullopt;
    };
    if (auto K = load_if("K.csv")) r.K = *K;
    if (auto P = load_if("P.csv")) r.P = *P;
    if (auto Y = load_if("Y.csv")) r.Y = *Y;
    if (auto W = load_if("W.csv")) r.W_used = *W;
    r.M = load_if("M.csv");
    r.F = load_if("F.csv");
    if (r.ok() && (r.K.size() == 0 || r.P.size() == 0)) {
        throw InvalidInput(dir.string() + ": solution without K.csv or P.csv");
    }
    return r;
}

}  // namespace ddlqr
