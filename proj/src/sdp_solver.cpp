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

// Primal-dual interior-point method for
//
//     minimize c'x  subject to  A x = b,  G x + s = h,  s in K,
//
// with K a product of nonnegative orthants and PSD cones (svec rows). The
// iteration runs on the homogeneous self-dual embedding so that infeasible
// and unbounded problems are detected from certificates instead of
// stalling. Search directions use Nesterov-Todd scaling and a Mehrotra
// predictor-corrector; each Newton system is solved in its scaled,
// unreduced symmetric form (no normal equations) with iterative refinement.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "ddlqr/sdp.hpp"

namespace ddlqr::sdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kStepFraction = 0.99;

// Problem in solver layout: equality rows split off, nonneg rows before PSD rows.
struct Layout {
    int nx = 0;
    MatrixXd A;
    VectorXd b;
    MatrixXd G;
    VectorXd h;
    VectorXd c;
    int nl = 0;
    std::vector<int> sides;
    std::vector<int> offsets;  // first row of each PSD block inside G
    int rows = 0;              // rows of G
    int degree = 0;
    std::vector<int> origin_row;  // program row of each G row
};

Layout build_layout(const ConicProgram& program) {
    Layout L;
    L.nx = program.num_variables();
    const MatrixXd Afull = MatrixXd(program.A());
    const VectorXd bfull = program.b();
    L.c = program.c();

    std::vector<int> eq_rows;
    std::vector<int> nl_rows;
    std::vector<std::vector<int>> psd_rows;
    int row = 0;
    for (const Cone& cone : program.cones()) {
        const int len = cone.rows();
        if (cone.kind == ConeKind::zero) {
            for (int i = 0; i < len; ++i) eq_rows.push_back(row + i);
        } else if (cone.kind == ConeKind::nonneg) {
            for (int i = 0; i < len; ++i) nl_rows.push_back(row + i);
        } else {
            std::vector<int> blk(static_cast<std::size_t>(len));
            for (int i = 0; i < len; ++i) blk[static_cast<std::size_t>(i)] = row + i;
            psd_rows.push_back(std::move(blk));
            L.sides.push_back(cone.dim);
        }
        row += len;
    }

    L.A.resize(static_cast<Eigen::Index>(eq_rows.size()), L.nx);
    L.b.resize(static_cast<Eigen::Index>(eq_rows.size()));
    for (std::size_t i = 0; i < eq_rows.size(); ++i) {
        L.A.row(static_cast<Eigen::Index>(i)) = Afull.row(eq_rows[i]);
        L.b(static_cast<Eigen::Index>(i)) = bfull(eq_rows[i]);
    }
    L.nl = static_cast<int>(nl_rows.size());
    for (int r : nl_rows) L.origin_row.push_back(r);
    for (const auto& blk : psd_rows) {
        L.offsets.push_back(static_cast<int>(L.origin_row.size()));
        for (int r : blk) L.origin_row.push_back(r);
    }
    L.rows = static_cast<int>(L.origin_row.size());
    L.G.resize(L.rows, L.nx);
    L.h.resize(L.rows);
    for (int i = 0; i < L.rows; ++i) {
        L.G.row(i) = Afull.row(L.origin_row[static_cast<std::size_t>(i)]);
        L.h(i) = bfull(L.origin_row[static_cast<std::size_t>(i)]);
    }
    L.degree = L.nl;
    for (int s : L.sides) L.degree += s;
    return L;
}

// Presolve result: the reduced layout works on x = basis * xr, where the
// columns of `basis` span the row space of [A; G]. Directions outside that
// space do not move any constraint, so they are dropped; if the objective
// still rewards them the problem is unbounded.
struct Reduction {
    bool identity = true;
    MatrixXd basis;
    bool unbounded = false;
    bool infeasible = false;
};

constexpr double kRankTol = 1e-10;

Reduction presolve(Layout& L) {
    Reduction red;
    MatrixXd stacked(L.A.rows() + L.G.rows(), L.nx);
    stacked << L.A, L.G;
    Eigen::BDCSVD<MatrixXd> svd(stacked, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    while (rank < sv.size() && sv(rank) > kRankTol * smax) ++rank;
    if (rank < L.nx) {
        red.identity = false;
        red.basis = svd.matrixV().leftCols(rank);
        const VectorXd free_part = L.c - red.basis * (red.basis.transpose() * L.c);
        if (free_part.norm() > 1e-9 * std::max(1.0, L.c.norm())) {
            red.unbounded = true;
            return red;
        }
        L.c = red.basis.transpose() * L.c;
        L.A = L.A * red.basis;
        L.G = L.G * red.basis;
        L.nx = rank;
    }

    // Redundant equality rows make the KKT matrix singular; keep an independent subset.
    if (L.A.rows() > 0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(L.A.transpose());
        qr.setThreshold(kRankTol);
        const int arank = static_cast<int>(qr.rank());
        if (arank < L.A.rows()) {
            const auto& perm = qr.colsPermutation().indices();
            MatrixXd Akeep(arank, L.nx);
            VectorXd bkeep(arank);
            for (int i = 0; i < arank; ++i) {
                Akeep.row(i) = L.A.row(perm(i));
                bkeep(i) = L.b(perm(i));
            }
            // Consistency: b must lie in the range of A.
            const VectorXd xls = Akeep.completeOrthogonalDecomposition().solve(bkeep);
            if ((L.A * xls - L.b).norm() > 1e-8 * (1.0 + L.b.norm())) {
                red.infeasible = true;
                return red;
            }
            L.A = std::move(Akeep);
            L.b = std::move(bkeep);
        }
    }
    return red;
}

// Dense svec helpers without the symmetry check (internal iterates are symmetric by construction).
MatrixXd unpack(const Eigen::Ref<const VectorXd>& v, int s) {
    MatrixXd S(s, s);
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i <= j; ++i) {
            const double val = i == j ? v(svec_index(i, j)) : v(svec_index(i, j)) / kSqrt2;
            S(i, j) = val;
            S(j, i) = val;
        }
    }
    return S;
}

void pack(const MatrixXd& S, Eigen::Ref<VectorXd> v) {
    const int s = static_cast<int>(S.rows());
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i <= j; ++i) {
            v(svec_index(i, j)) = i == j ? S(i, j) : kSqrt2 * 0.5 * (S(i, j) + S(j, i));
        }
    }
}

/**
 * Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
 * Nonneg part: W = diag(d). PSD block k: W(U) = R' U R, with R'ZR = R^{-1} S R^{-T} = diag(lambda).
 */
struct Scaling {
    VectorXd d;
    std::vector<MatrixXd> R;
    std::vector<MatrixXd> Rinv;
    VectorXd lambda_nl;
    std::vector<VectorXd> lambda_psd;
};

enum class Op { W, Winv, WT, WinvT };

VectorXd apply(const Layout& L, const Scaling& sc, Op op, const VectorXd& u) {
    VectorXd out(u.size());
    if (L.nl > 0) {
        if (op == Op::W || op == Op::WT) {
            out.head(L.nl) = sc.d.cwiseProduct(u.head(L.nl));
        } else {
            out.head(L.nl) = u.head(L.nl).cwiseQuotient(sc.d);
        }
    }
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int s = L.sides[k];
        const int off = L.offsets[k];
        const int len = svec_size(s);
        const MatrixXd U = unpack(u.segment(off, len), s);
        MatrixXd V;
        switch (op) {
            case Op::W:
                V = sc.R[k].transpose() * U * sc.R[k];
                break;
            case Op::Winv:
                V = sc.Rinv[k].transpose() * U * sc.Rinv[k];
                break;
            case Op::WT:
                V = sc.R[k] * U * sc.R[k].transpose();
                break;
            case Op::WinvT:
                V = sc.Rinv[k] * U * sc.Rinv[k].transpose();
                break;
        }
        pack(V, out.segment(off, len));
    }
    return out;
}

MatrixXd apply_columns(const Layout& L, const Scaling& sc, Op op, const MatrixXd& M) {
    MatrixXd out(M.rows(), M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        out.col(j) = apply(L, sc, op, M.col(j));
    }
    return out;
}

// Scaled-space vector holding lambda.
VectorXd lambda_vector(const Layout& L, const Scaling& sc) {
    VectorXd v = VectorXd::Zero(L.rows);
    v.head(L.nl) = sc.lambda_nl;
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        for (int i = 0; i < L.sides[k]; ++i) {
            v(L.offsets[k] + svec_index(i, i)) = sc.lambda_psd[k](i);
        }
    }
    return v;
}

VectorXd identity_vector(const Layout& L) {
    VectorXd e = VectorXd::Zero(L.rows);
    e.head(L.nl).setOnes();
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        for (int i = 0; i < L.sides[k]; ++i) {
            e(L.offsets[k] + svec_index(i, i)) = 1.0;
        }
    }
    return e;
}

// Jordan product u o v.
VectorXd jordan(const Layout& L, const VectorXd& u, const VectorXd& v) {
    VectorXd out(L.rows);
    out.head(L.nl) = u.head(L.nl).cwiseProduct(v.head(L.nl));
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int s = L.sides[k];
        const int off = L.offsets[k];
        const int len = svec_size(s);
        const MatrixXd U = unpack(u.segment(off, len), s);
        const MatrixXd V = unpack(v.segment(off, len), s);
        const MatrixXd P = 0.5 * (U * V + V * U);
        pack(P, out.segment(off, len));
    }
    return out;
}

// Solve lambda o x = v for x (lambda diagonal in scaled coordinates).
VectorXd lambda_divide(const Layout& L, const Scaling& sc, const VectorXd& v) {
    VectorXd out(L.rows);
    out.head(L.nl) = v.head(L.nl).cwiseQuotient(sc.lambda_nl);
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int s = L.sides[k];
        const int off = L.offsets[k];
        const VectorXd& lam = sc.lambda_psd[k];
        for (int j = 0; j < s; ++j) {
            for (int i = 0; i <= j; ++i) {
                out(off + svec_index(i, j)) = 2.0 * v(off + svec_index(i, j)) / (lam(i) + lam(j));
            }
        }
    }
    return out;
}

// Largest t with lambda + t * u inside the cone (capped at a large value).
double max_step(const Layout& L, const Scaling& sc, const VectorXd& u) {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < L.nl; ++i) {
        if (u(i) < 0.0) t = std::min(t, -sc.lambda_nl(i) / u(i));
    }
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int s = L.sides[k];
        const VectorXd inv_sqrt = sc.lambda_psd[k].cwiseSqrt().cwiseInverse();
        MatrixXd U = unpack(u.segment(L.offsets[k], svec_size(s)), s);
        U = inv_sqrt.asDiagonal() * U * inv_sqrt.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(U, Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0);
        if (lo < 0.0) t = std::min(t, -1.0 / lo);
    }
    return t;
}

// Minimum "eigenvalue" of a cone vector in original coordinates.
double cone_min(const Layout& L, const VectorXd& u) {
    double lo = std::numeric_limits<double>::infinity();
    if (L.nl > 0) lo = u.head(L.nl).minCoeff();
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int s = L.sides[k];
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(unpack(u.segment(L.offsets[k], svec_size(s)), s),
                                                   Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues()(0));
    }
    return lo;
}

// NT scaling from interior s, z in original coordinates. Rebuilt from scratch
// every iteration, which costs a few small factorizations and avoids the drift
// of product-form updates.
std::optional<Scaling> initial_scaling(const Layout& L, const VectorXd& s, const VectorXd& z) {
    Scaling sc;
    sc.d = (s.head(L.nl).cwiseQuotient(z.head(L.nl))).cwiseSqrt();
    sc.lambda_nl = (s.head(L.nl).cwiseProduct(z.head(L.nl))).cwiseSqrt();
    for (std::size_t k = 0; k < L.sides.size(); ++k) {
        const int sd = L.sides[k];
        const int len = svec_size(sd);
        Eigen::LLT<MatrixXd> ls(unpack(s.segment(L.offsets[k], len), sd));
        Eigen::LLT<MatrixXd> lz(unpack(z.segment(L.offsets[k], len), sd));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return std::nullopt;
        const MatrixXd L1 = ls.matrixL();
        const MatrixXd L2 = lz.matrixL();
        Eigen::JacobiSVD<MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd lam = svd.singularValues();
        if (!(lam.minCoeff() > 0.0)) return std::nullopt;
        const VectorXd inv_sqrt = lam.cwiseSqrt().cwiseInverse();
        sc.R.push_back(L1 * svd.matrixV() * inv_sqrt.asDiagonal());
        sc.Rinv.push_back(inv_sqrt.asDiagonal() * svd.matrixU().transpose() * L2.transpose());
        sc.lambda_psd.push_back(lam);
    }
    return sc;
}

/**
 * Scaled KKT system
 *     [ 0   A'  Gs' ] [dx]   [rx]
 *     [ A   0   0   ] [dy] = [ry]
 *     [ Gs  0  -I   ] [v ]   [rz]
 * with Gs = W^{-T} G and v = W dz.
 */
class KktSolver {
public:
    KktSolver(const Layout& L, const MatrixXd& Gs) {
        const int nx = L.nx;
        const int p = static_cast<int>(L.A.rows());
        const int m = L.rows;
        const int dim = nx + p + m;
        K_ = MatrixXd::Zero(dim, dim);
        K_.block(0, nx, nx, p) = L.A.transpose();
        K_.block(nx, 0, p, nx) = L.A;
        K_.block(0, nx + p, nx, m) = Gs.transpose();
        K_.block(nx + p, 0, m, nx) = Gs;
        K_.block(nx + p, nx + p, m, m).diagonal().setConstant(-1.0);
        MatrixXd reg = K_;
        // Presolve removed dependent columns and rows, so the system is
        // nonsingular; the tiny absolute shift only guards the factorization
        // and refinement against K itself removes its effect. Scaling it with
        // |K| would swamp the equality block once the scaled G grows large.
        const double delta = 1e-14;
        reg.diagonal().head(nx).array() += delta;
        reg.diagonal().segment(nx, p).array() -= delta;
        lu_.compute(reg);
    }

    VectorXd solve(const VectorXd& rhs) const {
        VectorXd sol = lu_.solve(rhs);
        for (int pass = 0; pass < 8; ++pass) {
            const VectorXd res = rhs - K_ * sol;
            if (!(res.norm() > 1e-15 * (1.0 + rhs.norm()))) break;
            sol += lu_.solve(res);
        }
        return sol;
    }

private:
    MatrixXd K_;
    Eigen::PartialPivLU<MatrixXd> lu_;
};

struct Direction {
    VectorXd dx;
    VectorXd dy;
    VectorXd dz;  // scaled: W dz
    VectorXd ds;  // scaled: W^{-T} ds
    double dtau = 0.0;
    double dkappa = 0.0;
};

struct Metrics {
    double pres = 0.0;
    double dres = 0.0;
    double gap = 0.0;
    double pcost = 0.0;
    double dcost = 0.0;
};

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
    const auto start = std::chrono::steady_clock::now();
    ConicSolution out;
    out.solver_id = "ddlqr-hsd-ipm";
    Layout L = build_layout(program);
    const int full_nx = L.nx;
    const Reduction red = presolve(L);
    auto finish = [&](SolveStatus status, const VectorXd& xr) {
        VectorXd x = xr;
        if (!red.identity && xr.size() == red.basis.cols()) x = red.basis * xr;
        if (x.size() != full_nx) x = VectorXd::Zero(full_nx);
        out.status = status;
        out.x = x;
        out.objective = program.objective_value(x);
        out.solve_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
    };

    if (red.unbounded) return finish(SolveStatus::unbounded, VectorXd::Zero(full_nx));
    if (red.infeasible) return finish(SolveStatus::infeasible, VectorXd::Zero(full_nx));
    const int nx = L.nx;
    const int p = static_cast<int>(L.A.rows());
    const int m = L.rows;
    if (full_nx == 0) {
        return finish(SolveStatus::numerical_failure, VectorXd());
    }
    if (!L.G.allFinite() || !L.A.allFinite() || !L.h.allFinite() || !L.b.allFinite() ||
        !L.c.allFinite()) {
        return finish(SolveStatus::numerical_failure, VectorXd::Zero(nx));
    }

    const VectorXd e = identity_vector(L);
    const double bh_norm = std::sqrt(L.b.squaredNorm() + L.h.squaredNorm());
    const double c_norm = L.c.norm();

    // Starting point from two least-squares problems with W = I.
    Scaling unit;
    unit.d = VectorXd::Ones(L.nl);
    unit.lambda_nl = VectorXd::Ones(L.nl);
    for (int s : L.sides) {
        unit.R.push_back(MatrixXd::Identity(s, s));
        unit.Rinv.push_back(MatrixXd::Identity(s, s));
        unit.lambda_psd.push_back(VectorXd::Ones(s));
    }
    VectorXd x(nx), y(p), s(m), z(m);
    {
        KktSolver kkt(L, L.G);
        VectorXd rhs(nx + p + m);
        rhs << VectorXd::Zero(nx), L.b, L.h;
        VectorXd sol = kkt.solve(rhs);
        x = sol.head(nx);
        s = -sol.tail(m);  // v = G x - h  =>  s = h - G x
        rhs << -L.c, VectorXd::Zero(p), VectorXd::Zero(m);
        sol = kkt.solve(rhs);
        y = sol.segment(nx, p);
        z = sol.tail(m);
        if (!x.allFinite() || !s.allFinite() || !z.allFinite() || !y.allFinite()) {
            return finish(SolveStatus::numerical_failure, VectorXd::Zero(nx));
        }
        const double smin = cone_min(L, s);
        if (m > 0 && smin <= 1e-8 * std::max(1.0, s.norm())) s += (1.0 + std::max(0.0, -smin)) * e;
        const double zmin = cone_min(L, z);
        if (m > 0 && zmin <= 1e-8 * std::max(1.0, z.norm())) z += (1.0 + std::max(0.0, -zmin)) * e;
    }
    double tau = 1.0;
    double kappa = 1.0;

    std::optional<Scaling> maybe = initial_scaling(L, s, z);
    if (!maybe) {
        return finish(SolveStatus::numerical_failure, x);
    }
    Scaling sc = std::move(*maybe);

    VectorXd best_x = x;
    double best_merit = std::numeric_limits<double>::infinity();
    Metrics best_metrics;
    int stalls = 0;
    double mark_merit = std::numeric_limits<double>::infinity();
    double mark_mu = std::numeric_limits<double>::infinity();

    auto metrics = [&]() {
        Metrics mt;
        const VectorXd xs = x / tau;
        const VectorXd ys = y / tau;
        const VectorXd zs = z / tau;
        const VectorXd ss = s / tau;
        // Residuals are measured against the size of the terms that make them
        // up, so problems whose solutions are large (long discounted horizons
        // give duals of order 1/(1 - gamma)) are judged on relative accuracy.
        const VectorXd Ax = L.A * xs;
        const VectorXd Gx = L.G * xs;
        const double pe = (Ax - L.b).squaredNorm();
        const double pc = (Gx + ss - L.h).squaredNorm();
        const double pscale = std::max({1.0, bh_norm,
                                        std::sqrt(Ax.squaredNorm() + Gx.squaredNorm()), ss.norm()});
        mt.pres = std::sqrt(pe + pc) / pscale;
        const VectorXd Aty = L.A.transpose() * ys;
        const VectorXd Gtz = L.G.transpose() * zs;
        const double dscale = std::max({1.0, c_norm, Aty.norm(), Gtz.norm()});
        mt.dres = (Aty + Gtz + L.c).norm() / dscale;
        mt.pcost = L.c.dot(xs);
        mt.dcost = -L.b.dot(ys) - L.h.dot(zs);
        const double comp = ss.dot(zs);
        mt.gap = std::max(std::abs(comp), std::abs(mt.pcost - mt.dcost)) /
                 std::max(1.0, std::abs(mt.pcost));
        return mt;
    };

    for (int iter = 0; iter <= settings.max_iter; ++iter) {
        out.iterations = iter;
        const Metrics mt = metrics();
        const bool finite = x.allFinite() && y.allFinite() && z.allFinite() && s.allFinite() &&
                            std::isfinite(tau) && std::isfinite(kappa);
        if (!finite) break;

        const double merit = std::max({mt.pres / settings.tol_feas, mt.dres / settings.tol_feas,
                                       mt.gap / settings.tol_gap});
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x / tau;
            best_metrics = mt;
        }
        // Progress means the merit or the complementarity (scaled by tau^2,
        // which is how it enters the unhomogenized problem) halved since the
        // last mark. The merit alone can plateau for a while on long horizons
        // while the iterates still converge.
        const double mu_now = (s.dot(z) + tau * kappa) / (tau * tau);
        if (merit < 0.5 * mark_merit || mu_now < 0.5 * mark_mu) {
            mark_merit = std::min(mark_merit, merit);
            mark_mu = std::min(mark_mu, mu_now);
            stalls = 0;
        } else {
            ++stalls;
        }
        if (settings.verbose) {
            std::fprintf(stderr, "%3d  pcost % .9e  dcost % .9e  pres %.2e  dres %.2e  gap %.2e  tau %.2e  kappa %.2e\n",
                         iter, mt.pcost, mt.dcost, mt.pres, mt.dres, mt.gap, tau, kappa);
        }
        if (mt.pres <= settings.tol_feas && mt.dres <= settings.tol_feas && mt.gap <= settings.tol_gap) {
            out.primal_residual = mt.pres;
            out.dual_residual = mt.dres;
            out.gap = mt.gap;
            return finish(SolveStatus::optimal, x / tau);
        }

        // Certificates of infeasibility from the homogeneous embedding.
        const double by_hz = L.b.dot(y) + L.h.dot(z);
        if (by_hz < 0.0 && tau < kappa) {
            const double ratio = (L.A.transpose() * y + L.G.transpose() * z).norm() / -by_hz;
            if (ratio <= settings.tol_feas) {
                out.primal_residual = mt.pres;
                out.dual_residual = mt.dres;
                out.gap = mt.gap;
                return finish(SolveStatus::infeasible, best_x);
            }
        }
        const double cx = L.c.dot(x);
        if (cx < 0.0 && tau < kappa) {
            const double pr = std::sqrt((L.A * x).squaredNorm() + (L.G * x + s).squaredNorm());
            if (pr / -cx <= settings.tol_feas) {
                out.primal_residual = mt.pres;
                out.dual_residual = mt.dres;
                out.gap = mt.gap;
                return finish(SolveStatus::unbounded, best_x);
            }
        }
        if (iter == settings.max_iter || stalls >= 12) {
            if (settings.verbose && stalls >= 12) std::fprintf(stderr, "stop: no progress in 12 iterations\n");
            break;
        }

        // Residuals of the homogeneous system.
        const VectorXd rx = L.A.transpose() * y + L.G.transpose() * z + L.c * tau;
        const VectorXd ry = L.A * x - L.b * tau;
        const VectorXd rz = L.G * x + s - L.h * tau;
        const double rt = kappa + L.c.dot(x) + L.b.dot(y) + L.h.dot(z);
        const double mu = (s.dot(z) + tau * kappa) / (L.degree + 1.0);

        const MatrixXd Gs = apply_columns(L, sc, Op::WinvT, L.G);
        const KktSolver kkt(L, Gs);
        const VectorXd h_scaled = apply(L, sc, Op::WinvT, L.h);

        VectorXd rhs(nx + p + m);
        rhs << -L.c, L.b, h_scaled;
        const VectorXd sol2 = kkt.solve(rhs);
        const VectorXd x2 = sol2.head(nx);
        const VectorXd y2 = sol2.segment(nx, p);
        const VectorXd v2 = sol2.tail(m);
        const double denom = v2.squaredNorm() + kappa / tau;

        const VectorXd lam = lambda_vector(L, sc);
        auto direction = [&](double keep, const VectorXd& ds_target, double dk) {
            // ds_target: W dz + W^{-T} ds (scaled); dk: kappa dtau + tau dkappa.
            const VectorXd bz = -keep * rz - apply(L, sc, Op::WT, ds_target);
            VectorXd r(nx + p + m);
            r << -keep * rx, -keep * ry, apply(L, sc, Op::WinvT, bz);
            const VectorXd sol1 = kkt.solve(r);
            Direction d;
            const double num = keep * rt + L.c.dot(sol1.head(nx)) + L.b.dot(sol1.segment(nx, p)) +
                               h_scaled.dot(sol1.tail(m)) + dk / tau;
            d.dtau = num / denom;
            d.dx = sol1.head(nx) + d.dtau * x2;
            d.dy = sol1.segment(nx, p) + d.dtau * y2;
            d.dz = sol1.tail(m) + d.dtau * v2;
            d.ds = ds_target - d.dz;
            d.dkappa = (dk - kappa * d.dtau) / tau;
            return d;
        };
        auto step_limit = [&](const Direction& d) {
            double t = std::min(max_step(L, sc, d.ds), max_step(L, sc, d.dz));
            if (d.dtau < 0.0) t = std::min(t, -tau / d.dtau);
            if (d.dkappa < 0.0) t = std::min(t, -kappa / d.dkappa);
            return t;
        };

        // Predictor.
        const Direction aff = direction(1.0, -lam, -tau * kappa);
        const double alpha_aff = std::min(1.0, step_limit(aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 0.0, 1.0);

        // Corrector.
        const VectorXd target = lambda_divide(
            L, sc, sigma * mu * e - jordan(L, lam, lam) - jordan(L, aff.ds, aff.dz));
        const double dk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
        const Direction dir = direction(1.0 - sigma, target, dk);
        if (!dir.dx.allFinite() || !std::isfinite(dir.dtau)) {
            if (settings.verbose) std::fprintf(stderr, "stop: non-finite direction\n");
            break;
        }
        const double alpha = std::min(1.0, kStepFraction * step_limit(dir));
        if (!(alpha > 1e-12)) {
            if (settings.verbose) std::fprintf(stderr, "stop: step length %.2e\n", alpha);
            break;
        }

        // s and z move linearly so the residuals shrink exactly by the step;
        // recomputing them from the scaling would inject rounding of order
        // cond(W) that stalls progress once the dual grows large.
        // ds comes from the linearized primal equation rather than from W' ds:
        // near the end W is badly conditioned and the mapped value would not
        // cancel the residual it is meant to remove.
        const VectorXd ds_full = -(1.0 - sigma) * rz - L.G * dir.dx + L.h * dir.dtau;
        const VectorXd dz_full = apply(L, sc, Op::Winv, dir.dz);
        // The step limit was computed on the scaled pair; the unscaled update
        // can differ by rounding, so shrink the step until s and z stay interior.
        // A fresh NT scaling from the new pair keeps W consistent with (s, z).
        std::optional<Scaling> next;
        double step = alpha;
        for (int shrink = 0; shrink < 20; ++shrink, step *= 0.7) {
            next = initial_scaling(L, s + step * ds_full, z + step * dz_full);
            if (next) break;
        }
        if (!next) {
            if (settings.verbose) std::fprintf(stderr, "stop: step left the cone\n");
            break;
        }
        x += step * dir.dx;
        y += step * dir.dy;
        s += step * ds_full;
        z += step * dz_full;
        tau += step * dir.dtau;
        kappa += step * dir.dkappa;
        sc = std::move(*next);
        if (!(tau > 0.0) || !(kappa > 0.0)) {
            if (settings.verbose) std::fprintf(stderr, "stop: tau or kappa left the positive axis\n");
            break;
        }
    }

    out.primal_residual = best_metrics.pres;
    out.dual_residual = best_metrics.dres;
    out.gap = best_metrics.gap;
    const bool exhausted = out.iterations >= settings.max_iter;
    return finish(exhausted ? SolveStatus::max_iter : SolveStatus::numerical_failure, best_x);
}

}  // namespace ddlqr::sdp
