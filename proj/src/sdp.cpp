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
#include "ddlqr/sdp.hpp"

#include <cmath>
#include <sstream>

#include "ddlqr/errors.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr::sdp {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

using Triplet = Eigen::Triplet<double>;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// I_k (x) M for a dense M, kept sparse.
SparseMatrix kron_identity_left(int k, const MatrixXd& M) {
    std::vector<Triplet> t;
    for (int blk = 0; blk < k; ++blk) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            for (Eigen::Index i = 0; i < M.rows(); ++i) {
                if (M(i, j) != 0.0) {
                    t.emplace_back(static_cast<int>(blk * M.rows() + i),
                                   static_cast<int>(blk * M.cols() + j), M(i, j));
                }
            }
        }
    }
    SparseMatrix out(k * M.rows(), k * M.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

// M (x) I_k for a dense M, kept sparse.
SparseMatrix kron_identity_right(const MatrixXd& M, int k) {
    std::vector<Triplet> t;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            if (M(i, j) == 0.0) {
                continue;
            }
            for (int d = 0; d < k; ++d) {
                t.emplace_back(static_cast<int>(i * k + d), static_cast<int>(j * k + d), M(i, j));
            }
        }
    }
    SparseMatrix out(M.rows() * k, M.cols() * k);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

bool is_triangular_number(Eigen::Index len, int& side) {
    const double root = (std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0;
    side = static_cast<int>(std::lround(root));
    return svec_size(side) == len;
}

}  // namespace

VectorXd svec(const MatrixXd& S) {
    if (S.rows() != S.cols()) {
        throw InvalidInput("svec: matrix must be square");
    }
    const int s = static_cast<int>(S.rows());
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    VectorXd v(svec_size(s));
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i <= j; ++i) {
            if (std::abs(S(i, j) - S(j, i)) > 1e-10 * scale) {
                throw InvalidInput("svec: matrix is not symmetric");
            }
            v(svec_index(i, j)) = i == j ? S(i, j) : kSqrt2 * S(i, j);
        }
    }
    return v;
}

MatrixXd smat(const VectorXd& v) {
    int s = 0;
    if (!is_triangular_number(v.size(), s)) {
        throw InvalidInput("smat: length " + std::to_string(v.size()) + " is not triangular");
    }
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

// ---------------------------------------------------------------------------
// AffineExpr

AffineExpr::AffineExpr(int rows, int cols, int nvars)
    : rows_(rows), cols_(cols), coeffs_(rows * cols, nvars), offset_(VectorXd::Zero(rows * cols)) {}

AffineExpr AffineExpr::constant(const MatrixXd& value, int nvars) {
    AffineExpr e(static_cast<int>(value.rows()), static_cast<int>(value.cols()), nvars);
    e.offset_ = value.reshaped();
    return e;
}

AffineExpr AffineExpr::zeros(int rows, int cols, int nvars) { return AffineExpr(rows, cols, nvars); }

void AffineExpr::widen(int nvars) {
    if (nvars > coeffs_.cols()) {
        coeffs_.conservativeResize(coeffs_.rows(), nvars);
    }
}

AffineExpr AffineExpr::transpose() const {
    AffineExpr out(cols_, rows_, nvars());
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(coeffs_.nonZeros()));
    for (int k = 0; k < coeffs_.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(coeffs_, k); it; ++it) {
            const int i = static_cast<int>(it.row()) % rows_;
            const int j = static_cast<int>(it.row()) / rows_;
            t.emplace_back(j + i * cols_, static_cast<int>(it.col()), it.value());
        }
    }
    out.coeffs_.setFromTriplets(t.begin(), t.end());
    for (int j = 0; j < cols_; ++j) {
        for (int i = 0; i < rows_; ++i) {
            out.offset_(j + i * cols_) = offset_(i + j * rows_);
        }
    }
    return out;
}

AffineExpr AffineExpr::vectorize() const { return reshape(rows_ * cols_, 1); }

AffineExpr AffineExpr::reshape(int rows, int cols) const {
    if (rows * cols != rows_ * cols_) {
        throw InvalidInput("reshape must preserve the number of entries");
    }
    AffineExpr out = *this;
    out.rows_ = rows;
    out.cols_ = cols;
    return out;
}

AffineExpr AffineExpr::scaled_identity(const AffineExpr& scalar, int k) {
    if (scalar.rows_ != 1 || scalar.cols_ != 1) {
        throw InvalidInput("scaled_identity needs a scalar expression");
    }
    const MatrixXd eye = MatrixXd::Identity(k, k).reshaped();
    return (eye * scalar).reshape(k, k);
}

MatrixXd AffineExpr::evaluate(const VectorXd& x) const {
    VectorXd v = offset_;
    if (coeffs_.cols() > 0) {
        if (x.size() < coeffs_.cols()) {
            throw InvalidInput("AffineExpr::evaluate: decision vector too short");
        }
        v += coeffs_ * x.head(coeffs_.cols());
    }
    return v.reshaped(rows_, cols_);
}

AffineExpr AffineExpr::trace() const {
    if (rows_ != cols_) {
        throw InvalidInput("trace of a non-square expression");
    }
    return inner(MatrixXd::Identity(rows_, cols_));
}

AffineExpr AffineExpr::inner(const MatrixXd& M) const {
    if (M.rows() != rows_ || M.cols() != cols_) {
        throw InvalidInput("inner product with a matrix of different shape");
    }
    const VectorXd weights = M.reshaped();
    AffineExpr out(1, 1, nvars());
    const VectorXd row = coeffs_.transpose() * weights;
    out.coeffs_ = MatrixXd(row.transpose()).sparseView();
    out.offset_(0) = weights.dot(offset_);
    return out;
}

AffineExpr AffineExpr::operator-() const {
    AffineExpr out = *this;
    out.coeffs_ = -out.coeffs_;
    out.offset_ = -out.offset_;
    return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) {
        throw InvalidInput("shape mismatch in affine expression sum: " + std::to_string(rows_) +
                           "x" + std::to_string(cols_) + " vs " + std::to_string(other.rows_) +
                           "x" + std::to_string(other.cols_));
    }
    const int width = std::max(nvars(), other.nvars());
    widen(width);
    if (other.nvars() == width) {
        coeffs_ += other.coeffs_;
    } else {
        AffineExpr wide = other;
        wide.widen(width);
        coeffs_ += wide.coeffs_;
    }
    offset_ += other.offset_;
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) { return *this += -other; }

AffineExpr operator*(double s, const AffineExpr& e) {
    AffineExpr out = e;
    out.coeffs_ *= s;
    out.offset_ *= s;
    return out;
}

AffineExpr operator*(const MatrixXd& M, const AffineExpr& e) {
    if (M.cols() != e.rows_) {
        throw InvalidInput("shape mismatch in matrix * expression");
    }
    AffineExpr out(static_cast<int>(M.rows()), e.cols_, e.nvars());
    const SparseMatrix K = kron_identity_left(e.cols_, M);
    out.coeffs_ = K * e.coeffs_;
    out.offset_ = K * e.offset_;
    return out;
}

AffineExpr operator*(const AffineExpr& e, const MatrixXd& M) {
    if (M.rows() != e.cols_) {
        throw InvalidInput("shape mismatch in expression * matrix");
    }
    AffineExpr out(e.rows_, static_cast<int>(M.cols()), e.nvars());
    const SparseMatrix K = kron_identity_right(M.transpose(), e.rows_);
    out.coeffs_ = K * e.coeffs_;
    out.offset_ = K * e.offset_;
    return out;
}

AffineExpr operator+(AffineExpr lhs, const MatrixXd& rhs) {
    return lhs += AffineExpr::constant(rhs);
}

AffineExpr operator-(AffineExpr lhs, const MatrixXd& rhs) {
    return lhs -= AffineExpr::constant(rhs);
}

AffineExpr AffineExpr::blocks(const std::vector<std::vector<AffineExpr>>& grid) {
    if (grid.empty() || grid.front().empty()) {
        throw InvalidInput("empty block grid");
    }
    const std::size_t nr = grid.size();
    const std::size_t nc = grid.front().size();
    std::vector<int> heights(nr);
    std::vector<int> widths(nc);
    int width = 0;
    for (std::size_t i = 0; i < nr; ++i) {
        if (grid[i].size() != nc) {
            throw InvalidInput("block grid rows have different lengths");
        }
        heights[i] = grid[i][0].rows();
        for (std::size_t j = 0; j < nc; ++j) {
            const AffineExpr& blk = grid[i][j];
            if (i == 0) {
                widths[j] = blk.cols();
            }
            if (blk.rows() != heights[i] || blk.cols() != widths[j]) {
                throw InvalidInput("block (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") has inconsistent shape");
            }
            width = std::max(width, blk.nvars());
        }
    }
    int total_rows = 0;
    int total_cols = 0;
    std::vector<int> row_start(nr);
    std::vector<int> col_start(nc);
    for (std::size_t i = 0; i < nr; ++i) {
        row_start[i] = total_rows;
        total_rows += heights[i];
    }
    for (std::size_t j = 0; j < nc; ++j) {
        col_start[j] = total_cols;
        total_cols += widths[j];
    }

    AffineExpr out(total_rows, total_cols, width);
    std::vector<Triplet> t;
    for (std::size_t bi = 0; bi < nr; ++bi) {
        for (std::size_t bj = 0; bj < nc; ++bj) {
            const AffineExpr& blk = grid[bi][bj];
            const int h = blk.rows();
            auto place = [&](int local) {
                const int i = local % h;
                const int j = local / h;
                return (row_start[bi] + i) + (col_start[bj] + j) * total_rows;
            };
            for (int k = 0; k < blk.coeffs_.outerSize(); ++k) {
                for (SparseMatrix::InnerIterator it(blk.coeffs_, k); it; ++it) {
                    t.emplace_back(place(static_cast<int>(it.row())), static_cast<int>(it.col()),
                                   it.value());
                }
            }
            for (int local = 0; local < blk.offset_.size(); ++local) {
                out.offset_(place(local)) = blk.offset_(local);
            }
        }
    }
    out.coeffs_.setFromTriplets(t.begin(), t.end());
    return out;
}

// ---------------------------------------------------------------------------
// ConicProgram

const VariableBlock& ConicProgram::declare(const std::string& name, BlockKind kind, int rows,
                                           int cols, int size) {
    if (name.empty() || block_index_.count(name) > 0) {
        throw InvalidInput("decision block name '" + name + "' is empty or already declared");
    }
    if (rows <= 0 || cols <= 0) {
        throw InvalidInput("decision block '" + name + "' must have positive dimensions");
    }
    VariableBlock blk{name, kind, rows, cols, nvars_, size};
    nvars_ += size;
    block_index_[name] = blocks_.size();
    blocks_.push_back(blk);
    return blocks_.back();
}

AffineExpr ConicProgram::add_symmetric(const std::string& name, int side) {
    declare(name, BlockKind::symmetric, side, side, svec_size(side));
    return variable(name);
}

AffineExpr ConicProgram::add_matrix(const std::string& name, int rows, int cols) {
    declare(name, BlockKind::matrix, rows, cols, rows * cols);
    return variable(name);
}

AffineExpr ConicProgram::add_scalar(const std::string& name) {
    declare(name, BlockKind::scalar, 1, 1, 1);
    return variable(name);
}

const VariableBlock& ConicProgram::block(const std::string& name) const {
    const auto it = block_index_.find(name);
    if (it == block_index_.end()) {
        throw InvalidInput("unknown decision block '" + name + "'");
    }
    return blocks_[it->second];
}

AffineExpr ConicProgram::variable(const std::string& name) const {
    const VariableBlock& blk = block(name);
    AffineExpr e(blk.rows, blk.cols, nvars_);
    std::vector<Triplet> t;
    if (blk.kind == BlockKind::symmetric) {
        for (int j = 0; j < blk.cols; ++j) {
            for (int i = 0; i < blk.rows; ++i) {
                const int var = blk.offset + svec_index(std::min(i, j), std::max(i, j));
                t.emplace_back(i + j * blk.rows, var, 1.0);
            }
        }
    } else {
        for (int k = 0; k < blk.size; ++k) {
            t.emplace_back(k, blk.offset + k, 1.0);
        }
    }
    e.coeffs().setFromTriplets(t.begin(), t.end());
    return e;
}

void ConicProgram::minimize(const AffineExpr& objective) {
    if (objective.rows() != 1 || objective.cols() != 1) {
        throw InvalidInput("objective must be scalar");
    }
    objective_ = objective;
    minimize_ = true;
}

void ConicProgram::maximize(const AffineExpr& objective) {
    minimize(objective);
    minimize_ = false;
}

void ConicProgram::add_rows(const SparseMatrix& coeff_rows, const VectorXd& rhs) {
    // Slack s = rhs + coeff_rows x, written as b - A x with A = -coeff_rows.
    const int base = num_rows();
    for (int k = 0; k < coeff_rows.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(coeff_rows, k); it; ++it) {
            if (it.value() != 0.0) {
                a_triplets_.emplace_back(base + static_cast<int>(it.row()),
                                         static_cast<int>(it.col()), -it.value());
            }
        }
    }
    for (Eigen::Index i = 0; i < rhs.size(); ++i) {
        b_.push_back(rhs(i));
    }
}

void ConicProgram::add_equality(const AffineExpr& expr) {
    if (expr.rows() * expr.cols() == 0) {
        return;
    }
    add_rows(expr.coeffs(), expr.offset());
    cones_.push_back({ConeKind::zero, expr.rows() * expr.cols()});
}

void ConicProgram::add_nonneg(const AffineExpr& expr) {
    if (expr.rows() * expr.cols() == 0) {
        return;
    }
    add_rows(expr.coeffs(), expr.offset());
    cones_.push_back({ConeKind::nonneg, expr.rows() * expr.cols()});
}

void ConicProgram::add_psd(const AffineExpr& expr) {
    if (expr.rows() != expr.cols() || expr.rows() == 0) {
        throw InvalidInput("PSD constraint needs a nonempty square expression");
    }
    const int s = expr.rows();
    const RowSparse rows = expr.coeffs();
    const VectorXd& off = expr.offset();
    double scale = off.cwiseAbs().maxCoeff();
    for (int k = 0; k < rows.outerSize(); ++k) {
        for (RowSparse::InnerIterator it(rows, k); it; ++it) {
            scale = std::max(scale, std::abs(it.value()));
        }
    }
    const double tol = 1e-12 * std::max(1.0, scale);

    std::vector<Triplet> t;
    VectorXd rhs(svec_size(s));
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i <= j; ++i) {
            const int upper = i + j * s;
            const int lower = j + i * s;
            const int r = svec_index(i, j);
            if (i == j) {
                for (RowSparse::InnerIterator it(rows, upper); it; ++it) {
                    t.emplace_back(r, static_cast<int>(it.col()), it.value());
                }
                rhs(r) = off(upper);
                continue;
            }
            const Eigen::SparseVector<double> a = rows.row(upper);
            const Eigen::SparseVector<double> b = rows.row(lower);
            const Eigen::SparseVector<double> diff = a - b;
            double worst = std::abs(off(upper) - off(lower));
            for (Eigen::SparseVector<double>::InnerIterator it(diff); it; ++it) {
                worst = std::max(worst, std::abs(it.value()));
            }
            if (worst > tol) {
                throw InvalidInput("PSD constraint expression is not symmetric at entry (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");
            }
            const Eigen::SparseVector<double> avg = (a + b) * (kSqrt2 / 2.0);
            for (Eigen::SparseVector<double>::InnerIterator it(avg); it; ++it) {
                t.emplace_back(r, static_cast<int>(it.index()), it.value());
            }
            rhs(r) = kSqrt2 * 0.5 * (off(upper) + off(lower));
        }
    }
    SparseMatrix svec_rows(svec_size(s), expr.nvars());
    svec_rows.setFromTriplets(t.begin(), t.end());
    add_rows(svec_rows, rhs);
    cones_.push_back({ConeKind::psd, s});
}

VectorXd ConicProgram::c() const {
    VectorXd out = VectorXd::Zero(nvars_);
    if (objective_.rows() == 1) {
        const SparseMatrix& co = objective_.coeffs();
        for (int k = 0; k < co.outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(co, k); it; ++it) {
                out(it.col()) += it.value();
            }
        }
    }
    return minimize_ ? out : VectorXd(-out);
}

SparseMatrix ConicProgram::A() const {
    SparseMatrix out(num_rows(), nvars_);
    out.setFromTriplets(a_triplets_.begin(), a_triplets_.end());
    return out;
}

VectorXd ConicProgram::b() const {
    return Eigen::Map<const VectorXd>(b_.data(), static_cast<Eigen::Index>(b_.size()));
}

double ConicProgram::objective_value(const VectorXd& x) const {
    if (objective_.rows() != 1) {
        return 0.0;
    }
    return objective_.evaluate(x)(0, 0);
}

MatrixXd ConicProgram::value(const VectorXd& x, const std::string& name) const {
    return variable(name).evaluate(x);
}

std::string ConicProgram::dump() const {
    std::ostringstream out;
    out << "conic-program v1\n";
    out << "vars " << nvars_ << "\n";
    out << "rows " << num_rows() << "\n";
    out << "sense " << (minimize_ ? "min" : "max") << "\n";
    out << "offset " << io::format_double(objective_offset()) << "\n";
    for (const Cone& cone : cones_) {
        const char* kind = cone.kind == ConeKind::zero     ? "zero"
                           : cone.kind == ConeKind::nonneg ? "nonneg"
                                                           : "psd";
        out << "cone " << kind << " " << cone.dim << "\n";
    }
    for (const VariableBlock& blk : blocks_) {
        const char* kind = blk.kind == BlockKind::symmetric ? "symmetric"
                           : blk.kind == BlockKind::matrix  ? "matrix"
                                                            : "scalar";
        out << "block " << blk.name << " " << kind << " " << blk.rows << " " << blk.cols << " "
            << blk.offset << "\n";
    }
    const VectorXd cvec = c();
    for (Eigen::Index i = 0; i < cvec.size(); ++i) {
        if (cvec(i) != 0.0) {
            out << "c " << i << " " << io::format_double(cvec(i)) << "\n";
        }
    }
    const Eigen::SparseMatrix<double, Eigen::RowMajor> Arow = A();
    for (int k = 0; k < Arow.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arow, k); it; ++it) {
            out << "A " << it.row() << " " << it.col() << " " << io::format_double(it.value())
                << "\n";
        }
    }
    for (std::size_t i = 0; i < b_.size(); ++i) {
        if (b_[i] != 0.0) {
            out << "b " << i << " " << io::format_double(b_[i]) << "\n";
        }
    }
    return out.str();
}

int assemble_block_lmi(ConicProgram& program, const std::vector<std::vector<AffineExpr>>& grid) {
    const std::size_t nb = grid.size();
    for (std::size_t i = 0; i < nb; ++i) {
        if (grid[i].size() != nb) {
            throw InvalidInput("LMI block grid must be square");
        }
    }
    for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t j = i; j < nb; ++j) {
            const AffineExpr& upper = grid[i][j];
            const AffineExpr lower_t = grid[j][i].transpose();
            if (upper.rows() != lower_t.rows() || upper.cols() != lower_t.cols()) {
                throw InvalidInput("LMI block (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") does not match the transpose of block (" +
                                   std::to_string(j) + "," + std::to_string(i) + ")");
            }
            AffineExpr diff = upper - lower_t;
            double scale = 1.0;
            for (const AffineExpr* e : {&upper, &lower_t}) {
                if (e->offset().size() > 0) {
                    scale = std::max(scale, e->offset().cwiseAbs().maxCoeff());
                }
                for (int k = 0; k < e->coeffs().outerSize(); ++k) {
                    for (SparseMatrix::InnerIterator it(e->coeffs(), k); it; ++it) {
                        scale = std::max(scale, std::abs(it.value()));
                    }
                }
            }
            double worst = diff.offset().size() > 0 ? diff.offset().cwiseAbs().maxCoeff() : 0.0;
            for (int k = 0; k < diff.coeffs().outerSize(); ++k) {
                for (SparseMatrix::InnerIterator it(diff.coeffs(), k); it; ++it) {
                    worst = std::max(worst, std::abs(it.value()));
                }
            }
            if (worst > 1e-12 * scale) {
                throw InvalidInput("LMI block (" + std::to_string(i) + "," + std::to_string(j) +
                                   ") is not the transpose of block (" + std::to_string(j) + "," +
                                   std::to_string(i) + ")");
            }
        }
    }
    const AffineExpr lmi = AffineExpr::blocks(grid);
    program.add_psd(-lmi);
    return lmi.rows();
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal:
            return "optimal";
        case SolveStatus::infeasible:
            return "infeasible";
        case SolveStatus::unbounded:
            return "unbounded";
        case SolveStatus::numerical_failure:
            return "numerical_failure";
        case SolveStatus::max_iter:
            return "max_iter";
    }
    return "unknown";
}

}  // namespace ddlqr::sdp
