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
#ifndef DDLQR_SDP_HPP
#define DDLQR_SDP_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ddlqr::sdp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Margin used to turn strict inequalities (Y > 0, alpha > 0) into closed ones.
inline constexpr double kStrictMargin = 1e-9;

/// Length s(s+1)/2 of the scaled vectorization of an s x s symmetric matrix.
inline int svec_size(int side) { return side * (side + 1) / 2; }

/// Position of entry (i, j), i <= j, in svec order (upper triangle, column by column).
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

/// Scaled vectorization: diagonal copied, off-diagonals times sqrt(2), so that
/// <svec(A), svec(B)> = Tr(AB). Throws InvalidInput if S is not symmetric within 1e-10.
VectorXd svec(const MatrixXd& S);

/// Exact inverse of svec. Throws InvalidInput when the length is not triangular.
MatrixXd smat(const VectorXd& v);

enum class ConeKind { zero, nonneg, psd };

struct Cone {
    ConeKind kind;
    int dim;  ///< entries for zero / nonneg, matrix side for psd

    /// Number of slack rows occupied by the cone.
    int rows() const { return kind == ConeKind::psd ? svec_size(dim) : dim; }
};

enum class BlockKind { symmetric, matrix, scalar };

/// Named decision block and the slice of x that holds it. Symmetric blocks
/// store their upper triangle unscaled, in svec order.
struct VariableBlock {
    std::string name;
    BlockKind kind;
    int rows = 0;
    int cols = 0;
    int offset = 0;
    int size = 0;
};

/**
 * @brief Matrix-valued expression C + sum_k x_k E_k, affine in the decision vector.
 *
 * Coefficients are stored as a sparse (rows*cols) x nvars matrix acting on x,
 * with entries in column-major order.
 */
class AffineExpr {
public:
    AffineExpr() = default;
    AffineExpr(int rows, int cols, int nvars);

    static AffineExpr constant(const MatrixXd& value, int nvars = 0);
    static AffineExpr zeros(int rows, int cols, int nvars = 0);
    /// Assemble a block matrix; blocks in a row share their height, blocks in a column share their width.
    static AffineExpr blocks(const std::vector<std::vector<AffineExpr>>& grid);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nvars() const { return static_cast<int>(coeffs_.cols()); }

    const SparseMatrix& coeffs() const { return coeffs_; }
    const VectorXd& offset() const { return offset_; }
    SparseMatrix& coeffs() { return coeffs_; }
    VectorXd& offset() { return offset_; }

    AffineExpr transpose() const;
    /// Column-major vectorization, as a (rows*cols) x 1 expression.
    AffineExpr vectorize() const;
    /// Same entries in column-major order, new shape (rows * cols must match).
    AffineExpr reshape(int rows, int cols) const;
    /// s * I_k for a 1x1 expression s.
    static AffineExpr scaled_identity(const AffineExpr& scalar, int k);
    MatrixXd evaluate(const VectorXd& x) const;
    /// Sum of diagonal entries, as a 1x1 expression.
    AffineExpr trace() const;
    /// <M, expr> = sum_ij M_ij expr_ij, as a 1x1 expression.
    AffineExpr inner(const MatrixXd& M) const;

    AffineExpr operator-() const;
    AffineExpr& operator+=(const AffineExpr& other);
    AffineExpr& operator-=(const AffineExpr& other);

    friend AffineExpr operator+(AffineExpr lhs, const AffineExpr& rhs) { return lhs += rhs; }
    friend AffineExpr operator-(AffineExpr lhs, const AffineExpr& rhs) { return lhs -= rhs; }
    friend AffineExpr operator*(double s, const AffineExpr& e);
    friend AffineExpr operator*(const MatrixXd& M, const AffineExpr& e);
    friend AffineExpr operator*(const AffineExpr& e, const MatrixXd& M);
    friend AffineExpr operator+(AffineExpr lhs, const MatrixXd& rhs);
    friend AffineExpr operator-(AffineExpr lhs, const MatrixXd& rhs);

    /// Grow the coefficient matrix to `nvars` columns (new variables have zero coefficient).
    void widen(int nvars);

private:
    int rows_ = 0;
    int cols_ = 0;
    SparseMatrix coeffs_;
    VectorXd offset_;
};

/**
 * @brief Standard-form conic program: minimize c'x subject to b - A x in K.
 *
 * K is the ordered product of the cones in `cones()`; zero cones encode
 * equalities. PSD cones hold svec-scaled slack rows.
 */
class ConicProgram {
public:
    AffineExpr add_symmetric(const std::string& name, int side);
    AffineExpr add_matrix(const std::string& name, int rows, int cols);
    AffineExpr add_scalar(const std::string& name);

    /// Expression for an already declared block.
    AffineExpr variable(const std::string& name) const;
    const VariableBlock& block(const std::string& name) const;
    const std::vector<VariableBlock>& blocks() const { return blocks_; }
    int num_variables() const { return nvars_; }

    void minimize(const AffineExpr& objective);
    void maximize(const AffineExpr& objective);

    /// expr = 0 entrywise.
    void add_equality(const AffineExpr& expr);
    /// expr >= 0 entrywise.
    void add_nonneg(const AffineExpr& expr);
    /// expr symmetric and positive semidefinite. Throws InvalidInput on an asymmetric expression.
    void add_psd(const AffineExpr& expr);

    const std::vector<Cone>& cones() const { return cones_; }
    int num_rows() const { return static_cast<int>(b_.size()); }

    /// Objective of the internal minimization: c'x + objective_offset.
    VectorXd c() const;
    double objective_offset() const { return minimize_ ? objective_.offset()(0) : -objective_.offset()(0); }
    /// +1 for minimize, -1 for maximize: user objective = sense * (c'x + offset).
    double sense() const { return minimize_ ? 1.0 : -1.0; }
    SparseMatrix A() const;
    VectorXd b() const;

    /// Objective in the user's sense (maximized value for maximize problems).
    double objective_value(const VectorXd& x) const;
    /// Value of a named block at x.
    MatrixXd value(const VectorXd& x, const std::string& name) const;

    /**
     * Text dump for cross-checking with external solvers:
     *   line 1 `conic-program v1`; then `vars N`, `rows M`, `sense min|max`,
     *   `offset v`, one `cone zero|nonneg|psd d` line per cone,
     *   one `block name kind rows cols offset` line per decision block,
     *   `c i v` for every nonzero objective coefficient,
     *   `A i j v` for every nonzero of A, and `b i v` for every nonzero of b.
     * Indices are zero-based; values use shortest round-trip formatting.
     */
    std::string dump() const;

private:
    void add_rows(const SparseMatrix& coeff_rows, const VectorXd& rhs);
    const VariableBlock& declare(const std::string& name, BlockKind kind, int rows, int cols,
                                 int size);

    int nvars_ = 0;
    std::vector<VariableBlock> blocks_;
    std::map<std::string, std::size_t> block_index_;
    std::vector<Cone> cones_;
    std::vector<Eigen::Triplet<double>> a_triplets_;
    std::vector<double> b_;
    AffineExpr objective_;
    bool minimize_ = true;
};

/// Add one PSD cone encoding grid <= 0 (negative semidefinite). The grid must be
/// square in block structure with block (i, j) equal to the transpose of block (j, i);
/// otherwise InvalidInput is thrown. Returns the side of the assembled matrix.
int assemble_block_lmi(ConicProgram& program, const std::vector<std::vector<AffineExpr>>& grid);

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure, max_iter };
std::string to_string(SolveStatus status);

struct SolverSettings {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    int max_iter = 200;
    bool verbose = false;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::numerical_failure;
    VectorXd x;
    double objective = 0.0;
    double solve_time = 0.0;
    std::string solver_id;
    int iterations = 0;
    /// ||b - Ax - s|| relative to max(1, ||b||, ||Ax||, ||s||) at the returned point
    double primal_residual = 0.0;
    /// ||A'y + c|| relative to max(1, ||c||, ||A'y||)
    double dual_residual = 0.0;
    double gap = 0.0;              ///< relative duality gap
    double margin = kStrictMargin;

    bool optimal() const { return status == SolveStatus::optimal; }
};

/// Native homogeneous self-dual interior-point method with Nesterov-Todd scaling.
/// Never throws on infeasible or unbounded problems; the status says what happened.
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});

}  // namespace ddlqr::sdp

#endif  // DDLQR_SDP_HPP
