#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "padpd/errors.hpp"
#include "padpd/prox.hpp"

namespace padpd {

// One block of a separable equality-constrained program: its constraint
// matrix (p x n_i) and objective term.
struct Block {
    Eigen::MatrixXd A;
    ProxFunction f;
};

// min sum_i f_i(x_i)  subject to  sum_i A_i x_i = c.
// All A_i share the row dimension p = c.size(); f_i.dimension() == cols(A_i).
struct BlockProblem {
    std::vector<Block> blocks;
    Eigen::VectorXd c;

    Eigen::Index q() const { return static_cast<Eigen::Index>(blocks.size()); }
    Eigen::Index dual_dim() const { return c.size(); }
    Eigen::Index primal_dim() const;
    Eigen::Index stacked_dim() const { return primal_dim() + dual_dim(); }
    // Offset of block i inside the stacked point col{x_1, ..., x_q, y}.
    Eigen::Index block_offset(Eigen::Index i) const;
    Eigen::Index block_dim(Eigen::Index i) const { return blocks[i].A.cols(); }

    void validate() const;  // throws ShapeError
};

// The affine map H(Pi) = M*Pi + V whose zeros (joint with the subdifferential
// stack) are the saddle points of the augmented Lagrangian. The symmetric
// part of M is PSD for rho >= 0; at rho = 0, M is exactly skew-symmetric.
struct SplittingOperator {
    Eigen::MatrixXd M;                     // (N+p) x (N+p), N = sum n_i
    Eigen::VectorXd V;                     // col{-rho*A_1^T c, ..., -rho*A_q^T c, c}
    double rho = 0.0;
    std::vector<Eigen::Index> block_dims;  // n_1, ..., n_q
    Eigen::Index dual_dim = 0;             // p
};

// Assemble (M_rho, V_rho): primal block (i,j) = rho*A_i^T A_j, last block
// column A_i^T, last block row -A_i, zero dual corner.
SplittingOperator build_operator(const BlockProblem& problem, double rho);

Eigen::VectorXd apply_H(const SplittingOperator& op, const Eigen::VectorXd& Pi);

// Max absolute column sum / row sum.
double matrix_norm_1(const Eigen::MatrixXd& M);
double matrix_norm_inf(const Eigen::MatrixXd& M);

// sqrt(||M||_1 * ||M||_inf); always >= the spectral norm.
double lipschitz_bound_norm_product(const Eigen::MatrixXd& M);

// Block-column variant: max over j of ||col{rho*A_1^T A_j, ..., rho*A_q^T A_j,
// -A_j}||_1 and ||[A_1, ..., A_q]||_inf. Not guaranteed to dominate the
// spectral norm; provided as the documented alternative step-size source.
double lipschitz_bound_blockwise(const BlockProblem& problem, double rho);

// Largest singular value via power iteration on M^T M, deterministic all-ones
// start with a perturbed-restart stall check. Throws ConvergenceError (with
// the best estimate) if the budget runs out.
double spectral_norm(const Eigen::MatrixXd& M, double tol, std::size_t max_iter = 200000);

// Step-size Lipschitz constant: exact spectral norm, with the norm-product
// bound as fallback when power iteration does not converge.
double operator_lipschitz(const Eigen::MatrixXd& M);

}  // namespace padpd
