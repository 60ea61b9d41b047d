#include "padpd/operators.hpp"

#include <cmath>
#include <sstream>

namespace padpd {

Eigen::Index BlockProblem::primal_dim() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.A.cols();
    return n;
}

Eigen::Index BlockProblem::block_offset(Eigen::Index i) const {
    Eigen::Index off = 0;
    for (Eigen::Index j = 0; j < i; ++j) off += blocks[j].A.cols();
    return off;
}

void BlockProblem::validate() const {
    if (blocks.empty()) throw ShapeError("problem has no blocks (q must be >= 1)");
    const Eigen::Index p = c.size();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (b.A.rows() != p) {
            std::ostringstream msg;
            msg << "block " << i << ": A has " << b.A.rows() << " rows, c has length " << p;
            throw ShapeError(msg.str());
        }
        if (b.f.dimension() != b.A.cols()) {
            std::ostringstream msg;
            msg << "block " << i << ": f dimension " << b.f.dimension() << " != cols(A) "
                << b.A.cols();
            throw ShapeError(msg.str());
        }
    }
}

SplittingOperator build_operator(const BlockProblem& problem, double rho) {
    if (rho < 0.0) throw ConfigError("build_operator: rho must be nonnegative");
    problem.validate();

    const Eigen::Index N = problem.primal_dim();
    const Eigen::Index p = problem.dual_dim();
    const Eigen::Index q = problem.q();

    SplittingOperator op;
    op.rho = rho;
    op.dual_dim = p;
    op.M = Eigen::MatrixXd::Zero(N + p, N + p);
    op.V = Eigen::VectorXd::Zero(N + p);

    for (Eigen::Index i = 0; i < q; ++i) {
        const Eigen::Index oi = problem.block_offset(i);
        const Eigen::Index ni = problem.block_dim(i);
        op.block_dims.push_back(ni);
        const Eigen::MatrixXd& Ai = problem.blocks[i].A;
        for (Eigen::Index j = 0; j < q; ++j) {
            const Eigen::Index oj = problem.block_offset(j);
            const Eigen::Index nj = problem.block_dim(j);
            op.M.block(oi, oj, ni, nj) = rho * (Ai.transpose() * problem.blocks[j].A);
        }
        op.M.block(oi, N, ni, p) = Ai.transpose();
        op.M.block(N, oi, p, ni) = -Ai;
        op.V.segment(oi, ni) = -rho * (Ai.transpose() * problem.c);
    }
    op.V.tail(p) = problem.c;
    return op;
}

Eigen::VectorXd apply_H(const SplittingOperator& op, const Eigen::VectorXd& Pi) {
    if (Pi.size() != op.M.rows()) {
        std::ostringstream msg;
        msg << "apply_H: point has length " << Pi.size() << ", operator is " << op.M.rows()
            << "x" << op.M.cols();
        throw ShapeError(msg.str());
    }
    return op.M * Pi + op.V;
}

double matrix_norm_1(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().colwise().sum().maxCoeff();
}

double matrix_norm_inf(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double lipschitz_bound_norm_product(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw ShapeError("lipschitz_bound_norm_product: matrix not square");
    return std::sqrt(matrix_norm_1(M) * matrix_norm_inf(M));
}

double lipschitz_bound_blockwise(const BlockProblem& problem, double rho) {
    if (rho < 0.0) throw ConfigError("lipschitz_bound_blockwise: rho must be nonnegative");
    problem.validate();
    const Eigen::Index q = problem.q();
    const Eigen::Index N = problem.primal_dim();
    const Eigen::Index p = problem.dual_dim();

    double bound = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
        const Eigen::Index nj = problem.block_dim(j);
        Eigen::MatrixXd col(N + p, nj);
        for (Eigen::Index i = 0; i < q; ++i)
            col.middleRows(problem.block_offset(i), problem.block_dim(i)) =
                rho * (problem.blocks[i].A.transpose() * problem.blocks[j].A);
        col.bottomRows(p) = -problem.blocks[j].A;
        bound = std::max(bound, matrix_norm_1(col));
    }

    Eigen::MatrixXd row(p, N);
    for (Eigen::Index j = 0; j < q; ++j)
        row.middleCols(problem.block_offset(j), problem.block_dim(j)) = problem.blocks[j].A;
    return std::max(bound, matrix_norm_inf(row));
}

namespace {

// One power-iteration run on M^T M from the given start; returns the
// converged sigma_max estimate, or the stalled estimate with ok = false.
struct PowerRun {
    double sigma = 0.0;
    bool ok = false;
    std::size_t used = 0;
};

PowerRun power_run(const Eigen::MatrixXd& M, Eigen::VectorXd v, double tol,
                   std::size_t max_iter) {
    PowerRun run;
    const double nv = v.norm();
    if (nv == 0.0) return run;
    v /= nv;

    double lambda_prev = -1.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = M.transpose() * (M * v);
        const double lambda = v.dot(w);  // Rayleigh quotient of M^T M
        const double wn = w.norm();
        if (wn == 0.0) {
            // v is in the null space of M; sigma estimate 0 from this start.
            run.sigma = 0.0;
            run.ok = true;
            run.used = it + 1;
            return run;
        }
        v = w / wn;
        if (lambda_prev >= 0.0 &&
            std::abs(lambda - lambda_prev) <= tol * std::max(lambda, 1e-300)) {
            // Accept only if (lambda, v) is actually an eigenpair; a stalled
            // Rayleigh quotient away from one triggers the perturbed restart.
            const double resid = (M.transpose() * (M * v) - lambda * v).norm();
            run.sigma = std::sqrt(std::max(lambda, 0.0));
            run.ok = resid <= std::sqrt(tol) * std::max(lambda, 1e-300) + 1e-12;
            run.used = it + 1;
            return run;
        }
        lambda_prev = lambda;
    }
    run.sigma = std::sqrt(std::max(lambda_prev, 0.0));
    return run;
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& M, double tol, std::size_t max_iter) {
    if (M.rows() != M.cols()) throw ShapeError("spectral_norm: matrix not square");
    if (!(tol > 0.0)) throw ConfigError("spectral_norm: tol must be positive");
    const Eigen::Index n = M.rows();
    if (n == 0) return 0.0;
    if (M.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // All-ones start, then a deterministically perturbed restart. The ramp
    // breaks orthogonality to the dominant singular subspace when the ones
    // vector is unlucky (stall or subdominant lock-in); the larger converged
    // estimate wins.
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd ramp(n);
    for (Eigen::Index i = 0; i < n; ++i) ramp[i] = 1.0 + 0.5 * static_cast<double>(i + 1) / n;

    PowerRun first = power_run(M, ones, tol, max_iter);
    PowerRun second = power_run(M, ramp, tol, max_iter);
    if (first.ok || second.ok)
        return std::max(first.ok ? first.sigma : 0.0, second.ok ? second.sigma : 0.0);

    throw ConvergenceError("spectral_norm: power iteration budget exhausted",
                           std::max(first.sigma, second.sigma));
}

double operator_lipschitz(const Eigen::MatrixXd& M) {
    try {
        return spectral_norm(M, 1e-8);
    } catch (const ConvergenceError&) {
        return lipschitz_bound_norm_product(M);
    }
}

}  // namespace padpd
