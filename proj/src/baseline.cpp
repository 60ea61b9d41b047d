#include "padpd/baseline.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "padpd/errors.hpp"

namespace padpd {

namespace {

// Minimize f_i(x) + y^T A_i x + (rho/2) ||A_i x + shift||^2.
Eigen::VectorXd solve_block_subproblem(const Block& block, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& shift, double rho,
                                       Eigen::Index block_index) {
    const Eigen::MatrixXd& A = block.A;
    const Eigen::Index n = A.cols();

    if (const auto& qf = block.f.quadratic_form()) {
        // Normal equations: (diag(a) + rho A^T A) x = a.*b - A^T (y + rho*shift).
        Eigen::MatrixXd G = rho * (A.transpose() * A);
        G.diagonal() += qf->curvature;
        const Eigen::VectorXd rhs =
            qf->curvature.cwiseProduct(qf->target) - A.transpose() * (y + rho * shift);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        Eigen::VectorXd x = ldlt.solve(rhs);
        // Negated form so a NaN residual (e.g. after overflow in G) also trips.
        const double residual = (G * x - rhs).norm();
        if (ldlt.info() != Eigen::Success || !x.allFinite() ||
            !(residual <= 1e-8 * std::max(1.0, rhs.norm())))
            throw SubproblemError("admm: block " + std::to_string(block_index) +
                                  " has a singular quadratic subproblem (normal matrix not "
                                  "invertible)");
        return x;
    }

    // Non-quadratic blocks are supported only when A has orthonormal columns,
    // where the subproblem collapses to a single prox evaluation.
    const Eigen::MatrixXd gram = A.transpose() * A;
    const double gram_gap =
        (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (gram_gap > 1e-12)
        throw SubproblemError("admm: block " + std::to_string(block_index) +
                              " is neither quadratic nor orthonormal-column; its Gauss-Seidel "
                              "subproblem has no closed form here");
    return block.f.prox(-(A.transpose() * (shift + y / rho)), 1.0 / rho);
}

}  // namespace

AdmmResult admm_direct_multiblock(
    const BlockProblem& problem, const AdmmConfig& config,
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init,
    const BlockReadHook& on_block_read) {
    problem.validate();
    if (!(config.rho > 0.0) || !std::isfinite(config.rho))
        throw ConfigError("admm: rho must be finite and positive");
    if (!(config.tol > 0.0)) throw ConfigError("admm: tol must be positive");
    if (config.max_iter == 0) throw ConfigError("admm: max_iter must be at least 1");
    if (!(config.divergence_threshold > 0.0))
        throw ConfigError("admm: divergence_threshold must be positive");

    const Eigen::Index q = problem.q();
    const Eigen::Index p = problem.dual_dim();
    const Eigen::Index primal = problem.primal_dim();

    AdmmResult result;
    result.x = Eigen::VectorXd::Zero(primal);
    result.y = Eigen::VectorXd::Zero(p);
    if (init) {
        if (init->first.size() != primal || init->second.size() != p)
            throw ShapeError("admm: init must supply a primal stack and a p-dimensional dual");
        result.x = init->first;
        result.y = init->second;
    }

    const auto stacked = [&]() {
        Eigen::VectorXd Pi(primal + p);
        Pi << result.x, result.y;
        return Pi;
    };

    result.records.push_back(measure_iterate(problem, stacked(), 0));
    if (kkt_residual(problem, stacked(), config.rho) <= config.tol) {
        result.stop_reason = StopReason::Converged;
        return result;
    }

    result.stop_reason = StopReason::MaxIter;
    for (std::size_t k = 1; k <= config.max_iter; ++k) {
        // Gauss-Seidel sweep: block i minimizes against blocks < i at their
        // k+1 values and blocks > i at their k values.
        for (Eigen::Index i = 0; i < q; ++i) {
            Eigen::VectorXd shift = -problem.c;
            for (Eigen::Index j = 0; j < q; ++j) {
                if (j == i) continue;
                if (on_block_read) on_block_read(i, j, j < i);
                shift += problem.blocks[static_cast<std::size_t>(j)].A *
                         result.x.segment(problem.block_offset(j), problem.block_dim(j));
            }
            result.x.segment(problem.block_offset(i), problem.block_dim(i)) =
                solve_block_subproblem(problem.blocks[static_cast<std::size_t>(i)], result.y,
                                       shift, config.rho, i);
        }

        Eigen::VectorXd r = -problem.c;
        for (Eigen::Index j = 0; j < q; ++j)
            r += problem.blocks[static_cast<std::size_t>(j)].A *
                 result.x.segment(problem.block_offset(j), problem.block_dim(j));
        result.y += config.rho * r;

        result.iterations = k;
        IterationRecord rec = measure_iterate(problem, stacked(), k);
        const bool kept = keep_trace_record(k, config.full_trace);
        if (kept) result.records.push_back(rec);

        if (!std::isfinite(rec.error) || rec.error > config.divergence_threshold) {
            if (!kept) result.records.push_back(rec);
            result.stop_reason = StopReason::Diverged;
            result.diverged = true;
            break;
        }
        if (kkt_residual(problem, stacked(), config.rho) <= config.tol) {
            if (!kept) result.records.push_back(rec);
            result.stop_reason = StopReason::Converged;
            break;
        }
        if (k == config.max_iter && !kept) result.records.push_back(rec);
    }
    return result;
}

}  // namespace padpd
