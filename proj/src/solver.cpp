#include "padpd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>
#include <vector>

#include "padpd/errors.hpp"

namespace padpd {

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::Converged: return "converged";
        case StopReason::MaxIter: return "max_iter";
        case StopReason::Diverged: return "diverged";
    }
    return "unknown";
}

SolverState make_solver_state(const SplittingOperator& op, const Eigen::VectorXd& Pi0,
                              const Eigen::VectorXd& Pim1) {
    const Eigen::Index dim = op.M.rows();
    if (Pi0.size() != dim || Pim1.size() != dim)
        throw ShapeError("make_solver_state: initial iterates must match the stacked dimension");
    SolverState state;
    state.current = Pi0;
    state.previous = Pim1;
    state.forward_current = apply_H(op, state.current);
    ++state.h_evaluations;
    if (Pi0 == Pim1) {
        state.forward_previous = state.forward_current;
    } else {
        state.forward_previous = apply_H(op, state.previous);
        ++state.h_evaluations;
    }
    return state;
}

void frb_step_ordered(SolverState& state, const SplittingOperator& op,
                      const BlockProblem& problem, double eta,
                      std::span<const Eigen::Index> order) {
    const Eigen::Index q = problem.q();
    if (static_cast<Eigen::Index>(order.size()) != q + 1)
        throw ConfigError("frb_step: order must list all q+1 blocks");
    std::vector<bool> seen(static_cast<std::size_t>(q) + 1, false);
    for (Eigen::Index slot : order) {
        if (slot < 0 || slot > q || seen[static_cast<std::size_t>(slot)])
            throw ConfigError("frb_step: order must be a permutation of {0, ..., q}");
        seen[static_cast<std::size_t>(slot)] = true;
    }

    // Forward-reflected point; both H values come from the cache.
    Eigen::VectorXd theta =
        state.current - (2.0 * eta) * state.forward_current + eta * state.forward_previous;
    if (!theta.allFinite())
        throw DivergenceError("frb_step: forward-reflected point is not finite", state.current,
                              state.k);

    const Eigen::Index p = problem.dual_dim();
    const Eigen::Index primal = problem.primal_dim();
    Eigen::VectorXd next(primal + p);
    for (Eigen::Index slot : order) {
        if (slot == q) {
            // The dual owns no objective term, so its resolvent is the identity.
            next.tail(p) = theta.tail(p);
        } else {
            const Eigen::Index off = problem.block_offset(slot);
            const Eigen::Index n_i = problem.block_dim(slot);
            next.segment(off, n_i) =
                problem.blocks[static_cast<std::size_t>(slot)].f.prox(theta.segment(off, n_i), eta);
        }
    }
    if (!next.allFinite())
        throw DivergenceError("frb_step: iterate is not finite", state.current, state.k);

    state.previous = std::move(state.current);
    state.current = std::move(next);
    state.forward_previous = std::move(state.forward_current);
    state.forward_current = apply_H(op, state.current);
    ++state.h_evaluations;
    ++state.k;
}

void frb_step(SolverState& state, const SplittingOperator& op, const BlockProblem& problem,
              double eta) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(problem.q()) + 1);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    frb_step_ordered(state, op, problem, eta, order);
}

double default_eta(double lipschitz, double safety) {
    if (!(safety > 0.0) || !(safety < 1.0))
        throw ConfigError("default_eta: safety factor must lie in (0, 1)");
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
        throw ConfigError("default_eta: Lipschitz constant must be finite and nonnegative");
    // L == 0 means H is constant and any step size converges; keep it finite.
    if (lipschitz == 0.0) return safety;
    return safety / (2.0 * lipschitz);
}

double kkt_residual(const BlockProblem& problem, const Eigen::VectorXd& Pi, double rho) {
    const Eigen::Index p = problem.dual_dim();
    if (Pi.size() != problem.stacked_dim())
        throw ShapeError("kkt_residual: iterate must match the stacked dimension");
    const Eigen::VectorXd y = Pi.tail(p);

    Eigen::VectorXd r = -problem.c;
    for (Eigen::Index i = 0; i < problem.q(); ++i)
        r += problem.blocks[static_cast<std::size_t>(i)].A *
             Pi.segment(problem.block_offset(i), problem.block_dim(i));
    double residual = r.norm();

    for (Eigen::Index i = 0; i < problem.q(); ++i) {
        const auto& block = problem.blocks[static_cast<std::size_t>(i)];
        const Eigen::VectorXd x_i = Pi.segment(problem.block_offset(i), problem.block_dim(i));
        const Eigen::VectorXd grad = block.A.transpose() * y + rho * (block.A.transpose() * r);
        const double gap = (x_i - block.f.prox(x_i - grad, 1.0)).norm();
        residual = std::max(residual, gap);
    }
    return residual;
}

IterationRecord measure_iterate(const BlockProblem& problem, const Eigen::VectorXd& Pi,
                                std::size_t k) {
    const Eigen::Index p = problem.dual_dim();
    IterationRecord rec;
    rec.k = k;
    rec.error = Pi.head(problem.primal_dim()).norm();
    rec.dual_norm = Pi.tail(p).norm();

    Eigen::VectorXd r = -problem.c;
    double objective = 0.0;
    for (Eigen::Index i = 0; i < problem.q(); ++i) {
        const auto& block = problem.blocks[static_cast<std::size_t>(i)];
        const Eigen::VectorXd x_i = Pi.segment(problem.block_offset(i), problem.block_dim(i));
        r += block.A * x_i;
        objective += block.f.evaluate(x_i);
    }
    rec.primal_residual = r.norm();
    rec.objective = objective;
    return rec;
}

SolveResult solve(const BlockProblem& problem, const SolverConfig& config,
                  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init) {
    problem.validate();
    if (config.rho < 0.0 || !std::isfinite(config.rho))
        throw ConfigError("solve: rho must be finite and nonnegative");
    if (!(config.tol > 0.0)) throw ConfigError("solve: tol must be positive");
    if (config.max_iter == 0) throw ConfigError("solve: max_iter must be at least 1");

    SolveResult result;
    result.rho = config.rho;

    SplittingOperator op = build_operator(problem, config.rho);
    result.lipschitz = operator_lipschitz(op.M);

    double eta = 0.0;
    if (config.eta_policy == EtaPolicy::Explicit) {
        if (!(config.eta > 0.0) || !std::isfinite(config.eta))
            throw ConfigError("solve: explicit eta must be finite and positive");
        eta = config.eta;
    } else {
        eta = default_eta(result.lipschitz, config.safety);
    }
    result.eta = eta;

    if (result.lipschitz > 0.0 && eta >= 1.0 / (2.0 * result.lipschitz)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "eta=%.17g lies outside the guaranteed interval (0, %.17g); convergence is "
                      "not covered by the step-size bound",
                      eta, 1.0 / (2.0 * result.lipschitz));
        result.warnings.emplace_back(buf);
    }

    const Eigen::Index dim = problem.stacked_dim();
    Eigen::VectorXd Pi0 = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd Pim1 = Eigen::VectorXd::Zero(dim);
    if (init) {
        Pi0 = init->first;
        Pim1 = init->second;
    }
    result.state = make_solver_state(op, Pi0, Pim1);

    result.records.push_back(measure_iterate(problem, result.state.current, 0));
    if (kkt_residual(problem, result.state.current, config.rho) <= config.tol) {
        result.stop_reason = StopReason::Converged;
        return result;
    }

    result.stop_reason = StopReason::MaxIter;
    for (std::size_t k = 1; k <= config.max_iter; ++k) {
        try {
            frb_step(result.state, op, problem, eta);
        } catch (const DivergenceError&) {
            result.stop_reason = StopReason::Diverged;
            break;
        }

        IterationRecord rec = measure_iterate(problem, result.state.current, k);
        const bool kept = keep_trace_record(k, config.full_trace);
        if (kept) result.records.push_back(rec);

        if (!std::isfinite(rec.error) || rec.error > kDivergenceThreshold) {
            if (!kept) result.records.push_back(rec);
            result.stop_reason = StopReason::Diverged;
            break;
        }
        if (kkt_residual(problem, result.state.current, config.rho) <= config.tol) {
            if (!kept) result.records.push_back(rec);
            result.stop_reason = StopReason::Converged;
            break;
        }
        if (k == config.max_iter && !kept) result.records.push_back(rec);
    }
    return result;
}

}  // namespace padpd
