#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "padpd/operators.hpp"
#include "padpd/solver.hpp"

namespace padpd {

struct AdmmConfig {
    double rho = 1.0;  // ADMM requires a positive penalty
    std::size_t max_iter = 1000;
    double tol = 1e-10;
    double divergence_threshold = 1e12;
    bool full_trace = false;
};

// Observer for the Gauss-Seidel data flow: fired when block i's subproblem
// reads block j's value; from_current_sweep reports whether that value was
// already updated this iteration (true exactly for j < i).
using BlockReadHook =
    std::function<void(Eigen::Index i, Eigen::Index j, bool from_current_sweep)>;

struct AdmmResult {
    Eigen::VectorXd x;  // stacked primal blocks
    Eigen::VectorXd y;  // multiplier
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIter;
    bool diverged = false;  // reported, never thrown: demonstrating it is the point
    std::size_t iterations = 0;
};

// Direct multi-block extension of ADMM: sequential block minimization of the
// augmented Lagrangian (block i sees blocks < i at k+1 and > i at k), then
// dual ascent y += rho * (sum_i A_i x_i - c). Known to diverge on three-block
// instances for any rho > 0; the diverged flag records that outcome.
// Quadratic blocks are solved via their normal equations; other blocks are
// accepted only when A_i has orthonormal columns (prox shortcut).
AdmmResult admm_direct_multiblock(
    const BlockProblem& problem, const AdmmConfig& config,
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init = std::nullopt,
    const BlockReadHook& on_block_read = nullptr);

}  // namespace padpd
