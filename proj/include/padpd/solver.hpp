#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "padpd/operators.hpp"

namespace padpd {

enum class EtaPolicy { Explicit, AutoFromL };

enum class StopReason { Converged, MaxIter, Diverged };
const char* to_string(StopReason reason);

struct SolverConfig {
    double eta = 0.0;  // used when eta_policy == Explicit
    double rho = 0.0;
    std::size_t max_iter = 10000;
    double tol = 1e-10;  // on the KKT residual
    EtaPolicy eta_policy = EtaPolicy::AutoFromL;
    double safety = 0.9;  // eta = safety / (2L) under AutoFromL
    bool full_trace = false;
};

// Iterates abort with a divergence flag past this error magnitude.
inline constexpr double kDivergenceThreshold = 1e12;

// Per-iteration record length is unbounded only up to this count; beyond it
// every 10th iteration is kept (unless full_trace).
inline constexpr std::size_t kFullTraceLimit = 100000;

inline bool keep_trace_record(std::size_t k, bool full_trace) {
    return full_trace || k <= kFullTraceLimit || k % 10 == 0;
}

struct IterationRecord {
    std::size_t k = 0;
    double error = 0.0;           // ||primal stack||_2
    double primal_residual = 0.0; // ||sum_i A_i x_i - c||_2
    double dual_norm = 0.0;       // ||y||_2
    double objective = 0.0;       // sum_i f_i(x_i)
};

// Stacked iterate pair with cached forward evaluations; after warm-up each
// step performs exactly one H evaluation (the reflected term reuses the
// cache).
struct SolverState {
    Eigen::VectorXd current;           // Pi_k = col{x_1, ..., x_q, y}
    Eigen::VectorXd previous;          // Pi_{k-1}
    Eigen::VectorXd forward_current;   // H(Pi_k)
    Eigen::VectorXd forward_previous;  // H(Pi_{k-1})
    std::size_t k = 0;
    std::size_t h_evaluations = 0;
};

SolverState make_solver_state(const SplittingOperator& op, const Eigen::VectorXd& Pi0,
                              const Eigen::VectorXd& Pim1);

// One forward-reflected-backward step:
//   Theta    = Pi_k - 2*eta*H(Pi_k) + eta*H(Pi_{k-1})
//   Pi_{k+1} = J_{eta*Phi}(Theta)   (per-block prox; identity on the dual)
// Block updates read only the (Pi_k, Pi_{k-1}) snapshot, so they may run in
// any order; `order` is a permutation of {0, ..., q} with q the dual slot.
// Throws DivergenceError on non-finite values, carrying the last finite
// iterate.
void frb_step(SolverState& state, const SplittingOperator& op, const BlockProblem& problem,
              double eta);
void frb_step_ordered(SolverState& state, const SplittingOperator& op,
                      const BlockProblem& problem, double eta,
                      std::span<const Eigen::Index> order);

// safety/(2L); safety must lie in (0,1).
double default_eta(double lipschitz, double safety);

// max of the constraint violation and the per-block prox fixed-point
// distances ||x_i - prox_{f_i}(x_i - (A_i^T y + rho A_i^T (sum_j A_j x_j - c)))||;
// zero exactly at KKT points.
double kkt_residual(const BlockProblem& problem, const Eigen::VectorXd& Pi, double rho);

IterationRecord measure_iterate(const BlockProblem& problem, const Eigen::VectorXd& Pi,
                                std::size_t k);

struct SolveResult {
    SolverState state;
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIter;
    double eta = 0.0;
    double lipschitz = 0.0;
    double rho = 0.0;
    std::vector<std::string> warnings;
};

// Run the multi-block parallel primal-dual iteration until the KKT residual
// drops to config.tol or max_iter is reached. init supplies (Pi_0, Pi_{-1});
// both default to zero.
SolveResult solve(const BlockProblem& problem, const SolverConfig& config,
                  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init = std::nullopt);

}  // namespace padpd
