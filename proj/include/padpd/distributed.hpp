#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "padpd/operators.hpp"
#include "padpd/prox.hpp"
#include "padpd/solver.hpp"

namespace padpd {

// Undirected simple graph on nodes {0, ..., nodes-1}; edges stored with
// first < second.
struct Graph {
    Eigen::Index nodes = 0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;

    void validate() const;  // throws ValidationError on loops/duplicates/range
    std::vector<std::vector<Eigen::Index>> neighbor_lists() const;  // sorted
    std::vector<Eigen::Index> degrees() const;
};

Graph cycle_graph(Eigen::Index m);     // m >= 3
Graph path_graph(Eigen::Index m);      // m >= 1
Graph complete_graph(Eigen::Index m);  // m >= 1
Graph star_graph(Eigen::Index m);      // m >= 2, node 0 is the hub

// Metropolis rule: W_ij = 1/(1+max(deg_i,deg_j)) on edges, diagonal absorbs
// the remainder. Symmetric and doubly stochastic by construction; passes
// validate_weights whenever the graph is connected.
Eigen::MatrixXd metropolis_weights(const Graph& graph);

// Report-style validation of a mixing matrix against the requirements the
// consensus algorithm needs: symmetry, double stochasticity, nonnegativity,
// sparsity pattern matching the graph, and connectivity measured as
// lambda_2(I - W) > 0 (second-smallest eigenvalue; the smallest is always 0
// at the ones vector).
struct WeightReport {
    bool symmetric = false;
    bool doubly_stochastic = false;
    bool nonnegative = false;
    bool pattern_consistent = false;
    bool connected = false;
    double lambda2 = 0.0;

    bool ok() const {
        return symmetric && doubly_stochastic && nonnegative && pattern_consistent && connected;
    }
    // Human-readable list of the violated requirements; empty when ok().
    std::vector<std::string> violations() const;
};

WeightReport validate_weights(const Eigen::MatrixXd& W, const Graph& graph);

// m agents on a graph, each holding a private cost over the shared n-dim
// variable; consensus is enforced through the mixing matrix.
struct ConsensusProblem {
    Graph graph;
    Eigen::MatrixXd weights;          // m x m mixing matrix
    std::vector<ProxFunction> costs;  // one per agent, each of dimension local_dim
    Eigen::Index local_dim = 0;

    Eigen::Index agents() const { return graph.nodes; }
    void validate() const;  // throws ValidationError naming the violated requirement
};

// Admissible step-size interval (0, 1/4). Graph-independent: ||I-W||_1 and
// ||I-W||_inf are at most 2 for every doubly stochastic symmetric W, so the
// operator's Lipschitz bound is 2 regardless of topology.
std::pair<double, double> consensus_eta_interval();

// Equivalent centralized formulation: q = m blocks, A_i = block column i of
// (I - W) kron I_n, c = 0. Running the stacked solver on this with rho = 0
// reproduces the per-agent iteration exactly.
BlockProblem lift_consensus(const ConsensusProblem& problem);

// Observer for message passing: fired when agent i reads agent j's state
// (j ranges over the closed neighborhood of i).
using NeighborReadHook = std::function<void(Eigen::Index agent, Eigen::Index neighbor)>;

struct ConsensusConfig {
    double eta = 0.2;  // admissible interval is (0, 1/4); warning outside
    std::size_t max_iter = 10000;
    double tol = 1e-10;
    bool full_trace = false;
};

struct ConsensusResult {
    Eigen::MatrixXd x;  // local_dim x m, column i = agent i's final state
    Eigen::MatrixXd y;  // local_dim x m, per-agent dual blocks
    std::vector<IterationRecord> records;
    // Snapshots aligned with records (x_history[t] is the state at records[t].k).
    std::vector<Eigen::MatrixXd> x_history;
    std::vector<Eigen::MatrixXd> y_history;
    StopReason stop_reason = StopReason::MaxIter;
    std::size_t iterations = 0;
    double eta = 0.0;
    std::vector<std::string> warnings;
};

// Per-agent consensus iteration. Each round, every agent i computes, reading
// only closed-neighborhood values from rounds k and k-1:
//   xhat_i  = x_i + (eta*y_i^- - 2*eta*y_i) - sum_j W_ij (eta*y_j^- - 2*eta*y_j)
//   x_i     <- prox_{eta f_i}(xhat_i)
//   y_i     <- y_i + (2*eta*x_i - eta*x_i^-) - sum_j W_ij (2*eta*x_j - eta*x_j^-)
// Rounds are synchronous barriers; agents within a round are independent
// given the round snapshot.
struct ConsensusInit {
    Eigen::MatrixXd x0, xm1;  // local_dim x m
    Eigen::MatrixXd y0, ym1;
};

ConsensusResult solve_consensus(const ConsensusProblem& problem, const ConsensusConfig& config,
                                std::optional<ConsensusInit> init = std::nullopt,
                                const NeighborReadHook& on_neighbor_read = nullptr);

}  // namespace padpd
