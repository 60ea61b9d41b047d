#include "padpd/distributed.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "padpd/errors.hpp"

namespace padpd {

void Graph::validate() const {
    if (nodes < 1) throw ValidationError("graph: must have at least one node");
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= nodes || b >= nodes)
            throw ValidationError("graph: edge endpoint out of range");
        if (a == b) throw ValidationError("graph: self-loops are not allowed");
        auto key = std::minmax(a, b);
        if (!seen.insert(key).second) throw ValidationError("graph: duplicate edge");
    }
}

std::vector<std::vector<Eigen::Index>> Graph::neighbor_lists() const {
    std::vector<std::vector<Eigen::Index>> lists(static_cast<std::size_t>(nodes));
    for (const auto& [a, b] : edges) {
        lists[static_cast<std::size_t>(a)].push_back(b);
        lists[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& l : lists) std::sort(l.begin(), l.end());
    return lists;
}

std::vector<Eigen::Index> Graph::degrees() const {
    std::vector<Eigen::Index> deg(static_cast<std::size_t>(nodes), 0);
    for (const auto& [a, b] : edges) {
        ++deg[static_cast<std::size_t>(a)];
        ++deg[static_cast<std::size_t>(b)];
    }
    return deg;
}

Graph cycle_graph(Eigen::Index m) {
    if (m < 3) throw ConfigError("cycle_graph: need at least 3 nodes");
    Graph g{m, {}};
    for (Eigen::Index i = 0; i + 1 < m; ++i) g.edges.emplace_back(i, i + 1);
    g.edges.emplace_back(0, m - 1);
    return g;
}

Graph path_graph(Eigen::Index m) {
    if (m < 1) throw ConfigError("path_graph: need at least 1 node");
    Graph g{m, {}};
    for (Eigen::Index i = 0; i + 1 < m; ++i) g.edges.emplace_back(i, i + 1);
    return g;
}

Graph complete_graph(Eigen::Index m) {
    if (m < 1) throw ConfigError("complete_graph: need at least 1 node");
    Graph g{m, {}};
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) g.edges.emplace_back(i, j);
    return g;
}

Graph star_graph(Eigen::Index m) {
    if (m < 2) throw ConfigError("star_graph: need at least 2 nodes");
    Graph g{m, {}};
    for (Eigen::Index i = 1; i < m; ++i) g.edges.emplace_back(Eigen::Index{0}, i);
    return g;
}

Eigen::MatrixXd metropolis_weights(const Graph& graph) {
    graph.validate();
    const Eigen::Index m = graph.nodes;
    const auto deg = graph.degrees();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m, m);
    for (const auto& [a, b] : graph.edges) {
        const double w =
            1.0 / (1.0 + static_cast<double>(std::max(deg[static_cast<std::size_t>(a)],
                                                      deg[static_cast<std::size_t>(b)])));
        W(a, b) = w;
        W(b, a) = w;
    }
    for (Eigen::Index i = 0; i < m; ++i) W(i, i) = 1.0 - W.row(i).sum();
    return W;
}

std::vector<std::string> WeightReport::violations() const {
    std::vector<std::string> out;
    if (!symmetric) out.emplace_back("mixing matrix must be symmetric (W = W^T)");
    if (!doubly_stochastic)
        out.emplace_back("mixing matrix rows and columns must each sum to 1 (doubly stochastic)");
    if (!nonnegative) out.emplace_back("mixing matrix entries must be nonnegative");
    if (!pattern_consistent)
        out.emplace_back(
            "nonzero off-diagonal weights must connect graph neighbors only (W_ij > 0 requires "
            "an edge between i and j)");
    if (!connected)
        out.emplace_back(
            "graph must be connected: the second-smallest eigenvalue of I - W must be positive");
    return out;
}

WeightReport validate_weights(const Eigen::MatrixXd& W, const Graph& graph) {
    if (W.rows() != W.cols()) throw ShapeError("validate_weights: matrix must be square");
    if (W.rows() != graph.nodes)
        throw ShapeError("validate_weights: matrix size must match the node count");
    graph.validate();
    const Eigen::Index m = W.rows();
    constexpr double tol = 1e-10;

    WeightReport report;
    report.symmetric = (W - W.transpose()).cwiseAbs().maxCoeff() <= tol;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    report.doubly_stochastic = (W * ones - ones).cwiseAbs().maxCoeff() <= tol &&
                               (W.transpose() * ones - ones).cwiseAbs().maxCoeff() <= tol;
    report.nonnegative = W.minCoeff() >= -1e-12;

    std::set<std::pair<Eigen::Index, Eigen::Index>> edge_set;
    for (const auto& [a, b] : graph.edges) edge_set.insert(std::minmax(a, b));
    report.pattern_consistent = true;
    for (Eigen::Index i = 0; i < m && report.pattern_consistent; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            if (std::abs(W(i, j)) > 1e-12 && !edge_set.count({i, j})) {
                report.pattern_consistent = false;
                break;
            }

    if (m == 1) {
        // A single agent is trivially in consensus with itself.
        report.lambda2 = std::numeric_limits<double>::infinity();
        report.connected = true;
    } else {
        // Eigenvalues ascending; the smallest of I - W is 0 (ones vector),
        // the second one measures algebraic connectivity.
        const Eigen::MatrixXd laplacian_like =
            Eigen::MatrixXd::Identity(m, m) - 0.5 * (W + W.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian_like,
                                                           Eigen::EigenvaluesOnly);
        report.lambda2 = eig.eigenvalues()(1);
        report.connected = report.lambda2 > 1e-10;
    }
    return report;
}

void ConsensusProblem::validate() const {
    graph.validate();
    const Eigen::Index m = graph.nodes;
    if (local_dim < 1) throw ValidationError("consensus problem: local_dim must be positive");
    if (static_cast<Eigen::Index>(costs.size()) != m)
        throw ValidationError("consensus problem: need exactly one cost per agent");
    for (std::size_t i = 0; i < costs.size(); ++i)
        if (costs[i].dimension() != local_dim)
            throw ValidationError("consensus problem: cost " + std::to_string(i) +
                                  " dimension does not match local_dim");
    const WeightReport report = validate_weights(weights, graph);
    if (!report.ok()) {
        std::string msg = "consensus problem: invalid mixing matrix:";
        for (const auto& v : report.violations()) msg += "\n  - " + v;
        throw ValidationError(msg);
    }
}

std::pair<double, double> consensus_eta_interval() { return {0.0, 0.25}; }

BlockProblem lift_consensus(const ConsensusProblem& problem) {
    problem.validate();
    const Eigen::Index m = problem.agents();
    const Eigen::Index n = problem.local_dim;
    const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(m, m) - problem.weights;

    BlockProblem lifted;
    lifted.c = Eigen::VectorXd::Zero(m * n);
    lifted.blocks.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m * n, n);
        for (Eigen::Index j = 0; j < m; ++j)
            A.block(j * n, 0, n, n) = L(j, i) * Eigen::MatrixXd::Identity(n, n);
        lifted.blocks.push_back({std::move(A), problem.costs[static_cast<std::size_t>(i)]});
    }
    return lifted;
}

namespace {

Eigen::VectorXd stack_columns(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    Eigen::VectorXd Pi(X.size() + Y.size());
    Pi << Eigen::Map<const Eigen::VectorXd>(X.data(), X.size()),
        Eigen::Map<const Eigen::VectorXd>(Y.data(), Y.size());
    return Pi;
}

}  // namespace

ConsensusResult solve_consensus(const ConsensusProblem& problem, const ConsensusConfig& config,
                                std::optional<ConsensusInit> init,
                                const NeighborReadHook& on_neighbor_read) {
    problem.validate();
    if (!(config.eta > 0.0) || !std::isfinite(config.eta))
        throw ConfigError("solve_consensus: eta must be finite and positive");
    if (!(config.tol > 0.0)) throw ConfigError("solve_consensus: tol must be positive");
    if (config.max_iter == 0) throw ConfigError("solve_consensus: max_iter must be at least 1");

    const Eigen::Index m = problem.agents();
    const Eigen::Index n = problem.local_dim;
    const double eta = config.eta;

    ConsensusResult result;
    result.eta = eta;
    if (eta >= consensus_eta_interval().second)
        result.warnings.emplace_back(
            "eta lies outside the guaranteed interval (0, 0.25); convergence is not covered by "
            "the step-size bound");

    // Closed neighborhoods, ascending: the only indices an agent may read.
    std::vector<std::vector<Eigen::Index>> closed = problem.graph.neighbor_lists();
    for (Eigen::Index i = 0; i < m; ++i) {
        auto& list = closed[static_cast<std::size_t>(i)];
        list.insert(std::lower_bound(list.begin(), list.end(), i), i);
    }

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, m);
    Eigen::MatrixXd Xprev = X, Y = X, Yprev = X;
    if (init) {
        if (init->x0.rows() != n || init->x0.cols() != m || init->xm1.rows() != n ||
            init->xm1.cols() != m || init->y0.rows() != n || init->y0.cols() != m ||
            init->ym1.rows() != n || init->ym1.cols() != m)
            throw ShapeError("solve_consensus: init matrices must be local_dim x agents");
        X = init->x0;
        Xprev = init->xm1;
        Y = init->y0;
        Yprev = init->ym1;
    }

    // The lifted problem is used only by the observer side (stopping metric
    // and records); the agent loop below touches neighborhood data only.
    const BlockProblem lifted = lift_consensus(problem);

    const auto record_round = [&](std::size_t k) {
        result.records.push_back(measure_iterate(lifted, stack_columns(X, Y), k));
        result.x_history.push_back(X);
        result.y_history.push_back(Y);
    };

    record_round(0);
    if (kkt_residual(lifted, stack_columns(X, Y), 0.0) <= config.tol) {
        result.stop_reason = StopReason::Converged;
        result.x = X;
        result.y = Y;
        return result;
    }

    result.stop_reason = StopReason::MaxIter;
    for (std::size_t k = 1; k <= config.max_iter; ++k) {
        Eigen::MatrixXd Xnext(n, m), Ynext(n, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            // xhat_i = x_i + (eta y_i^- - 2 eta y_i) - sum_j W_ij (eta y_j^- - 2 eta y_j)
            Eigen::VectorXd xhat = X.col(i) + (eta * Yprev.col(i) - 2.0 * eta * Y.col(i));
            for (Eigen::Index j : closed[static_cast<std::size_t>(i)]) {
                if (on_neighbor_read) on_neighbor_read(i, j);
                xhat -= problem.weights(i, j) * (eta * Yprev.col(j) - 2.0 * eta * Y.col(j));
            }
            Xnext.col(i) = problem.costs[static_cast<std::size_t>(i)].prox(xhat, eta);

            // y_i <- y_i + (2 eta x_i - eta x_i^-) - sum_j W_ij (2 eta x_j - eta x_j^-)
            Eigen::VectorXd ynext = Y.col(i) + (2.0 * eta * X.col(i) - eta * Xprev.col(i));
            for (Eigen::Index j : closed[static_cast<std::size_t>(i)]) {
                if (on_neighbor_read) on_neighbor_read(i, j);
                ynext -= problem.weights(i, j) * (2.0 * eta * X.col(j) - eta * Xprev.col(j));
            }
            Ynext.col(i) = ynext;
        }
        Xprev = std::move(X);
        X = std::move(Xnext);
        Yprev = std::move(Y);
        Y = std::move(Ynext);
        result.iterations = k;

        IterationRecord rec = measure_iterate(lifted, stack_columns(X, Y), k);
        const bool kept = keep_trace_record(k, config.full_trace);
        if (kept) {
            result.records.push_back(rec);
            result.x_history.push_back(X);
            result.y_history.push_back(Y);
        }

        const auto record_if_skipped = [&]() {
            if (!kept) {
                result.records.push_back(rec);
                result.x_history.push_back(X);
                result.y_history.push_back(Y);
            }
        };
        if (!std::isfinite(rec.error) || rec.error > kDivergenceThreshold) {
            record_if_skipped();
            result.stop_reason = StopReason::Diverged;
            break;
        }
        if (kkt_residual(lifted, stack_columns(X, Y), 0.0) <= config.tol) {
            record_if_skipped();
            result.stop_reason = StopReason::Converged;
            break;
        }
        if (k == config.max_iter) record_if_skipped();
    }
    result.x = X;
    result.y = Y;
    return result;
}

}  // namespace padpd
