// Command-line front end: run one solver on one problem (built-in or file),
// or run the PADPD/ADMM side-by-side comparison, emitting CSV traces and a
// key=value summary.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "padpd/baseline.hpp"
#include "padpd/distributed.hpp"
#include "padpd/errors.hpp"
#include "padpd/operators.hpp"
#include "padpd/problems.hpp"
#include "padpd/solver.hpp"
#include "padpd/trace.hpp"

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitDiverged = 3;

int exit_code_for(padpd::StopReason reason) {
    switch (reason) {
        case padpd::StopReason::Converged: return kExitConverged;
        case padpd::StopReason::MaxIter: return kExitMaxIter;
        case padpd::StopReason::Diverged: return kExitDiverged;
    }
    return kExitError;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Trace files default to <problem>_<algorithm>.csv in the current directory;
// PADPD_TRACE_DIR redirects the directory, --trace overrides the full path.
std::string trace_path(const std::string& explicit_path, const std::string& problem_label,
                       const std::string& algorithm) {
    if (!explicit_path.empty()) return explicit_path;
    std::string stem = std::filesystem::path(problem_label).stem().string();
    if (stem.empty()) stem = "problem";
    std::filesystem::path dir = ".";
    if (const char* env = std::getenv("PADPD_TRACE_DIR"); env && *env) dir = env;
    return (dir / (stem + "_" + algorithm + ".csv")).string();
}

struct RunOutcome {
    padpd::StopReason stop_reason = padpd::StopReason::MaxIter;
    std::vector<padpd::IterationRecord> records;
    double final_error = 0.0;
    double final_residual = 0.0;
    std::size_t iterations = 0;
    std::vector<std::string> warnings;
};

// Starting points are drawn deterministically from --seed rather than set to
// zero: several built-ins have their optimum at the origin, where every
// method (including the divergence demos) would start already converged.
// Identical flags still give byte-identical traces.
Eigen::VectorXd seeded_start(Eigen::Index n, std::uint64_t seed) {
    padpd::DetRng rng(seed ^ 0x9D2C5680E5B53E4DULL);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

void print_records_summary(const RunOutcome& outcome) {
    std::cout << "iterations=" << outcome.iterations << "\n";
    std::cout << "final_error=" << fmt(outcome.final_error) << "\n";
    std::cout << "final_residual=" << fmt(outcome.final_residual) << "\n";
    std::cout << "stop_reason=" << padpd::to_string(outcome.stop_reason) << "\n";
    std::cout << "diverged=" << (outcome.stop_reason == padpd::StopReason::Diverged ? "true" : "false")
              << "\n";
    for (const auto& w : outcome.warnings) std::cout << "warning=" << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "padpd: parallel primal-dual splitting for multi-block equality-constrained convex "
        "programs, with a direct-extension ADMM baseline and consensus mode"};

    std::string problem_arg;
    std::string algorithm = "padpd";
    double rho = 1.0;
    bool rho_given = false;
    double eta = 0.0;
    bool eta_given = false;
    std::size_t max_iter = 50000;
    double tol = 1e-9;
    std::string trace_arg;
    std::uint64_t seed = 0;
    bool full_trace = false;
    bool compare = false;

    app.add_option("--problem", problem_arg,
                   "Built-in problem name (see --list-problems) or path to a problem file");
    app.add_option("--algorithm", algorithm, "Solver to run")
        ->check(CLI::IsMember({"padpd", "padpd-rho0", "admm-direct", "consensus"}))
        ->capture_default_str();
    app.add_option("--rho", rho, "Penalty parameter (padpd, admm-direct)")
        ->capture_default_str()
        ->trigger_on_parse();  // so we can tell "given" from default
    app.add_option("--eta", eta, "Step size; omit to derive it from the operator norm");
    app.add_option("--max-iter", max_iter, "Iteration budget")->capture_default_str();
    app.add_option("--tol", tol, "Stopping tolerance on the KKT residual")->capture_default_str();
    app.add_option("--trace", trace_arg, "CSV trace output path (default <problem>_<algorithm>.csv)");
    app.add_option("--seed", seed,
                   "Seed for the starting point and for generator-backed built-ins (random-qp)")
        ->capture_default_str();
    app.add_flag("--full-trace", full_trace, "Record every iteration (no decimation)");
    app.add_flag("--compare", compare,
                 "Run padpd and admm-direct side by side with a shared budget and report a "
                 "verdict");

    bool list_problems = false;
    app.add_flag("--list-problems", list_problems, "Print built-in problem names and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    rho_given = app.count("--rho") > 0;
    eta_given = app.count("--eta") > 0;

    if (list_problems) {
        for (const auto& name : padpd::builtin_problem_names()) std::cout << name << "\n";
        return kExitConverged;
    }
    if (problem_arg.empty()) {
        std::cerr << "--problem is required unless --list-problems is given\n";
        return kExitError;
    }

    try {
        padpd::Problem problem = padpd::is_builtin_problem(problem_arg)
                                     ? padpd::make_builtin_problem(problem_arg, seed)
                                     : padpd::load_problem(problem_arg);

        const auto t0 = std::chrono::steady_clock::now();
        const auto wall_seconds = [&t0]() {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };

        std::cout << "problem=" << problem_arg << "\n";

        // ---- consensus mode -------------------------------------------------
        if (algorithm == "consensus") {
            const auto* consensus = std::get_if<padpd::ConsensusProblem>(&problem);
            if (!consensus)
                throw padpd::ConfigError(
                    "--algorithm consensus requires a consensus problem (kind \"consensus\")");
            padpd::ConsensusConfig config;
            const auto interval = padpd::consensus_eta_interval();
            // Graph-independent bound: L = 2, so auto-eta is 0.9/(2L) = 0.225.
            config.eta = eta_given ? eta : padpd::default_eta(2.0, 0.9);
            config.max_iter = max_iter;
            config.tol = tol;
            config.full_trace = full_trace;

            std::cout << "algorithm=consensus\n";
            std::cout << "eta=" << fmt(config.eta) << "\n";
            std::cout << "L=" << fmt(2.0) << "\n";
            std::cout << "eta_interval=(0," << fmt(interval.second) << ")\n";

            padpd::ConsensusInit init;
            const Eigen::Index n = consensus->local_dim;
            const Eigen::Index m = consensus->agents();
            const Eigen::VectorXd x_draw = seeded_start(n * m, seed);
            const Eigen::VectorXd y_draw = seeded_start(n * m, seed + 1);
            init.x0 = Eigen::Map<const Eigen::MatrixXd>(x_draw.data(), n, m);
            init.xm1 = init.x0;
            init.y0 = Eigen::Map<const Eigen::MatrixXd>(y_draw.data(), n, m);
            init.ym1 = init.y0;
            padpd::ConsensusResult result = padpd::solve_consensus(*consensus, config, init);
            const std::string path = trace_path(trace_arg, problem_arg, algorithm);
            padpd::write_trace_csv(path, result.records);

            RunOutcome outcome;
            outcome.stop_reason = result.stop_reason;
            outcome.iterations = result.iterations;
            outcome.final_error = result.records.back().error;
            outcome.final_residual = padpd::kkt_residual(
                padpd::lift_consensus(*consensus),
                [&] {
                    Eigen::VectorXd Pi(result.x.size() + result.y.size());
                    Pi << Eigen::Map<const Eigen::VectorXd>(result.x.data(), result.x.size()),
                        Eigen::Map<const Eigen::VectorXd>(result.y.data(), result.y.size());
                    return Pi;
                }(),
                0.0);
            outcome.warnings = result.warnings;
            print_records_summary(outcome);
            std::cout << "trace=" << path << "\n";
            std::cout << "wall_time_s=" << fmt(wall_seconds()) << "\n";
            return exit_code_for(result.stop_reason);
        }

        const auto* block = std::get_if<padpd::BlockProblem>(&problem);
        if (!block)
            throw padpd::ConfigError("--algorithm " + algorithm +
                                     " requires a block problem; use --algorithm consensus for "
                                     "consensus problems");

        // ---- side-by-side comparison ---------------------------------------
        if (compare) {
            padpd::SolverConfig pd_config;
            pd_config.rho = (algorithm == "padpd-rho0") ? 0.0 : rho;
            pd_config.max_iter = max_iter;
            pd_config.tol = tol;
            pd_config.full_trace = full_trace;
            if (eta_given) {
                pd_config.eta_policy = padpd::EtaPolicy::Explicit;
                pd_config.eta = eta;
            }
            const Eigen::VectorXd start = seeded_start(block->stacked_dim(), seed);
            padpd::SolveResult pd = padpd::solve(*block, pd_config, {{start, start}});
            std::cout << "padpd_rho=" << fmt(pd.rho) << "\n";
            std::cout << "padpd_eta=" << fmt(pd.eta) << "\n";
            std::cout << "padpd_L=" << fmt(pd.lipschitz) << "\n";
            if (pd.lipschitz > 0)
                std::cout << "padpd_eta_interval=(0," << fmt(1.0 / (2.0 * pd.lipschitz)) << ")\n";
            std::cout << "padpd_iterations=" << pd.state.k << "\n";
            std::cout << "padpd_final_error=" << fmt(pd.records.back().error) << "\n";
            std::cout << "padpd_stop_reason=" << padpd::to_string(pd.stop_reason) << "\n";
            for (const auto& w : pd.warnings) std::cout << "warning=" << w << "\n";

            bool admm_ran = false;
            padpd::AdmmResult admm;
            if (pd_config.rho > 0.0) {
                padpd::AdmmConfig admm_config;
                admm_config.rho = pd_config.rho;
                admm_config.max_iter = max_iter;
                admm_config.tol = tol;
                admm_config.full_trace = full_trace;
                admm = padpd::admm_direct_multiblock(
                    *block, admm_config,
                    {{start.head(block->primal_dim()), start.tail(block->dual_dim())}});
                admm_ran = true;
                std::cout << "admm_iterations=" << admm.iterations << "\n";
                std::cout << "admm_final_error=" << fmt(admm.records.back().error) << "\n";
                std::cout << "admm_stop_reason=" << padpd::to_string(admm.stop_reason) << "\n";
                std::cout << "admm_diverged=" << (admm.diverged ? "true" : "false") << "\n";
            } else {
                std::cout << "admm_stop_reason=rejected (rho must be positive)\n";
            }

            // Two-column error CSV joined on k; absent entries stay empty.
            std::map<std::size_t, std::pair<std::string, std::string>> rows;
            for (const auto& rec : pd.records) rows[rec.k].first = fmt(rec.error);
            if (admm_ran)
                for (const auto& rec : admm.records) rows[rec.k].second = fmt(rec.error);
            const std::string path = trace_path(trace_arg, problem_arg, "compare");
            std::ofstream out(path, std::ios::binary);
            if (!out) throw padpd::Error("trace: cannot open " + path + " for writing");
            out << "k,padpd_error,admm_error\n";
            for (const auto& [k, cells] : rows)
                out << k << "," << cells.first << "," << cells.second << "\n";
            out.flush();
            if (!out) throw padpd::Error("trace: failed writing " + path);
            std::cout << "trace=" << path << "\n";

            std::string verdict = "padpd: ";
            verdict += padpd::to_string(pd.stop_reason);
            verdict += "; admm-direct: ";
            verdict += admm_ran ? padpd::to_string(admm.stop_reason) : "rejected (rho must be positive)";
            std::cout << "verdict=" << verdict << "\n";
            std::cout << "wall_time_s=" << fmt(wall_seconds()) << "\n";
            return kExitConverged;
        }

        // ---- single-algorithm runs ------------------------------------------
        if (algorithm == "admm-direct") {
            padpd::AdmmConfig config;
            config.rho = rho;
            config.max_iter = max_iter;
            config.tol = tol;
            config.full_trace = full_trace;
            std::cout << "algorithm=admm-direct\n";
            std::cout << "rho=" << fmt(config.rho) << "\n";
            const Eigen::VectorXd start = seeded_start(block->stacked_dim(), seed);
            padpd::AdmmResult result = padpd::admm_direct_multiblock(
                *block, config,
                {{start.head(block->primal_dim()), start.tail(block->dual_dim())}});
            const std::string path = trace_path(trace_arg, problem_arg, algorithm);
            padpd::write_trace_csv(path, result.records);

            Eigen::VectorXd Pi(result.x.size() + result.y.size());
            Pi << result.x, result.y;
            RunOutcome outcome;
            outcome.stop_reason = result.stop_reason;
            outcome.iterations = result.iterations;
            outcome.final_error = result.records.back().error;
            outcome.final_residual = padpd::kkt_residual(*block, Pi, config.rho);
            print_records_summary(outcome);
            std::cout << "trace=" << path << "\n";
            std::cout << "wall_time_s=" << fmt(wall_seconds()) << "\n";
            return exit_code_for(result.stop_reason);
        }

        padpd::SolverConfig config;
        config.rho = (algorithm == "padpd-rho0") ? 0.0 : rho;
        config.max_iter = max_iter;
        config.tol = tol;
        config.full_trace = full_trace;
        if (eta_given) {
            config.eta_policy = padpd::EtaPolicy::Explicit;
            config.eta = eta;
        }
        if (algorithm == "padpd-rho0" && rho_given && rho != 0.0)
            std::cout << "note=--rho ignored by padpd-rho0 (penalty forced to 0)\n";

        std::cout << "algorithm=" << algorithm << "\n";
        std::cout << "rho=" << fmt(config.rho) << "\n";
        const Eigen::VectorXd start = seeded_start(block->stacked_dim(), seed);
        padpd::SolveResult result = padpd::solve(*block, config, {{start, start}});
        std::cout << "eta=" << fmt(result.eta) << "\n";
        std::cout << "L=" << fmt(result.lipschitz) << "\n";
        if (result.lipschitz > 0)
            std::cout << "eta_interval=(0," << fmt(1.0 / (2.0 * result.lipschitz)) << ")\n";

        const std::string path = trace_path(trace_arg, problem_arg, algorithm);
        padpd::write_trace_csv(path, result.records);

        RunOutcome outcome;
        outcome.stop_reason = result.stop_reason;
        outcome.iterations = result.state.k;
        outcome.final_error = result.records.back().error;
        outcome.final_residual = padpd::kkt_residual(*block, result.state.current, config.rho);
        outcome.warnings = result.warnings;
        print_records_summary(outcome);
        std::cout << "trace=" << path << "\n";
        std::cout << "wall_time_s=" << fmt(wall_seconds()) << "\n";
        return exit_code_for(result.stop_reason);
    } catch (const padpd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
