#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "padpd/errors.hpp"
#include "padpd/problems.hpp"
#include "padpd/solver.hpp"

using namespace padpd;

namespace {

Eigen::VectorXd draw(DetRng& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

oracle::ProxFn prox_of(const ProxFunction& f) {
    return [&f](const Eigen::VectorXd& x, double eta) { return f.prox(x, eta); };
}

// Deterministic Fisher-Yates so the permutation cases are reproducible
// everywhere (std::shuffle's draw sequence is implementation-defined).
std::vector<Eigen::Index> random_permutation(DetRng& rng, Eigen::Index count) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (Eigen::Index i = count - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.uniform(0.0, static_cast<double>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

}  // namespace

TEST_CASE("a KKT point is a fixed point of the iteration") {
    const GeneratedProblem gen = random_qp({2, 3, {2, 2}, 5});
    const BlockProblem& problem = gen.problem;
    Eigen::VectorXd star(problem.stacked_dim());
    star << gen.x_star, gen.y_star;

    REQUIRE(kkt_residual(problem, star, 1.0) <= 1e-10);

    const SplittingOperator op = build_operator(problem, 1.0);
    const double eta = default_eta(operator_lipschitz(op.M), 0.9);
    SolverState state = make_solver_state(op, star, star);
    for (int k = 0; k < 100; ++k) frb_step(state, op, problem, eta);
    CHECK((state.current - star).norm() <= 1e-8);
    CHECK(kkt_residual(problem, state.current, 1.0) <= 1e-8);
}

TEST_CASE("the all-zero start is already optimal for the three-block test problem") {
    const BlockProblem problem = example1();
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.stacked_dim());
    CHECK(kkt_residual(problem, zero, 1.0) == 0.0);
    CHECK(kkt_residual(problem, zero, 0.0) == 0.0);

    SolverConfig config;
    config.rho = 1.0;
    const SolveResult result = solve(problem, config);
    CHECK(result.stop_reason == StopReason::Converged);
    CHECK(result.records.size() == 1);
    CHECK(result.records[0].error == 0.0);
}

TEST_CASE("kkt_residual flags non-optimal points") {
    const BlockProblem problem = example1();
    DetRng rng(3);
    Eigen::VectorXd Pi = draw(rng, problem.stacked_dim());
    CHECK(kkt_residual(problem, Pi, 1.0) > 1e-3);
    CHECK_THROWS_AS(kkt_residual(problem, Eigen::VectorXd::Zero(2), 1.0), ShapeError);
}

TEST_CASE("measure_iterate reports the trace quantities") {
    const BlockProblem problem = example1();
    Eigen::VectorXd Pi(7);
    Pi << 1, 2, 3, 4, 1, 1, 1;
    const IterationRecord rec = measure_iterate(problem, Pi, 42);
    CHECK(rec.k == 42);
    CHECK(rec.error == doctest::Approx(std::sqrt(30.0)).epsilon(1e-15));
    // A_1 (1,2) + A_2 3 + A_3 4 = (10, 14, 17)
    CHECK(rec.primal_residual == doctest::Approx(std::sqrt(585.0)).epsilon(1e-15));
    CHECK(rec.dual_norm == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(rec.objective == doctest::Approx(0.5).epsilon(1e-15));  // only x_1's first coordinate
}

TEST_CASE("default_eta") {
    CHECK(default_eta(2.0, 0.9) == 0.225);
    CHECK(default_eta(0.5, 0.5) == 0.5);
    CHECK(default_eta(21.3217, 0.8528) == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(default_eta(0.0, 0.3) == 0.3);  // constant H: any positive step works
    CHECK_THROWS_AS(default_eta(2.0, 0.0), ConfigError);
    CHECK_THROWS_AS(default_eta(2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(default_eta(2.0, -0.1), ConfigError);
    CHECK_THROWS_AS(default_eta(-1.0, 0.5), ConfigError);
}

TEST_CASE("five thousand steps match the literal multi-block transcription") {
    const BlockProblem problem = example1();
    std::vector<Eigen::MatrixXd> A;
    std::vector<oracle::ProxFn> prox;
    for (const auto& block : problem.blocks) {
        A.push_back(block.A);
        prox.push_back(prox_of(block.f));
    }

    DetRng rng(2026);
    const Eigen::VectorXd Pi0 = draw(rng, 7, -2.0, 2.0);

    for (double rho : {1.0, 0.0}) {
        const double eta = (rho == 1.0) ? 0.02 : 0.1;
        const SplittingOperator op = build_operator(problem, rho);
        SolverState state = make_solver_state(op, Pi0, Pi0);

        oracle::MultiBlockState ref;
        ref.x = {Pi0.segment(0, 2), Pi0.segment(2, 1), Pi0.segment(3, 1)};
        ref.xm1 = ref.x;
        ref.y = Pi0.tail(3);
        ref.ym1 = ref.y;

        double drift = 0.0;
        for (int k = 0; k < 5000; ++k) {
            frb_step(state, op, problem, eta);
            if (rho == 0.0)
                oracle::multi_block_rho0_step(ref, A, problem.c, eta, prox);
            else
                oracle::multi_block_step(ref, A, problem.c, rho, eta, prox);

            Eigen::VectorXd stacked(7);
            stacked << ref.x[0], ref.x[1], ref.x[2], ref.y;
            drift = std::max(drift, (state.current - stacked).cwiseAbs().maxCoeff());
        }
        CHECK(drift <= 1e-12);
    }
}

TEST_CASE("two-block problems match the specialized transcription to near roundoff") {
    const GeneratedProblem gen = random_qp({2, 3, {2, 2}, 11});
    const BlockProblem& problem = gen.problem;
    const Eigen::MatrixXd A = problem.blocks[0].A, B = problem.blocks[1].A;

    DetRng rng(12);
    const Eigen::VectorXd Pi0 = draw(rng, problem.stacked_dim());

    for (double rho : {1.0, 0.0}) {
        const SplittingOperator op = build_operator(problem, rho);
        const double eta = default_eta(operator_lipschitz(op.M), 0.9);
        SolverState state = make_solver_state(op, Pi0, Pi0);

        oracle::TwoBlockState ref;
        ref.x = Pi0.segment(0, 2);
        ref.z = Pi0.segment(2, 2);
        ref.y = Pi0.tail(3);
        ref.xm1 = ref.x;
        ref.zm1 = ref.z;
        ref.ym1 = ref.y;
        const auto prox_f = prox_of(problem.blocks[0].f);
        const auto prox_g = prox_of(problem.blocks[1].f);

        double drift = 0.0;
        for (int k = 0; k < 5000; ++k) {
            frb_step(state, op, problem, eta);
            if (rho == 0.0)
                oracle::two_block_rho0_step(ref, A, B, problem.c, eta, prox_f, prox_g);
            else
                oracle::two_block_step(ref, A, B, problem.c, rho, eta, prox_f, prox_g);

            Eigen::VectorXd stacked(problem.stacked_dim());
            stacked << ref.x, ref.z, ref.y;
            drift = std::max(drift, (state.current - stacked).cwiseAbs().maxCoeff());
        }
        CHECK(drift <= 1e-14);
    }
}

TEST_CASE("block update order does not change the iterate, bitwise") {
    const BlockProblem problem = example1();
    const SplittingOperator op = build_operator(problem, 1.0);
    const double eta = 0.02;
    DetRng rng(77);

    SolverState reference = make_solver_state(op, draw(rng, 7), draw(rng, 7));
    SolverState shuffled = reference;

    int cases = 0;
    for (int k = 0; k < 120; ++k) {
        const std::vector<Eigen::Index> order = random_permutation(rng, problem.q() + 1);
        frb_step(reference, op, problem, eta);
        frb_step_ordered(shuffled, op, problem, eta, order);
        REQUIRE(shuffled.current == reference.current);
        REQUIRE(shuffled.forward_current == reference.forward_current);
        ++cases;
    }
    CHECK(cases >= 100);

    const std::vector<Eigen::Index> too_short = {0, 1};
    CHECK_THROWS_AS(frb_step_ordered(shuffled, op, problem, eta, too_short), ConfigError);
    const std::vector<Eigen::Index> repeated = {0, 1, 1, 3};
    CHECK_THROWS_AS(frb_step_ordered(shuffled, op, problem, eta, repeated), ConfigError);
    const std::vector<Eigen::Index> out_of_range = {0, 1, 2, 4};
    CHECK_THROWS_AS(frb_step_ordered(shuffled, op, problem, eta, out_of_range), ConfigError);
}

TEST_CASE("one forward evaluation per iteration after warm-up") {
    const BlockProblem problem = example1();
    const SplittingOperator op = build_operator(problem, 1.0);
    DetRng rng(5);

    const Eigen::VectorXd Pi0 = draw(rng, 7);
    SolverState state = make_solver_state(op, Pi0, Pi0);
    CHECK(state.h_evaluations == 1);  // shared history costs a single evaluation
    const std::size_t K = 250;
    for (std::size_t k = 0; k < K; ++k) frb_step(state, op, problem, 0.02);
    CHECK(state.h_evaluations == K + 1);
    CHECK(state.k == K);

    SolverState distinct = make_solver_state(op, Pi0, draw(rng, 7));
    CHECK(distinct.h_evaluations == 2);  // distinct history needs both endpoints
}

TEST_CASE("solve converges on the three-block test problem from a nonzero start") {
    const BlockProblem problem = example1();
    DetRng rng(9);
    const Eigen::VectorXd Pi0 = draw(rng, 7, -2.0, 2.0);

    SolverConfig config;
    config.rho = 1.0;
    config.eta_policy = EtaPolicy::Explicit;
    config.eta = 0.02;
    config.max_iter = 10000;
    config.tol = 1e-14;  // keep iterating; this run measures the error decay
    const SolveResult result = solve(problem, config, std::make_pair(Pi0, Pi0));

    CHECK(result.eta == 0.02);
    CHECK(result.rho == 1.0);
    CHECK(std::abs(result.lipschitz - 21.3217) <= 5e-4);
    CHECK(result.warnings.empty());

    // records are dense here (well under the decimation limit)
    REQUIRE(result.records.size() == 10001);
    const double e100 = result.records[100].error;
    const double e10000 = result.records[10000].error;
    CHECK(result.records[100].k == 100);
    CHECK(e10000 < e100);
    CHECK(e10000 < 1e-6);
}

TEST_CASE("solve with auto step size converges and stops on the KKT residual") {
    const GeneratedProblem gen = random_qp({3, 4, {2, 1, 2}, 21});
    SolverConfig config;
    config.rho = 1.0;
    config.max_iter = 200000;
    config.tol = 1e-9;
    DetRng rng(13);
    const Eigen::VectorXd Pi0 = draw(rng, gen.problem.stacked_dim());
    const SolveResult result = solve(gen.problem, config, std::make_pair(Pi0, Pi0));

    CHECK(result.stop_reason == StopReason::Converged);
    CHECK(result.eta == doctest::Approx(0.9 / (2.0 * result.lipschitz)).epsilon(1e-12));
    CHECK(kkt_residual(gen.problem, result.state.current, 1.0) <= 1e-9);

    Eigen::VectorXd star(gen.problem.stacked_dim());
    star << gen.x_star, gen.y_star;
    CHECK((result.state.current.head(gen.problem.primal_dim()) - gen.x_star).norm() <= 1e-6);
}

TEST_CASE("single-block quadratic program converges") {
    DetRng rng(19);
    BlockProblem problem;
    Eigen::MatrixXd A(2, 2);
    A << 2, 0, 1, 1;
    Eigen::VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b << 0.5, -0.5;
    problem.blocks.push_back({A, quadratic_function(a, b)});
    problem.c = (Eigen::VectorXd(2) << 1.0, 0.0).finished();

    SolverConfig config;
    config.rho = 1.0;
    config.max_iter = 100000;
    config.tol = 1e-10;
    const SolveResult result = solve(problem, config, std::make_pair(
        draw(rng, 4), draw(rng, 4)));
    CHECK(result.stop_reason == StopReason::Converged);

    const oracle::QuadKkt ref = oracle::quadratic_kkt({A}, {a}, {b}, problem.c);
    REQUIRE(ref.solvable);
    CHECK((result.state.current.head(2) - ref.x).norm() <= 1e-7);
    CHECK((result.state.current.tail(2) - ref.y).norm() <= 1e-7);
}

TEST_CASE("an out-of-range step size carries a warning") {
    const BlockProblem problem = example1();
    SolverConfig config;
    config.rho = 1.0;
    config.eta_policy = EtaPolicy::Explicit;
    config.eta = 1.0;  // far above 1/(2L) ~ 0.0234
    config.max_iter = 5000;
    DetRng rng(4);
    const Eigen::VectorXd Pi0 = draw(rng, 7);
    const SolveResult result = solve(problem, config, std::make_pair(Pi0, Pi0));

    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("outside the guaranteed interval") != std::string::npos);
}

TEST_CASE("divergence is reported with the last finite iterate") {
    // A deliberately unstable step size on a problem whose optimum is not at
    // the start point; the error blows past the threshold.
    const GeneratedProblem gen = random_qp({2, 3, {2, 2}, 33});
    SolverConfig config;
    config.rho = 1.0;
    config.eta_policy = EtaPolicy::Explicit;
    config.eta = 10.0;
    config.max_iter = 100000;
    DetRng rng(6);
    const Eigen::VectorXd Pi0 = draw(rng, gen.problem.stacked_dim());
    const SolveResult result = solve(gen.problem, config, std::make_pair(Pi0, Pi0));

    CHECK(result.stop_reason == StopReason::Diverged);
    CHECK(to_string(result.stop_reason) == std::string("diverged"));
    CHECK(result.records.back().error > 1.0);  // grew before the stop

    // Direct stepping surfaces the typed error once values leave the finite
    // range; the exception carries the last finite iterate and its index.
    const SplittingOperator op = build_operator(gen.problem, 1.0);
    SolverState state = make_solver_state(op, Pi0, Pi0);
    bool threw = false;
    try {
        for (int k = 0; k < 100000; ++k) frb_step(state, op, gen.problem, 10.0);
    } catch (const DivergenceError& e) {
        threw = true;
        CHECK(e.last_finite.allFinite());
        CHECK(e.at_iteration > 0);
    }
    CHECK(threw);
}

TEST_CASE("configuration errors are typed and eager") {
    const BlockProblem problem = example1();
    SolverConfig config;

    config.rho = -1.0;
    CHECK_THROWS_AS(solve(problem, config), ConfigError);

    config = SolverConfig{};
    config.eta_policy = EtaPolicy::Explicit;
    config.eta = 0.0;
    CHECK_THROWS_AS(solve(problem, config), ConfigError);

    config = SolverConfig{};
    config.tol = 0.0;
    CHECK_THROWS_AS(solve(problem, config), ConfigError);

    config = SolverConfig{};
    config.max_iter = 0;
    CHECK_THROWS_AS(solve(problem, config), ConfigError);

    config = SolverConfig{};
    config.safety = 1.5;
    CHECK_THROWS_AS(solve(problem, config), ConfigError);

    const SplittingOperator op = build_operator(problem, 1.0);
    CHECK_THROWS_AS(make_solver_state(op, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)),
                    ShapeError);
}

TEST_CASE("trace decimation keeps every record up to the cap, then every tenth") {
    CHECK(keep_trace_record(0, false));
    CHECK(keep_trace_record(100000, false));
    CHECK(!keep_trace_record(100001, false));
    CHECK(keep_trace_record(100010, false));
    CHECK(keep_trace_record(100001, true));
}
