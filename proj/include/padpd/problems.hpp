#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "padpd/distributed.hpp"
#include "padpd/operators.hpp"

namespace padpd {

// Deterministic uniform source. mt19937_64's state evolution is pinned by
// the standard and the output mapping below avoids std distributions (whose
// algorithms are implementation-defined), so streams are identical across
// platforms and compilers for a given seed.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : gen_(seed) {}
    // Uniform on [0, 1): top 53 bits of the raw draw.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 gen_;
};

// Three-block equality-constrained instance whose unique optimum is the
// origin: the standard witness separating the parallel primal-dual iteration
// (converges) from direct multi-block ADMM (diverges for every rho > 0).
BlockProblem example1();

struct RandomQpSpec {
    Eigen::Index q = 2;                // number of blocks
    Eigen::Index p = 3;                // constraint rows
    std::vector<Eigen::Index> dims{};  // block dimensions, size q
    std::uint64_t seed = 0;
};

struct GeneratedProblem {
    BlockProblem problem;
    Eigen::VectorXd x_star;  // stacked primal solution
    Eigen::VectorXd y_star;  // multiplier certifying it
};

// Strongly convex quadratic blocks with a KKT point constructed alongside
// (targets chosen so a sampled (x*, y*) satisfies optimality exactly, then
// verified to kkt_residual < 1e-10). Deterministic in seed.
GeneratedProblem random_qp(const RandomQpSpec& spec);

using Problem = std::variant<BlockProblem, ConsensusProblem>;

// Problem files: a versioned JSON document ("schema": 1) with decimal
// literals only, so instances are platform-stable. See README for the field
// reference. Parse errors are reported as path:line:column; validation
// errors name the violated requirement.
Problem parse_problem(const std::string& text, const std::string& source_name = "<string>");
Problem load_problem(const std::string& path);
std::string serialize_problem(const Problem& problem);

std::vector<std::string> builtin_problem_names();
bool is_builtin_problem(const std::string& name);
// seed feeds the generator-backed entries ("random-qp"); ignored elsewhere.
Problem make_builtin_problem(const std::string& name, std::uint64_t seed = 0);

}  // namespace padpd
