#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padpd/errors.hpp"

namespace padpd {

// Parameters of a separable quadratic f(u) = sum_j (a_j/2) (u_j - b_j)^2.
// Exposed so solvers that need the smooth structure (ADMM normal equations)
// can recover it instead of treating the function as a black box.
struct QuadraticForm {
    Eigen::VectorXd curvature;  // a, entrywise >= 0
    Eigen::VectorXd target;     // b
};

// Construction recipe of a registry-built function; kept for serialization.
struct ProxSpec {
    std::string tag;  // "zero", "quadratic", "l1", or "custom"
    std::map<std::string, std::vector<double>> params;
};

// A proper closed convex function together with its proximity operator.
// Convexity is a caller obligation and is not verified at runtime; the test
// oracle spot-checks midpoint convexity on samples. evaluate may return
// +infinity (indicator-style functions); prox must stay finite-valued.
class ProxFunction {
  public:
    using EvalFn = std::function<double(const Eigen::VectorXd&)>;
    using ProxFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

    ProxFunction(Eigen::Index dimension, EvalFn evaluate, ProxFn prox,
                 ProxSpec spec = {"custom", {}},
                 std::optional<QuadraticForm> quadratic = std::nullopt);

    Eigen::Index dimension() const { return dimension_; }

    double evaluate(const Eigen::VectorXd& x) const;

    // Minimizer of eta*f(u) + 0.5*||u - x||^2; unique by strong convexity,
    // nonexpansive in x.
    Eigen::VectorXd prox(const Eigen::VectorXd& x, double eta) const;

    const ProxSpec& spec() const { return spec_; }
    const std::optional<QuadraticForm>& quadratic_form() const { return quadratic_; }

  private:
    Eigen::Index dimension_;
    EvalFn evaluate_;
    ProxFn prox_;
    ProxSpec spec_;
    std::optional<QuadraticForm> quadratic_;
};

// Closed forms. All require eta > 0.
Eigen::VectorXd prox_zero(const Eigen::VectorXd& x, double eta);

// f(u) = sum_j (a_j/2) u_j^2, entrywise result x_j / (1 + eta a_j).
// Negative curvature entries are rejected.
Eigen::VectorXd prox_quadratic(const Eigen::VectorXd& curvature, const Eigen::VectorXd& x,
                               double eta);
Eigen::VectorXd prox_quadratic(double curvature, const Eigen::VectorXd& x, double eta);

// f(u) = lambda * ||u||_1, entrywise soft threshold at eta*lambda.
Eigen::VectorXd prox_l1(double lambda, const Eigen::VectorXd& x, double eta);

// Reference solver for the prox subproblem by direct numeric minimization
// (cyclic coordinate search; exact for the separable registry functions).
// Returns a point whose subproblem objective is within tol of the minimum.
// Validation-only: closed forms are the production path.
Eigen::VectorXd prox_numeric_oracle(const ProxFunction& f, const Eigen::VectorXd& x, double eta,
                                    double tol);

// Factories.
ProxFunction zero_function(Eigen::Index dimension);
ProxFunction quadratic_function(Eigen::VectorXd curvature);
ProxFunction quadratic_function(Eigen::VectorXd curvature, Eigen::VectorXd target);
ProxFunction l1_function(double lambda, Eigen::Index dimension);

// Registry used by the problem-file loader. Known tags: "zero", "quadratic"
// (params: "curvature" scalar-or-vector, optional "target"), "l1" ("lambda").
const std::vector<std::string>& registered_prox_tags();
bool is_registered_prox_tag(const std::string& tag);
ProxFunction make_prox_function(const ProxSpec& spec, Eigen::Index dimension);

}  // namespace padpd
