#include "padpd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace padpd {

namespace {

void check_dim(const Eigen::VectorXd& x, Eigen::Index expected, const char* where) {
    if (x.size() != expected) {
        std::ostringstream msg;
        msg << where << ": point has length " << x.size() << ", expected " << expected;
        throw ShapeError(msg.str());
    }
}

void check_eta(double eta, const char* where) {
    if (!(eta > 0.0)) {
        std::ostringstream msg;
        msg << where << ": eta must be positive, got " << eta;
        throw ConfigError(msg.str());
    }
}

Eigen::VectorXd broadcast_param(const std::vector<double>& v, Eigen::Index dim,
                                const std::string& name) {
    if (v.size() == 1) return Eigen::VectorXd::Constant(dim, v[0]);
    if (static_cast<Eigen::Index>(v.size()) == dim)
        return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
    std::ostringstream msg;
    msg << "parameter \"" << name << "\" has length " << v.size() << ", expected 1 or " << dim;
    throw InvalidFunctionError(msg.str());
}

}  // namespace

ProxFunction::ProxFunction(Eigen::Index dimension, EvalFn evaluate, ProxFn prox, ProxSpec spec,
                           std::optional<QuadraticForm> quadratic)
    : dimension_(dimension),
      evaluate_(std::move(evaluate)),
      prox_(std::move(prox)),
      spec_(std::move(spec)),
      quadratic_(std::move(quadratic)) {
    if (dimension_ <= 0) throw InvalidFunctionError("function dimension must be positive");
}

double ProxFunction::evaluate(const Eigen::VectorXd& x) const {
    check_dim(x, dimension_, "evaluate");
    return evaluate_(x);
}

Eigen::VectorXd ProxFunction::prox(const Eigen::VectorXd& x, double eta) const {
    check_dim(x, dimension_, "prox");
    check_eta(eta, "prox");
    return prox_(x, eta);
}

Eigen::VectorXd prox_zero(const Eigen::VectorXd& x, double eta) {
    check_eta(eta, "prox_zero");
    return x;
}

Eigen::VectorXd prox_quadratic(const Eigen::VectorXd& curvature, const Eigen::VectorXd& x,
                               double eta) {
    check_eta(eta, "prox_quadratic");
    if (curvature.size() != x.size())
        throw ShapeError("prox_quadratic: curvature and point lengths differ");
    if ((curvature.array() < 0.0).any())
        throw InvalidFunctionError("prox_quadratic: curvature must be nonnegative");
    return x.array() / (1.0 + eta * curvature.array());
}

Eigen::VectorXd prox_quadratic(double curvature, const Eigen::VectorXd& x, double eta) {
    return prox_quadratic(Eigen::VectorXd::Constant(x.size(), curvature), x, eta);
}

Eigen::VectorXd prox_l1(double lambda, const Eigen::VectorXd& x, double eta) {
    check_eta(eta, "prox_l1");
    if (lambda < 0.0) throw InvalidFunctionError("prox_l1: lambda must be nonnegative");
    const double t = eta * lambda;
    return x.array().sign() * (x.array().abs() - t).max(0.0);
}

namespace {

// Objective of the prox subproblem, accumulated in long double so the
// coordinate search can localize minimizers below the double noise floor.
long double subproblem_value(const ProxFunction& f, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& x, double eta) {
    long double quad = 0.0L;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const long double d = static_cast<long double>(u[j]) - static_cast<long double>(x[j]);
        quad += 0.5L * d * d;
    }
    return static_cast<long double>(eta) * static_cast<long double>(f.evaluate(u)) + quad;
}

}  // namespace

Eigen::VectorXd prox_numeric_oracle(const ProxFunction& f, const Eigen::VectorXd& x, double eta,
                                    double tol) {
    check_dim(x, f.dimension(), "prox_numeric_oracle");
    check_eta(eta, "prox_numeric_oracle");
    if (!(tol > 0.0)) throw ConfigError("prox_numeric_oracle: tol must be positive");

    const Eigen::Index n = x.size();
    Eigen::VectorXd u = x;  // start at the unconstrained quadratic minimizer
    long double value = subproblem_value(f, u, x, eta);
    if (!std::isfinite(static_cast<double>(value)))
        throw OracleFailureError("prox_numeric_oracle: objective not finite at start point");

    constexpr double kGolden = 0.6180339887498949;
    const int max_sweeps = 200;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const long double sweep_start = value;
        for (Eigen::Index j = 0; j < n; ++j) {
            auto phi = [&](double t) {
                u[j] = t;
                return subproblem_value(f, u, x, eta);
            };
            const double t0 = u[j];
            const long double v0 = value;

            // Expand a bracket [lo, hi] around t0 until the center is the best
            // of the triple; strong convexity guarantees termination.
            double step = 1.0;
            double lo = t0 - step, hi = t0 + step;
            long double vlo = phi(lo), vhi = phi(hi);
            double mid = t0;
            long double vmid = v0;
            while (vlo < vmid || vhi < vmid) {
                if (vlo < vmid) {
                    hi = mid;
                    vhi = vmid;
                    mid = lo;
                    vmid = vlo;
                    lo = mid - (step *= 2.0);
                    vlo = phi(lo);
                } else {
                    lo = mid;
                    vlo = vmid;
                    mid = hi;
                    vmid = vhi;
                    hi = mid + (step *= 2.0);
                    vhi = phi(hi);
                }
                if (step > 1e12)
                    throw OracleFailureError("prox_numeric_oracle: bracket expansion ran away");
            }

            // Golden-section on [lo, hi].
            double a = lo, b = hi;
            double c1 = b - kGolden * (b - a);
            double c2 = a + kGolden * (b - a);
            long double f1 = phi(c1), f2 = phi(c2);
            while (b - a > 1e-11 * (1.0 + std::abs(a) + std::abs(b))) {
                if (f1 <= f2) {
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - kGolden * (b - a);
                    f1 = phi(c1);
                } else {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + kGolden * (b - a);
                    f2 = phi(c2);
                }
            }
            double best = (f1 <= f2) ? c1 : c2;
            long double vbest = (f1 <= f2) ? f1 : f2;

            // Golden-section stalls once value differences drop under the
            // double rounding noise of f.evaluate (x-accuracy ~ sqrt(noise)).
            // Polish with a parabola through a stencil wide enough that the
            // three values differ by far more than that noise; on a locally
            // quadratic slice its vertex is exact up to noise/(curvature*h).
            // A kinked slice is protected by the value gate below: any vertex
            // measurably worse than the golden-section point is discarded.
            {
                const double h = 1e-4 * (1.0 + std::abs(best));
                const long double vlo_s = phi(best - h);
                const long double vhi_s = phi(best + h);
                const long double curve = (vhi_s - vbest) + (vlo_s - vbest);
                if (curve > 0.0L) {
                    const double cand =
                        best - static_cast<double>(h * ((vhi_s - vlo_s) / (2.0L * curve)));
                    if (std::isfinite(cand) && std::abs(cand - best) <= h) {
                        const long double vcand = phi(cand);
                        const long double allow =
                            1e-12L * (1.0L + std::abs(static_cast<double>(vbest)));
                        if (vcand <= vbest + allow) {
                            best = cand;
                            vbest = vcand;
                        }
                    }
                }
            }

            if (vbest <= v0) {
                u[j] = best;
                value = vbest;
            } else {
                u[j] = t0;
                value = v0;
            }
        }
        if (sweep_start - value <= static_cast<long double>(tol)) return u;
    }
    throw OracleFailureError("prox_numeric_oracle: sweep budget exhausted before tolerance");
}

ProxFunction zero_function(Eigen::Index dimension) {
    return ProxFunction(
        dimension, [](const Eigen::VectorXd&) { return 0.0; },
        [](const Eigen::VectorXd& x, double) { return x; }, ProxSpec{"zero", {}},
        QuadraticForm{Eigen::VectorXd::Zero(dimension), Eigen::VectorXd::Zero(dimension)});
}

ProxFunction quadratic_function(Eigen::VectorXd curvature) {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(curvature.size());
    return quadratic_function(std::move(curvature), std::move(target));
}

ProxFunction quadratic_function(Eigen::VectorXd curvature, Eigen::VectorXd target) {
    if ((curvature.array() < 0.0).any())
        throw InvalidFunctionError("quadratic_function: curvature must be nonnegative");
    if (curvature.size() != target.size())
        throw InvalidFunctionError("quadratic_function: curvature and target lengths differ");
    const Eigen::Index dim = curvature.size();
    ProxSpec spec{"quadratic",
                  {{"curvature", {curvature.data(), curvature.data() + dim}},
                   {"target", {target.data(), target.data() + dim}}}};
    QuadraticForm qf{curvature, target};
    auto a = std::make_shared<Eigen::VectorXd>(std::move(curvature));
    auto b = std::make_shared<Eigen::VectorXd>(std::move(target));
    return ProxFunction(
        dim,
        [a, b](const Eigen::VectorXd& u) {
            return 0.5 * (a->array() * (u - *b).array().square()).sum();
        },
        // argmin of eta*(a_j/2)(u_j-b_j)^2 + (u_j-x_j)^2/2
        [a, b](const Eigen::VectorXd& x, double eta) -> Eigen::VectorXd {
            return (x.array() + eta * a->array() * b->array()) / (1.0 + eta * a->array());
        },
        std::move(spec), std::move(qf));
}

ProxFunction l1_function(double lambda, Eigen::Index dimension) {
    if (lambda < 0.0) throw InvalidFunctionError("l1_function: lambda must be nonnegative");
    return ProxFunction(
        dimension,
        [lambda](const Eigen::VectorXd& u) { return lambda * u.array().abs().sum(); },
        [lambda](const Eigen::VectorXd& x, double eta) { return prox_l1(lambda, x, eta); },
        ProxSpec{"l1", {{"lambda", {lambda}}}});
}

const std::vector<std::string>& registered_prox_tags() {
    static const std::vector<std::string> tags = {"zero", "quadratic", "l1"};
    return tags;
}

bool is_registered_prox_tag(const std::string& tag) {
    const auto& tags = registered_prox_tags();
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

ProxFunction make_prox_function(const ProxSpec& spec, Eigen::Index dimension) {
    if (spec.tag == "zero") return zero_function(dimension);
    if (spec.tag == "quadratic") {
        auto it = spec.params.find("curvature");
        if (it == spec.params.end())
            throw InvalidFunctionError("quadratic: missing \"curvature\" parameter");
        Eigen::VectorXd a = broadcast_param(it->second, dimension, "curvature");
        Eigen::VectorXd b = Eigen::VectorXd::Zero(dimension);
        if (auto t = spec.params.find("target"); t != spec.params.end())
            b = broadcast_param(t->second, dimension, "target");
        return quadratic_function(std::move(a), std::move(b));
    }
    if (spec.tag == "l1") {
        auto it = spec.params.find("lambda");
        if (it == spec.params.end() || it->second.size() != 1)
            throw InvalidFunctionError("l1: missing scalar \"lambda\" parameter");
        return l1_function(it->second[0], dimension);
    }
    throw InvalidFunctionError("unknown prox function tag \"" + spec.tag + "\"");
}

}  // namespace padpd
