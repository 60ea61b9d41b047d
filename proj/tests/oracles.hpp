// Independent reference implementations the test suites check the library
// against. Everything here is deliberately written straight-line from the
// update equations — no shared code with src/ beyond the prox callbacks.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ProxFn = std::function<VectorXd(const VectorXd&, double)>;

struct TwoBlockState {
    VectorXd x, z, y;
    VectorXd xm1, zm1, ym1;
};

// Literal transcription of the two-block update equations (augmented form):
//   xhat = x_k - 2 eta A^T y_k - 2 eta rho A^T A x_k - 2 eta rho A^T B z_k
//          + eta A^T y_{k-1} + eta rho A^T A x_{k-1} + eta rho A^T B z_{k-1}
//          + eta rho A^T c
//   zhat analogously with B; prox steps; dual line
//   y_{k+1} = y_k + 2 eta A x_k + 2 eta B z_k - eta A x_{k-1} - eta B z_{k-1} - eta c
inline void two_block_step(TwoBlockState& s, const MatrixXd& A, const MatrixXd& B,
                           const VectorXd& c, double rho, double eta, const ProxFn& prox_f,
                           const ProxFn& prox_g) {
    VectorXd xhat = s.x - 2 * eta * A.transpose() * s.y -
                    2 * eta * rho * A.transpose() * A * s.x -
                    2 * eta * rho * A.transpose() * B * s.z + eta * A.transpose() * s.ym1 +
                    eta * rho * A.transpose() * A * s.xm1 +
                    eta * rho * A.transpose() * B * s.zm1 + eta * rho * A.transpose() * c;
    VectorXd zhat = s.z - 2 * eta * B.transpose() * s.y -
                    2 * eta * rho * B.transpose() * A * s.x -
                    2 * eta * rho * B.transpose() * B * s.z + eta * B.transpose() * s.ym1 +
                    eta * rho * B.transpose() * A * s.xm1 +
                    eta * rho * B.transpose() * B * s.zm1 + eta * rho * B.transpose() * c;
    VectorXd ynext = s.y + 2 * eta * A * s.x + 2 * eta * B * s.z - eta * A * s.xm1 -
                     eta * B * s.zm1 - eta * c;
    s.xm1 = s.x;
    s.zm1 = s.z;
    s.ym1 = s.y;
    s.x = prox_f(xhat, eta);
    s.z = prox_g(zhat, eta);
    s.y = ynext;
}

// Standard-Lagrangian special case (rho = 0): only dual history in the hats.
inline void two_block_rho0_step(TwoBlockState& s, const MatrixXd& A, const MatrixXd& B,
                                const VectorXd& c, double eta, const ProxFn& prox_f,
                                const ProxFn& prox_g) {
    VectorXd xhat = s.x - 2 * eta * A.transpose() * s.y + eta * A.transpose() * s.ym1;
    VectorXd zhat = s.z - 2 * eta * B.transpose() * s.y + eta * B.transpose() * s.ym1;
    VectorXd ynext = s.y + 2 * eta * A * s.x + 2 * eta * B * s.z - eta * A * s.xm1 -
                     eta * B * s.zm1 - eta * c;
    s.xm1 = s.x;
    s.zm1 = s.z;
    s.ym1 = s.y;
    s.x = prox_f(xhat, eta);
    s.z = prox_g(zhat, eta);
    s.y = ynext;
}

struct MultiBlockState {
    std::vector<VectorXd> x, xm1;
    VectorXd y, ym1;
};

// Straight-line multi-block update. The constant term carries eta*rho*A_i^T c,
// consistent with the forward-reflected point of the splitting operator
// (-2 eta + eta applied to the affine part leaves a +eta factor).
inline void multi_block_step(MultiBlockState& s, const std::vector<MatrixXd>& A,
                             const VectorXd& c, double rho, double eta,
                             const std::vector<ProxFn>& prox) {
    const std::size_t q = A.size();
    std::vector<VectorXd> xhat(q);
    for (std::size_t i = 0; i < q; ++i) {
        VectorXd v = s.x[i] - 2 * eta * A[i].transpose() * s.y +
                     eta * A[i].transpose() * s.ym1 + eta * rho * A[i].transpose() * c;
        for (std::size_t j = 0; j < q; ++j)
            v += -2 * eta * rho * A[i].transpose() * A[j] * s.x[j] +
                 eta * rho * A[i].transpose() * A[j] * s.xm1[j];
        xhat[i] = v;
    }
    VectorXd ynext = s.y - eta * c;
    for (std::size_t i = 0; i < q; ++i)
        ynext += 2 * eta * A[i] * s.x[i] - eta * A[i] * s.xm1[i];
    s.xm1 = s.x;
    s.ym1 = s.y;
    for (std::size_t i = 0; i < q; ++i) s.x[i] = prox[i](xhat[i], eta);
    s.y = ynext;
}

// rho = 0 multi-block special case, transcribed separately on purpose.
inline void multi_block_rho0_step(MultiBlockState& s, const std::vector<MatrixXd>& A,
                                  const VectorXd& c, double eta,
                                  const std::vector<ProxFn>& prox) {
    const std::size_t q = A.size();
    std::vector<VectorXd> xhat(q);
    for (std::size_t i = 0; i < q; ++i)
        xhat[i] = s.x[i] - 2 * eta * A[i].transpose() * s.y + eta * A[i].transpose() * s.ym1;
    VectorXd ynext = s.y - eta * c;
    for (std::size_t i = 0; i < q; ++i)
        ynext += 2 * eta * A[i] * s.x[i] - eta * A[i] * s.xm1[i];
    s.xm1 = s.x;
    s.ym1 = s.y;
    for (std::size_t i = 0; i < q; ++i) s.x[i] = prox[i](xhat[i], eta);
    s.y = ynext;
}

// Spectral norm via full SVD — the cross-check for the power-iteration code.
inline double svd_spectral_norm(const MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(M);
    return svd.singularValues()(0);
}

// KKT point of an all-quadratic equality-constrained problem by one dense
// linear solve of the stationarity + feasibility system:
//   [ diag(a)  Abar^T ] [x]   [ a .* b ]
//   [ Abar     0      ] [y] = [ c      ]
struct QuadKkt {
    VectorXd x;  // stacked primal
    VectorXd y;
    bool solvable = false;
};

inline QuadKkt quadratic_kkt(const std::vector<MatrixXd>& A,
                             const std::vector<VectorXd>& curvature,
                             const std::vector<VectorXd>& target, const VectorXd& c) {
    Eigen::Index N = 0;
    for (const auto& Ai : A) N += Ai.cols();
    const Eigen::Index p = c.size();
    MatrixXd K = MatrixXd::Zero(N + p, N + p);
    VectorXd rhs(N + p);
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        const Eigen::Index n_i = A[i].cols();
        K.block(off, off, n_i, n_i) = curvature[i].asDiagonal();
        K.block(off, N, n_i, p) = A[i].transpose();
        K.block(N, off, p, n_i) = A[i];
        rhs.segment(off, n_i) = curvature[i].cwiseProduct(target[i]);
        off += n_i;
    }
    rhs.tail(p) = c;

    Eigen::FullPivLU<MatrixXd> lu(K);
    QuadKkt out;
    VectorXd sol = lu.solve(rhs);
    if ((K * sol - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm())) {
        out.x = sol.head(N);
        out.y = sol.tail(p);
        out.solvable = true;
    }
    return out;
}

}  // namespace oracle
