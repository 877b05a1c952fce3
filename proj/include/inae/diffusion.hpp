#pragma once

#include <cmath>

#include <Eigen/SparseCholesky>

#include "inae/common.hpp"
#include "inae/model.hpp"

namespace inae {

/// Features H^t being contracted, with the folded step constant dt*gamma.
struct DiffusionState {
    Matrix H_prev;
    double dt_gamma = 1.0;
    Index t = 0;

    void validate() const {
        detail::require(H_prev.allFinite(), "diffusion state must be finite");
        detail::require(dt_gamma > 0.0, "dt_gamma must be > 0");
    }

    /// Advances to H^{t+1} = (I + dt_gamma L)^{-1} H^t.
    void step(const SparseMatrix& L);
};

namespace detail {

inline double max_asymmetry(const SparseMatrix& L) {
    const SparseMatrix diff = L - SparseMatrix(L.transpose());
    double worst = 0.0;
    for (Index c = 0; c < diff.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(diff, c); it; ++it) {
            worst = std::max(worst, std::abs(it.value()));
        }
    }
    return worst;
}

inline SparseMatrix shifted_identity(const SparseMatrix& L, double scale) {
    SparseMatrix I(L.rows(), L.cols());
    I.setIdentity();
    return I + scale * L;
}

} // namespace detail

/// One implicit Euler step of dH/dt = -gamma L H, i.e. the solution of
/// (I + dt_gamma L) H_next^T = H^T, via sparse Cholesky of the SPD system matrix.
inline Matrix implicit_euler_step(const Matrix& H, const SparseMatrix& L, double dt_gamma) {
    detail::require(L.rows() == L.cols() && L.rows() == H.cols(),
                    "implicit_euler_step: Laplacian must be N x N with N = columns of H");
    detail::require(dt_gamma > 0.0, "implicit_euler_step: dt_gamma must be > 0");
    detail::require(detail::max_asymmetry(L) <= 1e-8, "implicit_euler_step: Laplacian is not symmetric");
    Eigen::SimplicialLLT<SparseMatrix> chol(detail::shifted_identity(L, dt_gamma));
    if (chol.info() != Eigen::Success) {
        throw invalid_argument("implicit_euler_step: I + dt_gamma L is not positive definite");
    }
    const Matrix rhs = H.transpose();
    return Matrix(chol.solve(rhs)).transpose();
}

inline Matrix implicit_euler_step(const Matrix& H, const Matrix& L, double dt_gamma) {
    return implicit_euler_step(H, SparseMatrix(L.sparseView()), dt_gamma);
}

inline void DiffusionState::step(const SparseMatrix& L) {
    validate();
    H_prev = implicit_euler_step(H_prev, L, dt_gamma);
    ++t;
}

/// tr(H L H^T) without forming the N x N product.
inline double laplacian_trace(const Matrix& H, const SparseMatrix& L) {
    detail::require(L.rows() == H.cols() && L.cols() == H.cols(), "laplacian_trace: shape mismatch");
    return (H * L).cwiseProduct(H).sum();
}

/// Phi(H_new) = ||H_new - H_prev||_F^2 + dt tr(H_new L H_new^T).
inline double phi(const Matrix& H_new, const Matrix& H_prev, const SparseMatrix& L, double dt) {
    detail::require(H_new.rows() == H_prev.rows() && H_new.cols() == H_prev.cols(),
                    "phi: H_new is " + detail::shape(H_new) + ", H_prev is " + detail::shape(H_prev));
    return (H_new - H_prev).squaredNorm() + dt * laplacian_trace(H_new, L);
}

inline double phi(const Matrix& H_new, const Matrix& H_prev, const Matrix& L, double dt) {
    return phi(H_new, H_prev, SparseMatrix(L.sparseView()), dt);
}

/// dPhi/dH = 2 (H - H_prev) + dt H (L + L^T).
inline Matrix phi_feature_gradient(const Matrix& H, const Matrix& H_prev, const SparseMatrix& L, double dt) {
    detail::require(H.rows() == H_prev.rows() && H.cols() == H_prev.cols() && L.rows() == H.cols(),
                    "phi gradient: shape mismatch");
    const SparseMatrix sym = L + SparseMatrix(L.transpose());
    return 2.0 * (H - H_prev) + dt * (H * sym);
}

struct EncoderGradient {
    Matrix W1;
    Vector b1;
};

/// Gradient of phi(encode(p, X), H_prev, L, dt) with respect to the encoder weights.
///
/// With H = s(W1 X + b1 1^T) and G = dPhi/dH, the sigmoid chain rule gives
/// dW1 = (G o H o (1 - H)) X^T and db1 = (G o H o (1 - H)) 1. For symmetric L the
/// trace part of G is 2 dt (H D - H S), the pairwise form with S in place of W.
inline EncoderGradient grad_phi_wrt_params(const ModelParams& p, const Matrix& X, const Matrix& H_prev,
                                           const SparseMatrix& L, double dt) {
    p.validate();
    const Matrix H = encode(p, X);
    detail::require(H_prev.rows() == H.rows() && H_prev.cols() == H.cols(),
                    "grad_phi_wrt_params: H_prev must be K x N matching encode(p, X)");
    const Matrix G = phi_feature_gradient(H, H_prev, L, dt);
    const Matrix delta = G.cwiseProduct(H.cwiseProduct((1.0 - H.array()).matrix()));
    return {delta * X.transpose(), delta.rowwise().sum()};
}

inline EncoderGradient grad_phi_wrt_params(const ModelParams& p, const Matrix& X, const Matrix& H_prev,
                                           const Matrix& L, double dt) {
    return grad_phi_wrt_params(p, X, H_prev, SparseMatrix(L.sparseView()), dt);
}

/// Solves min_H Phi(H) directly from its first-order condition
/// (I + dt L_sym) H^T = H_prev^T (dense LU, independent of the Cholesky route) and
/// returns max |H_phi - H_euler| against implicit_euler_step.
inline double verify_equivalence(const Matrix& H_prev, const SparseMatrix& L, double dt_gamma) {
    const Index n = L.rows();
    const Matrix dense_l = Matrix(L);
    const Matrix sym = 0.5 * (dense_l + dense_l.transpose());
    const Matrix system = Matrix::Identity(n, n) + dt_gamma * sym;
    const Matrix H_phi = system.partialPivLu().solve(Matrix(H_prev.transpose())).transpose();
    const Matrix H_euler = implicit_euler_step(H_prev, SparseMatrix(sym.sparseView()), dt_gamma);
    return (H_phi - H_euler).cwiseAbs().maxCoeff();
}

inline double verify_equivalence(const Matrix& H_prev, const Matrix& L, double dt_gamma) {
    return verify_equivalence(H_prev, SparseMatrix(L.sparseView()), dt_gamma);
}

} // namespace inae
