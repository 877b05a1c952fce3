#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "inae/common.hpp"

namespace inae {

/// Encoder h = s(W1 x + b1) and decoder x_hat = s(W2 h + b2) with untied weights.
/// W1 is K x D and W2 is D x K.
struct ModelParams {
    Matrix W1;
    Vector b1;
    Matrix W2;
    Vector b2;

    Index hidden_dim() const { return W1.rows(); }
    Index input_dim() const { return W1.cols(); }

    bool all_finite() const { return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite(); }

    void validate() const {
        detail::require(b1.size() == W1.rows() && W2.rows() == W1.cols() && W2.cols() == W1.rows()
                            && b2.size() == W2.rows(),
                        "inconsistent parameter shapes");
        detail::require(all_finite(), "parameters contain non-finite values");
    }

    static ModelParams zeros(Index input_dim, Index hidden_dim) {
        return {Matrix::Zero(hidden_dim, input_dim), Vector::Zero(hidden_dim), Matrix::Zero(input_dim, hidden_dim),
                Vector::Zero(input_dim)};
    }

    ModelParams& operator+=(const ModelParams& o) {
        W1 += o.W1;
        b1 += o.b1;
        W2 += o.W2;
        b2 += o.b2;
        return *this;
    }

    ModelParams& operator*=(double s) {
        W1 *= s;
        b1 *= s;
        W2 *= s;
        b2 *= s;
        return *this;
    }

    bool operator==(const ModelParams& o) const {
        return W1 == o.W1 && b1 == o.b1 && W2 == o.W2 && b2 == o.b2;
    }
};

/// Gradients share the parameter layout.
using ModelGradient = ModelParams;

enum class LossKind { squared, cross_entropy };

inline std::string to_string(LossKind k) { return k == LossKind::squared ? "squared" : "cross_entropy"; }

inline LossKind loss_from_string(const std::string& s) {
    if (s == "squared") return LossKind::squared;
    if (s == "cross_entropy") return LossKind::cross_entropy;
    throw invalid_argument("unknown loss '" + s + "'");
}

/// W1, W2 ~ U(-r, r) with r = sqrt(6 / (D + K)); biases zero.
inline ModelParams init_params(Index input_dim, Index hidden_dim, std::uint64_t seed) {
    detail::require(input_dim >= 1 && hidden_dim >= 1, "model dimensions must be >= 1");
    ModelParams p = ModelParams::zeros(input_dim, hidden_dim);
    const double r = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
    auto rng = detail::make_rng(seed, detail::stream_init);
    std::uniform_real_distribution<double> u(-r, r);
    for (Index i = 0; i < hidden_dim; ++i) {
        for (Index j = 0; j < input_dim; ++j) {
            p.W1(i, j) = u(rng);
        }
    }
    for (Index i = 0; i < input_dim; ++i) {
        for (Index j = 0; j < hidden_dim; ++j) {
            p.W2(i, j) = u(rng);
        }
    }
    return p;
}

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline Matrix sigmoid(const Matrix& Z) { return Z.unaryExpr([](double z) { return sigmoid(z); }); }

inline Matrix encoder_preactivation(const ModelParams& p, const Matrix& X) {
    detail::require(X.rows() == p.input_dim(), "encode: input has " + std::to_string(X.rows())
                                                   + " rows, model expects " + std::to_string(p.input_dim()));
    return (p.W1 * X).colwise() + p.b1;
}

inline Matrix decoder_preactivation(const ModelParams& p, const Matrix& H) {
    detail::require(H.rows() == p.hidden_dim(), "decode: code has " + std::to_string(H.rows())
                                                    + " rows, model expects " + std::to_string(p.hidden_dim()));
    return (p.W2 * H).colwise() + p.b2;
}

inline Matrix encode(const ModelParams& p, const Matrix& X) { return sigmoid(encoder_preactivation(p, X)); }

inline Matrix decode(const ModelParams& p, const Matrix& H) { return sigmoid(decoder_preactivation(p, H)); }

/// Target column for every corrupted column: X_clean.col(origin[c]).
inline Matrix gather_columns(const Matrix& X, const std::vector<Index>& origin) {
    Matrix out(X.rows(), static_cast<Index>(origin.size()));
    for (std::size_t c = 0; c < origin.size(); ++c) {
        detail::require(origin[c] >= 0 && origin[c] < X.cols(), "origin index out of range");
        out.col(static_cast<Index>(c)) = X.col(origin[c]);
    }
    return out;
}

/// Mean over columns of the per-sample loss (summed over features).
inline double recon_loss(LossKind kind, const Matrix& X_clean, const Matrix& X_hat) {
    detail::require(X_clean.rows() == X_hat.rows() && X_clean.cols() == X_hat.cols(),
                    "recon_loss: shape mismatch " + detail::shape(X_clean) + " vs " + detail::shape(X_hat));
    detail::require(X_clean.cols() > 0, "recon_loss: empty batch");
    const auto n = static_cast<double>(X_clean.cols());
    if (kind == LossKind::squared) {
        return (X_clean - X_hat).squaredNorm() / n;
    }
    double total = 0.0;
    for (Index c = 0; c < X_clean.cols(); ++c) {
        for (Index r = 0; r < X_clean.rows(); ++r) {
            const double x = X_clean(r, c);
            const double y = X_hat(r, c);
            detail::require(x >= 0.0 && x <= 1.0, "cross-entropy targets must lie in [0, 1]");
            detail::require(y > 0.0 && y < 1.0, "cross-entropy reconstructions must lie in (0, 1)");
            total -= x * std::log(y) + (1.0 - x) * std::log1p(-y);
        }
    }
    return total / n;
}

/// recon_loss evaluated from decoder pre-activations Z (x_hat = s(Z)); finite even
/// where s(Z) rounds to 0 or 1.
inline double recon_loss_from_logits(LossKind kind, const Matrix& targets, const Matrix& Z) {
    if (kind == LossKind::squared) {
        return recon_loss(kind, targets, sigmoid(Z));
    }
    double total = 0.0;
    for (Index c = 0; c < Z.cols(); ++c) {
        for (Index r = 0; r < Z.rows(); ++r) {
            total += softplus(Z(r, c)) - targets(r, c) * Z(r, c);
        }
    }
    return total / static_cast<double>(Z.cols());
}

namespace detail {

/// Sum over columns (not mean) of the reconstruction-loss gradient for inputs X and
/// aligned targets T. Writes the hidden codes to H.
inline void recon_grad_sum(const ModelParams& p, LossKind kind, const Matrix& X, const Matrix& T, Matrix& H,
                           ModelGradient& g) {
    H = encode(p, X);
    const Matrix Xhat = decode(p, H);
    Matrix delta_out = Xhat - T; // cross-entropy through the sigmoid
    if (kind == LossKind::squared) {
        delta_out = 2.0 * delta_out.cwiseProduct(Xhat.cwiseProduct((1.0 - Xhat.array()).matrix()));
    }
    g.W2.noalias() += delta_out * H.transpose();
    g.b2 += delta_out.rowwise().sum();
    const Matrix delta_hidden =
        (p.W2.transpose() * delta_out).cwiseProduct(H.cwiseProduct((1.0 - H.array()).matrix()));
    g.W1.noalias() += delta_hidden * X.transpose();
    g.b1 += delta_hidden.rowwise().sum();
}

} // namespace detail

/// Analytic gradient of recon_loss(kind, X_clean[origin], decode(encode(X_corrupt))).
/// Column c of X_corrupt is reconstructed towards X_clean.col(origin_index[c]).
inline ModelGradient grad_recon(const ModelParams& p, LossKind kind, const Matrix& X_corrupt, const Matrix& X_clean,
                                const std::vector<Index>& origin_index) {
    p.validate();
    detail::require(X_corrupt.rows() == p.input_dim() && X_clean.rows() == p.input_dim(),
                    "grad_recon: input dimension mismatch");
    detail::require(static_cast<Index>(origin_index.size()) == X_corrupt.cols(),
                    "grad_recon: origin index must cover every corrupted column");
    detail::require(X_corrupt.cols() > 0, "grad_recon: empty batch");
    const Matrix targets = gather_columns(X_clean, origin_index);
    ModelGradient g = ModelParams::zeros(p.input_dim(), p.hidden_dim());
    Matrix H;
    detail::recon_grad_sum(p, kind, X_corrupt, targets, H, g);
    g *= 1.0 / static_cast<double>(X_corrupt.cols());
    return g;
}

} // namespace inae
