#include <cmath>

#include <gtest/gtest.h>

#include "inae/model.hpp"
#include "inae/serialization.hpp"
#include "test_util.hpp"

using namespace inae;

namespace {

double scalar_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Column-by-column re-implementation of encode with plain loops.
Matrix loop_encode(const ModelParams& p, const Matrix& X) {
    Matrix H(p.hidden_dim(), X.cols());
    for (Index c = 0; c < X.cols(); ++c) {
        for (Index k = 0; k < p.hidden_dim(); ++k) {
            double z = p.b1(k);
            for (Index d = 0; d < p.input_dim(); ++d) {
                z += p.W1(k, d) * X(d, c);
            }
            H(k, c) = scalar_sigmoid(z);
        }
    }
    return H;
}

Matrix loop_decode(const ModelParams& p, const Matrix& H) {
    Matrix X(p.input_dim(), H.cols());
    for (Index c = 0; c < H.cols(); ++c) {
        for (Index d = 0; d < p.input_dim(); ++d) {
            double z = p.b2(d);
            for (Index k = 0; k < p.hidden_dim(); ++k) {
                z += p.W2(d, k) * H(k, c);
            }
            X(d, c) = scalar_sigmoid(z);
        }
    }
    return X;
}

double loop_loss(LossKind kind, const Matrix& X, const Matrix& Y) {
    double total = 0.0;
    for (Index c = 0; c < X.cols(); ++c) {
        for (Index r = 0; r < X.rows(); ++r) {
            if (kind == LossKind::squared) {
                total += (X(r, c) - Y(r, c)) * (X(r, c) - Y(r, c));
            } else {
                total += -(X(r, c) * std::log(Y(r, c)) + (1.0 - X(r, c)) * std::log(1.0 - Y(r, c)));
            }
        }
    }
    return total / static_cast<double>(X.cols());
}

ModelParams random_params(Index d, Index k, std::mt19937_64& rng, double scale = 0.7) {
    return {test::random_matrix(k, d, rng, scale), test::random_matrix(k, 1, rng, scale),
            test::random_matrix(d, k, rng, scale), test::random_matrix(d, 1, rng, scale)};
}

} // namespace

TEST(Encode, ZeroWeightsGiveOneHalf) {
    const ModelParams p = ModelParams::zeros(4, 3);
    std::mt19937_64 rng(1);
    EXPECT_EQ(encode(p, test::random_matrix(4, 5, rng)), Matrix::Constant(3, 5, 0.5));
    EXPECT_EQ(decode(p, test::random_matrix(3, 5, rng)), Matrix::Constant(4, 5, 0.5));
}

TEST(Encode, MonotoneInBiasAndSaturatesToOne) {
    std::mt19937_64 rng(2);
    ModelParams p = random_params(4, 3, rng);
    const Matrix X = test::random_matrix(4, 2, rng);
    Matrix prev = encode(p, X);
    for (double b : {1.0, 5.0, 20.0, 60.0}) {
        p.b1.setConstant(b);
        const Matrix H = encode(p, X);
        EXPECT_TRUE((H.array() >= prev.array()).all());
        prev = H;
    }
    EXPECT_GT(prev.minCoeff(), 1.0 - 1e-12);
    p.W2.setZero();
    p.b2.setConstant(60.0);
    EXPECT_GT(decode(p, prev).minCoeff(), 1.0 - 1e-12);
}

TEST(Encode, MatchesScalarLoops) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const ModelParams p = random_params(6, 4, rng);
        const Matrix X = test::random_matrix(6, 1 + trial, rng);
        EXPECT_LE((encode(p, X) - loop_encode(p, X)).cwiseAbs().maxCoeff(), 1e-12);
        const Matrix H = encode(p, X);
        EXPECT_LE((decode(p, H) - loop_decode(p, H)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Encode, StableForExtremeInputs) {
    ModelParams p = ModelParams::zeros(2, 2);
    p.W1 << 1.0, 0.0, 0.0, 1.0;
    Matrix X(2, 2);
    X << 800.0, -800.0, -1e308, 1e308;
    const Matrix H = encode(p, X);
    EXPECT_TRUE(H.allFinite());
    EXPECT_GE(H.minCoeff(), 0.0);
    EXPECT_LE(H.maxCoeff(), 1.0);
}

TEST(Encode, RejectsShapeMismatch) {
    const ModelParams p = ModelParams::zeros(4, 3);
    EXPECT_THROW(encode(p, Matrix::Zero(5, 2)), inae::invalid_argument);
    EXPECT_THROW(decode(p, Matrix::Zero(4, 2)), inae::invalid_argument);
}

TEST(ReconLoss, ClosedFormValues) {
    std::mt19937_64 rng(4);
    const Matrix X = test::random_matrix(5, 4, rng);
    EXPECT_EQ(recon_loss(LossKind::squared, X, X), 0.0);
    Matrix one(1, 1);
    one << 1.0;
    Matrix half(1, 1);
    half << 0.5;
    EXPECT_NEAR(recon_loss(LossKind::cross_entropy, one, half), 0.6931471805599453, 1e-15);
}

TEST(ReconLoss, MatchesScalarLoops) {
    std::mt19937_64 rng(5);
    const Matrix X = test::random_unit_matrix(5, 4, rng);
    const Matrix Y = test::random_unit_matrix(5, 4, rng);
    for (auto kind : {LossKind::squared, LossKind::cross_entropy}) {
        EXPECT_NEAR(recon_loss(kind, X, Y), loop_loss(kind, X, Y), 1e-12);
        EXPECT_NEAR(recon_loss_from_logits(kind, X, Matrix(Y.array().log() - (1.0 - Y.array()).log())),
                    loop_loss(kind, X, Y), 1e-12);
    }
}

TEST(ReconLoss, CrossEntropyIsMinimalAtTheTarget) {
    std::mt19937_64 rng(6);
    const Matrix X = test::random_unit_matrix(4, 3, rng);
    const double at_target = recon_loss(LossKind::cross_entropy, X, X);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix Y = (X + test::random_matrix(4, 3, rng, 0.01)).cwiseMax(1e-6).cwiseMin(1.0 - 1e-6);
        EXPECT_GE(recon_loss(LossKind::cross_entropy, X, Y), at_target);
    }
}

TEST(ReconLoss, RejectsDomainAndShapeErrors) {
    Matrix X(1, 1);
    X << 1.5;
    Matrix Y(1, 1);
    Y << 0.5;
    EXPECT_THROW(recon_loss(LossKind::cross_entropy, X, Y), inae::invalid_argument);
    X << 0.5;
    Y << 1.0;
    EXPECT_THROW(recon_loss(LossKind::cross_entropy, X, Y), inae::invalid_argument);
    EXPECT_THROW(recon_loss(LossKind::squared, Matrix::Zero(2, 2), Matrix::Zero(2, 3)), inae::invalid_argument);
}

TEST(GradRecon, MatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    for (auto kind : {LossKind::squared, LossKind::cross_entropy}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Index d = 2 + trial % 4;
            const Index k = 1 + trial % 3;
            ModelParams p = random_params(d, k, rng);
            const Matrix clean = test::random_unit_matrix(d, 3, rng);
            const std::vector<Index> origin{0, 0, 1, 1, 2, 2};
            const Matrix noisy = gather_columns(clean, origin) + test::random_matrix(d, 6, rng, 0.1);
            const ModelGradient g = grad_recon(p, kind, noisy, clean, origin);
            const auto loss = [&] {
                return recon_loss_from_logits(kind, gather_columns(clean, origin),
                                              decoder_preactivation(p, encode(p, noisy)));
            };
            EXPECT_LT(test::relative_error(g.W1, test::numeric_gradient(loss, p.W1)), 1e-6);
            EXPECT_LT(test::relative_error(g.b1, test::numeric_gradient(loss, p.b1)), 1e-6);
            EXPECT_LT(test::relative_error(g.W2, test::numeric_gradient(loss, p.W2)), 1e-6);
            EXPECT_LT(test::relative_error(g.b2, test::numeric_gradient(loss, p.b2)), 1e-6);
        }
    }
}

TEST(GradRecon, VanishesAtAPerfectReconstruction) {
    std::mt19937_64 rng(8);
    const ModelParams p = random_params(4, 3, rng);
    const Matrix X = test::random_matrix(4, 5, rng);
    const Matrix target = decode(p, encode(p, X));
    std::vector<Index> origin(5);
    for (Index c = 0; c < 5; ++c) {
        origin[static_cast<std::size_t>(c)] = c;
    }
    const ModelGradient g = grad_recon(p, LossKind::squared, X, target, origin);
    EXPECT_LE(g.W2.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(g.b2.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GradRecon, DuplicatingTheBatchKeepsTheMean) {
    std::mt19937_64 rng(9);
    const ModelParams p = random_params(5, 3, rng);
    const Matrix clean = test::random_unit_matrix(5, 4, rng);
    const std::vector<Index> origin{0, 1, 2, 3};
    const std::vector<Index> twice{0, 1, 2, 3, 0, 1, 2, 3};
    const Matrix noisy = clean + test::random_matrix(5, 4, rng, 0.1);
    Matrix doubled(5, 8);
    doubled << noisy, noisy;
    for (auto kind : {LossKind::squared, LossKind::cross_entropy}) {
        const ModelGradient a = grad_recon(p, kind, noisy, clean, origin);
        const ModelGradient b = grad_recon(p, kind, doubled, clean, twice);
        EXPECT_LE((a.W1 - b.W1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((a.b1 - b.b1).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((a.W2 - b.W2).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((a.b2 - b.b2).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GradRecon, RejectsInconsistentInputs) {
    const ModelParams p = ModelParams::zeros(3, 2);
    EXPECT_THROW(grad_recon(p, LossKind::squared, Matrix::Zero(3, 2), Matrix::Zero(3, 2), {0}),
                 inae::invalid_argument);
    EXPECT_THROW(grad_recon(p, LossKind::squared, Matrix::Zero(4, 2), Matrix::Zero(4, 2), {0, 1}),
                 inae::invalid_argument);
}

TEST(InitParams, UniformFanInRangeWithZeroBiases) {
    const ModelParams p = init_params(30, 10, 4);
    const double r = std::sqrt(6.0 / 40.0);
    EXPECT_LE(p.W1.cwiseAbs().maxCoeff(), r);
    EXPECT_LE(p.W2.cwiseAbs().maxCoeff(), r);
    EXPECT_GT(p.W1.cwiseAbs().maxCoeff(), 0.5 * r);
    EXPECT_EQ(p.b1, Vector::Zero(10));
    EXPECT_EQ(p.b2, Vector::Zero(30));
    EXPECT_TRUE(init_params(30, 10, 4) == p);
    EXPECT_FALSE(init_params(30, 10, 5) == p);
}

TEST(Serialization, RoundTripsBitwise) {
    std::mt19937_64 rng(10);
    const ModelParams p = random_params(7, 3, rng, 1.3);
    const StoredModel back = model_from_json(nlohmann::json::parse(model_to_json(p, LossKind::cross_entropy).dump()));
    EXPECT_TRUE(back.params == p);
    EXPECT_EQ(back.loss, LossKind::cross_entropy);
}

TEST(Serialization, UsesRowMajorLayout) {
    ModelParams p = ModelParams::zeros(3, 2);
    p.W1 << 1, 2, 3, 4, 5, 6;
    const auto j = model_to_json(p, LossKind::squared);
    EXPECT_EQ(j.at("W1"), nlohmann::json({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
    EXPECT_EQ(j.at("D"), 3);
    EXPECT_EQ(j.at("K"), 2);
    EXPECT_EQ(j.at("format_version"), 1);
}

TEST(Serialization, RejectsMalformedDocuments) {
    auto j = model_to_json(ModelParams::zeros(3, 2), LossKind::squared);
    j["W1"].erase(0);
    EXPECT_THROW(model_from_json(j), inae::format_error);
    j = model_to_json(ModelParams::zeros(3, 2), LossKind::squared);
    j["format_version"] = 99;
    EXPECT_THROW(model_from_json(j), inae::format_error);
    j = model_to_json(ModelParams::zeros(3, 2), LossKind::squared);
    j.erase("b2");
    EXPECT_THROW(model_from_json(j), inae::format_error);
    EXPECT_THROW(load_model("/nonexistent/model.json"), inae::format_error);
}
