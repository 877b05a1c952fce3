#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "inae/metrics.hpp"
#include "test_util.hpp"

using namespace inae;

namespace {

NeighborGraph graph_of(std::vector<std::vector<Neighbor>> lists) {
    NeighborGraph g;
    g.neighbors = std::move(lists);
    return g;
}

// Two Gaussian blobs centred at -offset and +offset along every axis.
std::pair<Matrix, std::vector<int>> blobs(Index dim, Index per_class, double offset, std::mt19937_64& rng) {
    Matrix X = test::random_matrix(dim, 2 * per_class, rng);
    std::vector<int> labels(static_cast<std::size_t>(2 * per_class));
    for (Index i = 0; i < 2 * per_class; ++i) {
        const int c = i < per_class ? 0 : 1;
        labels[static_cast<std::size_t>(i)] = c;
        X.col(i).array() += c == 0 ? -offset : offset;
    }
    return {X, labels};
}

double generalized_top_eigenvalue(const Matrix& H, const std::vector<int>& labels, double ridge) {
    const Scatter s = scatter_matrices(H, labels);
    const Matrix B = s.within + ridge * Matrix::Identity(H.rows(), H.rows());
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(s.between, B);
    return eig.eigenvalues().maxCoeff();
}

} // namespace

TEST(NRatio, PureAndMixedNeighborhoods) {
    const NeighborGraph g = graph_of({{{1, 1.0}, {2, 1.0}}, {{0, 1.0}, {3, 1.0}}, {{3, 1.0}}, {{2, 1.0}, {0, 1.0}}});
    const std::vector<int> labels{0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(n_ratio(g, labels, 1), 1.0);
    EXPECT_DOUBLE_EQ(n_ratio(g, labels, 2), (0.5 + 0.5 + 1.0 + 0.5) / 4.0);
    EXPECT_DOUBLE_EQ(n_ratio(g, std::vector<int>{0, 0, 0, 0}, 2), 1.0);
}

TEST(NRatio, SkipsNodesWithoutNeighbors) {
    const NeighborGraph g = graph_of({{{1, 1.0}}, {}, {{0, 1.0}}});
    Index skipped = -1;
    EXPECT_DOUBLE_EQ(n_ratio(g, {0, 0, 1}, 3, &skipped), 0.5);
    EXPECT_EQ(skipped, 1);
    EXPECT_THROW(n_ratio(g, {0, 0, 1}, 0), inae::invalid_argument);
    EXPECT_THROW(n_ratio(g, {0, 0}, 1), inae::invalid_argument);
}

TEST(CRatio, WeighsCoefficientMagnitudes) {
    const NeighborGraph g = graph_of({{{1, 0.75}, {2, -0.25}}, {{0, 2.0}}, {{0, 0.0}}});
    Index skipped = -1;
    EXPECT_DOUBLE_EQ(c_ratio(g, {0, 0, 1}, &skipped), (0.75 + 1.0) / 2.0);
    EXPECT_EQ(skipped, 1);
}

TEST(Svm, SeparableDataHasZeroError) {
    std::mt19937_64 rng(1);
    const auto [train, train_labels] = blobs(5, 50, 3.0, rng);
    const auto [test, test_labels] = blobs(5, 50, 3.0, rng);
    EXPECT_EQ(linear_svm(train, train_labels, test, test_labels), 0.0);
}

TEST(Svm, ShuffledLabelsGiveChanceError) {
    std::mt19937_64 rng(2);
    const auto [train, train_labels] = blobs(5, 200, 0.0, rng);
    const auto [test, test_labels] = blobs(5, 200, 0.0, rng);
    EXPECT_NEAR(linear_svm(train, train_labels, test, test_labels), 0.5, 0.1);
}

TEST(Svm, HandlesSeveralClasses) {
    std::mt19937_64 rng(3);
    Matrix X = test::random_matrix(2, 90, rng, 0.2);
    std::vector<int> labels(90);
    const double centres[3][2] = {{0, 3}, {3, 0}, {-3, -3}};
    for (Index i = 0; i < 90; ++i) {
        const int c = static_cast<int>(i % 3);
        labels[static_cast<std::size_t>(i)] = c;
        X(0, i) += centres[c][0];
        X(1, i) += centres[c][1];
    }
    EXPECT_EQ(linear_svm(X, labels, X, labels), 0.0);
}

TEST(Svm, InvariantToFeaturePermutation) {
    std::mt19937_64 rng(4);
    const auto [train, train_labels] = blobs(4, 60, 0.4, rng);
    const auto [test, test_labels] = blobs(4, 60, 0.4, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.indices() << 2, 0, 3, 1;
    const double base = linear_svm(train, train_labels, test, test_labels, 1e-4, 9);
    const double permuted = linear_svm(perm * train, train_labels, perm * test, test_labels, 1e-4, 9);
    EXPECT_NEAR(base, permuted, 1e-12);
}

TEST(Svm, RejectsBadInputs) {
    EXPECT_THROW(linear_svm(Matrix::Zero(2, 3), {1, 1, 1}, Matrix::Zero(2, 1), {1}), inae::invalid_argument);
    EXPECT_THROW(linear_svm(Matrix::Zero(2, 2), {0, 1}, Matrix::Zero(3, 1), {1}), inae::invalid_argument);
}

TEST(Fisher, EqualClassMeansGiveZero) {
    std::mt19937_64 rng(5);
    const Matrix half = test::random_matrix(3, 20, rng);
    Matrix H(3, 40);
    H << half, half;
    std::vector<int> labels(40, 0);
    std::fill(labels.begin() + 20, labels.end(), 1);
    EXPECT_NEAR(fisher_eig(H, labels), 0.0, 1e-10);
}

TEST(Fisher, OneDimensionalClosedForm) {
    Matrix H(1, 4);
    H << 0, 2, 5, 7;
    const std::vector<int> labels{0, 0, 1, 1};
    // means 1 and 6 around 3.5: S_b = 2 * 2.5^2 * 2 = 25, S_w = 4 * 1 = 4.
    EXPECT_NEAR(fisher_eig(H, labels, 1.0), 25.0 / 5.0, 1e-12);
}

TEST(Fisher, MatchesGeneralizedEigensolver) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto [H, labels] = blobs(2 + trial % 4, 30, 0.3 * trial, rng);
        const double ridge = default_fisher_ridge(H, labels);
        const double expected = generalized_top_eigenvalue(H, labels, ridge);
        EXPECT_NEAR(fisher_eig(H, labels, ridge), expected, 1e-8 * std::max(1.0, expected));
    }
}

TEST(Fisher, InvariantUnderRotation) {
    std::mt19937_64 rng(7);
    const auto [H, labels] = blobs(4, 40, 0.5, rng);
    const Matrix Q = test::random_matrix(4, 4, rng).householderQr().householderQ();
    const double a = fisher_eig(H, labels, 1e-3);
    EXPECT_NEAR(fisher_eig(Q * H, labels, 1e-3), a, 1e-8 * a);
}

TEST(Fisher, GrowsWithClassSeparation) {
    std::mt19937_64 rng(8);
    const auto [H, labels] = blobs(3, 40, 0.0, rng);
    double prev = -1.0;
    for (double shift : {0.0, 0.5, 1.0, 2.0}) {
        Matrix moved = H;
        for (Index i = 40; i < 80; ++i) {
            moved.col(i).array() += shift;
        }
        const double f = fisher_eig(moved, labels, 1e-3);
        EXPECT_GT(f, prev);
        prev = f;
    }
}

TEST(Fisher, RejectsSingleClass) {
    EXPECT_THROW(fisher_eig(Matrix::Ones(2, 3), {0, 0, 0}), inae::invalid_argument);
}

TEST(MetricsCsv, RowFormat) {
    std::ostringstream out;
    write_metrics_header(out);
    write_metrics_row(out, "inae", 3, {0.5, 0.25, 0.125, 2.0});
    EXPECT_EQ(out.str(), "model_id,t,n_ratio,c_ratio,class_error,fisher_eig\ninae,3,0.5,0.25,0.125,2\n");
}

TEST(EvaluateFeatures, CombinesAllMeasures) {
    std::mt19937_64 rng(9);
    const auto [train, train_labels] = blobs(3, 30, 2.0, rng);
    const auto [test, test_labels] = blobs(3, 30, 2.0, rng);
    GraphConfig cfg;
    cfg.strategy = GraphStrategy::knn;
    cfg.k = 5;
    const MetricsReport r = evaluate_features(train, train_labels, test, test_labels, cfg, 5, 1e-4, 0);
    const NeighborGraph g = build_graph(train, cfg);
    EXPECT_DOUBLE_EQ(r.n_ratio, n_ratio(g, train_labels, 5));
    EXPECT_DOUBLE_EQ(r.c_ratio, c_ratio(g, train_labels));
    EXPECT_DOUBLE_EQ(r.class_error, linear_svm(train, train_labels, test, test_labels, 1e-4, 0));
    EXPECT_DOUBLE_EQ(r.fisher_eig, fisher_eig(train, train_labels));
}
