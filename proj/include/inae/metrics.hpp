#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "inae/common.hpp"
#include "inae/graph.hpp"

namespace inae {

struct MetricsReport {
    double n_ratio = 0.0;
    double c_ratio = 0.0;
    double class_error = 0.0;
    double fisher_eig = 0.0;
};

inline void write_metrics_header(std::ostream& out) { out << "model_id,t,n_ratio,c_ratio,class_error,fisher_eig\n"; }

inline void write_metrics_row(std::ostream& out, const std::string& model_id, Index t, const MetricsReport& r) {
    out << model_id << ',' << t << ',' << std::setprecision(17) << r.n_ratio << ',' << r.c_ratio << ','
        << r.class_error << ',' << r.fisher_eig << '\n';
}

namespace detail {

inline void check_labels(const std::vector<int>& labels, Index n) {
    require(static_cast<Index>(labels.size()) == n, "labels must cover every sample");
}

} // namespace detail

/// Mean over nodes of the fraction of same-label nodes among the first k ranked
/// neighbors. The fraction is taken over the neighbors actually inspected,
/// min(k, list length). Nodes without neighbors are skipped and counted in `skipped`.
inline double n_ratio(const NeighborGraph& g, const std::vector<int>& labels, Index k, Index* skipped = nullptr) {
    detail::require(k >= 1, "n_ratio: k must be >= 1");
    detail::check_labels(labels, static_cast<Index>(g.neighbors.size()));
    double total = 0.0;
    Index counted = 0;
    Index empty = 0;
    for (std::size_t i = 0; i < g.neighbors.size(); ++i) {
        const auto& nb = g.neighbors[i];
        if (nb.empty()) {
            ++empty;
            continue;
        }
        const auto take = std::min<std::size_t>(nb.size(), static_cast<std::size_t>(k));
        std::size_t same = 0;
        for (std::size_t r = 0; r < take; ++r) {
            same += labels[static_cast<std::size_t>(nb[r].index)] == labels[i] ? 1 : 0;
        }
        total += static_cast<double>(same) / static_cast<double>(take);
        ++counted;
    }
    if (skipped != nullptr) {
        *skipped = empty;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

/// Mean over nodes of sum |c_j| over same-label neighbors divided by sum |c_j| over all neighbors.
inline double c_ratio(const NeighborGraph& g, const std::vector<int>& labels, Index* skipped = nullptr) {
    detail::check_labels(labels, static_cast<Index>(g.neighbors.size()));
    double total = 0.0;
    Index counted = 0;
    Index empty = 0;
    for (std::size_t i = 0; i < g.neighbors.size(); ++i) {
        double same = 0.0;
        double all = 0.0;
        for (const auto& nb : g.neighbors[i]) {
            all += std::abs(nb.coefficient);
            if (labels[static_cast<std::size_t>(nb.index)] == labels[i]) {
                same += std::abs(nb.coefficient);
            }
        }
        if (all > 0.0) {
            total += same / all;
            ++counted;
        } else {
            ++empty;
        }
    }
    if (skipped != nullptr) {
        *skipped = empty;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

/// One-vs-rest linear SVM trained by SGD on the L2-regularized hinge loss
///   reg/2 ||w||^2 + mean_i max(0, 1 - y_i (w.x_i + b)),
/// with a fixed schedule (epochs, constant rate) and seeded shuffling. Features are
/// standardized with the per-feature mean and population standard deviation of the
/// training set; the same affine map is applied at prediction time.
class LinearSvm {
public:
    struct Options {
        double reg = 1e-4;
        Index epochs = 200;
        double rate = 0.01;
        std::uint64_t seed = 0;
    };

    LinearSvm() = default;
    explicit LinearSvm(Options opt) : opt_(opt) {}

    void fit(const Matrix& X, const std::vector<int>& labels) {
        detail::check_labels(labels, X.cols());
        std::vector<int> classes(labels);
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        detail::require(classes.size() >= 2, "linear_svm: training labels contain a single class");
        classes_ = classes;

        mean_ = X.rowwise().mean();
        const Matrix centered = X.colwise() - mean_;
        scale_ = (centered.rowwise().squaredNorm() / static_cast<double>(X.cols())).cwiseSqrt();
        for (Index r = 0; r < scale_.size(); ++r) {
            scale_(r) = scale_(r) > 1e-12 ? 1.0 / scale_(r) : 1.0;
        }
        const Matrix Z = scale_.asDiagonal() * centered;

        const auto n_classes = static_cast<Index>(classes_.size());
        weights_ = Matrix::Zero(n_classes, X.rows());
        bias_ = Vector::Zero(n_classes);
        std::vector<Index> class_of(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            class_of[i] = std::lower_bound(classes_.begin(), classes_.end(), labels[i]) - classes_.begin();
        }

        std::vector<Index> order(static_cast<std::size_t>(X.cols()));
        std::iota(order.begin(), order.end(), Index{0});
        auto rng = detail::make_rng(opt_.seed, detail::stream_svm);
        const double shrink = 1.0 - opt_.rate * opt_.reg;
        for (Index e = 0; e < opt_.epochs; ++e) {
            std::shuffle(order.begin(), order.end(), rng);
            for (Index i : order) {
                const auto x = Z.col(i);
                const Vector scores = weights_ * x + bias_;
                weights_ *= shrink;
                for (Index c = 0; c < n_classes; ++c) {
                    const double y = class_of[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
                    if (y * scores(c) < 1.0) {
                        weights_.row(c) += opt_.rate * y * x.transpose();
                        bias_(c) += opt_.rate * y;
                    }
                }
            }
        }
    }

    std::vector<int> predict(const Matrix& X) const {
        detail::require(X.rows() == weights_.cols(), "linear_svm: feature dimension mismatch");
        const Matrix Z = scale_.asDiagonal() * (X.colwise() - mean_);
        const Matrix scores = (weights_ * Z).colwise() + bias_;
        std::vector<int> out(static_cast<std::size_t>(X.cols()));
        for (Index i = 0; i < X.cols(); ++i) {
            Index best = 0;
            scores.col(i).maxCoeff(&best);
            out[static_cast<std::size_t>(i)] = classes_[static_cast<std::size_t>(best)];
        }
        return out;
    }

    double error_rate(const Matrix& X, const std::vector<int>& labels) const {
        detail::check_labels(labels, X.cols());
        const auto pred = predict(X);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            wrong += pred[i] != labels[i] ? 1 : 0;
        }
        return pred.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(pred.size());
    }

private:
    Options opt_{};
    std::vector<int> classes_;
    Vector mean_;
    Vector scale_;
    Matrix weights_;
    Vector bias_;
};

/// Test misclassification rate of a linear SVM trained on (train_H, train_labels).
inline double linear_svm(const Matrix& train_H, const std::vector<int>& train_labels, const Matrix& test_H,
                         const std::vector<int>& test_labels, double reg = 1e-4, std::uint64_t seed = 0) {
    LinearSvm svm({reg, 200, 0.01, seed});
    svm.fit(train_H, train_labels);
    return svm.error_rate(test_H, test_labels);
}

struct Scatter {
    Matrix within;
    Matrix between;
};

/// S_w = sum_c sum_{i in c} (h_i - mu_c)(h_i - mu_c)^T, S_b = sum_c n_c (mu_c - mu)(mu_c - mu)^T.
inline Scatter scatter_matrices(const Matrix& H, const std::vector<int>& labels) {
    detail::check_labels(labels, H.cols());
    const Index k = H.rows();
    const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    Matrix sums = Matrix::Zero(k, n_classes);
    std::vector<Index> counts(static_cast<std::size_t>(n_classes), 0);
    for (Index i = 0; i < H.cols(); ++i) {
        sums.col(labels[static_cast<std::size_t>(i)]) += H.col(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    const Vector mu = H.rowwise().mean();
    Scatter s{Matrix::Zero(k, k), Matrix::Zero(k, k)};
    Index present = 0;
    for (int c = 0; c < n_classes; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
            continue;
        }
        ++present;
        sums.col(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
        const Vector d = sums.col(c) - mu;
        s.between.noalias() += static_cast<double>(counts[static_cast<std::size_t>(c)]) * d * d.transpose();
    }
    detail::require(present >= 2, "scatter matrices need at least 2 classes");
    Matrix centered = H;
    for (Index i = 0; i < H.cols(); ++i) {
        centered.col(i) -= sums.col(labels[static_cast<std::size_t>(i)]);
    }
    s.within.noalias() = centered * centered.transpose();
    return s;
}

/// 1e-6 * tr(S_w) / K, floored so that a zero within-class scatter still gets a positive ridge.
inline double default_fisher_ridge(const Matrix& H, const std::vector<int>& labels) {
    const Scatter s = scatter_matrices(H, labels);
    const double r = 1e-6 * s.within.trace() / static_cast<double>(H.rows());
    return r > 0.0 ? r : 1e-12;
}

/// Largest eigenvalue of (S_w + ridge I)^{-1} S_b.
///
/// With S_w + ridge I = C C^T the problem is the symmetric PSD eigenproblem of
/// C^{-1} S_b C^{-T}; power iteration runs on that matrix until the Rayleigh
/// quotient changes by less than tol (relative).
inline double fisher_eig(const Matrix& H, const std::vector<int>& labels, double ridge, double tol = 1e-10,
                         Index max_iter = 10000) {
    detail::require(ridge > 0.0, "fisher_eig: ridge must be > 0");
    const Scatter s = scatter_matrices(H, labels);
    const Index k = H.rows();
    const Eigen::LLT<Matrix> chol(s.within + ridge * Matrix::Identity(k, k));
    detail::require(chol.info() == Eigen::Success, "fisher_eig: S_w + ridge I is not positive definite");
    const Matrix lower = chol.matrixL();
    Matrix tmp = lower.triangularView<Eigen::Lower>().solve(s.between);
    const Matrix whitened = lower.triangularView<Eigen::Lower>().solve(Matrix(tmp.transpose()));
    const Matrix sym = 0.5 * (whitened + whitened.transpose());

    auto rng = detail::make_rng(0, detail::stream_power);
    std::normal_distribution<double> normal;
    Vector v(k);
    for (Index i = 0; i < k; ++i) {
        v(i) = normal(rng);
    }
    v.normalize();
    double lambda = v.dot(sym * v);
    for (Index it = 0; it < max_iter; ++it) {
        Vector w = sym * v;
        const double norm = w.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        v = w / norm;
        const double next = v.dot(sym * v);
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
            return std::max(0.0, next);
        }
        lambda = next;
    }
    throw convergence_error("fisher_eig power iteration did not converge", std::abs(lambda));
}

inline double fisher_eig(const Matrix& H, const std::vector<int>& labels) {
    return fisher_eig(H, labels, default_fisher_ridge(H, labels));
}

/// All four measures for one set of features: locality on a graph built over the
/// training codes, held-out SVM error, and the Fisher eigenvalue of the training codes.
inline MetricsReport evaluate_features(const Matrix& train_H, const std::vector<int>& train_labels,
                                       const Matrix& test_H, const std::vector<int>& test_labels,
                                       const GraphConfig& graph_cfg, Index k, double svm_reg, std::uint64_t seed) {
    const NeighborGraph g = build_graph(train_H, graph_cfg);
    MetricsReport r;
    r.n_ratio = n_ratio(g, train_labels, k);
    r.c_ratio = c_ratio(g, train_labels);
    r.class_error = linear_svm(train_H, train_labels, test_H, test_labels, svm_reg, seed);
    r.fisher_eig = fisher_eig(train_H, train_labels);
    return r;
}

} // namespace inae
