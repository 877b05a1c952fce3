#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "inae/common.hpp"
#include "inae/dataset.hpp"

namespace inae {

enum class GraphStrategy { knn, adaptive };
enum class KernelKind { gaussian, cosine };
enum class CopyExpansion { clean_only, kronecker_copies };

struct GraphConfig {
    Index k = 10;
    GraphStrategy strategy = GraphStrategy::adaptive;
    KernelKind kernel = KernelKind::gaussian;
    double sigma = 0.0; // gaussian width; 0 selects the median k-nn distance
    double lasso_lambda = 0.05;
    CopyExpansion expansion = CopyExpansion::kronecker_copies;
    double lasso_tol = 1e-8;
    Index lasso_max_iter = 10000;

    void validate() const {
        detail::require(k >= 1, "graph k must be >= 1");
        detail::require(std::isfinite(sigma) && sigma >= 0.0, "gaussian sigma must be > 0 (or 0 for automatic)");
        detail::require(std::isfinite(lasso_lambda) && lasso_lambda >= 0.0, "lasso lambda must be >= 0");
        detail::require(lasso_tol > 0.0 && lasso_max_iter >= 1, "lasso tolerance/iteration limits must be positive");
    }
};

struct Neighbor {
    Index index;
    double coefficient; // lasso coefficient (adaptive), 1 (knn), or similarity (expanded graphs)
};

/// Neighbor lists plus the symmetric similarity matrix S, degrees D_ii = sum_j S_ij
/// and Laplacian L = D - S.
///
/// Neighbor lists are stored in rank order: by distance for knn graphs and by
/// descending |coefficient| for adaptive graphs.
struct NeighborGraph {
    std::vector<std::vector<Neighbor>> neighbors;
    SparseMatrix similarity;
    Vector degrees;
    SparseMatrix laplacian;
    GraphStrategy strategy = GraphStrategy::knn;
    KernelKind kernel = KernelKind::gaussian;
    double sigma = 0.0;

    Index size() const { return similarity.rows(); }
};

inline std::string to_string(GraphStrategy s) { return s == GraphStrategy::knn ? "knn" : "adaptive"; }
inline std::string to_string(KernelKind k) { return k == KernelKind::gaussian ? "gaussian" : "cosine"; }
inline std::string to_string(CopyExpansion e) {
    return e == CopyExpansion::clean_only ? "clean_only" : "kronecker_copies";
}

inline GraphStrategy graph_strategy_from_string(const std::string& s) {
    if (s == "knn") return GraphStrategy::knn;
    if (s == "adaptive") return GraphStrategy::adaptive;
    throw invalid_argument("unknown graph strategy '" + s + "'");
}

inline KernelKind kernel_from_string(const std::string& s) {
    if (s == "gaussian") return KernelKind::gaussian;
    if (s == "cosine") return KernelKind::cosine;
    throw invalid_argument("unknown kernel '" + s + "'");
}

inline CopyExpansion expansion_from_string(const std::string& s) {
    if (s == "clean_only") return CopyExpansion::clean_only;
    if (s == "kronecker_copies") return CopyExpansion::kronecker_copies;
    throw invalid_argument("unknown copy expansion '" + s + "'");
}

namespace detail {

// Runs body(begin, end) over [0, n) in contiguous chunks on up to thread_cap() threads.
// Each index is handled by exactly one call, so per-index outputs are schedule independent.
template <typename Body>
void parallel_for(Index n, Body&& body) {
    const auto workers = static_cast<Index>(std::min<std::size_t>(thread_cap(), static_cast<std::size_t>(std::max<Index>(n, 1))));
    if (workers <= 1 || n < 64) {
        body(Index{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    const Index chunk = (n + workers - 1) / workers;
    for (Index w = 0; w < workers; ++w) {
        const Index begin = w * chunk;
        const Index end = std::min(n, begin + chunk);
        if (begin < end) {
            pool.emplace_back([&body, begin, end] { body(begin, end); });
        }
    }
}

struct KnnResult {
    std::vector<std::vector<Index>> index;
    std::vector<std::vector<double>> distance;
};

inline KnnResult knn_search(const Matrix& X, Index k) {
    const Index n = X.cols();
    require(k >= 1, "k must be >= 1");
    require(k < n, "k must be smaller than the number of samples");
    KnnResult out;
    out.index.resize(static_cast<std::size_t>(n));
    out.distance.resize(static_cast<std::size_t>(n));
    parallel_for(n, [&](Index begin, Index end) {
        std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(n - 1));
        for (Index i = begin; i < end; ++i) {
            std::size_t pos = 0;
            for (Index j = 0; j < n; ++j) {
                if (j != i) {
                    cand[pos++] = {(X.col(i) - X.col(j)).squaredNorm(), j};
                }
            }
            // pair ordering breaks distance ties by lower index
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
            auto& idx = out.index[static_cast<std::size_t>(i)];
            auto& dist = out.distance[static_cast<std::size_t>(i)];
            for (Index r = 0; r < k; ++r) {
                idx.push_back(cand[static_cast<std::size_t>(r)].second);
                dist.push_back(std::sqrt(cand[static_cast<std::size_t>(r)].first));
            }
        }
    });
    return out;
}

inline double median(std::vector<double> values) {
    require(!values.empty(), "median of empty set");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double hi = *mid;
    if (values.size() % 2 == 1) {
        return hi;
    }
    const double lo = *std::max_element(values.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace detail

/// The k distinct nearest other columns of X for every column, nearest first;
/// equal distances are ordered by lower index.
inline std::vector<std::vector<Index>> knn_neighbors(const Matrix& X, Index k) {
    return detail::knn_search(X, k).index;
}

inline std::vector<std::vector<Index>> knn_neighbors(const Dataset& ds, Index k) {
    return knn_neighbors(ds.samples, k);
}

struct LassoSolution {
    Vector coefficients;
    double kkt_residual = 0.0;
    Index iterations = 0;
};

/// Largest KKT violation of c for min 1/2 ||x - A c||^2 + lambda ||c||_1.
inline double lasso_kkt_residual(const Vector& x, const Matrix& A, const Vector& c, double lambda) {
    const Vector grad = A.transpose() * (A * c - x);
    double worst = 0.0;
    for (Index j = 0; j < c.size(); ++j) {
        const double r = c(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - lambda)
                                     : std::abs(grad(j) + lambda * (c(j) > 0 ? 1.0 : -1.0));
        worst = std::max(worst, r);
    }
    return worst;
}

inline double lasso_objective(const Vector& x, const Matrix& A, const Vector& c, double lambda) {
    return 0.5 * (x - A * c).squaredNorm() + lambda * c.lpNorm<1>();
}

namespace detail {

inline std::vector<Index> support_of(const Vector& c) {
    std::vector<Index> support;
    for (Index j = 0; j < c.size(); ++j) {
        if (c(j) != 0.0) {
            support.push_back(j);
        }
    }
    return support;
}

// While the active columns are linearly dependent, slide along a null direction v of
// A_S (the fit is unchanged) oriented so that sign(c)^T v <= 0, until a coefficient
// hits zero. The objective never increases and the support shrinks to full rank.
inline void reduce_to_full_rank(const Matrix& A, Vector& c) {
    while (true) {
        const auto support = support_of(c);
        const auto s = static_cast<Index>(support.size());
        if (s == 0) {
            return;
        }
        Matrix active(A.rows(), s);
        for (Index a = 0; a < s; ++a) {
            active.col(a) = A.col(support[static_cast<std::size_t>(a)]);
        }
        Eigen::FullPivLU<Matrix> lu(active);
        lu.setThreshold(1e-10);
        if (lu.rank() == s) {
            return;
        }
        Vector v = lu.kernel().col(0);
        double slope = 0.0;
        for (Index a = 0; a < s; ++a) {
            slope += (c(support[static_cast<std::size_t>(a)]) > 0 ? 1.0 : -1.0) * v(a);
        }
        if (slope > 0.0) {
            v = -v;
        }
        double step = std::numeric_limits<double>::infinity();
        Index blocking = -1;
        for (Index a = 0; a < s; ++a) {
            const double now = c(support[static_cast<std::size_t>(a)]);
            if (now * v(a) < 0.0 && -now / v(a) < step) {
                step = -now / v(a);
                blocking = a;
            }
        }
        if (blocking < 0) {
            return;
        }
        for (Index a = 0; a < s; ++a) {
            c(support[static_cast<std::size_t>(a)]) += step * v(a);
        }
        c(support[static_cast<std::size_t>(blocking)]) = 0.0;
    }
}

// Feature-sign search (an active-set method for the lasso) started from c. Each step
// solves the smooth problem on the active set with fixed signs, then takes the best point
// of a discrete line search over the sign changes between c and that solution, so the
// objective strictly decreases and the search ends after finitely many sign patterns.
// Returns true once c satisfies the KKT conditions within kkt_tol.
inline bool feature_sign_search(const Vector& x, const Matrix& A, const Matrix& gram, const Vector& corr,
                                double lambda, double kkt_tol, Vector& c, Index max_steps) {
    reduce_to_full_rank(A, c);
    const Index p = c.size();
    std::vector<double> theta(static_cast<std::size_t>(p), 0.0);
    for (Index j = 0; j < p; ++j) {
        theta[static_cast<std::size_t>(j)] = c(j) > 0 ? 1.0 : (c(j) < 0 ? -1.0 : 0.0);
    }
    double current = lasso_objective(x, A, c, lambda);
    for (Index step = 0; step < max_steps; ++step) {
        const Vector grad = gram * c - corr;
        double active_violation = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (theta[static_cast<std::size_t>(j)] != 0.0) {
                active_violation =
                    std::max(active_violation, std::abs(grad(j) + lambda * theta[static_cast<std::size_t>(j)]));
            }
        }
        if (active_violation <= kkt_tol) {
            Index best = -1;
            double best_val = lambda + kkt_tol;
            for (Index j = 0; j < p; ++j) {
                if (theta[static_cast<std::size_t>(j)] == 0.0 && std::abs(grad(j)) > best_val) {
                    best_val = std::abs(grad(j));
                    best = j;
                }
            }
            if (best < 0) {
                return true;
            }
            theta[static_cast<std::size_t>(best)] = grad(best) > 0 ? -1.0 : 1.0;
        }

        std::vector<Index> active;
        for (Index j = 0; j < p; ++j) {
            if (theta[static_cast<std::size_t>(j)] != 0.0) {
                active.push_back(j);
            }
        }
        const auto s = static_cast<Index>(active.size());
        Matrix sub(s, s);
        Vector rhs(s);
        for (Index a = 0; a < s; ++a) {
            const Index ja = active[static_cast<std::size_t>(a)];
            rhs(a) = corr(ja) - lambda * theta[static_cast<std::size_t>(ja)];
            for (Index b = 0; b < s; ++b) {
                sub(a, b) = gram(ja, active[static_cast<std::size_t>(b)]);
            }
        }
        const Vector solved = sub.completeOrthogonalDecomposition().solve(rhs);
        if (!solved.allFinite()) {
            return false;
        }

        // Candidates: the smooth solution and every point where an active coefficient crosses zero.
        std::vector<double> taus{1.0};
        for (Index a = 0; a < s; ++a) {
            const double now = c(active[static_cast<std::size_t>(a)]);
            if (now != 0.0 && now * solved(a) < 0.0) {
                taus.push_back(now / (now - solved(a)));
            }
        }
        Vector best_c = c;
        double best_obj = current;
        for (double tau : taus) {
            Vector cand = c;
            for (Index a = 0; a < s; ++a) {
                const Index ja = active[static_cast<std::size_t>(a)];
                const double now = c(ja);
                const double moved = now + tau * (solved(a) - now);
                const bool crossed = now != 0.0 && now * solved(a) < 0.0 && tau >= now / (now - solved(a));
                cand(ja) = crossed ? 0.0 : moved;
            }
            const double obj = lasso_objective(x, A, cand, lambda);
            if (obj < best_obj) {
                best_obj = obj;
                best_c = cand;
            }
        }
        if (!(best_obj < current)) {
            // No descent left: either KKT holds up to rounding or the sign guess was wrong.
            if (lasso_kkt_residual(x, A, c, lambda) <= kkt_tol) {
                return true;
            }
            return false;
        }
        c = best_c;
        current = best_obj;
        for (Index j = 0; j < p; ++j) {
            theta[static_cast<std::size_t>(j)] = c(j) > 0 ? 1.0 : (c(j) < 0 ? -1.0 : 0.0);
        }
    }
    return lasso_kkt_residual(x, A, c, lambda) <= kkt_tol;
}

} // namespace detail

/// Cyclic coordinate descent with soft thresholding for
///   min_c 1/2 ||x - A c||^2 + lambda ||c||_1.
///
/// Stops once a full sweep moves no coordinate by more than `tol` and the KKT
/// residual is below tol * max(1, max_j ||a_j||^2). Nearly collinear candidates
/// (close neighbors) make plain coordinate descent crawl, so every few sweeps a
/// feature-sign search is started from a copy of the current iterate; it is kept if it
/// reaches the KKT tolerance or lowers the objective. Throws convergence_error after
/// `max_iter` sweeps.
inline LassoSolution lasso_select(const Vector& x, const Matrix& A, double lambda, double tol = 1e-8,
                                  Index max_iter = 10000) {
    detail::require(lambda >= 0.0, "lasso lambda must be >= 0");
    detail::require(A.cols() > 0, "lasso needs at least one candidate");
    detail::require(A.rows() == x.size(), "candidate matrix rows must match x");

    const Matrix gram = A.transpose() * A;
    const Vector corr = A.transpose() * x;
    const Index p = A.cols();
    const double kkt_tol = tol * std::max(1.0, gram.diagonal().maxCoeff());
    constexpr Index polish_every = 5;

    LassoSolution sol;
    sol.coefficients = Vector::Zero(p);
    Vector& c = sol.coefficients;
    Vector gc = Vector::Zero(p); // gram * c

    for (Index sweep = 1; sweep <= max_iter; ++sweep) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double gjj = gram(j, j);
            if (gjj <= 0.0) {
                continue;
            }
            const double rho = corr(j) - gc(j) + gjj * c(j);
            double updated = 0.0;
            if (rho > lambda) {
                updated = (rho - lambda) / gjj;
            } else if (rho < -lambda) {
                updated = (rho + lambda) / gjj;
            }
            const double delta = updated - c(j);
            if (delta != 0.0) {
                gc += gram.col(j) * delta;
                c(j) = updated;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        sol.iterations = sweep;
        if (max_change < tol) {
            sol.kkt_residual = lasso_kkt_residual(x, A, c, lambda);
            if (sol.kkt_residual <= kkt_tol) {
                Vector trial = c;
                detail::feature_sign_search(x, A, gram, corr, lambda, kkt_tol, trial, 20 * p + 20);
                const double polished = lasso_kkt_residual(x, A, trial, lambda);
                if (polished < sol.kkt_residual
                    && lasso_objective(x, A, trial, lambda) <= lasso_objective(x, A, c, lambda)) {
                    c = trial;
                    sol.kkt_residual = polished;
                }
                return sol;
            }
            gc = gram * c; // clear accumulated drift before continuing
        }
        if (sweep % polish_every == 0) {
            Vector trial = c;
            const bool done = detail::feature_sign_search(x, A, gram, corr, lambda, kkt_tol, trial, 20 * p + 20);
            if (done || lasso_objective(x, A, trial, lambda) < lasso_objective(x, A, c, lambda)) {
                c = trial;
            }
            gc = gram * c;
            if (done) {
                sol.kkt_residual = lasso_kkt_residual(x, A, c, lambda);
                if (sol.kkt_residual <= kkt_tol) {
                    return sol;
                }
            }
        }
    }
    throw convergence_error("lasso coordinate descent did not converge in " + std::to_string(max_iter) + " sweeps",
                            lasso_kkt_residual(x, A, c, lambda));
}

namespace detail {

inline double kernel_value(const Matrix& X, Index i, Index j, KernelKind kernel, double sigma) {
    if (kernel == KernelKind::gaussian) {
        return std::exp(-(X.col(i) - X.col(j)).squaredNorm() / (2.0 * sigma * sigma));
    }
    const double ni = X.col(i).norm();
    const double nj = X.col(j).norm();
    if (ni == 0.0 || nj == 0.0) {
        return 0.0;
    }
    // negative cosine similarities are clipped so that S stays non-negative
    return std::max(0.0, X.col(i).dot(X.col(j)) / (ni * nj));
}

inline void assemble_laplacian(NeighborGraph& g) {
    const Index n = g.similarity.rows();
    g.degrees = Vector::Zero(n);
    for (Index c = 0; c < g.similarity.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(g.similarity, c); it; ++it) {
            g.degrees(it.row()) += it.value();
        }
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(g.similarity.nonZeros() + n));
    for (Index c = 0; c < g.similarity.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(g.similarity, c); it; ++it) {
            trip.emplace_back(it.row(), it.col(), -it.value());
        }
    }
    for (Index i = 0; i < n; ++i) {
        trip.emplace_back(i, i, g.degrees(i));
    }
    g.laplacian.resize(n, n);
    g.laplacian.setFromTriplets(trip.begin(), trip.end());
    g.laplacian.makeCompressed();
}

} // namespace detail

/// Builds the neighborhood graph over the columns of X.
///
/// knn: every k-nn neighbor is kept with coefficient 1.
/// adaptive: the k-nn candidates X_G(x) are filtered by the lasso; the candidates
/// with non-zero coefficient form X_L(x).
/// S_ij = kernel(x_i, x_j) for j in X_L(x_i), then S = (S + S^T) / 2 and L = D - S.
inline NeighborGraph build_graph(const Matrix& X, const GraphConfig& cfg) {
    cfg.validate();
    const Index n = X.cols();
    const auto knn = detail::knn_search(X, cfg.k);

    NeighborGraph g;
    g.strategy = cfg.strategy;
    g.kernel = cfg.kernel;
    g.neighbors.resize(static_cast<std::size_t>(n));

    if (cfg.kernel == KernelKind::gaussian) {
        if (cfg.sigma > 0.0) {
            g.sigma = cfg.sigma;
        } else {
            std::vector<double> all;
            for (const auto& d : knn.distance) {
                all.insert(all.end(), d.begin(), d.end());
            }
            g.sigma = detail::median(std::move(all));
            if (!(g.sigma > 0.0)) {
                g.sigma = 1.0; // all k-nn pairs coincide
            }
        }
    }

    if (cfg.strategy == GraphStrategy::knn) {
        for (Index i = 0; i < n; ++i) {
            for (Index j : knn.index[static_cast<std::size_t>(i)]) {
                g.neighbors[static_cast<std::size_t>(i)].push_back({j, 1.0});
            }
        }
    } else {
        detail::parallel_for(n, [&](Index begin, Index end) {
            Matrix cand(X.rows(), cfg.k);
            for (Index i = begin; i < end; ++i) {
                const auto& idx = knn.index[static_cast<std::size_t>(i)];
                for (Index r = 0; r < cfg.k; ++r) {
                    cand.col(r) = X.col(idx[static_cast<std::size_t>(r)]);
                }
                const Vector x = X.col(i);
                const auto sol = lasso_select(x, cand, cfg.lasso_lambda, cfg.lasso_tol, cfg.lasso_max_iter);
                std::vector<Index> rank;
                for (Index r = 0; r < cfg.k; ++r) {
                    if (sol.coefficients(r) != 0.0) {
                        rank.push_back(r);
                    }
                }
                std::stable_sort(rank.begin(), rank.end(), [&](Index a, Index b) {
                    return std::abs(sol.coefficients(a)) > std::abs(sol.coefficients(b));
                });
                auto& out = g.neighbors[static_cast<std::size_t>(i)];
                for (Index r : rank) {
                    out.push_back({idx[static_cast<std::size_t>(r)], sol.coefficients(r)});
                }
            }
        });
    }

    std::vector<Eigen::Triplet<double>> trip;
    for (Index i = 0; i < n; ++i) {
        for (const auto& nb : g.neighbors[static_cast<std::size_t>(i)]) {
            const double s = 0.5 * detail::kernel_value(X, i, nb.index, cfg.kernel, g.sigma);
            if (s != 0.0) {
                trip.emplace_back(i, nb.index, s);
                trip.emplace_back(nb.index, i, s);
            }
        }
    }
    g.similarity.resize(n, n);
    g.similarity.setFromTriplets(trip.begin(), trip.end());
    g.similarity.makeCompressed();
    detail::assemble_laplacian(g);
    return g;
}

inline NeighborGraph build_graph(const Dataset& ds, const GraphConfig& cfg) { return build_graph(ds.samples, cfg); }

/// Wraps a symmetric, non-negative, zero-diagonal similarity matrix as a graph
/// (neighbor lists read off the rows, coefficient = similarity).
inline NeighborGraph graph_from_similarity(const SparseMatrix& similarity) {
    detail::require(similarity.rows() == similarity.cols(), "similarity matrix must be square");
    NeighborGraph g;
    g.similarity = similarity;
    g.similarity.prune(0.0);
    g.similarity.makeCompressed();
    g.neighbors.resize(static_cast<std::size_t>(g.similarity.rows()));
    for (Index c = 0; c < g.similarity.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(g.similarity, c); it; ++it) {
            // column c's entries are row c's entries by symmetry
            g.neighbors[static_cast<std::size_t>(c)].push_back({it.row(), it.value()});
        }
    }
    detail::assemble_laplacian(g);
    return g;
}

/// Lifts a graph over n clean samples to the n*m corrupted copies (copy j of sample
/// i is node i*m + j).
///
/// kronecker_copies: copies of distinct samples i != k get S_ik / m, distinct copies
/// of one sample get `self_similarity` (the kernel at zero distance).
/// clean_only: copy j of i links to copy j of each neighbor k with weight S_ik; no
/// links between copies of one sample.
inline NeighborGraph expand_to_copies(const NeighborGraph& g, Index m,
                                      CopyExpansion mode = CopyExpansion::kronecker_copies,
                                      double self_similarity = 1.0) {
    detail::require(m >= 1, "copies per sample must be >= 1");
    const Index n = g.size();
    std::vector<Eigen::Triplet<double>> trip;
    const double cross_scale = mode == CopyExpansion::kronecker_copies ? 1.0 / static_cast<double>(m) : 1.0;
    for (Index c = 0; c < g.similarity.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(g.similarity, c); it; ++it) {
            if (it.row() == it.col()) {
                continue;
            }
            const double s = m == 1 ? it.value() : it.value() * cross_scale;
            for (Index a = 0; a < m; ++a) {
                if (mode == CopyExpansion::kronecker_copies) {
                    for (Index b = 0; b < m; ++b) {
                        trip.emplace_back(it.row() * m + a, it.col() * m + b, s);
                    }
                } else {
                    trip.emplace_back(it.row() * m + a, it.col() * m + a, s);
                }
            }
        }
    }
    if (mode == CopyExpansion::kronecker_copies && self_similarity != 0.0) {
        for (Index i = 0; i < n; ++i) {
            for (Index a = 0; a < m; ++a) {
                for (Index b = 0; b < m; ++b) {
                    if (a != b) {
                        trip.emplace_back(i * m + a, i * m + b, self_similarity);
                    }
                }
            }
        }
    }
    SparseMatrix expanded(n * m, n * m);
    expanded.setFromTriplets(trip.begin(), trip.end());
    NeighborGraph out = graph_from_similarity(expanded);
    out.strategy = g.strategy;
    out.kernel = g.kernel;
    out.sigma = g.sigma;
    return out;
}

/// Writes the upper triangle of S as an `i,j,s` edge list.
inline void write_edges_csv(const NeighborGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw invalid_argument("cannot write '" + path + "'");
    }
    out << "i,j,s\n" << std::setprecision(17);
    for (Index c = 0; c < g.similarity.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(g.similarity, c); it; ++it) {
            if (it.row() < it.col()) {
                out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
            }
        }
    }
}

} // namespace inae
