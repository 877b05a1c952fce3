#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "inae/common.hpp"
#include "inae/dataset.hpp"
#include "inae/diffusion.hpp"
#include "inae/graph.hpp"
#include "inae/model.hpp"

namespace inae {

struct TrainConfig {
    Index input_dim = 0; // 0: taken from the data
    Index hidden_dim = 16;
    Index iterations = 5;            // T outer updates
    Index epochs_per_iteration = 20; // SGD epochs per outer update
    Index warm_epochs = 5;           // plain DAE epochs producing theta_0
    double alpha = 0.1;
    double dt = 1.0;
    double learning_rate = 0.1;
    Index batch_size = 20;
    CorruptionSpec corruption{};
    Index m = 1;
    GraphConfig graph{};
    LossKind loss = LossKind::squared;
    std::uint64_t seed = 0;

    Index total_epochs() const { return warm_epochs + iterations * epochs_per_iteration; }

    void validate() const {
        detail::require(hidden_dim >= 1, "hidden_dim must be >= 1");
        detail::require(iterations >= 1, "iterations (T) must be >= 1");
        detail::require(epochs_per_iteration >= 0 && warm_epochs >= 0, "epoch counts must be >= 0");
        detail::require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
        detail::require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
        detail::require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be > 0");
        detail::require(batch_size >= 1, "batch_size must be >= 1");
        detail::require(m >= 1, "m (copies per sample) must be >= 1");
        corruption.validate();
        graph.validate();
    }
};

struct EpochRecord {
    Index epoch;       // 1-based over the whole run
    Index t;           // 0 during the warm start, then the outer iteration
    double recon_loss; // mean reconstruction loss over all corrupted columns
    double phi;        // Phi against the iteration's anchor (0 when no anchor)
    double total;      // recon_loss + alpha * phi / N
    double learning_rate;
};

struct IterationRecord {
    Index t;
    double objective_start; // objective of iteration t at theta_{t-1}
    double objective_end;   // objective of iteration t at theta_t
    double phi;             // Phi(encode(theta_t), H^{t-1}) at the end of the iteration
    double seconds;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
    std::vector<IterationRecord> iterations;
};

struct TrainResult {
    ModelParams params;
    TrainTrace trace;
};

/// Called with (t, theta_t, H^t = encode(theta_t, X_corrupt)) at t = 0 (warm start) and after every outer update.
using IterationObserver = std::function<void(Index, const ModelParams&, const Matrix&)>;

struct Objective {
    double recon;
    double phi;
    double total;
};

namespace detail {

/// Training problem over the corrupted columns, shared by the AE, DAE and InAE trainers.
struct SgdProblem {
    Matrix inputs;  // corrupted copies, D x N
    Matrix targets; // clean originals aligned with inputs
    LossKind loss;
    Index batch_size;
    std::mt19937_64 shuffle_rng;
};

/// Diffusion term of one outer iteration: anchor H^{t-1}, Laplacian over the copies,
/// and a cache of the most recent code of every column used for neighbor terms.
struct PhiTerm {
    const SparseMatrix* laplacian;
    Matrix anchor;
    Matrix current;
    double alpha;
    double dt;
};

inline Objective evaluate_objective(const ModelParams& p, const SgdProblem& prob, const PhiTerm* phi_term) {
    const Matrix H = encode(p, prob.inputs);
    Objective obj{recon_loss_from_logits(prob.loss, prob.targets, decoder_preactivation(p, H)), 0.0, 0.0};
    obj.total = obj.recon;
    if (phi_term != nullptr) {
        obj.phi = phi(H, phi_term->anchor, *phi_term->laplacian, phi_term->dt);
        obj.total += phi_term->alpha * obj.phi / static_cast<double>(prob.inputs.cols());
    }
    return obj;
}

/// One SGD step on the columns `batch`.
///
/// Minimizes the batch estimate of recon + alpha * Phi / N. The Phi gradient for a
/// batch column i is 2 (h_i - anchor_i) + 2 dt (H L)_i, with out-of-batch codes taken
/// from the `current` cache (exact for the full batch).
inline void sgd_step(ModelParams& p, double lr, const SgdProblem& prob, const std::vector<Index>& batch,
                     PhiTerm* phi_term) {
    const auto b = static_cast<Index>(batch.size());
    Matrix X(prob.inputs.rows(), b);
    Matrix T(prob.targets.rows(), b);
    for (Index c = 0; c < b; ++c) {
        X.col(c) = prob.inputs.col(batch[static_cast<std::size_t>(c)]);
        T.col(c) = prob.targets.col(batch[static_cast<std::size_t>(c)]);
    }
    ModelGradient g = ModelParams::zeros(p.input_dim(), p.hidden_dim());
    Matrix H;
    recon_grad_sum(p, prob.loss, X, T, H, g);

    if (phi_term != nullptr) {
        for (Index c = 0; c < b; ++c) {
            phi_term->current.col(batch[static_cast<std::size_t>(c)]) = H.col(c);
        }
        Matrix G(H.rows(), b);
        for (Index c = 0; c < b; ++c) {
            const Index i = batch[static_cast<std::size_t>(c)];
            Vector smooth = Vector::Zero(H.rows());
            for (SparseMatrix::InnerIterator it(*phi_term->laplacian, i); it; ++it) {
                smooth.noalias() += it.value() * phi_term->current.col(it.row());
            }
            G.col(c) = 2.0 * (H.col(c) - phi_term->anchor.col(i)) + 2.0 * phi_term->dt * smooth;
        }
        const Matrix delta = (phi_term->alpha * G).cwiseProduct(H.cwiseProduct((1.0 - H.array()).matrix()));
        g.W1.noalias() += delta * X.transpose();
        g.b1 += delta.rowwise().sum();
    }

    const double step = lr / static_cast<double>(b);
    p.W1.noalias() -= step * g.W1;
    p.b1 -= step * g.b1;
    p.W2.noalias() -= step * g.W2;
    p.b2 -= step * g.b2;
}

inline void sgd_epoch(ModelParams& p, double lr, const SgdProblem& prob, const std::vector<Index>& order,
                      PhiTerm* phi_term) {
    std::vector<Index> batch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(prob.batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(prob.batch_size));
        batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
        sgd_step(p, lr, prob, batch, phi_term);
    }
}

inline constexpr int max_rate_halvings = 3;

/// Runs `epochs` shuffled SGD epochs; a non-finite result restores the epoch's
/// starting point, halves the learning rate and retries (at most 3 halvings per run).
inline void run_epochs(ModelParams& p, double& lr, int& halvings, SgdProblem& prob, PhiTerm* phi_term, Index epochs,
                       Index t, TrainTrace& trace) {
    std::vector<Index> order(static_cast<std::size_t>(prob.inputs.cols()));
    for (Index e = 0; e < epochs; ++e) {
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), prob.shuffle_rng);
        const Index epoch_no = static_cast<Index>(trace.epochs.size()) + 1;
        const ModelParams start = p;
        const Matrix cache_start = phi_term != nullptr ? phi_term->current : Matrix();
        while (true) {
            sgd_epoch(p, lr, prob, order, phi_term);
            const Objective obj = p.all_finite() ? evaluate_objective(p, prob, phi_term)
                                                 : Objective{NAN, NAN, NAN};
            if (std::isfinite(obj.total)) {
                trace.epochs.push_back({epoch_no, t, obj.recon, obj.phi, obj.total, lr});
                break;
            }
            if (halvings >= max_rate_halvings) {
                throw training_error("training diverged", static_cast<std::size_t>(epoch_no), lr);
            }
            ++halvings;
            lr *= 0.5;
            p = start;
            if (phi_term != nullptr) {
                phi_term->current = cache_start;
            }
        }
    }
}

inline SgdProblem make_problem(const Dataset& ds, const TrainConfig& cfg, bool apply_corruption) {
    detail::require(ds.size() >= 2, "training needs at least 2 samples");
    ds.validate();
    detail::require(cfg.input_dim == 0 || cfg.input_dim == ds.feature_dim(),
                    "config input_dim " + std::to_string(cfg.input_dim) + " does not match data dimension "
                        + std::to_string(ds.feature_dim()));
    if (cfg.loss == LossKind::cross_entropy) {
        detail::require(ds.samples.minCoeff() >= 0.0 && ds.samples.maxCoeff() <= 1.0,
                        "cross-entropy loss needs data in [0, 1]");
    }
    SgdProblem prob{{}, {}, cfg.loss, cfg.batch_size, make_rng(cfg.seed, stream_shuffle)};
    if (apply_corruption) {
        Dataset noisy = corrupt(ds, cfg.corruption, cfg.m);
        prob.targets = gather_columns(ds.samples, *noisy.origin_index);
        prob.inputs = std::move(noisy.samples);
    } else {
        prob.inputs = ds.samples;
        prob.targets = ds.samples;
    }
    return prob;
}

inline TrainResult train_plain(const Dataset& ds, const TrainConfig& cfg, bool apply_corruption,
                               const IterationObserver& observer) {
    cfg.validate();
    SgdProblem prob = make_problem(ds, cfg, apply_corruption);
    TrainResult out{init_params(ds.feature_dim(), cfg.hidden_dim, cfg.seed), {}};
    double lr = cfg.learning_rate;
    int halvings = 0;
    run_epochs(out.params, lr, halvings, prob, nullptr, cfg.warm_epochs, 0, out.trace);
    if (observer) {
        observer(0, out.params, encode(out.params, prob.inputs));
    }
    for (Index t = 1; t <= cfg.iterations; ++t) {
        run_epochs(out.params, lr, halvings, prob, nullptr, cfg.epochs_per_iteration, t, out.trace);
        if (observer) {
            observer(t, out.params, encode(out.params, prob.inputs));
        }
    }
    return out;
}

} // namespace detail

/// Denoising autoencoder: SGD on the mean reconstruction loss of the m corrupted
/// copies against their clean originals, for cfg.total_epochs() epochs (the same
/// schedule train_inae runs). alpha, dt and the graph settings are unused. The
/// observer sees the parameters after the warm epochs and after each epoch block.
inline TrainResult train_dae(const Dataset& ds, const TrainConfig& cfg, const IterationObserver& observer = {}) {
    return detail::train_plain(ds, cfg, true, observer);
}

/// Plain autoencoder: as train_dae, reconstructing the clean data from itself.
inline TrainResult train_ae(const Dataset& ds, const TrainConfig& cfg, const IterationObserver& observer = {}) {
    return detail::train_plain(ds, cfg, false, observer);
}

/// Incremental auto-encoder training.
///
///  1. corrupt X into m copies per sample;
///  2. build the neighborhood graph on clean X and lift it to the copies;
///  3. theta_0 = warm_epochs of plain DAE training, H^0 = encode(theta_0, X_corrupt);
///  4. for t = 1..T: SGD for epochs_per_iteration on recon + alpha * Phi(H; H^{t-1}) / N,
///     then H^t = encode(theta_t, X_corrupt).
///
/// The graph is built once. With alpha = 0 the run is bitwise identical to train_dae.
inline TrainResult train_inae(const Dataset& ds, const TrainConfig& cfg, const IterationObserver& observer = {}) {
    cfg.validate();
    detail::SgdProblem prob = detail::make_problem(ds, cfg, true);

    SparseMatrix laplacian;
    if (cfg.alpha > 0.0) {
        const NeighborGraph clean = build_graph(ds.samples, cfg.graph);
        laplacian = expand_to_copies(clean, cfg.m, cfg.graph.expansion).laplacian;
    }

    TrainResult out{init_params(ds.feature_dim(), cfg.hidden_dim, cfg.seed), {}};
    double lr = cfg.learning_rate;
    int halvings = 0;
    detail::run_epochs(out.params, lr, halvings, prob, nullptr, cfg.warm_epochs, 0, out.trace);

    Matrix features = encode(out.params, prob.inputs);
    if (observer) {
        observer(0, out.params, features);
    }

    for (Index t = 1; t <= cfg.iterations; ++t) {
        const auto started = std::chrono::steady_clock::now();
        IterationRecord rec{t, 0.0, 0.0, 0.0, 0.0};
        if (cfg.alpha > 0.0) {
            detail::PhiTerm term{&laplacian, features, features, cfg.alpha, cfg.dt};
            rec.objective_start = detail::evaluate_objective(out.params, prob, &term).total;
            detail::run_epochs(out.params, lr, halvings, prob, &term, cfg.epochs_per_iteration, t, out.trace);
            const Objective end = detail::evaluate_objective(out.params, prob, &term);
            rec.objective_end = end.total;
            rec.phi = end.phi;
        } else {
            rec.objective_start = detail::evaluate_objective(out.params, prob, nullptr).total;
            detail::run_epochs(out.params, lr, halvings, prob, nullptr, cfg.epochs_per_iteration, t, out.trace);
            rec.objective_end = detail::evaluate_objective(out.params, prob, nullptr).total;
        }
        features = encode(out.params, prob.inputs);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        out.trace.iterations.push_back(rec);
        if (observer) {
            observer(t, out.params, features);
        }
    }
    return out;
}

/// Greedy layerwise stacking: layer l+1 trains (with train_inae, fresh corruption)
/// on encode(theta_l, clean input of layer l). The observer follows the last layer.
inline std::vector<TrainResult> stack(const Dataset& ds, const std::vector<TrainConfig>& layer_cfgs,
                                      const IterationObserver& observer = {}) {
    detail::require(!layer_cfgs.empty(), "stack needs at least one layer");
    std::vector<TrainResult> layers;
    Dataset level = ds;
    for (std::size_t l = 0; l < layer_cfgs.size(); ++l) {
        const TrainConfig& cfg = layer_cfgs[l];
        detail::require(cfg.input_dim == 0 || cfg.input_dim == level.feature_dim(),
                        "layer " + std::to_string(l + 1) + " expects input dimension " + std::to_string(cfg.input_dim)
                            + " but the previous level has " + std::to_string(level.feature_dim()));
        layers.push_back(train_inae(level, cfg, l + 1 == layer_cfgs.size() ? observer : IterationObserver{}));
        if (l + 1 < layer_cfgs.size()) {
            level.samples = encode(layers.back().params, level.samples);
        }
    }
    return layers;
}

/// Codes of X after passing through every layer of a stack.
inline Matrix encode_stack(const std::vector<ModelParams>& layers, const Matrix& X) {
    Matrix h = X;
    for (const auto& p : layers) {
        h = encode(p, h);
    }
    return h;
}

} // namespace inae
