#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "inae/dataset.hpp"
#include "inae/graph.hpp"
#include "inae/trainer.hpp"

namespace inae {

/// Where a dataset comes from: the two-moons generator, a CSV file, or an IDX image/label pair.
struct DataSource {
    enum class Kind { two_moons, csv, idx };

    Kind kind = Kind::two_moons;
    Index n_per_class = 200;
    Index dim = 9;
    double noise = 0.1;
    std::uint64_t seed = 0;
    std::string path;   // csv
    bool labeled = true; // csv
    std::string images; // idx
    std::string labels; // idx
    Index n_train = 0;  // idx: 0 keeps every sample for training
    Index n_test = 0;   // idx: held-out samples drawn by the same split
    std::uint64_t split_seed = 0;
};

struct EvalConfig {
    double svm_reg = 1e-4;
    Index n_ratio_k = 0; // 0: use graph.k
};

/// A full experiment. layers holds the configurations of stacked layers 2, 3, ...;
/// layer 1 is `train`.
struct RunConfig {
    DataSource data;
    std::optional<DataSource> test_data;
    TrainConfig train;
    std::vector<TrainConfig> layers;
    EvalConfig eval;
    std::string output_dir = "out";
    bool corruption_seed_explicit = false;

    /// Applies a new training seed to every layer; layer l (0-based) gets seed + l, and
    /// corruption seeds follow unless the config fixed them.
    void set_seed(std::uint64_t seed);
};

namespace detail {

inline std::string data_kind_name(DataSource::Kind k) {
    switch (k) {
    case DataSource::Kind::two_moons: return "two_moons";
    case DataSource::Kind::csv: return "csv";
    case DataSource::Kind::idx: return "idx";
    }
    return "two_moons";
}

/// Typed access to one JSON object that remembers which keys were read, so that
/// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) {
            throw invalid_argument("config: '" + where_ + "' must be an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) {
            throw invalid_argument("config: '" + name(key) + "' must be a number");
        }
        return v.get<double>();
    }

    Index integer(const std::string& key, Index fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) {
            throw invalid_argument("config: '" + name(key) + "' must be an integer");
        }
        return v.get<Index>();
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) {
            throw invalid_argument("config: '" + name(key) + "' must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_boolean()) {
            throw invalid_argument("config: '" + name(key) + "' must be true or false");
        }
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) {
            throw invalid_argument("config: '" + name(key) + "' must be a string");
        }
        return v.get<std::string>();
    }

    template <class F>
    auto parsed(const std::string& key, const std::string& fallback, F&& convert) {
        const std::string s = text(key, fallback);
        try {
            return convert(s);
        } catch (const std::invalid_argument& e) {
            throw invalid_argument("config: '" + name(key) + "': " + e.what());
        }
    }

    const nlohmann::json& child(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string name(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.count(item.key()) == 0) {
                throw invalid_argument("config: unknown key '" + name(item.key()) + "'");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) {
        return p;
    }
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

inline DataSource parse_data(const nlohmann::json& j, const std::string& where, const std::filesystem::path& base) {
    ObjectReader r(j, where);
    DataSource d;
    const std::string kind = r.text("source", "two_moons");
    if (kind == "two_moons") {
        d.kind = DataSource::Kind::two_moons;
        d.n_per_class = r.integer("n_per_class", d.n_per_class);
        d.dim = r.integer("dim", d.dim);
        d.noise = r.number("noise", d.noise);
        d.seed = r.seed("seed", d.seed);
        require(d.n_per_class >= 1, "config: '" + r.name("n_per_class") + "' must be >= 1");
        require(d.dim >= 2, "config: '" + r.name("dim") + "' must be >= 2");
        require(d.noise >= 0.0, "config: '" + r.name("noise") + "' must be >= 0");
    } else if (kind == "csv") {
        d.kind = DataSource::Kind::csv;
        d.path = resolve_path(r.text("path", ""), base);
        d.labeled = r.boolean("labeled", true);
        require(!d.path.empty(), "config: '" + r.name("path") + "' is required for csv data");
    } else if (kind == "idx") {
        d.kind = DataSource::Kind::idx;
        d.images = resolve_path(r.text("images", ""), base);
        d.labels = resolve_path(r.text("labels", ""), base);
        d.n_train = r.integer("n_train", 0);
        d.n_test = r.integer("n_test", 0);
        d.split_seed = r.seed("split_seed", 0);
        require(!d.images.empty() && !d.labels.empty(),
                "config: '" + where + "' needs both 'images' and 'labels' for idx data");
        require(d.n_train >= 0 && d.n_test >= 0, "config: split sizes must be >= 0");
    } else {
        throw invalid_argument("config: '" + r.name("source") + "' must be two_moons, csv or idx, got '" + kind + "'");
    }
    r.finish();
    return d;
}

inline CorruptionSpec parse_corruption(const nlohmann::json& j, const std::string& where, CorruptionSpec base,
                                       bool& seed_explicit) {
    ObjectReader r(j, where);
    base.kind = r.parsed("kind", to_string(base.kind), corruption_kind_from_string);
    base.level = r.number("level", base.level);
    if (r.has("seed")) {
        base.seed = r.seed("seed", base.seed);
        seed_explicit = true;
    }
    r.finish();
    return base;
}

inline GraphConfig parse_graph(const nlohmann::json& j, const std::string& where, GraphConfig g) {
    ObjectReader r(j, where);
    g.k = r.integer("k", g.k);
    g.strategy = r.parsed("strategy", to_string(g.strategy), graph_strategy_from_string);
    g.kernel = r.parsed("kernel", to_string(g.kernel), kernel_from_string);
    g.sigma = r.number("sigma", g.sigma);
    g.lasso_lambda = r.number("lasso_lambda", g.lasso_lambda);
    g.expansion = r.parsed("expansion", to_string(g.expansion), expansion_from_string);
    g.lasso_tol = r.number("lasso_tol", g.lasso_tol);
    g.lasso_max_iter = r.integer("lasso_max_iter", g.lasso_max_iter);
    r.finish();
    return g;
}

/// Reads the training keys of `r` on top of `cfg`. Nested "corruption" and "graph"
/// objects are accepted too.
inline TrainConfig parse_train_keys(ObjectReader& r, TrainConfig cfg, bool& corruption_seed_explicit,
                                    bool& seed_given) {
    cfg.input_dim = r.integer("input_dim", cfg.input_dim);
    cfg.hidden_dim = r.integer("hidden_dim", cfg.hidden_dim);
    cfg.iterations = r.integer("iterations", cfg.iterations);
    cfg.epochs_per_iteration = r.integer("epochs_per_iteration", cfg.epochs_per_iteration);
    cfg.warm_epochs = r.integer("warm_epochs", cfg.warm_epochs);
    cfg.alpha = r.number("alpha", cfg.alpha);
    cfg.dt = r.number("dt", cfg.dt);
    cfg.learning_rate = r.number("learning_rate", cfg.learning_rate);
    cfg.batch_size = r.integer("batch_size", cfg.batch_size);
    cfg.m = r.integer("m", cfg.m);
    cfg.loss = r.parsed("loss", to_string(cfg.loss), loss_from_string);
    seed_given = r.has("seed");
    cfg.seed = r.seed("seed", cfg.seed);
    if (r.has("corruption")) {
        cfg.corruption = parse_corruption(r.child("corruption"), r.name("corruption"), cfg.corruption,
                                          corruption_seed_explicit);
    }
    if (r.has("graph")) {
        cfg.graph = parse_graph(r.child("graph"), r.name("graph"), cfg.graph);
    }
    return cfg;
}

} // namespace detail

inline void RunConfig::set_seed(std::uint64_t seed) {
    train.seed = seed;
    if (!corruption_seed_explicit) {
        train.corruption.seed = seed;
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].seed = seed + l + 1;
        if (!corruption_seed_explicit) {
            layers[l].corruption.seed = seed + l + 1;
        }
    }
}

/// Parses and validates a run configuration. Relative paths are resolved against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    detail::ObjectReader top(j, "");
    RunConfig rc;
    if (top.has("data")) {
        rc.data = detail::parse_data(top.child("data"), "data", base_dir);
    }
    if (top.has("test_data")) {
        rc.test_data = detail::parse_data(top.child("test_data"), "test_data", base_dir);
    }
    bool seed_given = false;
    if (top.has("train")) {
        detail::ObjectReader r(top.child("train"), "train");
        rc.train = detail::parse_train_keys(r, rc.train, rc.corruption_seed_explicit, seed_given);
        r.finish();
    }
    // Top-level corruption and graph sections apply to layer 1 and are inherited by later layers.
    if (top.has("corruption")) {
        rc.train.corruption = detail::parse_corruption(top.child("corruption"), "corruption", rc.train.corruption,
                                                       rc.corruption_seed_explicit);
    }
    if (top.has("graph")) {
        rc.train.graph = detail::parse_graph(top.child("graph"), "graph", rc.train.graph);
    }
    if (!rc.corruption_seed_explicit) {
        rc.train.corruption.seed = rc.train.seed;
    }
    if (top.has("layers")) {
        const auto& arr = top.child("layers");
        if (!arr.is_array()) {
            throw invalid_argument("config: 'layers' must be an array");
        }
        TrainConfig prev = rc.train;
        for (std::size_t l = 0; l < arr.size(); ++l) {
            const std::string where = "layers[" + std::to_string(l) + "]";
            TrainConfig base = prev;
            base.input_dim = prev.hidden_dim;
            base.seed = rc.train.seed + l + 1;
            bool explicit_seed = false;
            bool layer_seed_given = false;
            detail::ObjectReader r(arr[l], where);
            TrainConfig cfg = detail::parse_train_keys(r, base, explicit_seed, layer_seed_given);
            r.finish();
            if (!explicit_seed) {
                cfg.corruption.seed = cfg.seed;
            }
            rc.layers.push_back(cfg);
            prev = cfg;
        }
    }
    if (top.has("eval")) {
        detail::ObjectReader r(top.child("eval"), "eval");
        rc.eval.svm_reg = r.number("svm_reg", rc.eval.svm_reg);
        rc.eval.n_ratio_k = r.integer("n_ratio_k", rc.eval.n_ratio_k);
        r.finish();
        detail::require(rc.eval.svm_reg >= 0.0, "config: 'eval.svm_reg' must be >= 0");
        detail::require(rc.eval.n_ratio_k >= 0, "config: 'eval.n_ratio_k' must be >= 0");
    }
    rc.output_dir = detail::resolve_path(top.text("output_dir", rc.output_dir), base_dir);
    top.finish();

    try {
        rc.train.validate();
        for (const auto& layer : rc.layers) {
            layer.validate();
        }
    } catch (const std::invalid_argument& e) {
        throw invalid_argument(std::string("config: ") + e.what());
    }
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw invalid_argument("cannot open config '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw format_error("config '" + path + "' is not valid JSON: " + e.what(), e.byte);
    }
    return parse_run_config(j, std::filesystem::path(path).parent_path());
}

/// Training set and optional held-out set described by a config.
struct LoadedData {
    Dataset train;
    std::optional<Dataset> test;
};

inline Dataset load_source(const DataSource& d) {
    switch (d.kind) {
    case DataSource::Kind::two_moons: return gen_two_moons(d.n_per_class, d.dim, d.noise, d.seed);
    case DataSource::Kind::csv: return read_csv(d.path, d.labeled);
    case DataSource::Kind::idx: return load_idx(d.images, d.labels);
    }
    return {};
}

inline LoadedData load_run_data(const RunConfig& rc) {
    LoadedData out;
    Dataset all = load_source(rc.data);
    if (rc.data.kind == DataSource::Kind::idx && (rc.data.n_train > 0 || rc.data.n_test > 0)) {
        const Index n_train = rc.data.n_train > 0 ? rc.data.n_train : all.size() - rc.data.n_test;
        auto [train, test] = shuffled_split(all, n_train, rc.data.n_test, rc.data.split_seed);
        out.train = std::move(train);
        if (rc.data.n_test > 0) {
            out.test = std::move(test);
        }
    } else {
        out.train = std::move(all);
    }
    if (rc.test_data) {
        out.test = load_source(*rc.test_data);
    }
    return out;
}

} // namespace inae
