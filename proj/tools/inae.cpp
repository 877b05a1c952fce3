// inae: generate data, train AE/DAE/InAE/stacked models, and evaluate checkpoints.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "inae/inae.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw usage_error("cannot create output directory '" + dir + "'");
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw usage_error("cannot write '" + path.string() + "'");
    }
    return out;
}

std::string class_counts(const inae::Dataset& ds) {
    if (!ds.labels) {
        return "unlabeled";
    }
    std::map<int, int> counts;
    for (int l : *ds.labels) {
        ++counts[l];
    }
    std::string s;
    for (const auto& [label, n] : counts) {
        s += (s.empty() ? "" : ", ") + std::string("class ") + std::to_string(label) + ": " + std::to_string(n);
    }
    return s;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string config;
    std::optional<inae::Index> moons;
    std::optional<inae::Index> dim;
    std::optional<double> noise;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string corrupt_kind;
    double level = 0.0;
    inae::Index copies = 1;
};

int cmd_gen(const GenArgs& a) {
    inae::DataSource src;
    if (!a.config.empty()) {
        src = inae::load_run_config(a.config).data;
    }
    if (a.moons || a.dim || a.noise || a.seed) {
        if (src.kind != inae::DataSource::Kind::two_moons) {
            throw usage_error("--moons/--dim/--noise/--seed only apply to two_moons data");
        }
    }
    if (a.moons) {
        src.n_per_class = *a.moons;
    }
    if (a.dim) {
        src.dim = *a.dim;
    }
    if (a.noise) {
        src.noise = *a.noise;
    }
    if (a.seed) {
        src.seed = *a.seed;
    }
    inae::Dataset ds = inae::load_source(src);
    if (!a.corrupt_kind.empty()) {
        inae::CorruptionSpec spec{inae::corruption_kind_from_string(a.corrupt_kind), a.level, src.seed};
        ds = inae::corrupt(ds, spec, a.copies);
    }
    inae::write_csv(ds, a.output);
    std::cout << "wrote " << a.output << ": n=" << ds.size() << ", D=" << ds.feature_dim() << ", " << class_counts(ds)
              << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string method = "inae";
    std::optional<std::uint64_t> seed;
    std::string output;
};

void write_trace(std::ostream& out, const std::vector<inae::TrainResult>& layers) {
    out << "layer,epoch,t,recon_loss,phi,total,learning_rate\n" << std::setprecision(17);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (const auto& e : layers[l].trace.epochs) {
            out << l + 1 << ',' << e.epoch << ',' << e.t << ',' << e.recon_loss << ',' << e.phi << ',' << e.total << ','
                << e.learning_rate << '\n';
        }
    }
}

void write_iterations(std::ostream& out, const std::vector<inae::TrainResult>& layers) {
    out << "layer,t,objective_start,objective_end,phi\n" << std::setprecision(17);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (const auto& it : layers[l].trace.iterations) {
            out << l + 1 << ',' << it.t << ',' << it.objective_start << ',' << it.objective_end << ',' << it.phi
                << '\n';
        }
    }
}

int cmd_train(const TrainArgs& a) {
    inae::RunConfig rc = inae::load_run_config(a.config);
    if (a.seed) {
        rc.set_seed(*a.seed);
    }
    const std::string dir = a.output.empty() ? rc.output_dir : a.output;
    const std::string& method = a.method;
    if ((method == "dae" || method == "ae") && rc.train.alpha != 0.0) {
        std::cerr << "warning: alpha is ignored for method " << method << '\n';
    }
    if (method == "stack" && rc.layers.empty()) {
        throw usage_error("method stack needs a non-empty 'layers' array in the config");
    }
    if (method != "stack" && !rc.layers.empty()) {
        std::cerr << "warning: 'layers' is ignored for method " << method << '\n';
    }
    const inae::LoadedData data = inae::load_run_data(rc);
    ensure_dir(dir);

    std::vector<std::pair<inae::Index, std::string>> checkpoints;
    const inae::LossKind final_loss = method == "stack" ? rc.layers.back().loss : rc.train.loss;
    const inae::IterationObserver observer = [&](inae::Index t, const inae::ModelParams& p, const inae::Matrix&) {
        const std::string file = "checkpoint_t" + std::to_string(t) + ".json";
        inae::save_model(p, final_loss, (fs::path(dir) / file).string());
        checkpoints.emplace_back(t, file);
        std::cout << "t=" << t << " checkpoint " << file << '\n';
    };

    std::vector<inae::TrainResult> layers;
    if (method == "ae") {
        layers.push_back(inae::train_ae(data.train, rc.train, observer));
    } else if (method == "dae") {
        layers.push_back(inae::train_dae(data.train, rc.train, observer));
    } else if (method == "inae") {
        layers.push_back(inae::train_inae(data.train, rc.train, observer));
    } else {
        std::vector<inae::TrainConfig> cfgs{rc.train};
        cfgs.insert(cfgs.end(), rc.layers.begin(), rc.layers.end());
        layers = inae::stack(data.train, cfgs, observer);
    }

    nlohmann::json manifest{{"method", method}, {"prefix_layers", nlohmann::json::array()}};
    if (method == "stack") {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const std::string file = "layer_" + std::to_string(l + 1) + ".json";
            const inae::LossKind loss = l == 0 ? rc.train.loss : rc.layers[l - 1].loss;
            inae::save_model(layers[l].params, loss, (fs::path(dir) / file).string());
            if (l + 1 < layers.size()) {
                manifest["prefix_layers"].push_back(file);
            }
        }
    }
    inae::save_model(layers.back().params, final_loss, (fs::path(dir) / "model.json").string());
    manifest["checkpoints"] = nlohmann::json::array();
    for (const auto& [t, file] : checkpoints) {
        manifest["checkpoints"].push_back({{"t", t}, {"file", file}});
    }
    open_out(fs::path(dir) / "run.json") << manifest.dump(2) << '\n';
    {
        auto out = open_out(fs::path(dir) / "trace.csv");
        write_trace(out, layers);
    }
    {
        auto out = open_out(fs::path(dir) / "iterations.csv");
        write_iterations(out, layers);
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (const auto& it : layers[l].trace.iterations) {
            std::printf("layer %zu t=%lld objective %.6g -> %.6g (%.2fs)\n", l + 1, static_cast<long long>(it.t),
                        it.objective_start, it.objective_end, it.seconds);
        }
    }
    std::cout << "wrote " << dir << "/model.json, trace.csv, iterations.csv, run.json\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string output;
    bool plot = false;
};

nlohmann::json read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "run.json");
    if (!in) {
        throw usage_error("no run.json in '" + dir.string() + "'; run 'inae train' first");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw inae::format_error(std::string("run.json: ") + e.what(), 0);
    }
}

int cmd_eval(const EvalArgs& a) {
    inae::RunConfig rc = inae::load_run_config(a.config);
    if (a.seed) {
        rc.set_seed(*a.seed);
    }
    const fs::path dir = a.output.empty() ? rc.output_dir : a.output;
    const nlohmann::json manifest = read_manifest(dir);

    std::vector<inae::ModelParams> prefix;
    std::vector<std::pair<inae::Index, inae::ModelParams>> checkpoints;
    std::string method;
    try {
        method = manifest.at("method").get<std::string>();
        for (const auto& f : manifest.at("prefix_layers")) {
            prefix.push_back(inae::load_model((dir / f.get<std::string>()).string()).params);
        }
        for (const auto& c : manifest.at("checkpoints")) {
            checkpoints.emplace_back(c.at("t").get<inae::Index>(),
                                     inae::load_model((dir / c.at("file").get<std::string>()).string()).params);
        }
    } catch (const nlohmann::json::exception& e) {
        throw inae::format_error(std::string("run.json: ") + e.what(), 0);
    }
    if (checkpoints.empty()) {
        throw usage_error("run.json lists no checkpoints");
    }
    if (a.plot && checkpoints.front().second.hidden_dim() < 2) {
        throw usage_error("need >= 2 hidden dims to scatter");
    }

    const inae::LoadedData data = inae::load_run_data(rc);
    if (!data.train.labels) {
        throw usage_error("evaluation needs labeled training data");
    }
    const inae::Dataset& test = data.test ? *data.test : data.train;
    if (!test.labels) {
        throw usage_error("evaluation needs labeled test data");
    }
    if (!data.test) {
        std::cerr << "note: no held-out data configured; class_error is measured on the training set\n";
    }
    const inae::Index expected_dim = prefix.empty() ? checkpoints.front().second.input_dim() : prefix.front().input_dim();
    if (expected_dim != data.train.feature_dim() || expected_dim != test.feature_dim()) {
        throw usage_error("model expects input dimension " + std::to_string(expected_dim) + " but the data has "
                          + std::to_string(data.train.feature_dim()));
    }
    const inae::Matrix base_train = inae::encode_stack(prefix, data.train.samples);
    const inae::Matrix base_test = inae::encode_stack(prefix, test.samples);
    for (const auto& [t, p] : checkpoints) {
        if (p.input_dim() != base_train.rows()) {
            throw usage_error("checkpoint t=" + std::to_string(t) + " expects input dimension "
                              + std::to_string(p.input_dim()) + " but receives " + std::to_string(base_train.rows()));
        }
    }

    const inae::TrainConfig& last = method == "stack" && !rc.layers.empty() ? rc.layers.back() : rc.train;
    const inae::Index k = rc.eval.n_ratio_k > 0 ? rc.eval.n_ratio_k : last.graph.k;
    const std::uint64_t svm_seed = rc.train.seed;

    struct Row {
        std::string id;
        inae::Index t;
        inae::MetricsReport report;
    };
    std::vector<Row> rows(checkpoints.size() + 1);
    rows[0] = {"raw", 0,
               inae::evaluate_features(data.train.samples, *data.train.labels, test.samples, *test.labels, last.graph, k,
                                       rc.eval.svm_reg, svm_seed)};
    std::vector<inae::Matrix> train_codes(checkpoints.size());
    const std::size_t workers = std::min(inae::detail::thread_cap(), checkpoints.size());
    {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < checkpoints.size(); i += workers) {
                        const auto& [t, p] = checkpoints[i];
                        train_codes[i] = inae::encode(p, base_train);
                        const inae::Matrix test_codes = inae::encode(p, base_test);
                        rows[i + 1] = {method, t,
                                       inae::evaluate_features(train_codes[i], *data.train.labels, test_codes,
                                                               *test.labels, last.graph, k, rc.eval.svm_reg, svm_seed)};
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        pool.clear();
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    {
        auto out = open_out(dir / "metrics.csv");
        inae::write_metrics_header(out);
        for (const auto& r : rows) {
            inae::write_metrics_row(out, r.id, r.t, r.report);
        }
    }
    std::printf("%-6s %3s %8s %8s %11s %14s\n", "model", "t", "n_ratio", "c_ratio", "class_error", "fisher(x1e-2)");
    for (const auto& r : rows) {
        std::printf("%-6s %3lld %8.4f %8.4f %11.4f %14.4f\n", r.id.c_str(), static_cast<long long>(r.t),
                    r.report.n_ratio, r.report.c_ratio, r.report.class_error, r.report.fisher_eig * 1e-2);
    }
    if (a.plot) {
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            const std::string file = "scatter_t" + std::to_string(checkpoints[i].first) + ".svg";
            auto out = open_out(dir / file);
            inae::write_scatter_svg(out, train_codes[i], *data.train.labels,
                                    method + " t=" + std::to_string(checkpoints[i].first));
        }
    }
    std::cout << "wrote " << (dir / "metrics.csv").string() << (a.plot ? " and scatter plots" : "") << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental auto-encoders: data generation, training and evaluation"};
    app.require_subcommand(1);

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Write two-moons data (optionally corrupted) to CSV");
    gen->add_option("-c,--config", gen_args.config, "Run config whose 'data' section is used")->check(CLI::ExistingFile);
    gen->add_option("--moons", gen_args.moons, "Samples per moon")->check(CLI::PositiveNumber);
    gen->add_option("--dim", gen_args.dim, "Ambient dimension (>= 2)")->check(CLI::Range(2, 1 << 20));
    gen->add_option("--noise", gen_args.noise, "Gaussian noise std")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", gen_args.seed, "Generator seed");
    gen->add_option("-o,--output", gen_args.output, "Output CSV path")->required();
    gen->add_option("--corrupt", gen_args.corrupt_kind, "Corruption kind")
        ->check(CLI::IsMember({"gaussian", "salt_pepper", "masking"}));
    gen->add_option("--level", gen_args.level, "Corruption level")->check(CLI::NonNegativeNumber);
    gen->add_option("--copies", gen_args.copies, "Corrupted copies per sample")->check(CLI::PositiveNumber);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a model from a JSON run config");
    train->add_option("-c,--config", train_args.config, "Run config (JSON)")->required();
    train->add_option("--method", train_args.method, "Training method")
        ->check(CLI::IsMember({"ae", "dae", "inae", "stack"}));
    train->add_option("--seed", train_args.seed, "Overrides the training seed");
    train->add_option("-o,--output", train_args.output, "Output directory (overrides output_dir)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Compute metrics for every checkpoint of a trained run");
    eval->add_option("-c,--config", eval_args.config, "Run config (JSON)")->required();
    eval->add_option("--seed", eval_args.seed, "Overrides the seed (SVM shuffling)");
    eval->add_option("-o,--output", eval_args.output, "Run directory (overrides output_dir)");
    eval->add_flag("--plot", eval_args.plot, "Write an SVG scatter of the first two hidden dims per checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*gen) {
            return cmd_gen(gen_args);
        }
        if (*train) {
            return cmd_train(train_args);
        }
        return cmd_eval(eval_args);
    } catch (const inae::training_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const inae::convergence_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const inae::format_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
