#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "inae/run_config.hpp"

using namespace inae;
using nlohmann::json;

TEST(RunConfig, EmptyObjectGivesDefaults) {
    const RunConfig rc = parse_run_config(json::object());
    EXPECT_EQ(rc.data.kind, DataSource::Kind::two_moons);
    EXPECT_EQ(rc.train.hidden_dim, 16);
    EXPECT_EQ(rc.train.iterations, 5);
    EXPECT_EQ(rc.output_dir, "out");
    EXPECT_TRUE(rc.layers.empty());
    EXPECT_FALSE(rc.test_data);
}

TEST(RunConfig, ReadsEverySection) {
    const json j = json::parse(R"({
        "data": {"source": "two_moons", "n_per_class": 50, "dim": 4, "noise": 0.2, "seed": 3},
        "test_data": {"source": "csv", "path": "/tmp/test.csv", "labeled": false},
        "train": {"hidden_dim": 8, "iterations": 2, "alpha": 0.3, "dt": 0.5, "m": 3, "loss": "cross_entropy",
                  "seed": 9, "batch_size": 5},
        "corruption": {"kind": "masking", "level": 0.25},
        "graph": {"k": 7, "strategy": "knn", "kernel": "cosine"},
        "eval": {"svm_reg": 0.01, "n_ratio_k": 4},
        "output_dir": "/tmp/run"
    })");
    const RunConfig rc = parse_run_config(j);
    EXPECT_EQ(rc.data.n_per_class, 50);
    EXPECT_EQ(rc.data.dim, 4);
    EXPECT_DOUBLE_EQ(rc.data.noise, 0.2);
    ASSERT_TRUE(rc.test_data);
    EXPECT_EQ(rc.test_data->kind, DataSource::Kind::csv);
    EXPECT_FALSE(rc.test_data->labeled);
    EXPECT_EQ(rc.train.hidden_dim, 8);
    EXPECT_EQ(rc.train.m, 3);
    EXPECT_EQ(rc.train.loss, LossKind::cross_entropy);
    EXPECT_EQ(rc.train.batch_size, 5);
    EXPECT_EQ(rc.train.corruption.kind, CorruptionKind::masking);
    EXPECT_DOUBLE_EQ(rc.train.corruption.level, 0.25);
    EXPECT_EQ(rc.train.corruption.seed, 9u);
    EXPECT_EQ(rc.train.graph.k, 7);
    EXPECT_EQ(rc.train.graph.strategy, GraphStrategy::knn);
    EXPECT_EQ(rc.train.graph.kernel, KernelKind::cosine);
    EXPECT_DOUBLE_EQ(rc.eval.svm_reg, 0.01);
    EXPECT_EQ(rc.eval.n_ratio_k, 4);
    EXPECT_EQ(rc.output_dir, "/tmp/run");
}

TEST(RunConfig, RejectsUnknownKeysAtEveryLevel) {
    EXPECT_THROW(parse_run_config(json::parse(R"({"trian": {}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"train": {"alpah": 1}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"graph": {"kk": 1}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"layers": [{"hidden": 3}]})")), inae::invalid_argument);
    try {
        parse_run_config(json::parse(R"({"train": {"alpah": 1}})"));
        FAIL();
    } catch (const inae::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("alpah"), std::string::npos);
    }
}

TEST(RunConfig, RejectsWrongTypesAndValues) {
    EXPECT_THROW(parse_run_config(json::parse(R"({"train": {"alpha": "big"}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"train": {"hidden_dim": 2.5}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"train": {"alpha": -1}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"train": {"loss": "hinge"}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"graph": {"strategy": "random"}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"data": {"source": "parquet"}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"data": {"source": "idx", "images": "a"}})")),
                 inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse(R"({"layers": {}})")), inae::invalid_argument);
    EXPECT_THROW(parse_run_config(json::parse("[1, 2]")), inae::invalid_argument);
}

TEST(RunConfig, LayersInheritFromThePreviousLayer) {
    const RunConfig rc = parse_run_config(json::parse(R"({
        "train": {"hidden_dim": 32, "alpha": 0.2, "seed": 4},
        "graph": {"k": 6},
        "layers": [{"hidden_dim": 16}, {"hidden_dim": 8, "alpha": 0.0}]
    })"));
    ASSERT_EQ(rc.layers.size(), 2u);
    EXPECT_EQ(rc.layers[0].input_dim, 32);
    EXPECT_EQ(rc.layers[0].hidden_dim, 16);
    EXPECT_DOUBLE_EQ(rc.layers[0].alpha, 0.2);
    EXPECT_EQ(rc.layers[0].graph.k, 6);
    EXPECT_EQ(rc.layers[0].seed, 5u);
    EXPECT_EQ(rc.layers[1].input_dim, 16);
    EXPECT_DOUBLE_EQ(rc.layers[1].alpha, 0.0);
    EXPECT_EQ(rc.layers[1].seed, 6u);
}

TEST(RunConfig, SetSeedMovesEveryStream) {
    RunConfig rc = parse_run_config(json::parse(R"({"layers": [{"hidden_dim": 4}]})"));
    rc.set_seed(100);
    EXPECT_EQ(rc.train.seed, 100u);
    EXPECT_EQ(rc.train.corruption.seed, 100u);
    EXPECT_EQ(rc.layers[0].seed, 101u);
    EXPECT_EQ(rc.layers[0].corruption.seed, 101u);

    RunConfig pinned = parse_run_config(json::parse(R"({"corruption": {"seed": 7}})"));
    pinned.set_seed(100);
    EXPECT_EQ(pinned.train.seed, 100u);
    EXPECT_EQ(pinned.train.corruption.seed, 7u);
}

TEST(RunConfig, ResolvesPathsAgainstTheConfigDirectory) {
    const auto dir = std::filesystem::temp_directory_path() / "inae_run_config_test";
    std::filesystem::create_directories(dir / "cfg");
    const auto path = dir / "cfg" / "run.json";
    {
        std::ofstream out(path);
        out << R"({"data": {"source": "csv", "path": "../data/x.csv"}, "output_dir": "runs/a"})";
    }
    const RunConfig rc = load_run_config(path.string());
    EXPECT_EQ(rc.data.path, (dir / "data" / "x.csv").string());
    EXPECT_EQ(rc.output_dir, (dir / "cfg" / "runs" / "a").string());
    std::filesystem::remove_all(dir);
}

TEST(RunConfig, LoadErrors) {
    EXPECT_THROW(load_run_config("/nonexistent/config.json"), inae::invalid_argument);
    const auto path = std::filesystem::temp_directory_path() / "inae_bad_config.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    EXPECT_THROW(load_run_config(path.string()), inae::format_error);
    std::filesystem::remove(path);
}

TEST(RunConfig, LoadsTwoMoonsData) {
    const RunConfig rc = parse_run_config(json::parse(R"({
        "data": {"n_per_class": 10, "dim": 3, "seed": 1},
        "test_data": {"n_per_class": 5, "dim": 3, "seed": 2}
    })"));
    const LoadedData d = load_run_data(rc);
    EXPECT_EQ(d.train.size(), 20);
    EXPECT_EQ(d.train.feature_dim(), 3);
    ASSERT_TRUE(d.test);
    EXPECT_EQ(d.test->size(), 10);
}
