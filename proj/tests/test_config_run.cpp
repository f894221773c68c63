#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "ldplab/config.hpp"
#include "ldplab/run.hpp"

using namespace ldplab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string demo_text() { return read_file(fs::path(LDPLAB_SOURCE_DIR) / "configs" / "demo.toml"); }

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("ldplab_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& key) {
    for (const auto& s : v)
        if (s.rfind(key + ":", 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("demo config parses into the demo model", "[config]") {
    const ExperimentConfig a = parse_config_text(demo_text());
    const ExperimentConfig b = parse_config(std::string(LDPLAB_SOURCE_DIR) + "/configs/demo.toml");
    CHECK(a.model == demo_model());
    CHECK(a.steps == 1000);
    CHECK(a.seed == 42);
    CHECK(a.experiment.kind == "skeleton");
    CHECK(a.warnings.empty());
    CHECK(a.hash() == b.hash());
    CHECK(std::regex_match(a.hash(), std::regex("[0-9a-f]{16}")));
}

TEST_CASE("every shipped config parses", "[config]") {
    for (const auto& entry : fs::directory_iterator(fs::path(LDPLAB_SOURCE_DIR) / "configs"))
        if (entry.path().extension() == ".toml") CHECK_NOTHROW(parse_config(entry.path().string()));
}

TEST_CASE("negative weight names its key", "[config]") {
    const auto v = violations_of(replace(demo_text(), "weight = 0.5", "weight = -0.5"));
    REQUIRE(v.size() == 1);
    CHECK(mentions(v, "model.marks[1].weight"));
}

TEST_CASE("all violations are reported together", "[config]") {
    std::string text = replace(demo_text(), "weight = 1.0", "weight = 0.0");
    text = replace(text, "steps = 1000", "steps = 1");
    text = replace(text, "clip = 2.0", "clip = \"big\"");
    const auto v = violations_of(text);
    CHECK(v.size() == 3);
    CHECK(mentions(v, "model.marks[0].weight"));
    CHECK(mentions(v, "grid.steps"));
    CHECK(mentions(v, "model.diffusion.clip"));
}

TEST_CASE("missing fields and inconsistent grids are named", "[config]") {
    CHECK(mentions(violations_of(replace(demo_text(), "horizon = 1.0\n", "")), "model.horizon"));
    CHECK(mentions(violations_of(replace(demo_text(), "steps = 1000", "steps = 1000\nT = 2.0")), "grid.T"));
    CHECK(mentions(violations_of(replace(demo_text(), "steps = 1000", "steps = 1000\nK = 3")), "grid.K"));
    CHECK(mentions(violations_of(replace(demo_text(), "kind = \"skeleton\"", "kind = \"dance\"")), "experiment.kind"));
    CHECK_THROWS_AS(parse_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("duplicate keys keep the last value with a warning", "[config]") {
    const ExperimentConfig c = parse_config_text(replace(demo_text(), "seed = 42", "seed = 42\nseed = 43"));
    CHECK(c.seed == 43);
    REQUIRE(c.warnings.size() == 1);
    CHECK(c.warnings.front().find("experiment.seed") != std::string::npos);
}

TEST_CASE("serialised config parses back to the same tree", "[config]") {
    for (const char* name : {"demo.toml", "ou_ldp.toml", "demo_tightness.toml"}) {
        const ExperimentConfig a = parse_config(std::string(LDPLAB_SOURCE_DIR) + "/configs/" + name);
        const ExperimentConfig b = parse_config_text(serialize_config(a));
        CHECK(a.tree == b.tree);
        CHECK(a.model == b.model);
        CHECK(a.hash() == b.hash());
    }
}

TEST_CASE("hash ignores key order and comments", "[config]") {
    const std::string text = demo_text();
    std::string reordered = replace(text, "a = [0.5, 0.5, 0.5, 0.5]\nb = [0.2, 0.2, 0.2, 0.2]\nclip = 2.0",
                                    "clip = 2.0\nb = [0.2, 0.2, 0.2, 0.2]\na = [0.5, 0.5, 0.5, 0.5]");
    reordered = "# another comment\n" + reordered;
    CHECK(parse_config_text(text).hash() == parse_config_text(reordered).hash());
    CHECK(parse_config_text(text).hash() != parse_config_text(replace(text, "seed = 42", "seed = 41")).hash());
}

TEST_CASE("skeleton run writes its artifacts", "[run]") {
    const fs::path out = fresh_dir("skeleton");
    RunOptions opts;
    opts.out_dir = out.string();
    const RunResult r = run(parse_config_text(demo_text()), opts);
    CHECK(r.exit_code == kExitOk);
    const fs::path dir(r.run_dir);
    CHECK(dir.parent_path() == out);
    for (const char* f : {"trajectory.csv", "residuals.csv", "control.csv", "summary.json", "config.toml", "manifest.json"})
        CHECK(fs::exists(dir / f));
    CHECK(r.summary.at("final_residual").get<double>() <= 1e-10);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest.at("config_hash") == parse_config_text(demo_text()).hash());
    // nothing is written next to the run directory
    CHECK(std::distance(fs::directory_iterator(out), fs::directory_iterator()) == 1);
    // a copied config reproduces the hash
    CHECK(parse_config((dir / "config.toml").string()).hash() == manifest.at("config_hash"));
}

TEST_CASE("overrides enter the hash", "[run]") {
    const fs::path out = fresh_dir("override");
    RunOptions opts;
    opts.out_dir = out.string();
    opts.seed = 5;
    const RunResult r = run(parse_config_text(demo_text()), opts);
    CHECK(r.summary.at("seed") == 5);
    CHECK(r.run_dir.find(parse_config_text(replace(demo_text(), "seed = 42", "seed = 5")).hash()) != std::string::npos);
}

TEST_CASE("single eps makes validate-ldp inconclusive", "[run]") {
    std::string text = read_file(fs::path(LDPLAB_SOURCE_DIR) / "configs" / "ou_ldp.toml");
    text = replace(text, "eps_list = [0.1, 0.05, 0.02]", "eps_list = [0.1]");
    text = replace(text, "importance = true", "importance = false\ncompare_rate = false");
    RunOptions opts;
    opts.out_dir = fresh_dir("inconclusive").string();
    const RunResult r = run(parse_config_text(text), opts);
    CHECK(r.exit_code == kExitInconclusive);
    CHECK(r.summary.at("status") == "inconclusive");
}

TEST_CASE("reruns give byte-identical tables", "[run]") {
    const fs::path out = fresh_dir("rerun");
    std::string text = read_file(fs::path(LDPLAB_SOURCE_DIR) / "configs" / "demo_simulate.toml");
    text = replace(text, "paths = 200", "paths = 20");
    text = replace(text, "sim_steps = 1000", "sim_steps = 100");
    const ExperimentConfig cfg = parse_config_text(text);
    RunOptions one;
    one.out_dir = out.string();
    RunOptions two = one;
    two.threads = 3;
    const RunResult a = run(cfg, one);
    const RunResult b = run(cfg, two);
    REQUIRE(a.run_dir != b.run_dir);
    for (const char* f : {"paths.csv", "mean_path.csv", "noise_0.bin", "summary.json", "config.toml"})
        CHECK(read_file(fs::path(a.run_dir) / f) == read_file(fs::path(b.run_dir) / f));
}

TEST_CASE("module errors carry the experiment name", "[run]") {
    std::string text = replace(demo_text(), "tol = 1e-10", "tol = 1e-40\nmax_iter = 2");
    RunOptions opts;
    opts.out_dir = fresh_dir("error").string();
    try {
        run(parse_config_text(text), opts);
        FAIL("expected failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).rfind("experiment skeleton failed:", 0) == 0);
    }
}
