#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqlab/experiment.hpp"
#include "sqlab/rng.hpp"
#include "sqlab/serialize.hpp"
#include "sqlab/svg.hpp"

using namespace sqlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// fresh scratch directory per test case
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("sqlab_test_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& text) const {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

ExperimentConfig config(Json doc, const Scratch& s) {
    doc["out_dir"] = s.dir.string();
    return ExperimentConfig::parse(doc);
}

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(SQLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("certificates serialize and read back") {
    const Graph k = complete_graph(6);
    const auto p = SquarePath::certify(k, {4, 2, 0});
    const Json jp = to_json(p);
    CHECK(jp["kind"] == "path");
    CHECK(vertices_from_json(Json::parse(jp.dump())) == p.vertices());
    const auto c = SquareCycle::certify(k, {0, 1, 2, 3, 4, 5});
    CHECK(to_json(c)["length"] == 6);
    CHECK(vertices_from_json(to_json(c)) == c.vertices());
    const Json f = to_json(Fraction::of(2, 4));
    CHECK(f["num"] == 1);
    CHECK(f["den"] == 2);
}

TEST_CASE("svg output") {
    const std::vector<double> v = {-1, 0.05, 0.5, 0.55, 2};
    CHECK(svg::histogram_counts(v, 2, 0.0, 1.0) == std::vector<std::size_t>{2, 3});
    CHECK_THROWS(svg::histogram_counts(v, 0, 0.0, 1.0));
    const auto h = svg::histogram("a < b", v, 4, 0, 1);
    CHECK(h.find("<svg") == 0);
    CHECK(h.find("a &lt; b") != std::string::npos);
    CHECK_THROWS(svg::line_plot("x", {{"s", {1, 2}, {1}}}, "x", "y"));
    const auto lp = svg::line_plot("t", {{"s", {1, 2, 3}, {1, 10, 100}}}, "x", "y", true);
    CHECK(lp.find("polyline") != std::string::npos);
}

TEST_CASE("config parsing") {
    const auto c = ExperimentConfig::parse(Json{{"trials", 3}, {"master_seed", 9}, {"mode", "asymptotic-regime"}});
    CHECK(c.trials == 3);
    CHECK(c.mode == PipelineMode::asymptotic_regime);
    CHECK(c.trial_seed(1) == derive_seed(9, 1));
    CHECK(c.block("search").is_object());
    CHECK_THROWS_AS(ExperimentConfig::parse(Json{{"trails", 3}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(Json{{"mode", "fast"}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::parse(Json::array()), ConfigError);
    CHECK_THROWS_AS(run_command("dance", c), ConfigError);

    Scratch s("config");
    CHECK_THROWS_AS(ExperimentConfig::load(s.file("bad.json", "{ not json")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::load((s.dir / "missing.json").string()), std::ios_base::failure);
}

TEST_CASE("graph sources") {
    const Json src = {{"kind", "gnp"}, {"n", {6, 12}}, {"p", {0.3, 0.5, 0.7}}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto d = draw_graph(src, seed);
        CHECK(d.n >= 6);
        CHECK(d.n <= 12);
        CHECK(d.graph.n() == d.n);
        CHECK((*d.p == 0.3 || *d.p == 0.5 || *d.p == 0.7));
        CHECK(draw_graph(src, seed).graph == d.graph);
    }
    CHECK(draw_graph({{"kind", "complete"}, {"n", 7}}, 0).graph == complete_graph(7));
    CHECK(draw_graph({{"kind", "tripartite"}, {"m", 2}}, 0).graph.n() == 7);
    CHECK(draw_graph({{"kind", "square-cycle"}, {"n", 9}}, 0).graph == square_cycle_graph(9));
    CHECK_THROWS_AS(draw_graph({{"kind", "gnp"}, {"n", 5}}, 0), ConfigError);
    CHECK_THROWS_AS(draw_graph({{"kind", "torus"}, {"n", 5}}, 0), ConfigError);
    CHECK_THROWS_AS(draw_graph({{"kind", "complete"}, {"n", {9, 3}}}, 0), ConfigError);
    CHECK_THROWS_AS(draw_graph({{"kind", "complete"}, {"n", 5}, {"colour", 1}}, 0), ConfigError);
}

TEST_CASE("csv column removal") {
    CHECK(csv_without_column("a,ms,b\n1,2.5,3\n4,9,6\n", "ms") == "a,b\n1,3\n4,6\n");
    CHECK(csv_without_column("a,b\n1,2\n", "ms") == "a,b\n1,2\n");
    CHECK(csv_without_column("x,ms\n1,2\n\ny,ms,z\n3,4,5\n", "ms") == "x\n1\n\ny,z\n3,5\n");
}

TEST_CASE("generate and attack commands") {
    Scratch s("gen");
    const auto out = run_command("generate", config({{"generate", {{"n", 50}, {"p", 0.2}, {"seed", 4}}}}, s));
    CHECK(out.exit_code == kExitOk);
    CHECK(read_graph_file(out.files.at(0)) == gnp(50, 0.2, 4));

    const Json attack = {{"attack",
                          {{"graph", {{"kind", "file"}, {"path", out.files.at(0)}}},
                           {"adversary", {{"kind", "neighborhood-wipe"}, {"target", 3}}}}}};
    const auto a = run_command("attack", config(attack, s));
    CHECK(read_graph_file(a.files.at(0)) == neighborhood_wipe(gnp(50, 0.2, 4), 3));
    const auto report = Json::parse(slurp(a.files.at(1)));
    CHECK(report.contains("edges_removed"));

    CHECK_THROWS_AS(run_command("generate", config({{"generate", {{"n", 5}}}}, s)), ConfigError);
    const Json bad_adv = {{"attack", {{"graph", {{"kind", "complete"}, {"n", 5}}}, {"adversary", {{"kind", "per-vertex-fraction"}}}}}};
    CHECK_THROWS_AS(run_command("attack", config(bad_adv, s)), ConfigError);
}

TEST_CASE("exact search campaign reproduces the oracle golden file") {
    Scratch s("golden");
    auto cfg = ExperimentConfig::load(std::string(SQLAB_TEST_DIR) + "/fixtures/search_golden.json");
    cfg.out_dir = s.dir.string();
    const auto out = run_command("search", cfg);
    const std::string golden = slurp(std::string(SQLAB_TEST_DIR) + "/golden/search_golden.csv");
    CHECK(csv_without_column(out.csv, "ms") == golden);
    CHECK(slurp(out.files.at(0)) == out.csv);
    // one certificate per line, each a valid path of the recorded length
    std::istringstream certs(slurp(out.files.at(1)));
    std::string line;
    std::size_t lines = 0;
    while (std::getline(certs, line)) {
        const auto j = Json::parse(line);
        CHECK(j["trial"] == lines);
        ++lines;
    }
    CHECK(lines == 200);
}

TEST_CASE("campaigns are reproducible") {
    Scratch s("repro");
    const Json search = {{"trials", 12},
                         {"master_seed", 5},
                         {"search",
                          {{"graph", {{"kind", "gnp"}, {"n", 200}, {"p", 0.2}}},
                           {"adversary", {{"kind", "independent-blocker"}, {"c", 0.5}}},
                           {"method", "greedy"}}}};
    const auto a = run_command("search", config(search, s));
    const auto b = run_command("search", config(search, s));
    CHECK(csv_without_column(a.csv, "ms") == csv_without_column(b.csv, "ms"));
    CHECK(a.csv.find("independent-blocker,greedy") != std::string::npos);

    const Json pipe = {{"trials", 3},
                       {"master_seed", 1},
                       {"pipeline",
                        {{"graph", {{"kind", "complete"}, {"n", 240}}},
                         {"adversary", {{"kind", "per-vertex-fraction"}, {"r", 0.2}}},
                         {"params", {{"r_max", 21}}},
                         {"traces", false}}}};
    const auto p1 = run_command("pipeline", config(pipe, s));
    const auto p2 = run_command("pipeline", config(pipe, s));
    CHECK(csv_without_column(p1.csv, "ms") == csv_without_column(p2.csv, "ms"));
}

TEST_CASE("pipeline traces land in a nested output directory") {
    Scratch s("traces");
    Json doc = {{"trials", 2},
                {"pipeline", {{"graph", {{"kind", "complete"}, {"n", 240}}}, {"params", {{"r_max", 21}}}}}};
    doc["out_dir"] = (s.dir / "a" / "b").string();
    const auto out = run_command("pipeline", ExperimentConfig::parse(doc));
    CHECK(out.exit_code == kExitOk);
    for (int i = 0; i < 2; ++i) {
        const auto trace = Json::parse(slurp(s.dir / "a" / "b" / "traces" / ("pipeline_trace_" + std::to_string(i) + ".json")));
        CHECK(trace["trial"] == i);
        CHECK(trace.contains("windows"));
        CHECK(trace.contains("final"));
    }
    const auto summary = Json::parse(slurp(s.dir / "a" / "b" / "pipeline_summary.json"));
    CHECK(summary["successes"] == 2);
}

TEST_CASE("pipeline bar failure") {
    Scratch s("bar");
    const Json pipe = {{"trials", 2}, {"pipeline", {{"graph", {{"kind", "empty"}, {"n", 100}}}, {"traces", false}}}};
    const auto out = run_command("pipeline", config(pipe, s));
    CHECK(out.exit_code == kExitBar);
    CHECK(fs::exists(s.dir / "pipeline.csv"));
}

TEST_CASE("cli exit codes") {
    Scratch s("cli");
    const std::string out = " --out " + s.dir.string();
    const auto ok = s.file("ok.json", R"({"generate": {"n": 20, "p": 0.5}})");
    CHECK(run_cli("generate --config " + ok + out) == 0);
    CHECK(fs::exists(s.dir / "graph.txt"));
    CHECK(run_cli("generate --config " + s.file("bad.json", "{") + out) == 2);
    CHECK(run_cli("generate --config " + s.file("key.json", R"({"generate": {"n": 20, "p": 0.5, "q": 1}})") + out) == 2);
    CHECK(run_cli("generate --config " + (s.dir / "none.json").string() + out) == 4);
    const auto empty = s.file("empty.json", R"({"pipeline": {"graph": {"kind": "empty", "n": 60}, "traces": false}})");
    CHECK(run_cli("pipeline --config " + empty + out) == 3);
    const auto missing =
        s.file("file.json", R"({"search": {"graph": {"kind": "file", "path": "/nonexistent/g.txt"}}})");
    CHECK(run_cli("search --config " + missing + out) == 4);
    const auto search = s.file("search.json", R"({"search": {"graph": {"kind": "complete", "n": 6}}})");
    CHECK(run_cli("search --config " + search + out) == 0);
    CHECK(run_cli("search --config " + search + " --out /proc/forbidden") == 4);
}
