// Acceptance suite. Prints one PASS/FAIL line per criterion.
//   sqlab_acceptance                  all criteria
//   sqlab_acceptance --criterion 6    one criterion
// Histograms and CSVs go to --out (default ./acceptance_out).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sqlab/adversary.hpp"
#include "sqlab/blowup.hpp"
#include "sqlab/embedder.hpp"
#include "sqlab/experiment.hpp"
#include "sqlab/regularity.hpp"
#include "sqlab/rng.hpp"
#include "sqlab/square_walk.hpp"
#include "sqlab/svg.hpp"

using namespace sqlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path g_out = "acceptance_out";

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string f(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

Graph complete_bipartite(std::size_t a, std::size_t b) {
    const std::size_t parts[] = {a, b};
    return complete_multipartite(parts);
}

std::vector<Vertex> range(Vertex lo, Vertex hi) {
    std::vector<Vertex> v(hi - lo);
    std::iota(v.begin(), v.end(), lo);
    return v;
}

// 1. exact longest square path against the exhaustive oracle
Outcome criterion1() {
    Rng rng(1001);
    const double ps[] = {0.3, 0.5, 0.7};
    std::size_t mismatches = 0, budgeted = 0;
    double search_s = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 6 + rng.below(7);
        const double p = ps[rng.below(3)];
        const Graph g = gnp(n, p, rng.next());
        const auto ts = std::chrono::steady_clock::now();
        const auto res = longest_square_path_exact(g);
        search_s += seconds_since(ts);
        if (!res.exhaustive) ++budgeted;
        if (res.path.size() != oracle::longest_square_path(g) || !is_square_path(g, res.path.vertices()))
            ++mismatches;
    }
    const double total = seconds_since(t0);
    return {mismatches == 0 && budgeted == 0 && total < 60.0,
            f("200 graphs, %zu mismatches, search %.2fs, total with oracle %.2fs", mismatches, search_s, total)};
}

// 2. no spanning square cycle in the tripartite template; K_n always has one
Outcome criterion2() {
    std::string detail;
    bool ok = true;
    for (std::size_t m : {2u, 3u, 4u}) {
        const auto r = has_square_hamilton_cycle(tripartite_template(m));
        ok = ok && r.verdict == CycleVerdict::none;
        detail += f("template(%zu): %s; ", m, to_string(r.verdict).c_str());
    }
    std::size_t complete_ok = 0;
    for (std::size_t n = 5; n <= 12; ++n) {
        const Graph k = complete_graph(n);
        const auto r = has_square_hamilton_cycle(k);
        if (r.verdict == CycleVerdict::found && r.cycle->size() == n && is_square_cycle(k, r.cycle->vertices()))
            ++complete_ok;
    }
    ok = ok && complete_ok == 8;
    return {ok, detail + f("K5..K12 certified: %zu/8", complete_ok)};
}

// 3. wiped vertex never appears on a square cycle
Outcome criterion3() {
    std::size_t through = 0, in_triangle = 0, found = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Graph g0 = gnp(30, 0.5, derive_seed(3, s));
        const Vertex v = static_cast<Vertex>(Rng(derive_seed(3, s, 1)).below(30));
        const Graph g = neighborhood_wipe(g0, v);
        for (Vertex w : g.neighbors(v).to_vector())
            if (!triangles_of_edge(g, v, w).empty()) ++in_triangle;
        const auto r = longest_square_cycle_exact(g, 200'000);
        if (!r.cycle) continue;
        ++found;
        const auto& cv = r.cycle->vertices();
        if (!is_square_cycle(g, cv) || std::find(cv.begin(), cv.end(), v) != cv.end()) ++through;
    }
    return {through == 0 && in_triangle == 0,
            f("100 graphs, %zu with a cycle found, %zu through the wiped vertex, %zu triangles at it", found, through,
              in_triangle)};
}

// 4. independent blocker: exact value on K9, greedy inequalities on gnp(3000, 0.1)
Outcome criterion4() {
    const auto k9 = independent_blocker(complete_graph(9), 1.0 / 3.0, 4);
    const auto exact = longest_square_path_exact(k9.graph);
    const bool k9_ok = k9.blocked.size() == 6 && exact.exhaustive && exact.path.size() == 5 &&
                       oracle::longest_square_path(k9.graph) == 5;
    std::size_t violations = 0, longest = 0;
    const double cap = 1.5 * 0.5 * 3000 + 2;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto b = independent_blocker(gnp(3000, 0.1, derive_seed(4, t)), 0.5, derive_seed(4, t, 1));
        const auto p = greedy_square_path(b.graph, derive_seed(4, t, 2), 1);
        std::size_t inside = 0;
        for (Vertex v : p.vertices()) inside += std::binary_search(b.blocked.begin(), b.blocked.end(), v);
        if (!is_square_path(b.graph, p.vertices())) ++violations;
        if (inside > (p.size() + 2) / 3) ++violations;
        if (static_cast<double>(p.size()) > cap) ++violations;
        longest = std::max(longest, p.size());
    }
    return {k9_ok && violations == 0,
            f("K9: |U|=%zu, exact=%zu; gnp(3000,0.1): %zu violations over 100 paths, longest %zu (cap %.0f)",
              k9.blocked.size(), exact.path.size(), violations, longest, cap)};
}

// 5. triangle counts per edge concentrate around n p^2
Outcome criterion5() {
    const auto t0 = std::chrono::steady_clock::now();
    const Graph g = gnp(5000, 0.08, 5);
    Rng rng(55);
    const auto edges = rng.sample(g.edges(), 1000);
    const auto counts = kernels::edge_triangle_counts(g, edges, Exec::parallel);
    const double mean = 5000 * 0.08 * 0.08;
    const double half = 6 * std::sqrt(mean);
    std::size_t inside = 0;
    std::vector<double> values;
    for (auto c : counts) {
        inside += std::abs(static_cast<double>(c) - mean) <= half;
        values.push_back(c);
    }
    const double secs = seconds_since(t0);
    svg::write_file((g_out / "criterion5_triangles.svg").string(),
                    svg::histogram("triangles per edge, gnp(5000, 0.08)", values, 40, 0, 2 * mean));
    const double rate = static_cast<double>(inside) / 1000.0;
    return {rate >= 0.99 && secs < 30.0,
            f("%zu/1000 within %.0f +- %.1f, %.2fs", inside, mean, half, secs)};
}

struct PrunedChain {
    PruneResult result;
    std::size_t second_pass_removed = 0;
    std::size_t violations = 0;
};

std::vector<PrunedChain>& pruned_chains() {
    static std::vector<PrunedChain> chains;
    if (!chains.empty()) return chains;
    const auto sched = PruneSchedule::make(6, 0.1, 0.1, 4000, 0.05);
    for (std::uint64_t s = 0; s < 20; ++s) {
        PrunedChain pc;
        pc.result = prune_to_gtilde(build_chain_random(6, 4000, 0.05, derive_seed(6, s)), 0.1, sched);
        pc.second_pass_removed = prune_to_gtilde(pc.result.chain, 0.1, sched).total_removed;
        pc.violations = count_threshold_violations(pc.result.chain, pc.result.threshold);
        chains.push_back(std::move(pc));
    }
    return chains;
}

// 6. pruning removes little, is idempotent, and leaves no low-triangle edge
Outcome criterion6() {
    const auto& chains = pruned_chains();
    double worst = 0;
    std::size_t not_idempotent = 0, violations = 0;
    std::vector<double> worst_by_pair(5, 0.0);
    std::ofstream csv(g_out / "criterion6_pairs.csv");
    csv << "seed,pair,initial_edges,removed,fraction\n";
    for (std::size_t s = 0; s < chains.size(); ++s) {
        const auto& pc = chains[s];
        for (const auto& p : pc.result.pairs) {
            worst = std::max(worst, p.fraction);
            worst_by_pair[p.pair] = std::max(worst_by_pair[p.pair], p.fraction);
            csv << s << ',' << p.pair << ',' << p.initial_edges << ',' << p.removed << ',' << p.fraction << '\n';
        }
        not_idempotent += pc.second_pass_removed != 0;
        violations += pc.violations;
    }
    std::string per_pair;
    for (std::size_t i = 0; i < 4; ++i) per_pair += f(" pair%zu=%.3f", i, worst_by_pair[i]);
    return {worst <= 0.05 && not_idempotent == 0 && violations == 0,
            f("20 seeds: max removal fraction %.3f (bar 0.05;%s), non-idempotent %zu, post-condition violations %zu",
              worst, per_pair.c_str(), not_idempotent, violations)};
}

// 7. expansion of first-pair edges in the pruned chains
Outcome criterion7() {
    const auto& chains = pruned_chains();
    std::size_t passing = 0, empty_first = 0;
    std::vector<double> all, mins;
    for (std::size_t s = 0; s < chains.size(); ++s) {
        const auto& ch = chains[s].result.chain;
        const auto starts = sample_pair_edges(ch, 0, 100, derive_seed(7, s));
        if (starts.empty()) {
            ++empty_first;
            mins.push_back(0.0);
            continue;
        }
        const auto fr = expansion_fractions(ch, starts, Exec::parallel);
        all.insert(all.end(), fr.begin(), fr.end());
        const double m = *std::min_element(fr.begin(), fr.end());
        mins.push_back(m);
        passing += m >= 0.52;
    }
    svg::write_file((g_out / "criterion7_min_fraction.svg").string(),
                    svg::histogram("min expansion fraction per seed", mins, 20, 0, 1));
    svg::write_file((g_out / "criterion7_fractions.svg").string(),
                    svg::histogram("expansion fraction, all sampled edges", all, 20, 0, 1));
    const bool ok = static_cast<double>(passing) >= 0.9 * static_cast<double>(chains.size());
    return {ok, f("%zu/20 seeds with min fraction >= 0.52 (bar 18); first pair empty after pruning in %zu seeds; "
                  "%zu fractions measured",
                  passing, empty_first, all.size())};
}

// 8. square-path counts stay below the first-moment bound
Outcome criterion8() {
    const std::size_t k = 6, n0 = 1000;
    const double p0 = 0.3;
    const auto ch = build_chain_random(k + 1, n0, p0, 8);
    const double bound = 2 * std::pow(double(n0), double(k - 3)) * std::pow(p0, double(2 * k - 3));
    const auto firsts = sample_pair_edges(ch, 0, 500, 81);
    const auto lasts = sample_pair_edges(ch, k - 1, 500, 82);
    std::vector<std::uint64_t> counts(firsts.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(firsts.size()); ++i)
        counts[i] = count_square_paths_between(ch, firsts[i], lasts[i]);
    const auto mx = *std::max_element(counts.begin(), counts.end());
    double mean = 0;
    std::vector<double> values;
    for (auto c : counts) {
        mean += double(c) / double(counts.size());
        values.push_back(double(c));
    }
    svg::write_file((g_out / "criterion8_counts.svg").string(),
                    svg::histogram("square paths between sampled end edges", values, 30, 0, bound));
    const auto small = build_chain_random(6, 4, 1.0, 0);
    const auto exact = count_square_paths_between(small, {small.members(0)[0], small.members(1)[0]},
                                                  {small.members(4)[0], small.members(5)[0]});
    return {double(mx) <= bound && exact == 16,
            f("max %llu, mean %.0f, bound %.0f; complete chain n0=4: %llu (want 16)", (unsigned long long)mx, mean,
              bound, (unsigned long long)exact)};
}

// 9. end-to-end embedding on attacked and unattacked K600
Outcome criterion9() {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineParams params;
    const Graph k600 = complete_graph(600);
    std::vector<int> attacked_ok(100, 0), clean_ok(100, 0);
    std::vector<std::size_t> lengths(100, 0), min_deg(100, 0);
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < 100; ++t) {
        const Graph g = per_vertex_deletion(k600, 0.28, derive_seed(9, t));
        min_deg[t] = g.min_degree();
        const auto r = run_pipeline(g, 1.0, params, derive_seed(9, t, 1));
        if (r.trace && r.trace->cycle) {
            lengths[t] = r.trace->cycle->size();
            attacked_ok[t] = is_square_cycle(g, r.trace->cycle->vertices()) && lengths[t] >= 540 &&
                             g.min_degree() >= (2.0 / 3.0 + 0.05) * 600;
        }
        const auto c = run_pipeline(k600, 1.0, params, derive_seed(9, t, 2));
        clean_ok[t] = c.trace && c.trace->cycle && c.trace->cycle->size() >= 540 &&
                      is_square_cycle(k600, c.trace->cycle->vertices());
    }
    const int a = std::accumulate(attacked_ok.begin(), attacked_ok.end(), 0);
    const int c = std::accumulate(clean_ok.begin(), clean_ok.end(), 0);
    std::ofstream csv(g_out / "criterion9_trials.csv");
    csv << "trial,min_degree,length,success\n";
    for (int t = 0; t < 100; ++t) csv << t << ',' << min_deg[t] << ',' << lengths[t] << ',' << attacked_ok[t] << '\n';
    const double secs = seconds_since(t0);
    return {a >= 80 && c == 100 && secs < 600,
            f("attacked (r=0.28, min degree >= %zu): %d/100 valid cycles >= 540 (bar 80); K600: %d/100; %.1fs",
              *std::min_element(min_deg.begin(), min_deg.end()), a, c, secs)};
}

// 10. regularity tester: no false refutation, reliable refutation, replayable witnesses
Outcome criterion10() {
    std::size_t false_violations = 0;
    for (std::size_t h : {10u, 40u, 100u}) {
        const Graph kb = complete_bipartite(h, h);
        const auto pair = BipartitePairView::of(kb, range(0, h), range(h, 2 * h));
        for (double eps : {0.05, 0.1, 0.2, 0.4})
            for (std::uint64_t s = 0; s < 25; ++s)
                false_violations += test_regular(pair, 1.0, eps, 200, s).verdict == Verdict::violated;
    }
    GraphBuilder b(200);
    for (Vertex u = 0; u < 50; ++u)
        for (Vertex w = 0; w < 50; ++w) {
            b.add_edge(u, 100 + w);
            b.add_edge(50 + u, 150 + w);
        }
    const Graph two = std::move(b).build();
    const auto pair = BipartitePairView::of(two, range(0, 100), range(100, 200));
    std::size_t violated = 0, bad_replay = 0;
    const std::size_t trials = 1000;
    for (std::uint64_t s = 0; s < trials; ++s) {
        const auto rep = test_regular(pair, 0.5, 0.2, 200, derive_seed(10, s));
        if (rep.verdict != Verdict::violated) continue;
        ++violated;
        if (!rep.witness || std::abs(replay_deviation(rep) - rep.witness->deviation) > 1e-12 ||
            !witness_violates(rep, 0.2))
            ++bad_replay;
    }
    const double rate = double(violated) / double(trials);
    return {false_violations == 0 && rate >= 0.99 && bad_replay == 0,
            f("complete bipartite: %zu false violations in 300 runs; two-block: %zu/%zu violated; %zu witnesses "
              "failed replay",
              false_violations, violated, trials, bad_replay)};
}

// 11. every campaign reproduces its CSV output apart from wall time
Outcome criterion11() {
    const std::vector<std::pair<std::string, Json>> campaigns = {
        {"search", Json::parse(R"({"trials": 40, "master_seed": 11,
            "search": {"graph": {"kind": "gnp", "n": [6, 12], "p": [0.3, 0.5, 0.7]}, "method": "exact-path"}})")},
        {"search", Json::parse(R"({"trials": 10, "master_seed": 12,
            "search": {"graph": {"kind": "gnp", "n": 400, "p": 0.1},
                       "adversary": {"kind": "independent-blocker", "c": 0.5}, "method": "greedy"}})")},
        {"search", Json::parse(R"({"trials": 10, "master_seed": 13,
            "search": {"graph": {"kind": "gnp", "n": 11, "p": 0.6}, "method": "longest-cycle"}})")},
        {"pipeline", Json::parse(R"({"trials": 4, "master_seed": 14,
            "pipeline": {"graph": {"kind": "complete", "n": 300},
                         "adversary": {"kind": "per-vertex-fraction", "r": 0.25}, "traces": false}})")},
        {"measure", Json::parse(R"({"trials": 2, "master_seed": 15,
            "measure": {"triangles": {"n": 800, "p": 0.2, "samples": 200},
                        "expansion": {"k": 5, "n0": 60, "p0": 0.5, "samples": 20},
                        "path_counts": {"k": 5, "n0": 40, "p0": 0.4, "samples": 30}}})")},
        {"prune", Json::parse(R"({"trials": 2, "master_seed": 16,
            "prune": {"k": 5, "n0": 150, "p0": 0.3, "epsilon": 0.1}})")},
    };
    std::size_t differing = 0, files = 0;
    std::string which;
    for (std::size_t c = 0; c < campaigns.size(); ++c) {
        std::vector<std::vector<std::string>> runs;
        for (int rep = 0; rep < 2; ++rep) {
            Json doc = campaigns[c].second;
            doc["out_dir"] = (g_out / f("criterion11_campaign%zu_run%d", c, rep)).string();
            const auto out = run_command(campaigns[c].first, ExperimentConfig::parse(doc));
            std::vector<std::string> texts;
            for (const auto& path : out.files) {
                if (fs::path(path).extension() != ".csv") continue;
                std::ifstream in(path);
                std::ostringstream os;
                os << in.rdbuf();
                texts.push_back(csv_without_column(os.str(), "ms"));
            }
            runs.push_back(std::move(texts));
        }
        files += runs[0].size();
        if (runs[0] != runs[1] || runs[0].empty()) {
            ++differing;
            which += " " + campaigns[c].first + std::to_string(c);
        }
    }
    return {differing == 0, f("%zu campaigns, %zu CSV files compared, %zu differing%s", campaigns.size(), files,
                              differing, which.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    std::string out = g_out.string();
    app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
    app.add_option("--out", out, "directory for histograms and CSVs");
    CLI11_PARSE(app, argc, argv);
    g_out = out;
    fs::create_directories(g_out);

    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                            criterion5, criterion6, criterion7, criterion8,
                                                            criterion9, criterion10, criterion11};
    int failed = 0;
    for (int i = 1; i <= 11; ++i) {
        if (only && i != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d: %s  %s  [%.1fs]\n", i, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
