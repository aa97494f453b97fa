#include "sqlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sqlab/adversary.hpp"
#include "sqlab/blowup.hpp"
#include "sqlab/kernels.hpp"
#include "sqlab/rng.hpp"
#include "sqlab/square_walk.hpp"
#include "sqlab/svg.hpp"

namespace sqlab {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- config helpers

const Json& empty_object() {
    static const Json e = Json::object();
    return e;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

template <class T>
T require(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing '" + std::string(key) + "' in " + where);
    return get_or<T>(j, key, T{});
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fixed(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string ms_since(std::chrono::steady_clock::time_point t0) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return fixed(ms);
}

std::string prepare_out(const ExperimentConfig& cfg, const std::string& name) {
    const fs::path path = fs::path(cfg.out_dir) / name;
    std::error_code ec;
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path(), ec);
    if (ec) throw std::ios_base::failure("cannot create output directory " + path.parent_path().string());
    return path.string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << text;
    if (!out) throw std::ios_base::failure("write failed for " + path);
}

std::optional<AdversarySpec> parse_adversary(const Json& j, std::uint64_t default_seed) {
    if (j.is_null()) return std::nullopt;
    check_keys(j, {"kind", "r", "c", "target", "m", "seed"}, "adversary");
    AdversarySpec s;
    try {
        s.kind = adversary_kind_from(require<std::string>(j, "kind", "adversary"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("r")) s.r = get_or<double>(j, "r", 0.0);
    if (j.contains("c")) s.c = get_or<double>(j, "c", 0.0);
    if (j.contains("target")) s.target = get_or<Vertex>(j, "target", 0);
    if (j.contains("m")) s.m = get_or<std::size_t>(j, "m", 0);
    s.seed = get_or<std::uint64_t>(j, "seed", default_seed);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

PipelineParams parse_params(const Json& j, PipelineMode mode) {
    check_keys(j,
               {"gamma", "nu", "alpha", "epsilon", "epsilon_prime", "mu", "r_min", "r_max", "good_threshold",
                "reserve_fraction", "regularity_epsilon", "regularity_samples", "good_samples",
                "reduced_node_budget", "closing_node_budget", "closing_retries"},
               "pipeline.params");
    PipelineParams p;
    p.gamma = get_or(j, "gamma", p.gamma);
    p.nu = get_or(j, "nu", p.nu);
    p.alpha = get_or(j, "alpha", p.alpha);
    p.epsilon = get_or(j, "epsilon", p.epsilon);
    p.epsilon_prime = get_or(j, "epsilon_prime", p.epsilon_prime);
    p.mu = get_or(j, "mu", p.mu);
    p.r_min = get_or(j, "r_min", p.r_min);
    p.r_max = get_or(j, "r_max", p.r_max);
    p.good_threshold = get_or(j, "good_threshold", p.good_threshold);
    p.reserve_fraction = get_or(j, "reserve_fraction", p.reserve_fraction);
    p.regularity_epsilon = get_or(j, "regularity_epsilon", p.regularity_epsilon);
    p.regularity_samples = get_or(j, "regularity_samples", p.regularity_samples);
    p.good_samples = get_or(j, "good_samples", p.good_samples);
    p.reduced_node_budget = get_or(j, "reduced_node_budget", p.reduced_node_budget);
    p.closing_node_budget = get_or(j, "closing_node_budget", p.closing_node_budget);
    p.closing_retries = get_or(j, "closing_retries", p.closing_retries);
    p.mode = mode;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("infeasible pipeline parameters: ") + e.what());
    }
    return p;
}

/// Runs f(i) for every trial, concurrently when `parallel`; the first
/// exception (by trial index) is rethrown after all trials finish.
template <class F>
void for_trials(std::size_t trials, bool parallel, F&& f) {
    std::vector<std::exception_ptr> errors(trials);
    const auto n = static_cast<std::ptrdiff_t>(trials);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string join_rows(const std::string& header, const std::vector<std::string>& rows) {
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::parse(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.raw = doc;
    c.trials = get_or<std::size_t>(doc, "trials", 1);
    c.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0);
    c.out_dir = get_or<std::string>(doc, "out_dir", ".");
    try {
        c.mode = pipeline_mode_from(get_or<std::string>(doc, "mode", "dense-surrogate"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& [k, v] : doc.items()) {
        static const char* known[] = {"trials", "master_seed", "out_dir", "mode",     "generate", "attack",
                                      "search", "pipeline",    "measure", "prune",    "comment"};
        if (std::none_of(std::begin(known), std::end(known), [&](const char* a) { return k == a; }))
            throw ConfigError("unknown top-level key '" + k + "'");
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read config " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const Json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse(doc);
}

const Json& ExperimentConfig::block(const std::string& command) const {
    if (!raw.contains(command)) return empty_object();
    return raw.at(command);
}

std::uint64_t ExperimentConfig::trial_seed(std::size_t i) const { return derive_seed(master_seed, i); }

// ---------------------------------------------------------------- graph sources

GraphDraw draw_graph(const Json& source, std::uint64_t seed) {
    check_keys(source, {"kind", "n", "p", "m", "path"}, "graph");
    const auto kind = require<std::string>(source, "kind", "graph");
    Rng rng(seed);
    auto pick_n = [&]() -> std::size_t {
        const Json& n = source.at("n");
        if (n.is_array()) {
            if (n.size() != 2) throw ConfigError("graph.n range must be [lo, hi]");
            const auto lo = n[0].get<std::size_t>();
            const auto hi = n[1].get<std::size_t>();
            if (lo > hi) throw ConfigError("graph.n range is empty");
            return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
        }
        return require<std::size_t>(source, "n", "graph");
    };
    GraphDraw d;
    try {
        if (kind == "gnp") {
            if (!source.contains("n") || !source.contains("p")) throw ConfigError("gnp source needs n and p");
            d.n = pick_n();
            const Json& p = source.at("p");
            if (p.is_array()) {
                if (p.empty()) throw ConfigError("graph.p list is empty");
                d.p = p[static_cast<std::size_t>(rng.below(p.size()))].get<double>();
            } else {
                d.p = p.get<double>();
            }
            d.graph = gnp(d.n, *d.p, derive_seed(seed, 7));
        } else if (kind == "complete") {
            if (!source.contains("n")) throw ConfigError("complete source needs n");
            d.n = pick_n();
            d.p = 1.0;
            d.graph = complete_graph(d.n);
        } else if (kind == "empty") {
            if (!source.contains("n")) throw ConfigError("empty source needs n");
            d.n = pick_n();
            d.p = 0.0;
            d.graph = Graph::empty(d.n);
        } else if (kind == "square-cycle") {
            if (!source.contains("n")) throw ConfigError("square-cycle source needs n");
            d.n = pick_n();
            d.graph = square_cycle_graph(d.n);
        } else if (kind == "tripartite") {
            d.graph = tripartite_template(require<std::size_t>(source, "m", "graph"));
            d.n = d.graph.n();
        } else if (kind == "file") {
            d.graph = read_graph_file(require<std::string>(source, "path", "graph"));
            d.n = d.graph.n();
        } else {
            throw ConfigError("unknown graph kind '" + kind + "'");
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad graph source: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad graph source: ") + e.what());
    }
    return d;
}

std::string csv_without_column(const std::string& csv, const std::string& column) {
    std::istringstream in(csv);
    std::string line, out;
    std::optional<std::size_t> drop;
    bool header = true;  // a blank line starts a new table with its own header
    while (std::getline(in, line)) {
        if (line.empty()) {
            out += "\n";
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (header) {
            const auto it = std::find(cells.begin(), cells.end(), column);
            drop = it == cells.end() ? std::nullopt : std::optional<std::size_t>(it - cells.begin());
            header = false;
        }
        std::string row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (drop && i == *drop) continue;
            if (!row.empty() || i > (drop && *drop == 0 ? 1u : 0u)) row += ',';
            row += cells[i];
        }
        out += row + "\n";
    }
    return out;
}

// ---------------------------------------------------------------- generate / attack

CommandOutcome cmd_generate(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("generate");
    check_keys(b, {"n", "p", "seed", "output"}, "generate");
    const auto n = require<std::size_t>(b, "n", "generate");
    const auto p = require<double>(b, "p", "generate");
    const auto seed = get_or<std::uint64_t>(b, "seed", cfg.master_seed);
    Graph g;
    try {
        g = gnp(n, p, seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto path = prepare_out(cfg, get_or<std::string>(b, "output", "graph.txt"));
    write_graph_file(path, g);
    CommandOutcome out;
    out.files.push_back(path);
    out.summary = {{"n", g.n()}, {"m", g.edge_count()}, {"seed", seed}, {"path", path}};
    return out;
}

CommandOutcome cmd_attack(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("attack");
    check_keys(b, {"graph", "adversary", "output", "report"}, "attack");
    if (!b.contains("graph")) throw ConfigError("attack needs a graph source");
    if (!b.contains("adversary")) throw ConfigError("attack needs an adversary");
    const GraphDraw d = draw_graph(b.at("graph"), cfg.master_seed);
    const auto spec = parse_adversary(b.at("adversary"), derive_seed(cfg.master_seed, 1));
    AttackResult res;
    try {
        res = apply_adversary(d.graph, *spec);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto gpath = prepare_out(cfg, get_or<std::string>(b, "output", "attacked.txt"));
    const auto rpath = prepare_out(cfg, get_or<std::string>(b, "report", "attack.json"));
    write_graph_file(gpath, res.graph);
    CommandOutcome out;
    out.summary = to_json(res, *spec);
    write_text(rpath, out.summary.dump(2) + "\n");
    out.files = {gpath, rpath};
    return out;
}

// ---------------------------------------------------------------- search

CommandOutcome cmd_search(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("search");
    check_keys(b, {"graph", "adversary", "method", "node_budget", "lookahead", "csv", "certificates"}, "search");
    if (!b.contains("graph")) throw ConfigError("search needs a graph source");
    const Json source = b.at("graph");
    const Json adv = b.contains("adversary") ? b.at("adversary") : Json();
    const auto method = get_or<std::string>(b, "method", "exact-path");
    static const char* methods[] = {"exact", "exact-path", "greedy", "longest-cycle"};
    if (std::none_of(std::begin(methods), std::end(methods), [&](const char* m) { return method == m; }))
        throw ConfigError("unknown search method '" + method + "'");
    const auto budget = get_or<std::uint64_t>(b, "node_budget", kUnlimitedNodes);
    const auto lookahead = get_or<std::size_t>(b, "lookahead", 2);
    parse_adversary(adv, 0);  // validate before any trial
    draw_graph(source, cfg.master_seed);

    std::vector<std::string> rows(cfg.trials), certs(cfg.trials);
    for_trials(cfg.trials, true, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t seed = cfg.trial_seed(i);
        GraphDraw d = draw_graph(source, derive_seed(seed, 1));
        std::string adv_name = "none";
        if (auto spec = parse_adversary(adv, derive_seed(seed, 2))) {
            d.graph = apply_adversary(d.graph, *spec).graph;
            adv_name = std::string(to_string(spec->kind));
        }
        const Graph& g = d.graph;
        Json cert;
        std::string verdict;
        bool is_cycle = false;
        if (method == "exact-path") {
            const auto r = longest_square_path_exact(g, budget);
            cert = to_json(r.path);
            verdict = r.exhaustive ? "exact" : "unknown";
        } else if (method == "greedy") {
            cert = to_json(greedy_square_path(g, derive_seed(seed, 3), lookahead));
            verdict = "heuristic";
        } else {
            const auto r = method == "exact" ? has_square_hamilton_cycle(g, budget) : longest_square_cycle_exact(g, budget);
            verdict = to_string(r.verdict);
            is_cycle = true;
            cert = r.cycle ? to_json(*r.cycle) : Json{{"kind", "cycle"}, {"length", 0}, {"vertices", Json::array()}};
        }
        // validity is recomputed from the serialized certificate
        const std::string text = cert.dump();
        const auto seq = vertices_from_json(Json::parse(text));
        std::string valid;
        if (seq.empty())
            valid = "-";
        else
            valid = (is_cycle ? is_square_cycle(g, seq) : is_square_path(g, seq)) ? "1" : "0";
        certs[i] = Json{{"trial", i}, {"certificate", Json::parse(text)}}.dump();
        rows[i] = std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(d.n) + "," +
                  (d.p ? fmt(*d.p) : std::string("-")) + "," + adv_name + "," + method + "," +
                  std::to_string(seq.size()) + "," + valid + "," + verdict + "," + ms_since(t0);
    });
    CommandOutcome out;
    out.csv = join_rows("trial,seed,n,p,adversary,method,length,valid,verdict,ms", rows);
    const auto csv_path = prepare_out(cfg, get_or<std::string>(b, "csv", "search.csv"));
    const auto cert_path = prepare_out(cfg, get_or<std::string>(b, "certificates", "search_certificates.jsonl"));
    write_text(csv_path, out.csv);
    write_text(cert_path, join_rows("", certs).substr(1));
    out.files = {csv_path, cert_path};
    out.summary = {{"trials", cfg.trials}, {"method", method}};
    return out;
}

// ---------------------------------------------------------------- pipeline

CommandOutcome cmd_pipeline(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("pipeline");
    check_keys(b, {"graph", "adversary", "reference_p", "params", "min_degree_fraction", "bars", "csv", "traces"},
               "pipeline");
    if (!b.contains("graph")) throw ConfigError("pipeline needs a graph source");
    const Json source = b.at("graph");
    const Json adv = b.contains("adversary") ? b.at("adversary") : Json();
    const PipelineParams params = parse_params(b.contains("params") ? b.at("params") : empty_object(), cfg.mode);
    const Json bars = b.contains("bars") ? b.at("bars") : empty_object();
    check_keys(bars, {"success_rate"}, "pipeline.bars");
    const double success_bar = get_or(bars, "success_rate", 1.0);
    const auto floor_fraction = get_or<double>(b, "min_degree_fraction", 0.0);
    const bool traces = get_or(b, "traces", true);
    parse_adversary(adv, 0);
    draw_graph(source, cfg.master_seed);
    if (traces) prepare_out(cfg, "traces/.");  // before the trials write into it concurrently

    struct Row {
        std::string text;
        bool success = false;
        std::string failure;
    };
    std::vector<Row> rows(cfg.trials);
    for_trials(cfg.trials, true, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t seed = cfg.trial_seed(i);
        GraphDraw d = draw_graph(source, derive_seed(seed, 1));
        if (auto spec = parse_adversary(adv, derive_seed(seed, 2))) d.graph = apply_adversary(d.graph, *spec).graph;
        const Graph& g = d.graph;
        const double ref_p = get_or<double>(b, "reference_p", d.p.value_or(1.0));
        const std::size_t min_deg = g.n() ? g.min_degree() : 0;
        const bool precondition =
            static_cast<double>(min_deg) >= floor_fraction * static_cast<double>(g.n()) - 1e-9;
        const auto target = static_cast<std::size_t>(std::ceil((1.0 - params.nu) * static_cast<double>(g.n()) - 1e-9));

        const PipelineResult res = run_pipeline(g, ref_p, params, derive_seed(seed, 3));
        Row& row = rows[i];
        std::size_t length = 0;
        std::string valid = "-", closing = "rejected";
        std::size_t windows = 0;
        if (res.trace) {
            const Json tj = to_json(*res.trace);
            const auto seq = vertices_from_json(Json::parse(tj.at("final").dump()));
            length = seq.size();
            const bool ok = res.trace->cycle ? is_square_cycle(g, seq) : is_square_path(g, seq);
            valid = ok ? "1" : "0";
            closing = to_string(res.trace->closing);
            windows = res.trace->windows.size();
            row.success = precondition && ok && res.trace->closing == ClosingStatus::closed && length >= target;
            if (traces) {
                Json full = tj;
                full["trial"] = i;
                full["seed"] = seed;
                full["partition"] = to_json(res.partition);
                write_text(prepare_out(cfg, "traces/pipeline_trace_" + std::to_string(i) + ".json"),
                           full.dump(1) + "\n");
            }
        } else {
            row.failure = res.failure;
        }
        const double ratio = target ? static_cast<double>(length) / ((1.0 - params.nu) * static_cast<double>(g.n())) : 0.0;
        row.text = std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(g.n()) + "," +
                   std::to_string(min_deg) + "," + (precondition ? "1" : "0") + "," +
                   std::to_string(res.partition.partition.classes.size()) + "," +
                   std::to_string(res.partition.partition.class_size()) + "," +
                   (res.reduced_cycle.spanning ? "1" : "0") + "," + std::to_string(windows) + "," + closing + "," +
                   std::to_string(length) + "," + valid + "," + std::to_string(target) + "," + fixed(ratio) + "," +
                   (row.success ? "1" : "0") + "," + ms_since(t0);
    });
    std::vector<std::string> lines;
    std::size_t successes = 0;
    Json failures = Json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lines.push_back(rows[i].text);
        successes += rows[i].success;
        if (!rows[i].failure.empty()) failures.push_back({{"trial", i}, {"diagnostic", rows[i].failure}});
    }
    CommandOutcome out;
    out.csv = join_rows(
        "trial,seed,n,min_degree,precondition,r,class_size,reduced_spanning,windows,closing,length,valid,target,ratio,"
        "success,ms",
        lines);
    const double rate = cfg.trials ? static_cast<double>(successes) / static_cast<double>(cfg.trials) : 0.0;
    out.summary = {{"mode", to_string(cfg.mode)}, {"trials", cfg.trials},   {"successes", successes},
                   {"success_rate", rate},        {"bar", success_bar},     {"failures", failures},
                   {"k0", params.k0()},           {"r_min", params.effective_r_min()}};
    const auto csv_path = prepare_out(cfg, get_or<std::string>(b, "csv", "pipeline.csv"));
    const auto sum_path = prepare_out(cfg, "pipeline_summary.json");
    write_text(csv_path, out.csv);
    write_text(sum_path, out.summary.dump(2) + "\n");
    out.files = {csv_path, sum_path};
    out.exit_code = rate + 1e-12 >= success_bar ? kExitOk : kExitBar;
    return out;
}

// ---------------------------------------------------------------- measure

namespace {

struct Section {
    std::string csv;
    bool pass = true;
    Json summary;
};

Section measure_expansion(const ExperimentConfig& cfg, const Json& b, std::vector<std::string>& files) {
    check_keys(b, {"k", "n0", "p0", "epsilon", "prune", "alpha", "epsilon0", "eps_cor_factor", "samples", "bar",
                   "seed_bar", "bins"},
               "measure.expansion");
    const auto k = get_or<std::size_t>(b, "k", 6);
    const auto n0 = require<std::size_t>(b, "n0", "measure.expansion");
    const auto p0 = require<double>(b, "p0", "measure.expansion");
    const double eps = get_or(b, "epsilon", 0.1);
    const bool prune = get_or(b, "prune", true);
    const double alpha = get_or(b, "alpha", 0.1);
    const double eps0 = get_or(b, "epsilon0", eps / 3.0);
    const double cor = get_or(b, "eps_cor_factor", 0.25);
    const auto samples = get_or<std::size_t>(b, "samples", 100);
    const double bar = get_or(b, "bar", 0.52);
    const double seed_bar = get_or(b, "seed_bar", 0.9);
    const auto bins = get_or<std::size_t>(b, "bins", 20);

    std::vector<std::string> rows;
    std::vector<double> all;
    std::size_t passing = 0;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        const std::uint64_t seed = cfg.trial_seed(i);
        const auto t0 = std::chrono::steady_clock::now();
        ChainPartition chain = build_chain_random(k, n0, p0, derive_seed(seed, 1));
        if (prune) chain = prune_to_gtilde(chain, eps, PruneSchedule::make(k - 1, alpha, eps0, n0, p0, cor)).chain;
        const auto starts = sample_pair_edges(chain, 0, samples, derive_seed(seed, 2));
        const auto fr = expansion_fractions(chain, starts, Exec::parallel);
        all.insert(all.end(), fr.begin(), fr.end());
        // an empty first pair has nothing to expand: recorded as fraction 0
        const double mn = fr.empty() ? 0.0 : *std::min_element(fr.begin(), fr.end());
        const double mean = fr.empty() ? 0.0 : std::accumulate(fr.begin(), fr.end(), 0.0) / static_cast<double>(fr.size());
        const bool pass = !fr.empty() && mn >= bar;
        passing += pass;
        rows.push_back(std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(chain.pair_edge_count(0)) +
                       "," + std::to_string(fr.size()) + "," + fixed(mn) + "," + fixed(mean) + "," + (pass ? "1" : "0") +
                       "," + ms_since(t0));
    }
    Section s;
    s.csv = join_rows("trial,seed,first_pair_edges,sampled,min_fraction,mean_fraction,pass,ms", rows);
    const double rate = cfg.trials ? static_cast<double>(passing) / static_cast<double>(cfg.trials) : 0.0;
    s.pass = rate + 1e-12 >= seed_bar;
    s.summary = {{"seed_pass_rate", rate}, {"bar", bar}, {"seed_bar", seed_bar}, {"pass", s.pass},
                 {"histogram", svg::histogram_counts(all, bins, 0.0, 1.0)}};
    const auto csv_path = prepare_out(cfg, "measure_expansion.csv");
    const auto svg_path = prepare_out(cfg, "measure_expansion.svg");
    write_text(csv_path, s.csv);
    svg::write_file(svg_path, svg::histogram("expansion fraction per sampled first-pair edge", all, bins, 0.0, 1.0));
    files.push_back(csv_path);
    files.push_back(svg_path);
    return s;
}

Section measure_triangles(const ExperimentConfig& cfg, const Json& b, std::vector<std::string>& files) {
    check_keys(b, {"n", "p", "samples", "sigmas", "bar", "bins"}, "measure.triangles");
    const auto n = require<std::size_t>(b, "n", "measure.triangles");
    const auto p = require<double>(b, "p", "measure.triangles");
    const auto samples = get_or<std::size_t>(b, "samples", 1000);
    const double sigmas = get_or(b, "sigmas", 6.0);
    const double bar = get_or(b, "bar", 0.99);
    const auto bins = get_or<std::size_t>(b, "bins", 30);
    const double mu = static_cast<double>(n) * p * p;
    const double half = sigmas * std::sqrt(mu);

    std::vector<std::string> rows;
    std::vector<double> all;
    bool pass_all = true;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        const std::uint64_t seed = cfg.trial_seed(i);
        const auto t0 = std::chrono::steady_clock::now();
        const Graph g = gnp(n, p, derive_seed(seed, 1));
        const auto edges = g.edges();
        Rng rng(derive_seed(seed, 2));
        const auto picked = rng.sample(edges, std::min(samples, edges.size()));
        const auto counts = kernels::edge_triangle_counts(g, picked, Exec::parallel);
        std::size_t within = 0;
        double sum = 0.0;
        for (auto c : counts) {
            all.push_back(c);
            sum += c;
            if (std::abs(static_cast<double>(c) - mu) <= half) ++within;
        }
        const double frac = counts.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(counts.size());
        const bool pass = !counts.empty() && frac + 1e-12 >= bar;
        pass_all = pass_all && pass;
        rows.push_back(std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(counts.size()) + "," +
                       fixed(counts.empty() ? 0.0 : sum / static_cast<double>(counts.size())) + "," + fixed(mu) + "," +
                       fixed(frac) + "," + (pass ? "1" : "0") + "," + ms_since(t0));
    }
    Section s;
    s.csv = join_rows("trial,seed,sampled,mean_triangles,expected,within_fraction,pass,ms", rows);
    s.pass = pass_all;
    const double hi = std::max(2.0 * mu, 1.0);
    s.summary = {{"expected", mu}, {"window", half}, {"bar", bar}, {"pass", s.pass},
                 {"histogram", svg::histogram_counts(all, bins, 0.0, hi)}};
    const auto csv_path = prepare_out(cfg, "measure_triangles.csv");
    const auto svg_path = prepare_out(cfg, "measure_triangles.svg");
    write_text(csv_path, s.csv);
    svg::write_file(svg_path, svg::histogram("triangles per sampled edge", all, bins, 0.0, hi));
    files.push_back(csv_path);
    files.push_back(svg_path);
    return s;
}

Section measure_path_counts(const ExperimentConfig& cfg, const Json& b, std::vector<std::string>& files) {
    check_keys(b, {"k", "n0", "p0", "samples", "bound_factor"}, "measure.path_counts");
    const auto k = get_or<std::size_t>(b, "k", 6);  // path length: k+1 classes
    const auto n0 = require<std::size_t>(b, "n0", "measure.path_counts");
    const auto p0 = require<double>(b, "p0", "measure.path_counts");
    const auto samples = get_or<std::size_t>(b, "samples", 500);
    const double factor = get_or(b, "bound_factor", 2.0);
    if (k < 3) throw ConfigError("measure.path_counts.k must be at least 3");
    const double bound = factor * std::pow(static_cast<double>(n0), static_cast<double>(k) - 3.0) *
                         std::pow(p0, 2.0 * static_cast<double>(k) - 3.0);

    std::vector<std::string> rows;
    std::vector<svg::Series> series;
    bool pass_all = true;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
        const std::uint64_t seed = cfg.trial_seed(i);
        const auto t0 = std::chrono::steady_clock::now();
        const ChainPartition chain = build_chain_random(k + 1, n0, p0, derive_seed(seed, 1));
        const auto e1 = sample_pair_edges(chain, 0, samples, derive_seed(seed, 2));
        const auto e2 = sample_pair_edges(chain, k - 1, samples, derive_seed(seed, 3));
        const std::size_t m = std::min(e1.size(), e2.size());
        std::vector<double> counts(m);
        const auto mm = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t j = 0; j < mm; ++j)
            counts[j] = static_cast<double>(count_square_paths_between(chain, e1[j], e2[j]));
        const double mx = counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
        const double mean = counts.empty() ? 0.0 : std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(m);
        const bool pass = mx <= bound;
        pass_all = pass_all && pass;
        rows.push_back(std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(m) + "," + fmt(mx) + "," +
                       fixed(mean) + "," + fixed(bound) + "," + (pass ? "1" : "0") + "," + ms_since(t0));
        std::sort(counts.begin(), counts.end());
        svg::Series sr{"trial " + std::to_string(i), {}, counts};
        for (std::size_t j = 0; j < m; ++j) sr.x.push_back(static_cast<double>(j));
        series.push_back(std::move(sr));
    }
    if (!series.empty())
        series.push_back({"bound", {0.0, static_cast<double>(series.front().x.size())}, {bound, bound}});
    Section s;
    s.csv = join_rows("trial,seed,samples,max_count,mean_count,bound,pass,ms", rows);
    s.pass = pass_all;
    s.summary = {{"bound", bound}, {"pass", s.pass}};
    const auto csv_path = prepare_out(cfg, "measure_path_counts.csv");
    const auto svg_path = prepare_out(cfg, "measure_path_counts.svg");
    write_text(csv_path, s.csv);
    svg::write_file(svg_path, svg::line_plot("square-path counts between sampled end edges (sorted)", series,
                                             "sample rank", "count"));
    files.push_back(csv_path);
    files.push_back(svg_path);
    return s;
}

}  // namespace

CommandOutcome cmd_measure(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("measure");
    check_keys(b, {"expansion", "triangles", "path_counts"}, "measure");
    if (b.empty()) throw ConfigError("measure needs at least one of expansion, triangles, path_counts");
    CommandOutcome out;
    bool pass = true;
    auto add = [&](const char* name, const Section& s) {
        out.csv += (out.csv.empty() ? "" : "\n") + s.csv;
        out.summary[name] = s.summary;
        pass = pass && s.pass;
    };
    try {
        if (b.contains("expansion")) add("expansion", measure_expansion(cfg, b.at("expansion"), out.files));
        if (b.contains("triangles")) add("triangles", measure_triangles(cfg, b.at("triangles"), out.files));
        if (b.contains("path_counts")) add("path_counts", measure_path_counts(cfg, b.at("path_counts"), out.files));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto sum_path = prepare_out(cfg, "measure_summary.json");
    write_text(sum_path, out.summary.dump(2) + "\n");
    out.files.push_back(sum_path);
    out.exit_code = pass ? kExitOk : kExitBar;
    return out;
}

// ---------------------------------------------------------------- prune

CommandOutcome cmd_prune(const ExperimentConfig& cfg) {
    const Json& b = cfg.block("prune");
    check_keys(b, {"k", "n0", "p0", "epsilon", "alpha", "epsilon0", "eps_cor_factor", "max_removal_fraction",
                   "check_ii", "snapshot"},
               "prune");
    const auto k = get_or<std::size_t>(b, "k", 6);
    const auto n0 = require<std::size_t>(b, "n0", "prune");
    const auto p0 = require<double>(b, "p0", "prune");
    const double eps = get_or(b, "epsilon", 0.1);
    const double alpha = get_or(b, "alpha", 0.1);
    const double eps0 = get_or(b, "epsilon0", eps / 3.0);
    const double cor = get_or(b, "eps_cor_factor", 0.25);
    const double bar = get_or(b, "max_removal_fraction", 0.05);
    const bool snapshot = get_or(b, "snapshot", false);
    const Json check = b.contains("check_ii") ? b.at("check_ii") : Json();
    if (!check.is_null()) check_keys(check, {"samples", "epsilon"}, "prune.check_ii");

    std::vector<std::string> pair_rows, trial_rows;
    bool pass_all = true;
    Json reports = Json::array();
    try {
        const PruneSchedule schedule = PruneSchedule::make(k - 1, alpha, eps0, n0, p0, cor);
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            const std::uint64_t seed = cfg.trial_seed(i);
            const auto t0 = std::chrono::steady_clock::now();
            const ChainPartition chain = build_chain_random(k, n0, p0, derive_seed(seed, 1));
            const PruneResult res = prune_to_gtilde(chain, eps, schedule);
            const PruneResult again = prune_to_gtilde(res.chain, eps, schedule);
            const std::size_t violations = count_threshold_violations(res.chain, res.threshold);
            double worst = 0.0;
            for (const auto& p : res.pairs) {
                worst = std::max(worst, p.fraction);
                pair_rows.push_back(std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(p.pair) + "," +
                                    std::to_string(p.initial_edges) + "," + std::to_string(p.removed) + "," +
                                    fixed(p.fraction) + "," + fmt(p.limit) + "," + (p.exceeds_limit ? "1" : "0"));
            }
            std::string ii = "-";
            Json report = to_json(res);
            if (!check.is_null()) {
                const auto g2 = check_gtilde_ii(res.chain, get_or(check, "epsilon", eps), p0,
                                                get_or<std::size_t>(check, "samples", 50), derive_seed(seed, 4));
                ii = g2.within_budget ? "1" : "0";
                report["gtilde_ii"] = to_json(g2);
            }
            if (snapshot) write_chain_snapshot(prepare_out(cfg, "chain_" + std::to_string(i)), res.chain);
            report["trial"] = i;
            reports.push_back(std::move(report));
            const bool pass = worst <= bar && again.total_removed == 0 && violations == 0;
            pass_all = pass_all && pass;
            trial_rows.push_back(std::to_string(i) + "," + std::to_string(seed) + "," + std::to_string(res.total_removed) +
                                 "," + fixed(worst) + "," + std::to_string(again.total_removed) + "," +
                                 std::to_string(violations) + "," + ii + "," + (pass ? "1" : "0") + "," + ms_since(t0));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    CommandOutcome out;
    const std::string pairs_csv =
        join_rows("trial,seed,pair,initial_edges,removed,fraction,limit,exceeds_limit", pair_rows);
    const std::string trials_csv = join_rows(
        "trial,seed,total_removed,max_fraction,second_pass_removed,post_violations,gtilde_ii_within,pass,ms",
        trial_rows);
    out.csv = pairs_csv + "\n" + trials_csv;
    const auto p1 = prepare_out(cfg, "prune_pairs.csv");
    const auto p2 = prepare_out(cfg, "prune_trials.csv");
    const auto p3 = prepare_out(cfg, "prune_report.json");
    write_text(p1, pairs_csv);
    write_text(p2, trials_csv);
    out.summary = {{"bar", bar}, {"pass", pass_all}, {"eps_cor_modelled", true}, {"trials", reports}};
    write_text(p3, out.summary.dump(1) + "\n");
    out.files = {p1, p2, p3};
    out.exit_code = pass_all ? kExitOk : kExitBar;
    return out;
}

CommandOutcome run_command(const std::string& command, const ExperimentConfig& cfg) {
    if (command == "generate") return cmd_generate(cfg);
    if (command == "attack") return cmd_attack(cfg);
    if (command == "search") return cmd_search(cfg);
    if (command == "pipeline") return cmd_pipeline(cfg);
    if (command == "measure") return cmd_measure(cfg);
    if (command == "prune") return cmd_prune(cfg);
    throw ConfigError("unknown command '" + command + "'");
}

}  // namespace sqlab
