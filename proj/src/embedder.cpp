#include "sqlab/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <unordered_map>

#include "sqlab/rng.hpp"

namespace sqlab {

std::string to_string(PipelineMode m) {
    return m == PipelineMode::asymptotic_regime ? "asymptotic-regime" : "dense-surrogate";
}

PipelineMode pipeline_mode_from(const std::string& s) {
    if (s == "asymptotic-regime") return PipelineMode::asymptotic_regime;
    if (s == "dense-surrogate") return PipelineMode::dense_surrogate;
    throw std::invalid_argument("unknown pipeline mode: " + s);
}

std::string to_string(ClosingStatus s) {
    switch (s) {
        case ClosingStatus::closed: return "closed";
        case ClosingStatus::failed: return "failed";
        case ClosingStatus::not_attempted: return "not-attempted";
    }
    return "unknown";
}

std::size_t PipelineParams::k0() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return static_cast<std::size_t>(std::ceil(3.0 / gamma - 1e-12)) + 4;
}

void PipelineParams::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
    if (!(epsilon_prime > 0.0 && epsilon_prime < epsilon && epsilon < nu && nu < 1.0))
        throw std::invalid_argument("need 0 < epsilon_prime < epsilon < nu < 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
    if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in (0,1]");
    if (effective_r_min() < 3 * k0()) throw std::invalid_argument("r_min must be at least 3 k0");
    if (effective_r_min() > r_max) throw std::invalid_argument("r_min exceeds r_max");
    if (!(good_threshold > 0.0 && good_threshold <= 1.0)) throw std::invalid_argument("good_threshold must lie in (0,1]");
    const double rf = effective_reserve_fraction();
    if (!(rf > 0.0 && rf < 0.5)) throw std::invalid_argument("reserve_fraction must lie in (0,0.5)");
    if (!(regularity_epsilon > 0.0 && regularity_epsilon < 1.0))
        throw std::invalid_argument("regularity_epsilon must lie in (0,1)");
    if (regularity_samples == 0 || good_samples == 0) throw std::invalid_argument("sample counts must be positive");
}

ReducedGraph reduced_graph(const EquitablePartition& partition, const std::vector<std::vector<std::size_t>>& reduced,
                           double mu) {
    const std::size_t r = partition.classes.size();
    if (reduced.size() != r) throw std::invalid_argument("reduced adjacency does not match the partition");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j : reduced[i]) {
            if (j >= r || j == i) throw std::invalid_argument("reduced adjacency index out of range");
            if (i < j) edges.push_back(Edge{static_cast<Vertex>(i), static_cast<Vertex>(j)});
        }
    ReducedGraph out;
    out.graph = Graph::from_edges(r, edges);
    out.min_degree = r ? out.graph.min_degree() : 0;
    out.mu_target = mu * static_cast<double>(r);
    out.min_degree_ok = static_cast<double>(out.min_degree) >= out.mu_target - 1e-9;
    return out;
}

ReducedCycle square_cycle_in_reduced(const Graph& r_graph, std::uint64_t node_budget) {
    ReducedCycle out;
    const auto ham = has_square_hamilton_cycle(r_graph, node_budget);
    out.nodes = ham.nodes;
    if (ham.verdict == CycleVerdict::found) {
        out.cycle = ham.cycle;
        out.spanning = true;
        return out;
    }
    const auto best = longest_square_cycle_exact(r_graph, node_budget);
    out.nodes += best.nodes;
    out.cycle = best.cycle;
    out.budget_exhausted = ham.verdict == CycleVerdict::unknown || best.verdict == CycleVerdict::unknown;
    return out;
}

GoodEdgeReport classify_good_edges(const ChainPartition& window, double threshold, std::size_t max_samples,
                                   std::uint64_t seed, std::span<const EdgeState> candidates) {
    GoodEdgeReport rep;
    std::vector<EdgeState> pool;
    if (candidates.empty()) {
        pool = sample_pair_edges(window, 0, window.pair_edge_count(0), seed);
        std::sort(pool.begin(), pool.end());
    } else {
        pool.assign(candidates.begin(), candidates.end());
    }
    if (pool.size() > max_samples) {
        Rng rng(seed);
        pool = rng.sample(pool, max_samples);
    }
    rep.sampled = std::move(pool);
    rep.fractions = expansion_fractions(window, rep.sampled, Exec::parallel);
    for (std::size_t i = 0; i < rep.sampled.size(); ++i)
        if (rep.fractions[i] >= threshold) rep.good.push_back(rep.sampled[i]);
    rep.good_fraction =
        rep.sampled.empty() ? 0.0 : static_cast<double>(rep.good.size()) / static_cast<double>(rep.sampled.size());
    return rep;
}

namespace {

class Embedder {
public:
    Embedder(const Graph& g, const EquitablePartition& partition, const SquareCycle& reduced_cycle,
             const PipelineParams& params, std::uint64_t seed)
        : g_(g), shared_(std::make_shared<const Graph>(g)), params_(params), seed_(seed), used_(g.n()) {
        params_.validate();
        k0_ = params_.k0();
        for (Vertex c : reduced_cycle.vertices()) {
            if (c >= partition.classes.size()) throw std::invalid_argument("reduced cycle names a missing class");
            order_.push_back(c);
        }
        r_ = order_.size();
        if (r_ < 3 * k0_) throw std::invalid_argument("reduced cycle shorter than 3 k0");
        n0_ = partition.class_size();
        if (n0_ < 3) throw std::invalid_argument("partition classes need at least 3 vertices");
        trace_.mode = params_.mode;
        trace_.class_order.assign(order_.begin(), order_.end());
        trace_.class_size = n0_;
        trace_.reserve_size = static_cast<std::size_t>(
            std::ceil(params_.effective_reserve_fraction() * static_cast<double>(n0_) - 1e-9));
        trace_.reserve_size = std::max<std::size_t>(trace_.reserve_size, 1);
        if (trace_.reserve_size + 2 > n0_) throw std::invalid_argument("reserved sets leave no room for windows");
        pool_floor_ = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(params_.epsilon * static_cast<double>(n0_) - 1e-9)));

        Rng rng(derive_seed(seed_, 0));
        for (std::size_t pos = 0; pos < r_; ++pos) {
            std::vector<Vertex> members = partition.classes[order_[pos]];
            rng.shuffle(members);
            reserved_.emplace_back(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(trace_.reserve_size));
            pool_.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(trace_.reserve_size), members.end());
            for (Vertex v : members) position_of_[v] = pos;
        }
    }

    EmbeddingTrace run() {
        choose_start();
        window_phase();
        trace_.window_phase_length = path_.size();
        trace_.path = SquarePath::certify(g_, path_);
        close();
        return std::move(trace_);
    }

private:
    std::size_t pos(std::size_t i) const { return i % r_; }

    void take(Vertex v) {
        used_.insert(v);
        path_.push_back(v);
        auto& p = pool_[position_of_.at(v)];
        p.erase(std::remove(p.begin(), p.end(), v), p.end());
        auto& rs = reserved_[position_of_.at(v)];
        rs.erase(std::remove(rs.begin(), rs.end(), v), rs.end());
    }

    void give_back(Vertex v) {
        used_.erase(v);
        pool_[position_of_.at(v)].push_back(v);
    }

    std::vector<Vertex> first_m(const std::vector<Vertex>& v, std::size_t m) const {
        return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(m, v.size()))};
    }

    // Start edge in E(R_0, R_1) whose backward expansion through the reserved
    // sets of the last k0 classes covers the most edges.
    void choose_start() {
        const std::size_t rs = trace_.reserve_size;
        std::vector<std::vector<Vertex>> classes{reserved_[1], reserved_[0]};
        for (std::size_t j = 0; j < k0_; ++j) classes.push_back(reserved_[r_ - 1 - j]);
        const ChainPartition back = chain_view(shared_, classes, 1.0);
        std::optional<EdgeState> best;
        double best_fraction = -1.0;
        if (rs >= 1 && back.pair_edge_count(0) > 0) {
            auto edges = sample_pair_edges(back, 0, back.pair_edge_count(0), derive_seed(seed_, 1));
            std::sort(edges.begin(), edges.end());
            for (const EdgeState& e : edges) {
                const double f = edge_expansion(back, e).fraction;
                if (f > best_fraction) {
                    best_fraction = f;
                    best = e;
                }
                if (f >= params_.good_threshold) break;
            }
        }
        if (!best) {
            // no reserved edge: fall back to an edge between the first two pools
            for (Vertex a : pool_[0])
                for (Vertex b : pool_[1])
                    if (!best && g_.has_edge(a, b)) best = EdgeState{b, a};
            if (!best) throw std::invalid_argument("no edge between the first two classes of the reduced cycle");
            trace_.notes.push_back("start edge taken outside the reserved sets");
            best_fraction = 0.0;
        } else if (best_fraction < params_.good_threshold) {
            trace_.notes.push_back("start edge below the backward expansion threshold");
        }
        trace_.start = EdgeState{best->second, best->first};
        trace_.start_backward_fraction = best_fraction;
        take(best->second);
        take(best->first);
    }

    std::size_t min_pool() const {
        std::size_t m = pool_.front().size();
        for (const auto& p : pool_) m = std::min(m, p.size());
        return m;
    }

    // Window classes at positions from..from+t-1. The first two positions
    // hold `lead` (already on the path) followed by pool vertices.
    std::optional<ChainPartition> window(std::size_t from, std::size_t t, std::span<const Vertex> lead) const {
        std::size_t m = ~std::size_t{0};
        for (std::size_t j = 0; j < t; ++j) {
            const std::size_t extra = j < lead.size() ? 1 : 0;
            m = std::min(m, pool_[pos(from + j)].size() + extra);
        }
        if (m < pool_floor_ || m == 0) return std::nullopt;
        std::vector<std::vector<Vertex>> classes;
        for (std::size_t j = 0; j < t; ++j) {
            std::vector<Vertex> c;
            if (j < lead.size()) c.push_back(lead[j]);
            const auto rest = first_m(pool_[pos(from + j)], m - c.size());
            c.insert(c.end(), rest.begin(), rest.end());
            classes.push_back(std::move(c));
        }
        return chain_view(shared_, std::move(classes), 1.0);
    }

    void window_phase() {
        const std::size_t t = k0_;
        if (t < k0_ || t > 2 * k0_) throw std::logic_error("window length outside [k0, 2k0]");
        for (std::size_t w = 0; w < g_.n(); ++w) {
            if (min_pool() < pool_floor_) return;
            const std::size_t from = pos(path_.size() - 2);
            const Vertex lead[2] = {path_[path_.size() - 2], path_.back()};
            const auto cur = window(from, t, lead);
            if (!cur) return;
            const EdgeExpansion ex = edge_expansion(*cur, EdgeState{lead[0], lead[1]});
            const auto targets = reachable_targets(*cur, ex);
            if (targets.empty()) {
                trace_.notes.push_back("window " + std::to_string(w) + " stalled: no reachable target edge");
                return;
            }

            WindowRecord rec;
            rec.index = w;
            for (std::size_t j = 0; j < t; ++j) rec.classes.push_back(order_[pos(from + j)]);
            rec.pool = cur->class_size();

            // score targets by their own expansion in the following window
            EdgeState chosen = targets.front();
            const std::size_t next_from = from + t - 2;
            const auto next = window(next_from, t, {});
            if (next) {
                std::vector<EdgeState> cand;
                for (const EdgeState& e : targets) {
                    const auto a = next->locate(e.first);
                    const auto b = next->locate(e.second);
                    if (a && b && a->cls == 0 && b->cls == 1 && next->link(0, 1).test(a->index, b->index))
                        cand.push_back(e);
                }
                if (!cand.empty()) {
                    const auto rep = classify_good_edges(*next, params_.good_threshold, params_.good_samples,
                                                         derive_seed(seed_, 2, w), cand);
                    rec.good_fraction = rep.good_fraction;
                    rec.sampled = rep.sampled.size();
                    std::size_t best = 0;
                    for (std::size_t i = 1; i < rep.sampled.size(); ++i)
                        if (rep.fractions[i] > rep.fractions[best]) best = i;
                    chosen = rep.sampled[best];
                    rec.chosen_fraction = rep.fractions[best];
                    rec.chosen_good = rec.chosen_fraction >= params_.good_threshold;
                }
            }
            const auto segment = recover_square_path(*cur, ex, chosen);
            if (!segment) throw std::logic_error("reachable target without a recoverable path");
            for (std::size_t j = 2; j < segment->size(); ++j) take((*segment)[j]);
            if (!is_square_path(g_, path_)) throw std::logic_error("window extension broke the square path");
            for (std::size_t i = 2; i < path_.size(); ++i)
                for (const auto& rs : reserved_)
                    if (std::find(rs.begin(), rs.end(), path_[i]) != rs.end())
                        throw std::logic_error("window phase touched a reserved vertex");
            rec.chosen = chosen;
            rec.path_length = path_.size();
            trace_.windows.push_back(std::move(rec));
        }
    }

    // ------------------------------------------------------------ closing

    struct ClosingSearch {
        const Graph& g;
        const std::vector<std::vector<Vertex>>& avail;  // per class position
        std::vector<Vertex>& path;
        VertexSet& used;
        std::size_t r;
        std::size_t target;
        std::uint64_t budget;
        std::uint64_t nodes = 0;

        bool fits(Vertex v, std::size_t at) const {
            if (used.contains(v)) return false;
            if (!g.has_edge(v, path[at - 1]) || !g.has_edge(v, path[at - 2])) return false;
            if (at + 2 >= target && !g.has_edge(v, path[0])) return false;
            if (at + 1 == target && !g.has_edge(v, path[1])) return false;
            return true;
        }

        std::size_t onward(Vertex v, std::size_t at) const {
            if (at + 1 >= target) return 0;
            std::size_t c = 0;
            for (Vertex w : avail[(at + 1) % r])
                if (!used.contains(w) && w != v && g.has_edge(w, v) && g.has_edge(w, path[at - 1])) ++c;
            return c;
        }

        bool dfs() {
            const std::size_t at = path.size();
            if (at == target)
                return g.has_edge(path[at - 2], path[0]) && g.has_edge(path[at - 1], path[0]) &&
                       g.has_edge(path[at - 1], path[1]);
            if (++nodes > budget) return false;
            std::vector<std::pair<std::size_t, Vertex>> cand;
            for (Vertex v : avail[at % r])
                if (fits(v, at)) cand.emplace_back(onward(v, at), v);
            std::stable_sort(cand.begin(), cand.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (const auto& [score, v] : cand) {
                if (score == 0 && at + 1 < target) continue;
                path.push_back(v);
                used.insert(v);
                if (dfs()) return true;
                used.erase(v);
                path.pop_back();
                if (nodes > budget) return false;
            }
            return false;
        }
    };

    bool try_close() {
        std::vector<std::vector<Vertex>> avail(r_);
        for (std::size_t c = 0; c < r_; ++c) {
            avail[c] = pool_[c];
            avail[c].insert(avail[c].end(), reserved_[c].begin(), reserved_[c].end());
        }
        const std::size_t len = path_.size();
        // largest multiple of r reachable with the available vertices
        std::size_t laps = (len + r_ - 1) / r_;
        while (true) {
            const std::size_t t = (laps + 1) * r_;
            bool ok = true;
            for (std::size_t c = 0; c < r_ && ok; ++c) {
                std::size_t need = 0;
                for (std::size_t p = len; p < t; ++p)
                    if (p % r_ == c) ++need;
                ok = need <= avail[c].size();
            }
            if (!ok) break;
            ++laps;
        }
        for (std::size_t l = laps; l * r_ >= len && l * r_ >= kMinSquareCycle; --l) {
            ClosingSearch s{g_, avail, path_, used_, r_, l * r_, params_.closing_node_budget};
            const bool found = s.dfs();
            trace_.closing_nodes += s.nodes;
            if (found) {
                for (std::size_t i = len; i < path_.size(); ++i) {
                    const std::size_t c = position_of_.at(path_[i]);
                    auto& p = pool_[c];
                    p.erase(std::remove(p.begin(), p.end(), path_[i]), p.end());
                    auto& rs = reserved_[c];
                    rs.erase(std::remove(rs.begin(), rs.end(), path_[i]), rs.end());
                }
                return true;
            }
            if (l == 0) break;
        }
        return false;
    }

    void close() {
        const std::vector<Vertex> window_path = path_;
        for (std::size_t attempt = 0; attempt <= params_.closing_retries; ++attempt) {
            if (try_close()) {
                trace_.cycle = SquareCycle::certify(g_, path_);
                for (std::size_t i = 0; i < path_.size(); ++i)
                    if (position_of_.at(path_[i]) != i % r_) throw std::logic_error("cycle leaves the class order");
                trace_.closing = ClosingStatus::closed;
                trace_.path = SquarePath::certify(g_, path_);
                return;
            }
            // drop one lap from the end and retry
            const std::size_t drop = std::min(r_, path_.size() > 2 + r_ ? r_ : std::size_t{0});
            if (drop == 0) break;
            for (std::size_t i = 0; i < drop; ++i) {
                give_back(path_.back());
                path_.pop_back();
            }
            ++trace_.closing_truncations;
        }
        trace_.closing = ClosingStatus::failed;
        path_ = window_path;
        trace_.path = SquarePath::certify(g_, path_);
        trace_.notes.push_back("closing failed; reporting the window-phase path");
    }

    const Graph& g_;
    std::shared_ptr<const Graph> shared_;
    PipelineParams params_;
    std::uint64_t seed_;
    std::size_t k0_ = 0, r_ = 0, n0_ = 0, pool_floor_ = 1;
    std::vector<std::size_t> order_;
    std::vector<std::vector<Vertex>> reserved_, pool_;
    std::unordered_map<Vertex, std::size_t> position_of_;
    VertexSet used_;
    std::vector<Vertex> path_;
    EmbeddingTrace trace_;
};

}  // namespace

EmbeddingTrace embed_square_cycle(const Graph& g, const EquitablePartition& partition,
                                  const SquareCycle& reduced_cycle, const PipelineParams& params,
                                  std::uint64_t seed) {
    Embedder e(g, partition, reduced_cycle, params, seed);
    return e.run();
}

PipelineResult run_pipeline(const Graph& g, double reference_p, const PipelineParams& params, std::uint64_t seed) {
    params.validate();
    PipelineResult res;
    if (g.edge_count() == 0) {
        res.failure = "partition stage: input graph has no edges";
        return res;
    }
    PartitionOptions opt;
    opt.reference_p = reference_p;
    opt.epsilon = params.regularity_epsilon;
    opt.alpha = params.alpha;
    opt.mu = params.mu;
    opt.nu = params.nu;
    opt.r_min = params.effective_r_min();
    opt.r_max = params.r_max;
    opt.sample_count = params.regularity_samples;
    res.partition = partition_heuristic(g, opt, derive_seed(seed, 10));
    res.reduced = reduced_graph(res.partition.partition, res.partition.reduced, params.mu);
    if (res.reduced.graph.edge_count() == 0) {
        res.failure = "partition stage: reduced graph is edgeless";
        return res;
    }
    res.reduced_cycle = square_cycle_in_reduced(res.reduced.graph, params.reduced_node_budget);
    if (!res.reduced_cycle.cycle) {
        res.failure = "reduced graph has no square cycle";
        return res;
    }
    if (res.reduced_cycle.cycle->size() < 3 * params.k0()) {
        res.failure = "reduced square cycle shorter than 3 k0";
        return res;
    }
    res.trace = embed_square_cycle(g, res.partition.partition, *res.reduced_cycle.cycle, params, derive_seed(seed, 11));
    return res;
}

}  // namespace sqlab
