#include "sqlab/square_walk.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "sqlab/rng.hpp"

namespace sqlab {

std::vector<EdgeState> edge_states(const Graph& g) {
    std::vector<EdgeState> out;
    out.reserve(2 * g.edge_count());
    for (Vertex u = 0; u < g.n(); ++u) g.neighbors(u).for_each([&](Vertex v) { out.push_back({u, v}); });
    return out;
}

std::vector<EdgeState> successors(const Graph& g, EdgeState s) {
    std::vector<EdgeState> out;
    triangles_of_edge(g, s.first, s.second).for_each([&](Vertex w) { out.push_back({s.second, w}); });
    return out;
}

bool is_square_path(const Graph& g, std::span<const Vertex> seq) {
    VertexSet seen(g.n());
    for (Vertex v : seq) {
        if (v >= g.n() || seen.contains(v)) return false;
        seen.insert(v);
    }
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (!g.has_edge(seq[i], seq[i + 1])) return false;
    for (std::size_t i = 0; i + 2 < seq.size(); ++i)
        if (!g.has_edge(seq[i], seq[i + 2])) return false;
    return true;
}

bool is_square_cycle(const Graph& g, std::span<const Vertex> seq) {
    const std::size_t m = seq.size();
    if (m < kMinSquareCycle) return false;
    VertexSet seen(g.n());
    for (Vertex v : seq) {
        if (v >= g.n() || seen.contains(v)) return false;
        seen.insert(v);
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!g.has_edge(seq[i], seq[(i + 1) % m])) return false;
        if (!g.has_edge(seq[i], seq[(i + 2) % m])) return false;
    }
    return true;
}

SquarePath SquarePath::certify(const Graph& g, std::vector<Vertex> seq) {
    if (!is_square_path(g, seq)) throw std::invalid_argument("sequence is not a square path");
    SquarePath p;
    p.vertices_ = std::move(seq);
    return p;
}

SquareCycle SquareCycle::certify(const Graph& g, std::vector<Vertex> seq) {
    if (!is_square_cycle(g, seq)) throw std::invalid_argument("sequence is not a square cycle");
    SquareCycle c;
    c.vertices_ = std::move(seq);
    return c;
}

std::string to_string(CycleVerdict v) {
    switch (v) {
    case CycleVerdict::found: return "yes";
    case CycleVerdict::none: return "none";
    case CycleVerdict::unknown: return "unknown";
    }
    return "?";
}

namespace {

struct BudgetExhausted {};

// Number of vertices outside `visited` reachable from state (x,y) in the
// state graph when revisits along different branches are ignored.
std::size_t reachable_new_vertices(const Graph& g, Vertex x, Vertex y, const VertexSet& visited) {
    const std::size_t n = g.n();
    std::vector<Word> seen_state(words_for(n * n), 0);
    VertexSet reached(n);
    std::vector<EdgeState> stack{{x, y}};
    bits::set(seen_state, static_cast<std::size_t>(x) * n + y);
    while (!stack.empty()) {
        const EdgeState s = stack.back();
        stack.pop_back();
        VertexSet next = g.neighbors(s.first) & g.neighbors(s.second);
        next -= visited;
        next.for_each([&](Vertex w) {
            const std::size_t id = static_cast<std::size_t>(s.second) * n + w;
            if (bits::test(seen_state, id)) return;
            bits::set(seen_state, id);
            reached.insert(w);
            stack.push_back({s.second, w});
        });
    }
    return reached.count();
}

class LongestPathSearch {
public:
    LongestPathSearch(const Graph& g, std::uint64_t budget) : g_(g), budget_(budget), visited_(g.n()) {}

    PathSearchResult run() {
        PathSearchResult res;
        const std::size_t n = g_.n();
        if (n == 0) return res;
        best_ = {0};
        if (g_.edge_count() > 0) {
            const Edge e = g_.edges().front();
            best_ = {e.u, e.v};
        }
        std::vector<EdgeState> starts = edge_states(g_);
        std::vector<std::size_t> out_degree(starts.size());
        for (std::size_t i = 0; i < starts.size(); ++i)
            out_degree[i] = g_.neighbors(starts[i].first).intersection_count(g_.neighbors(starts[i].second));
        std::vector<std::size_t> order(starts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out_degree[a] < out_degree[b]; });

        try {
            for (std::size_t idx : order) {
                if (best_.size() == n) break;
                const EdgeState s = starts[idx];
                path_ = {s.first, s.second};
                visited_.clear();
                visited_.insert(s.first);
                visited_.insert(s.second);
                dfs();
            }
        } catch (const BudgetExhausted&) {
            res.exhaustive = false;
        }
        res.path = SquarePath::certify(g_, best_);
        res.nodes = nodes_;
        return res;
    }

private:
    void dfs() {
        if (++nodes_ > budget_) throw BudgetExhausted{};
        if (path_.size() > best_.size()) best_ = path_;
        if (best_.size() == g_.n()) return;
        const Vertex x = path_[path_.size() - 2];
        const Vertex y = path_.back();
        if (path_.size() + (g_.n() - visited_.count()) <= best_.size()) return;
        if (path_.size() + reachable_new_vertices(g_, x, y, visited_) <= best_.size()) return;

        VertexSet cand = g_.neighbors(x) & g_.neighbors(y);
        cand -= visited_;
        std::vector<std::pair<std::size_t, Vertex>> ordered;
        cand.for_each([&](Vertex w) {
            VertexSet onward = g_.neighbors(y) & g_.neighbors(w);
            onward -= visited_;
            ordered.push_back({onward.count(), w});
        });
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [_, w] : ordered) {
            path_.push_back(w);
            visited_.insert(w);
            dfs();
            visited_.erase(w);
            path_.pop_back();
            if (best_.size() == g_.n()) return;
        }
    }

    const Graph& g_;
    std::uint64_t budget_;
    std::uint64_t nodes_ = 0;
    VertexSet visited_;
    std::vector<Vertex> path_;
    std::vector<Vertex> best_;
};

class HamiltonSearch {
public:
    HamiltonSearch(const Graph& g, std::uint64_t budget) : g_(g), budget_(budget), unvisited_(VertexSet::full(g.n())) {}

    CycleSearchResult run() {
        CycleSearchResult res;
        const std::size_t n = g_.n();
        if (n < kMinSquareCycle || g_.min_degree() < 4) {
            res.verdict = CycleVerdict::none;
            return res;
        }
        try {
            path_ = {0};
            unvisited_.erase(0);
            dfs();
            res.verdict = found_ ? CycleVerdict::found : CycleVerdict::none;
        } catch (const BudgetExhausted&) {
            res.verdict = CycleVerdict::unknown;
        }
        if (found_) res.cycle = SquareCycle::certify(g_, path_);
        res.nodes = nodes_;
        return res;
    }

private:
    bool closes() const {
        const std::size_t m = path_.size();
        return g_.has_edge(path_[m - 2], path_[0]) && g_.has_edge(path_[m - 1], path_[0]) &&
               g_.has_edge(path_[m - 1], path_[1]);
    }

    // Every unplaced vertex still needs four cycle neighbours among the unplaced
    // vertices and the two open ends of the path.
    bool feasible() const {
        const std::size_t m = path_.size();
        if (m < 2) return true;
        VertexSet pool = unvisited_;
        pool.insert(path_[0]);
        pool.insert(path_[1]);
        pool.insert(path_[m - 1]);
        if (m >= 2) pool.insert(path_[m - 2]);
        bool ok = true;
        unvisited_.for_each([&](Vertex z) {
            if (ok && g_.neighbors(z).intersection_count(pool) < 4) ok = false;
        });
        if (!ok) return false;
        const std::size_t left = unvisited_.count();
        if (left >= 2 && g_.neighbors(path_[0]).intersection_count(unvisited_) < 2) return false;
        if (left >= 1 && m >= 3 && g_.neighbors(path_[1]).intersection_count(unvisited_) < 1) return false;
        return true;
    }

    void dfs() {
        if (++nodes_ > budget_) throw BudgetExhausted{};
        const std::size_t m = path_.size();
        if (m == g_.n()) {
            found_ = closes();
            return;
        }
        if (!feasible()) return;
        VertexSet cand = g_.neighbors(path_.back()) & unvisited_;
        if (m >= 2) cand &= g_.neighbors(path_[m - 2]);
        std::vector<std::pair<std::size_t, Vertex>> ordered;
        cand.for_each([&](Vertex w) { ordered.push_back({g_.neighbors(w).intersection_count(unvisited_), w}); });
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [_, w] : ordered) {
            path_.push_back(w);
            unvisited_.erase(w);
            dfs();
            if (found_) return;
            unvisited_.insert(w);
            path_.pop_back();
        }
    }

    const Graph& g_;
    std::uint64_t budget_;
    std::uint64_t nodes_ = 0;
    bool found_ = false;
    VertexSet unvisited_;
    std::vector<Vertex> path_;
};

class LongestCycleSearch {
public:
    LongestCycleSearch(const Graph& g, std::uint64_t budget) : g_(g), budget_(budget), visited_(g.n()) {}

    CycleSearchResult run() {
        CycleSearchResult res;
        const std::size_t n = g_.n();
        bool exhausted = true;
        try {
            for (Vertex s = 0; s < n && best_.size() < n - s; ++s) {
                anchor_ = s;
                visited_.clear();
                for (Vertex v = 0; v < s; ++v) visited_.insert(v);
                visited_.insert(s);
                path_ = {s};
                dfs();
                if (best_.size() == n) break;
            }
        } catch (const BudgetExhausted&) {
            exhausted = false;
        }
        if (!best_.empty()) {
            res.cycle = SquareCycle::certify(g_, best_);
            res.verdict = exhausted ? CycleVerdict::found : CycleVerdict::unknown;
        } else {
            res.verdict = exhausted ? CycleVerdict::none : CycleVerdict::unknown;
        }
        res.nodes = nodes_;
        return res;
    }

private:
    void dfs() {
        if (++nodes_ > budget_) throw BudgetExhausted{};
        const std::size_t m = path_.size();
        if (m >= kMinSquareCycle && m > best_.size() && g_.has_edge(path_[m - 2], path_[0]) &&
            g_.has_edge(path_[m - 1], path_[0]) && g_.has_edge(path_[m - 1], path_[1]))
            best_ = path_;
        if (m + (g_.n() - visited_.count()) <= best_.size()) return;
        VertexSet cand = g_.neighbors(path_.back());
        cand -= visited_;
        if (m >= 2) cand &= g_.neighbors(path_[m - 2]);
        if (m >= 2 && m + reachable_new_vertices(g_, path_[m - 2], path_[m - 1], visited_) <= best_.size()) return;
        std::vector<std::pair<std::size_t, Vertex>> ordered;
        cand.for_each([&](Vertex w) {
            VertexSet onward = g_.neighbors(w);
            onward -= visited_;
            ordered.push_back({onward.count(), w});
        });
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [_, w] : ordered) {
            path_.push_back(w);
            visited_.insert(w);
            dfs();
            visited_.erase(w);
            path_.pop_back();
            if (best_.size() == g_.n()) return;
        }
    }

    const Graph& g_;
    std::uint64_t budget_;
    std::uint64_t nodes_ = 0;
    Vertex anchor_ = 0;
    VertexSet visited_;
    std::vector<Vertex> path_;
    std::vector<Vertex> best_;
};

// Extension states reachable from (v,w) within `depth` further steps, never
// entering `used`.
std::size_t lookahead_score(const Graph& g, Vertex v, Vertex w, std::size_t depth, const VertexSet& used) {
    if (depth == 0) return 0;
    VertexSet first = g.neighbors(v) & g.neighbors(w);
    first -= used;
    if (depth == 1) return first.count();
    if (depth == 2) {
        // Layer-two states (z, q) are distinct for distinct z, so counts add.
        std::size_t total = first.count();
        first.for_each([&](Vertex z) {
            VertexSet second = g.neighbors(w) & g.neighbors(z);
            second -= used;
            total += second.count();
        });
        return total;
    }
    std::unordered_set<std::uint64_t> seen;
    std::vector<EdgeState> frontier{{v, w}};
    std::size_t total = 0;
    for (std::size_t step = 0; step < depth && !frontier.empty(); ++step) {
        std::vector<EdgeState> next;
        for (const EdgeState& s : frontier) {
            VertexSet ext = g.neighbors(s.first) & g.neighbors(s.second);
            ext -= used;
            ext.for_each([&](Vertex z) {
                if (z == s.first) return;
                const std::uint64_t key = (std::uint64_t{s.second} << 32) | z;
                if (seen.insert(key).second) {
                    ++total;
                    next.push_back({s.second, z});
                }
            });
        }
        frontier = std::move(next);
    }
    return total;
}

void grow_front(const Graph& g, std::vector<Vertex>& path, VertexSet& used, std::size_t depth, Rng& rng) {
    while (path.size() >= 2) {
        const Vertex x = path[path.size() - 2];
        const Vertex y = path.back();
        VertexSet cand = g.neighbors(x) & g.neighbors(y);
        cand -= used;
        std::vector<Vertex> options = cand.to_vector();
        if (options.empty()) return;
        rng.shuffle(options);
        Vertex pick = options.front();
        if (depth > 0 && options.size() > 1) {
            std::size_t best = 0;
            bool first = true;
            for (Vertex w : options) {
                used.insert(w);
                const std::size_t score = lookahead_score(g, y, w, depth, used);
                used.erase(w);
                if (first || score > best) {
                    best = score;
                    pick = w;
                    first = false;
                }
            }
        }
        path.push_back(pick);
        used.insert(pick);
    }
}

}  // namespace

PathSearchResult longest_square_path_exact(const Graph& g, std::uint64_t node_budget) {
    return LongestPathSearch(g, node_budget).run();
}

CycleSearchResult has_square_hamilton_cycle(const Graph& g, std::uint64_t node_budget) {
    return HamiltonSearch(g, node_budget).run();
}

CycleSearchResult longest_square_cycle_exact(const Graph& g, std::uint64_t node_budget) {
    return LongestCycleSearch(g, node_budget).run();
}

SquarePath greedy_square_path(const Graph& g, std::uint64_t seed, std::size_t lookahead_depth) {
    if (g.n() == 0) return {};
    Rng rng(seed);
    if (g.edge_count() == 0) return SquarePath::certify(g, {static_cast<Vertex>(rng.below(g.n()))});
    const std::vector<Edge> edges = g.edges();
    const Edge start = edges[static_cast<std::size_t>(rng.below(edges.size()))];
    std::vector<Vertex> path{start.u, start.v};
    if (rng.below(2) == 1) std::swap(path[0], path[1]);
    VertexSet used(g.n());
    used.insert(start.u);
    used.insert(start.v);
    grow_front(g, path, used, lookahead_depth, rng);
    std::reverse(path.begin(), path.end());
    grow_front(g, path, used, lookahead_depth, rng);
    return SquarePath::certify(g, std::move(path));
}

}  // namespace sqlab
