#pragma once

// Brute-force references used only by the tests. Nothing here shares code
// with the library's search or counting routines.

#include <cstdint>
#include <set>
#include <vector>

#include "sqlab/blowup.hpp"
#include "sqlab/graph.hpp"
#include "sqlab/square_walk.hpp"

namespace oracle {

using sqlab::ChainPartition;
using sqlab::EdgeState;
using sqlab::Graph;
using sqlab::Vertex;

inline bool adj(const Graph& g, Vertex a, Vertex b) {
    for (Vertex w : g.neighbors(a).to_vector())
        if (w == b) return true;
    return false;
}

namespace detail {

inline void extend(const Graph& g, std::vector<Vertex>& seq, std::vector<bool>& used, std::size_t& best) {
    best = std::max(best, seq.size());
    if (best == g.n()) return;
    for (Vertex w = 0; w < g.n(); ++w) {
        if (used[w]) continue;
        const std::size_t k = seq.size();
        if (k >= 1 && !adj(g, seq[k - 1], w)) continue;
        if (k >= 2 && !adj(g, seq[k - 2], w)) continue;
        used[w] = true;
        seq.push_back(w);
        extend(g, seq, used, best);
        seq.pop_back();
        used[w] = false;
    }
}

}  // namespace detail

/// Longest square path by enumerating every valid prefix of every vertex permutation.
inline std::size_t longest_square_path(const Graph& g) {
    std::size_t best = 0;
    std::vector<Vertex> seq;
    std::vector<bool> used(g.n(), false);
    detail::extend(g, seq, used, best);
    return best;
}

inline std::size_t triangles(const Graph& g, Vertex u, Vertex v) {
    std::size_t c = 0;
    for (Vertex w = 0; w < g.n(); ++w)
        if (w != u && w != v && adj(g, u, w) && adj(g, v, w)) ++c;
    return c;
}

inline std::size_t degree_into(const Graph& g, Vertex v, const std::vector<Vertex>& s) {
    std::size_t c = 0;
    for (Vertex w : s)
        if (adj(g, v, w)) ++c;
    return c;
}

/// Every vertex sequence through classes 0..K-1 whose consecutive and
/// distance-2 pairs are surviving chain edges, with the first two and last two
/// vertices optionally pinned.
inline std::uint64_t chain_square_paths(const ChainPartition& ch, const EdgeState* first, const EdgeState* last) {
    const std::size_t k = ch.class_count();
    std::vector<Vertex> seq;
    std::uint64_t count = 0;
    auto rec = [&](auto&& self, std::size_t cls) -> void {
        if (cls == k) {
            ++count;
            return;
        }
        for (Vertex w : ch.members(cls)) {
            if (first && cls == 0 && w != first->first) continue;
            if (first && cls == 1 && w != first->second) continue;
            if (last && cls == k - 2 && w != last->first) continue;
            if (last && cls == k - 1 && w != last->second) continue;
            if (cls >= 1 && !ch.has_edge(seq[cls - 1], w)) continue;
            if (cls >= 2 && !ch.has_edge(seq[cls - 2], w)) continue;
            seq.push_back(w);
            self(self, cls + 1);
            seq.pop_back();
        }
    };
    rec(rec, 0);
    return count;
}

/// Forward dynamic programme over edge states: ways[(v, w)] per layer.
inline std::uint64_t chain_paths_from_dp(const ChainPartition& ch, EdgeState start) {
    std::vector<std::pair<EdgeState, std::uint64_t>> layer = {{start, 1}};
    for (std::size_t cls = 2; cls < ch.class_count(); ++cls) {
        std::vector<std::pair<EdgeState, std::uint64_t>> next;
        for (Vertex w : ch.members(cls)) {
            std::vector<std::uint64_t> into(ch.graph().n(), 0);
            for (const auto& [s, c] : layer)
                if (ch.has_edge(s.first, w) && ch.has_edge(s.second, w)) into[s.second] += c;
            for (Vertex v = 0; v < into.size(); ++v)
                if (into[v]) next.push_back({EdgeState{v, w}, into[v]});
        }
        layer = std::move(next);
    }
    std::uint64_t total = 0;
    for (const auto& [s, c] : layer) total += c;
    return total;
}

/// Output of a triangle expansion computed by a double loop over (u, v) in the input and w in V_{i+2}.
inline std::set<EdgeState> triangle_expand(const ChainPartition& ch, std::size_t i, const std::vector<EdgeState>& in) {
    std::set<EdgeState> out;
    for (const EdgeState& e : in)
        for (Vertex w : ch.members(i + 2))
            if (ch.has_edge(e.first, w) && ch.has_edge(e.second, w)) out.insert({e.second, w});
    return out;
}

/// Last-pair states reachable from `start` by square walks, layer by layer
/// over explicit state sets (no bit matrices).
inline std::set<EdgeState> reachable_last_pair(const ChainPartition& ch, EdgeState start) {
    std::set<EdgeState> layer = {start};
    for (std::size_t cls = 2; cls < ch.class_count(); ++cls) {
        std::set<EdgeState> next;
        for (const EdgeState& s : layer)
            for (Vertex w : ch.members(cls))
                if (ch.has_edge(s.first, w) && ch.has_edge(s.second, w)) next.insert({s.second, w});
        layer = std::move(next);
    }
    return layer;
}

}  // namespace oracle
