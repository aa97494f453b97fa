#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlab/graph.hpp"

namespace sqlab {

/// Last two vertices of a partial square path: (first, second) with {first, second} an edge.
struct EdgeState {
    Vertex first = 0;
    Vertex second = 0;

    EdgeState reversed() const { return {second, first}; }
    friend auto operator<=>(const EdgeState&, const EdgeState&) = default;
};

/// Both orientations of every edge: exactly 2|E| states.
std::vector<EdgeState> edge_states(const Graph& g);

/// States (v,w) with w in N(u) ∩ N(v), for s = (u,v). Throws on an invalid state.
std::vector<EdgeState> successors(const Graph& g, EdgeState s);

/// Distinct vertices; consecutive and distance-2 pairs adjacent.
bool is_square_path(const Graph& g, std::span<const Vertex> seq);
/// At least 5 distinct vertices; cyclic consecutive and distance-2 pairs adjacent.
bool is_square_cycle(const Graph& g, std::span<const Vertex> seq);

inline constexpr std::size_t kMinSquareCycle = 5;

/// Vertex sequence that passed is_square_path in the graph it was built against.
class SquarePath {
public:
    SquarePath() = default;
    /// Throws std::invalid_argument if `seq` is not a square path of g.
    static SquarePath certify(const Graph& g, std::vector<Vertex> seq);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.empty(); }

private:
    std::vector<Vertex> vertices_;
};

class SquareCycle {
public:
    SquareCycle() = default;
    /// Throws std::invalid_argument if `seq` is not a square cycle of g.
    static SquareCycle certify(const Graph& g, std::vector<Vertex> seq);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

private:
    std::vector<Vertex> vertices_;
};

struct PathSearchResult {
    SquarePath path;
    bool exhaustive = true;  // false: node budget ran out, path is a lower bound
    std::uint64_t nodes = 0;
};

enum class CycleVerdict { found, none, unknown };
std::string to_string(CycleVerdict v);

struct CycleSearchResult {
    CycleVerdict verdict = CycleVerdict::none;
    std::optional<SquareCycle> cycle;
    std::uint64_t nodes = 0;
};

inline constexpr std::uint64_t kUnlimitedNodes = ~std::uint64_t{0};

/// Maximum-cardinality square path by depth-first branch and bound over edge states.
PathSearchResult longest_square_path_exact(const Graph& g, std::uint64_t node_budget = kUnlimitedNodes);

/// Spanning square cycle, or a verdict of none (search exhausted) / unknown (budget).
CycleSearchResult has_square_hamilton_cycle(const Graph& g, std::uint64_t node_budget = kUnlimitedNodes);

/// Longest square cycle (length >= 5); verdict unknown means the best found under the budget.
CycleSearchResult longest_square_cycle_exact(const Graph& g, std::uint64_t node_budget = kUnlimitedNodes);

/// Seeded greedy growth from a random start edge. Each step takes the successor
/// with the most extension states reachable within `lookahead_depth` further
/// steps; ties go to the earliest candidate in a seeded order. When the front
/// end stalls the path is reversed and grown from the other end.
SquarePath greedy_square_path(const Graph& g, std::uint64_t seed, std::size_t lookahead_depth = 2);

}  // namespace sqlab
