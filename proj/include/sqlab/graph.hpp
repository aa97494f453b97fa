#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqlab/bitset.hpp"

namespace sqlab {

/// Undirected edge, normalised so that u < v.
struct Edge {
    Vertex u = 0;
    Vertex v = 0;

    static Edge of(Vertex a, Vertex b) { return a < b ? Edge{a, b} : Edge{b, a}; }
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphBuilder;

/// Immutable simple undirected graph on vertices 0..n-1 with bitset rows.
///
/// Every "deletion" in the library produces a new Graph; an existing Graph is
/// never modified, so it may be shared freely between threads.
class Graph {
public:
    Graph() = default;

    static Graph empty(std::size_t n);
    static Graph from_edges(std::size_t n, std::span<const Edge> edges);

    std::size_t n() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const VertexSet& neighbors(Vertex v) const { return adjacency_.at(v); }
    std::size_t degree(Vertex v) const { return adjacency_.at(v).count(); }
    bool has_edge(Vertex u, Vertex v) const { return u < n() && adjacency_[u].contains(v); }

    std::size_t min_degree() const;
    std::size_t max_degree() const;

    /// All edges with u < v in lexicographic order.
    std::vector<Edge> edges() const;

    /// Copy with the listed edges removed; absent edges are ignored.
    Graph without_edges(std::span<const Edge> removed) const;

    /// Subgraph induced by `keep`, relabelled so keep[i] becomes vertex i.
    Graph induced(std::span<const Vertex> keep) const;

    friend bool operator==(const Graph& a, const Graph& b) { return a.adjacency_ == b.adjacency_; }

private:
    friend class GraphBuilder;
    std::vector<VertexSet> adjacency_;
    std::size_t edge_count_ = 0;
};

/// Mutable staging area for a Graph.
class GraphBuilder {
public:
    explicit GraphBuilder(std::size_t n);
    explicit GraphBuilder(const Graph& g);

    std::size_t n() const { return adjacency_.size(); }
    bool add_edge(Vertex u, Vertex v);
    bool remove_edge(Vertex u, Vertex v);
    bool has_edge(Vertex u, Vertex v) const { return adjacency_.at(u).contains(v); }
    const VertexSet& neighbors(Vertex v) const { return adjacency_.at(v); }

    Graph build() &&;
    Graph build() const&;

private:
    void check(Vertex u, Vertex v) const;
    std::vector<VertexSet> adjacency_;
    std::size_t edge_count_ = 0;
};

/// Ordered pair of disjoint vertex sets of one graph.
struct BipartitePairView {
    const Graph* graph = nullptr;
    std::vector<Vertex> left;
    std::vector<Vertex> right;

    /// Validates disjointness and id range; throws std::invalid_argument.
    static BipartitePairView of(const Graph& g, std::vector<Vertex> left, std::vector<Vertex> right);

    std::size_t edge_count() const;
};

// Generators.

/// G(n,p): every pair {u,v}, u<v, visited in lexicographic order and kept
/// with one Bernoulli(p) draw from Rng(seed).
Graph gnp(std::size_t n, double p, std::uint64_t seed);
Graph complete_graph(std::size_t n);
Graph cycle_graph(std::size_t n);
/// C^2_n: i adjacent to i±1 and i±2 (mod n).
Graph square_cycle_graph(std::size_t n);
/// Complete multipartite graph with the given part sizes, parts laid out consecutively.
Graph complete_multipartite(std::span<const std::size_t> part_sizes);

// Primitive queries.

/// N(u) ∩ N(v) for an edge {u,v}; throws std::invalid_argument on a non-edge.
VertexSet triangles_of_edge(const Graph& g, Vertex u, Vertex v);
std::size_t degree_into(const Graph& g, Vertex v, const VertexSet& s);
std::size_t degree_into(const Graph& g, Vertex v, std::span<const Vertex> s);

// Text format: "n m" then m lines "u v" (u < v, lexicographic).

class GraphFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_graph(std::ostream& out, const Graph& g);
std::string to_text(const Graph& g);
Graph read_graph(std::istream& in);
Graph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const Graph& g);

}  // namespace sqlab
