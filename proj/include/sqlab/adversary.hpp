#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlab/graph.hpp"

namespace sqlab {

enum class AdversaryKind { per_vertex_fraction, neighborhood_wipe, independent_blocker, tripartite_template };

std::string_view to_string(AdversaryKind kind);
/// Throws std::invalid_argument for an unknown name.
AdversaryKind adversary_kind_from(std::string_view name);

/// One edge-deletion strategy plus exactly the parameters that strategy reads.
struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::per_vertex_fraction;
    std::optional<double> r;              // per-vertex-fraction
    std::optional<double> c;              // independent-blocker
    std::optional<Vertex> target;         // neighborhood-wipe
    std::optional<std::size_t> m;         // tripartite-template part size
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument unless exactly the fields of `kind` are set and in range.
    void validate() const;
};

struct AttackResult {
    Graph graph;
    std::vector<Vertex> blocked;  // independent-blocker only
    std::size_t edges_removed = 0;
    std::size_t min_degree_before = 0;
    std::size_t min_degree_after = 0;
    /// max over v with deg(v) > 0 of deleted(v)/deg(v)
    double max_deleted_fraction = 0.0;
};

/// Deletes edges in seeded random order; a deletion is skipped when it would
/// take either endpoint past floor(r * deg(v)) deletions.
Graph per_vertex_deletion(const Graph& g, double r, std::uint64_t seed);

/// Removes every edge with both endpoints in N(v).
Graph neighborhood_wipe(const Graph& g, Vertex v);

struct BlockerResult {
    Graph graph;
    std::vector<Vertex> blocked;  // sorted
};

/// Picks floor((1-c) n) seeded vertices and deletes every edge among them.
BlockerResult independent_blocker(const Graph& g, double c, std::uint64_t seed);

/// Complete tripartite graph with parts m, m, m+1 (n = 3m+1).
Graph tripartite_template(std::size_t m);

/// Applies `spec` to `g` (tripartite-template ignores `g` and builds the template).
AttackResult apply_adversary(const Graph& g, const AdversarySpec& spec);

/// Largest deleted(v)/deg_before(v) over vertices of positive degree.
double max_deleted_fraction(const Graph& before, const Graph& after);

}  // namespace sqlab
