#include "sqlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sqlab/rng.hpp"

namespace sqlab {

namespace {

// floor(x) that tolerates representation error such as (1 - 1/3) * 9 = 5.999...
std::size_t tolerant_floor(double x) { return static_cast<std::size_t>(std::floor(x + 1e-9)); }

void check_fraction(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

}  // namespace

std::string_view to_string(AdversaryKind kind) {
    switch (kind) {
    case AdversaryKind::per_vertex_fraction: return "per-vertex-fraction";
    case AdversaryKind::neighborhood_wipe: return "neighborhood-wipe";
    case AdversaryKind::independent_blocker: return "independent-blocker";
    case AdversaryKind::tripartite_template: return "tripartite-template";
    }
    return "?";
}

AdversaryKind adversary_kind_from(std::string_view name) {
    for (auto k : {AdversaryKind::per_vertex_fraction, AdversaryKind::neighborhood_wipe,
                   AdversaryKind::independent_blocker, AdversaryKind::tripartite_template})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown adversary kind: " + std::string(name));
}

void AdversarySpec::validate() const {
    const bool want_r = kind == AdversaryKind::per_vertex_fraction;
    const bool want_c = kind == AdversaryKind::independent_blocker;
    const bool want_target = kind == AdversaryKind::neighborhood_wipe;
    const bool want_m = kind == AdversaryKind::tripartite_template;
    if (r.has_value() != want_r || c.has_value() != want_c || target.has_value() != want_target ||
        m.has_value() != want_m)
        throw std::invalid_argument("adversary '" + std::string(to_string(kind)) +
                                    "' takes exactly its own parameters");
    if (r) check_fraction(*r, "r");
    if (c && !(*c > 0.0 && *c < 1.0)) throw std::invalid_argument("c must lie in (0,1)");
    if (m && *m < 1) throw std::invalid_argument("m must be at least 1");
}

Graph per_vertex_deletion(const Graph& g, double r, std::uint64_t seed) {
    check_fraction(r, "r");
    std::vector<std::size_t> budget(g.n());
    for (Vertex v = 0; v < g.n(); ++v) budget[v] = tolerant_floor(r * static_cast<double>(g.degree(v)));

    std::vector<Edge> order = g.edges();
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<Edge> removed;
    for (const Edge& e : order) {
        if (budget[e.u] == 0 || budget[e.v] == 0) continue;
        --budget[e.u];
        --budget[e.v];
        removed.push_back(e);
    }
    return g.without_edges(removed);
}

Graph neighborhood_wipe(const Graph& g, Vertex v) {
    if (v >= g.n()) throw std::invalid_argument("neighborhood_wipe: vertex out of range");
    const std::vector<Vertex> nb = g.neighbors(v).to_vector();
    GraphBuilder b(g);
    for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j) b.remove_edge(nb[i], nb[j]);
    return std::move(b).build();
}

BlockerResult independent_blocker(const Graph& g, double c, std::uint64_t seed) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("independent_blocker: c must lie in (0,1)");
    const std::size_t size = tolerant_floor((1.0 - c) * static_cast<double>(g.n()));
    std::vector<Vertex> all(g.n());
    std::iota(all.begin(), all.end(), Vertex{0});
    Rng rng(seed);
    std::vector<Vertex> blocked = rng.sample(all, size);
    std::sort(blocked.begin(), blocked.end());

    const VertexSet u = VertexSet::from(g.n(), blocked);
    GraphBuilder b(g);
    for (Vertex x : blocked)
        (g.neighbors(x) & u).for_each([&](Vertex y) {
            if (x < y) b.remove_edge(x, y);
        });
    return {std::move(b).build(), std::move(blocked)};
}

Graph tripartite_template(std::size_t m) {
    if (m < 1) throw std::invalid_argument("tripartite_template: m must be at least 1");
    const std::size_t parts[] = {m, m, m + 1};
    return complete_multipartite(parts);
}

double max_deleted_fraction(const Graph& before, const Graph& after) {
    double worst = 0.0;
    for (Vertex v = 0; v < before.n(); ++v) {
        const std::size_t d = before.degree(v);
        if (d == 0) continue;
        const std::size_t lost = d - (before.neighbors(v) & after.neighbors(v)).count();
        worst = std::max(worst, static_cast<double>(lost) / static_cast<double>(d));
    }
    return worst;
}

AttackResult apply_adversary(const Graph& g, const AdversarySpec& spec) {
    spec.validate();
    AttackResult out;
    out.min_degree_before = g.min_degree();
    switch (spec.kind) {
    case AdversaryKind::per_vertex_fraction:
        out.graph = per_vertex_deletion(g, *spec.r, spec.seed);
        break;
    case AdversaryKind::neighborhood_wipe:
        out.graph = neighborhood_wipe(g, *spec.target);
        break;
    case AdversaryKind::independent_blocker: {
        auto res = independent_blocker(g, *spec.c, spec.seed);
        out.graph = std::move(res.graph);
        out.blocked = std::move(res.blocked);
        break;
    }
    case AdversaryKind::tripartite_template:
        out.graph = tripartite_template(*spec.m);
        out.min_degree_before = out.graph.min_degree();
        out.min_degree_after = out.min_degree_before;
        return out;
    }
    out.edges_removed = g.edge_count() - out.graph.edge_count();
    out.min_degree_after = out.graph.min_degree();
    out.max_deleted_fraction = max_deleted_fraction(g, out.graph);
    return out;
}

}  // namespace sqlab
