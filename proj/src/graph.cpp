#include "sqlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sqlab/rng.hpp"

namespace sqlab {

Graph Graph::empty(std::size_t n) { return GraphBuilder(n).build(); }

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
    GraphBuilder b(n);
    for (const Edge& e : edges) b.add_edge(e.u, e.v);
    return std::move(b).build();
}

std::size_t Graph::min_degree() const {
    if (adjacency_.empty()) return 0;
    std::size_t best = adjacency_[0].count();
    for (const auto& row : adjacency_) best = std::min(best, row.count());
    return best;
}

std::size_t Graph::max_degree() const {
    std::size_t best = 0;
    for (const auto& row : adjacency_) best = std::max(best, row.count());
    return best;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < n(); ++u) {
        adjacency_[u].for_each([&](Vertex v) {
            if (u < v) out.push_back({u, v});
        });
    }
    return out;
}

Graph Graph::without_edges(std::span<const Edge> removed) const {
    GraphBuilder b(*this);
    for (const Edge& e : removed) b.remove_edge(e.u, e.v);
    return std::move(b).build();
}

Graph Graph::induced(std::span<const Vertex> keep) const {
    GraphBuilder b(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = i + 1; j < keep.size(); ++j)
            if (has_edge(keep[i], keep[j])) b.add_edge(static_cast<Vertex>(i), static_cast<Vertex>(j));
    return std::move(b).build();
}

GraphBuilder::GraphBuilder(std::size_t n) : adjacency_(n, VertexSet(n)) {}

GraphBuilder::GraphBuilder(const Graph& g) : adjacency_(g.adjacency_), edge_count_(g.edge_count_) {}

void GraphBuilder::check(Vertex u, Vertex v) const {
    if (u >= n() || v >= n()) throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
}

bool GraphBuilder::add_edge(Vertex u, Vertex v) {
    check(u, v);
    if (adjacency_[u].contains(v)) return false;
    adjacency_[u].insert(v);
    adjacency_[v].insert(u);
    ++edge_count_;
    return true;
}

bool GraphBuilder::remove_edge(Vertex u, Vertex v) {
    check(u, v);
    if (!adjacency_[u].contains(v)) return false;
    adjacency_[u].erase(v);
    adjacency_[v].erase(u);
    --edge_count_;
    return true;
}

Graph GraphBuilder::build() && {
    Graph g;
    g.adjacency_ = std::move(adjacency_);
    g.edge_count_ = edge_count_;
    adjacency_.clear();
    edge_count_ = 0;
    return g;
}

Graph GraphBuilder::build() const& {
    Graph g;
    g.adjacency_ = adjacency_;
    g.edge_count_ = edge_count_;
    return g;
}

BipartitePairView BipartitePairView::of(const Graph& g, std::vector<Vertex> left, std::vector<Vertex> right) {
    VertexSet seen(g.n());
    for (const auto* side : {&left, &right}) {
        for (Vertex v : *side) {
            if (v >= g.n()) throw std::invalid_argument("pair member outside the graph");
            if (seen.contains(v)) throw std::invalid_argument("pair sides overlap or repeat a vertex");
            seen.insert(v);
        }
    }
    return BipartitePairView{&g, std::move(left), std::move(right)};
}

std::size_t BipartitePairView::edge_count() const {
    const VertexSet r = VertexSet::from(graph->n(), right);
    std::size_t total = 0;
    for (Vertex u : left) total += graph->neighbors(u).intersection_count(r);
    return total;
}

Graph gnp(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gnp: probability outside [0,1]");
    Rng rng(seed);
    GraphBuilder b(n);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) b.add_edge(u, v);
    return std::move(b).build();
}

Graph complete_graph(std::size_t n) {
    GraphBuilder b(n);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) b.add_edge(u, v);
    return std::move(b).build();
}

Graph cycle_graph(std::size_t n) {
    GraphBuilder b(n);
    if (n >= 3)
        for (Vertex i = 0; i < n; ++i) b.add_edge(i, static_cast<Vertex>((i + 1) % n));
    return std::move(b).build();
}

Graph square_cycle_graph(std::size_t n) {
    GraphBuilder b(n);
    if (n >= 3) {
        for (Vertex i = 0; i < n; ++i) {
            b.add_edge(i, static_cast<Vertex>((i + 1) % n));
            if (n >= 4 && (i + 2) % n != i) b.add_edge(i, static_cast<Vertex>((i + 2) % n));
        }
    }
    return std::move(b).build();
}

Graph complete_multipartite(std::span<const std::size_t> part_sizes) {
    std::size_t n = 0;
    std::vector<std::size_t> part_of;
    for (std::size_t k = 0; k < part_sizes.size(); ++k) {
        n += part_sizes[k];
        part_of.insert(part_of.end(), part_sizes[k], k);
    }
    GraphBuilder b(n);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v)
            if (part_of[u] != part_of[v]) b.add_edge(u, v);
    return std::move(b).build();
}

VertexSet triangles_of_edge(const Graph& g, Vertex u, Vertex v) {
    if (!g.has_edge(u, v)) throw std::invalid_argument("triangles_of_edge: not an edge");
    return g.neighbors(u) & g.neighbors(v);
}

std::size_t degree_into(const Graph& g, Vertex v, const VertexSet& s) {
    if (v >= g.n()) throw std::out_of_range("degree_into: vertex out of range");
    return g.neighbors(v).intersection_count(s);
}

std::size_t degree_into(const Graph& g, Vertex v, std::span<const Vertex> s) {
    return degree_into(g, v, VertexSet::from(g.n(), s));
}

void write_graph(std::ostream& out, const Graph& g) {
    out << g.n() << ' ' << g.edge_count() << '\n';
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

std::string to_text(const Graph& g) {
    std::ostringstream os;
    write_graph(os, g);
    return os.str();
}

Graph read_graph(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw GraphFormatError("missing header line");
    std::istringstream header(line);
    long long n = -1, m = -1;
    std::string extra;
    if (!(header >> n >> m) || (header >> extra) || n < 0 || m < 0)
        throw GraphFormatError("header must be \"n m\" with non-negative integers");
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(m));
    for (long long i = 0; i < m; ++i) {
        if (!std::getline(in, line)) throw GraphFormatError("fewer edge lines than the header declares");
        std::istringstream row(line);
        long long u = -1, v = -1;
        if (!(row >> u >> v) || (row >> extra)) throw GraphFormatError("malformed edge line: " + line);
        if (u < 0 || v < 0 || u >= n || v >= n) throw GraphFormatError("edge endpoint out of range: " + line);
        if (u >= v) throw GraphFormatError("edge lines need u < v: " + line);
        const Edge e{static_cast<Vertex>(u), static_cast<Vertex>(v)};
        if (!edges.empty() && !(edges.back() < e)) throw GraphFormatError("edge lines must be strictly sorted: " + line);
        edges.push_back(e);
    }
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) throw GraphFormatError("trailing content after edge list");
    return Graph::from_edges(static_cast<std::size_t>(n), edges);
}

Graph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open graph file " + path);
    return read_graph(in);
}

void write_graph_file(const std::string& path, const Graph& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write graph file " + path);
    write_graph(out, g);
    if (!out) throw std::ios_base::failure("write failed for " + path);
}

}  // namespace sqlab
