#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "sqlab/adversary.hpp"
#include "sqlab/rng.hpp"
#include "sqlab/square_walk.hpp"

using namespace sqlab;

TEST_CASE("edge states") {
    CHECK(edge_states(complete_graph(3)).size() == 6);
    CHECK(edge_states(Graph::empty(4)).empty());
    const Graph g = gnp(100, 0.1, 2);
    CHECK(edge_states(g).size() == 2 * g.edge_count());
}

TEST_CASE("successors") {
    const auto s = successors(complete_graph(4), {0, 1});
    CHECK(s == std::vector<EdgeState>{{1, 2}, {1, 3}});
    const Graph c4 = cycle_graph(4);
    for (const auto& st : edge_states(c4)) CHECK(successors(c4, st).empty());
    CHECK_THROWS(successors(c4, {0, 2}));

    const Graph g = gnp(60, 0.3, 11);
    Rng r(4);
    for (const auto& st : r.sample(edge_states(g), 30)) {
        std::vector<EdgeState> brute;
        for (Vertex w = 0; w < g.n(); ++w)
            if (w != st.first && w != st.second && oracle::adj(g, st.first, w) && oracle::adj(g, st.second, w))
                brute.push_back({st.second, w});
        auto got = successors(g, st);
        std::sort(got.begin(), got.end());
        CHECK(got == brute);
    }
}

TEST_CASE("is_square_path and is_square_cycle") {
    const Graph k4 = complete_graph(4);
    const Vertex p[] = {0, 1, 2, 3};
    CHECK(is_square_path(k4, p));
    const Vertex rep[] = {0, 1, 0};
    CHECK(!is_square_path(k4, rep));
    const Vertex c5seq[] = {0, 1, 2};
    CHECK(!is_square_path(cycle_graph(5), c5seq));
    const Graph c6 = cycle_graph(6);
    const Vertex a[] = {0, 1, 2}, b[] = {0, 1, 2, 3, 4, 5};
    CHECK(!is_square_path(c6, a));
    CHECK(!is_square_path(c6, b));

    const Graph sq = square_cycle_graph(8);
    std::vector<Vertex> ring(8);
    std::iota(ring.begin(), ring.end(), 0);
    CHECK(is_square_cycle(sq, ring));
    std::swap(ring[3], ring[5]);
    CHECK(!is_square_cycle(sq, ring));
    const Vertex four[] = {0, 1, 2, 3};
    CHECK(!is_square_cycle(complete_graph(4), four));
    CHECK_THROWS(SquarePath::certify(c6, {0, 1, 2}));
    CHECK(SquarePath::certify(k4, {3, 1, 0}).size() == 3);
}

TEST_CASE("longest_square_path_exact small cases") {
    CHECK(longest_square_path_exact(complete_graph(5)).path.size() == 5);
    CHECK(longest_square_path_exact(cycle_graph(6)).path.size() == 2);
    CHECK(longest_square_path_exact(Graph::empty(3)).path.size() == oracle::longest_square_path(Graph::empty(3)));
    CHECK(longest_square_path_exact(Graph::empty(0)).path.size() == 0);
}

TEST_CASE("longest_square_path_exact agrees with the exhaustive oracle") {
    Rng r(2024);
    const double ps[] = {0.3, 0.5, 0.7};
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 6 + r.below(7);
        const double p = ps[r.below(3)];
        const Graph g = gnp(n, p, r.next());
        const auto res = longest_square_path_exact(g);
        REQUIRE(res.exhaustive);
        CHECK(res.path.size() == oracle::longest_square_path(g));
        CHECK(is_square_path(g, res.path.vertices()));
    }
}

TEST_CASE("node budget yields a lower bound") {
    const Graph g = gnp(80, 0.15, 3);
    const auto res = longest_square_path_exact(g, 50);
    CHECK(!res.exhaustive);
    CHECK(is_square_path(g, res.path.vertices()));
}

TEST_CASE("square hamilton cycles") {
    for (std::size_t n = 5; n <= 9; ++n) {
        const Graph k = complete_graph(n);
        const auto r = has_square_hamilton_cycle(k);
        REQUIRE(r.verdict == CycleVerdict::found);
        CHECK(r.cycle->size() == n);
        CHECK(is_square_cycle(k, r.cycle->vertices()));
    }
    CHECK(has_square_hamilton_cycle(tripartite_template(2)).verdict == CycleVerdict::none);
    const auto sq = has_square_hamilton_cycle(square_cycle_graph(8));
    CHECK(sq.verdict == CycleVerdict::found);
    CHECK(has_square_hamilton_cycle(cycle_graph(7)).verdict == CycleVerdict::none);
    CHECK(has_square_hamilton_cycle(complete_graph(4)).verdict == CycleVerdict::none);
}

TEST_CASE("longest square cycle") {
    const Graph g = gnp(11, 0.7, 8);
    const auto r = longest_square_cycle_exact(g);
    if (r.cycle) CHECK(is_square_cycle(g, r.cycle->vertices()));
    CHECK(r.verdict != CycleVerdict::unknown);
    const auto c6 = longest_square_cycle_exact(cycle_graph(6));
    CHECK(c6.verdict == CycleVerdict::none);
    CHECK(!c6.cycle);
}

TEST_CASE("greedy square path") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(greedy_square_path(complete_graph(12), seed).size() == 12);
    CHECK(greedy_square_path(cycle_graph(9), 1).size() <= 2);
    const Graph g = gnp(80, 0.3, 1);
    const auto p = greedy_square_path(g, 5, 2);
    CHECK(is_square_path(g, p.vertices()));
    CHECK(greedy_square_path(g, 5, 2).vertices() == p.vertices());
    CHECK(p.size() <= oracle::longest_square_path(g.induced(p.vertices())));
}

TEST_CASE("greedy path respects the blocker bound") {
    const auto b = independent_blocker(gnp(600, 0.1, 3), 0.5, 4);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto p = greedy_square_path(b.graph, seed, 1);
        REQUIRE(is_square_path(b.graph, p.vertices()));
        std::size_t inside = 0;
        for (Vertex v : p.vertices()) inside += std::binary_search(b.blocked.begin(), b.blocked.end(), v);
        CHECK(inside <= (p.size() + 2) / 3);
    }
}
