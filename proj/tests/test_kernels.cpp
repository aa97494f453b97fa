#include <doctest.h>

#include <omp.h>

#include "oracles.hpp"
#include "sqlab/blowup.hpp"
#include "sqlab/kernels.hpp"
#include "sqlab/rng.hpp"

using namespace sqlab;

// Force several threads so the parallel paths split work even on one core.
struct ThreadGuard {
    int saved = omp_get_max_threads();
    ThreadGuard() { omp_set_num_threads(4); }
    ~ThreadGuard() { omp_set_num_threads(saved); }
};

TEST_CASE("edge triangle counts: serial, parallel and brute force agree") {
    ThreadGuard guard;
    const Graph g = gnp(150, 0.2, 3);
    const auto edges = g.edges();
    const auto s = kernels::edge_triangle_counts(g, edges, Exec::serial);
    const auto p = kernels::edge_triangle_counts(g, edges, Exec::parallel);
    CHECK(s == p);
    for (std::size_t i = 0; i < edges.size(); i += 37) CHECK(s[i] == oracle::triangles(g, edges[i].u, edges[i].v));
}

TEST_CASE("pair kernels agree") {
    ThreadGuard guard;
    const auto ch = build_chain_random(3, 90, 0.3, 5);
    const auto& pair = ch.link(0, 1);
    const auto& first = ch.link(0, 2);
    const auto& second = ch.link(1, 1);
    const auto cs = kernels::pair_triangle_counts(pair, first, second, Exec::serial);
    CHECK(cs == kernels::pair_triangle_counts(pair, first, second, Exec::parallel));
    CHECK(cs.size() == pair.count());

    const double thr = 0.9 * 90 * 0.09;
    const auto low_s = kernels::low_triangle_edges(pair, first, second, thr, Exec::serial);
    CHECK(low_s == kernels::low_triangle_edges(pair, first, second, thr, Exec::parallel));
    std::size_t k = 0, low = 0;
    for (std::size_t a = 0; a < pair.rows(); ++a)
        for (std::size_t b = 0; b < pair.cols(); ++b) {
            if (!pair.test(a, b)) continue;
            std::size_t brute = 0;
            for (std::size_t c = 0; c < first.cols(); ++c) brute += first.test(a, c) && second.test(b, c);
            CHECK(cs[k++] == brute);
            CHECK(low_s.test(a, b) == (static_cast<double>(brute) < thr));
            low += brute < thr;
        }
    CHECK(low_s.count() == low);
}

TEST_CASE("push and pull advance to the same layer") {
    ThreadGuard guard;
    const auto ch = build_chain_random(4, 70, 0.25, 8);
    BitMatrix pred(70, 70);
    Rng r(4);
    for (int i = 0; i < 300; ++i) {
        const auto a = r.below(70), b = r.below(70);
        if (ch.link(0, 1).test(a, b)) pred.set(b, a);
    }
    const auto push_s = kernels::advance_push(pred, ch.link(0, 2), ch.link(1, 1), Exec::serial);
    const auto push_p = kernels::advance_push(pred, ch.link(0, 2), ch.link(1, 1), Exec::parallel);
    const auto pull_s = kernels::advance_pull(pred, ch.link_back(1, 1), ch.link_back(0, 2), Exec::serial);
    const auto pull_p = kernels::advance_pull(pred, ch.link_back(1, 1), ch.link_back(0, 2), Exec::parallel);
    CHECK(push_s == push_p);
    CHECK(push_s == pull_s);
    CHECK(pull_s == pull_p);
    // definition: (v, w) reachable iff some reachable (u, v) has u ~ w and v ~ w
    for (std::size_t w = 0; w < 70; ++w)
        for (std::size_t v = 0; v < 70; ++v) {
            bool any = false;
            for (std::size_t u = 0; u < 70 && !any; ++u)
                any = pred.test(v, u) && ch.link(0, 2).test(u, w) && ch.link(1, 1).test(v, w);
            CHECK(push_s.test(w, v) == any);
        }
}
