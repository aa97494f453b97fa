// Serial vs OpenMP timings for the kernels in sqlab/kernels.hpp.
// Usage: sqlab_bench [scale]   (scale 1 = default sizes, 2 = double n0, ...)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <omp.h>

#include "sqlab/blowup.hpp"
#include "sqlab/kernels.hpp"
#include "sqlab/rng.hpp"

using namespace sqlab;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

template <class R>
void row(const char* name, int reps, const std::function<R(Exec)>& run) {
    R serial_out, parallel_out;
    const double s = best_ms(reps, [&] { serial_out = run(Exec::serial); });
    const double p = best_ms(reps, [&] { parallel_out = run(Exec::parallel); });
    std::printf("%-28s %10.2f %10.2f %8.2fx  %s\n", name, s, p, s / p, serial_out == parallel_out ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int scale = argc > 1 ? std::max(1, std::atoi(argv[1])) : 1;
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

    const Graph g = gnp(2500 * scale, 0.08, 1);
    const auto all = g.edges();
    Rng rng(2);
    const auto edges = rng.sample(all, std::min<std::size_t>(all.size(), 50000));
    row<std::vector<std::uint32_t>>("edge_triangle_counts", 3,
                                    [&](Exec e) { return kernels::edge_triangle_counts(g, edges, e); });

    const std::size_t n0 = 2000 * static_cast<std::size_t>(scale);
    const ChainPartition chain = build_chain_random(6, n0, 0.05, 3);
    row<BitMatrix>("low_triangle_edges", 3, [&](Exec e) {
        return kernels::low_triangle_edges(chain.link(0, 1), chain.link(0, 2), chain.link(1, 1), 0.9 * n0 * 0.0025, e);
    });
    row<std::vector<std::uint32_t>>("pair_triangle_counts", 3, [&](Exec e) {
        return kernels::pair_triangle_counts(chain.link(0, 1), chain.link(0, 2), chain.link(1, 1), e);
    });

    // a wide reachability layer: every first-pair edge reachable
    BitMatrix pred = chain.link_back(0, 1);
    row<BitMatrix>("advance_push", 3,
                   [&](Exec e) { return kernels::advance_push(pred, chain.link(0, 2), chain.link(1, 1), e); });
    row<BitMatrix>("advance_pull", 3,
                   [&](Exec e) { return kernels::advance_pull(pred, chain.link_back(1, 1), chain.link_back(0, 2), e); });

    const auto starts = sample_pair_edges(chain, 0, 64, 4);
    row<std::vector<double>>("expansion_fractions (64)", 1,
                             [&](Exec e) { return expansion_fractions(chain, starts, e); });
    return 0;
}
