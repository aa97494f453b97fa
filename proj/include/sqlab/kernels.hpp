#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; both must return identical results (checked in tests/test_kernels.cpp
// and timed by bench/sqlab_bench.cpp).

#include <cstdint>
#include <span>
#include <vector>

#include "sqlab/bitset.hpp"
#include "sqlab/graph.hpp"

namespace sqlab {

enum class Exec { serial, parallel };

namespace kernels {

/// |N(u) ∩ N(v)| for every listed edge.
std::vector<std::uint32_t> edge_triangle_counts(const Graph& g, std::span<const Edge> edges, Exec exec);

/// Edges of `pair` (rows V_i, cols V_{i+1}) whose triangle count with the third
/// class, |to_third_from_first.row(a) ∩ to_third_from_second.row(b)|, is below
/// `threshold`. Returns them as a matrix shaped like `pair`.
BitMatrix low_triangle_edges(const BitMatrix& pair, const BitMatrix& to_third_from_first,
                             const BitMatrix& to_third_from_second, double threshold, Exec exec);

/// Per-edge triangle counts over a pair, row-major over set bits.
std::vector<std::uint32_t> pair_triangle_counts(const BitMatrix& pair, const BitMatrix& to_third_from_first,
                                                const BitMatrix& to_third_from_second, Exec exec);

/// One layer of forward square-walk reachability.
///   pred:       rows V_{L+1}, row v = {u in V_L : (u,v) reachable}
///   skip:       rows V_L,     cols V_{L+2}  (u -> w adjacency)
///   step:       rows V_{L+1}, cols V_{L+2}  (v -> w adjacency)
///   step_back:  rows V_{L+2}, cols V_{L+1}  (transpose of step)
///   skip_back:  rows V_{L+2}, cols V_L      (transpose of skip)
/// Returns next pred: rows V_{L+2}, row w = {v : (v,w) reachable}.
BitMatrix advance_push(const BitMatrix& pred, const BitMatrix& skip, const BitMatrix& step, Exec exec);
BitMatrix advance_pull(const BitMatrix& pred, const BitMatrix& step_back, const BitMatrix& skip_back, Exec exec);

}  // namespace kernels
}  // namespace sqlab
