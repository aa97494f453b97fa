#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlab/blowup.hpp"
#include "sqlab/graph.hpp"
#include "sqlab/regularity.hpp"
#include "sqlab/square_walk.hpp"

namespace sqlab {

enum class PipelineMode { asymptotic_regime, dense_surrogate };
std::string to_string(PipelineMode m);
PipelineMode pipeline_mode_from(const std::string& s);

struct PipelineParams {
    double gamma = 1.0;
    double nu = 0.1;
    double alpha = 0.1;
    double epsilon = 0.05;
    double epsilon_prime = 0.01;
    double mu = 2.0 / 3.0;
    std::size_t r_min = 0;  // 0: use 3 k0
    std::size_t r_max = 30;
    double good_threshold = 0.51;
    double reserve_fraction = -1.0;     // negative: use epsilon
    double regularity_epsilon = 0.3;    // epsilon handed to the sampled regularity tests
    std::size_t regularity_samples = 200;
    std::size_t good_samples = 200;
    std::uint64_t reduced_node_budget = 2'000'000;
    std::uint64_t closing_node_budget = 200'000;
    std::size_t closing_retries = 4;
    PipelineMode mode = PipelineMode::dense_surrogate;

    std::size_t k0() const;
    std::size_t effective_r_min() const { return r_min == 0 ? 3 * k0() : r_min; }
    double effective_reserve_fraction() const { return reserve_fraction < 0.0 ? epsilon : reserve_fraction; }
    /// Throws std::invalid_argument unless 0 < eps' < eps < nu, r_min >= 3 k0 and r_min <= r_max.
    void validate() const;
};

struct ReducedGraph {
    Graph graph;
    std::size_t min_degree = 0;
    double mu_target = 0.0;  // mu * r
    bool min_degree_ok = false;
};

ReducedGraph reduced_graph(const EquitablePartition& partition, const std::vector<std::vector<std::size_t>>& reduced,
                           double mu);

struct ReducedCycle {
    std::optional<SquareCycle> cycle;
    bool spanning = false;
    bool budget_exhausted = false;  // best found, not proven optimal
    std::uint64_t nodes = 0;
};

/// Spanning square cycle by exact search; otherwise the longest one found.
ReducedCycle square_cycle_in_reduced(const Graph& r_graph, std::uint64_t node_budget);

struct GoodEdgeReport {
    std::vector<EdgeState> good;
    std::vector<EdgeState> sampled;
    std::vector<double> fractions;  // aligned with sampled
    double good_fraction = 0.0;     // among sampled
};

/// Expansion fraction of up to `max_samples` first-pair edges (all of them when
/// the pair is small, else a seeded sample; `candidates` restricts the pool).
GoodEdgeReport classify_good_edges(const ChainPartition& window, double threshold, std::size_t max_samples,
                                   std::uint64_t seed, std::span<const EdgeState> candidates = {});

struct WindowRecord {
    std::size_t index = 0;
    std::vector<std::size_t> classes;  // partition class ids
    std::size_t pool = 0;              // common class size of the window view
    double good_fraction = 0.0;
    std::size_t sampled = 0;
    EdgeState chosen;
    double chosen_fraction = 0.0;
    bool chosen_good = false;
    std::size_t path_length = 0;
};

enum class ClosingStatus { closed, failed, not_attempted };
std::string to_string(ClosingStatus s);

struct EmbeddingTrace {
    PipelineMode mode = PipelineMode::dense_surrogate;
    std::vector<std::size_t> class_order;  // partition class ids along the reduced cycle
    std::size_t class_size = 0;
    std::size_t reserve_size = 0;
    EdgeState start;
    double start_backward_fraction = 0.0;
    std::vector<WindowRecord> windows;
    std::size_t window_phase_length = 0;
    ClosingStatus closing = ClosingStatus::not_attempted;
    std::size_t closing_truncations = 0;
    std::uint64_t closing_nodes = 0;
    std::optional<SquareCycle> cycle;
    SquarePath path;  // longest path when closing fails
    std::vector<std::string> notes;

    std::size_t length() const { return cycle ? cycle->size() : path.size(); }
};

/// Window-by-window square path along the reduced cycle's class order, closed
/// through the reserved sets. Throws std::invalid_argument on infeasible input
/// (cycle shorter than 3 k0, classes smaller than 3).
EmbeddingTrace embed_square_cycle(const Graph& g, const EquitablePartition& partition,
                                  const SquareCycle& reduced_cycle, const PipelineParams& params,
                                  std::uint64_t seed);

struct PipelineResult {
    PartitionResult partition;
    ReducedGraph reduced;
    ReducedCycle reduced_cycle;
    std::optional<EmbeddingTrace> trace;
    std::string failure;  // empty on a completed embedding run
};

/// partition_heuristic -> reduced_graph -> square_cycle_in_reduced -> embed_square_cycle.
PipelineResult run_pipeline(const Graph& g, double reference_p, const PipelineParams& params, std::uint64_t seed);

}  // namespace sqlab
