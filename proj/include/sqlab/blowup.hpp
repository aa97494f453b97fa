#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlab/bitset.hpp"
#include "sqlab/graph.hpp"
#include "sqlab/kernels.hpp"
#include "sqlab/square_walk.hpp"

namespace sqlab {

/// Ordered disjoint classes V_0..V_{K-1} over a shared Graph, keeping only
/// the edges between classes at distance 1 or 2 (the blow-up of a square path).
///
/// Adjacency is stored per class pair in local coordinates: link(i, 1) has
/// rows V_i and columns V_{i+1}; link(i, 2) has rows V_i and columns V_{i+2}.
/// The masks are owned by the chain, so pruning never touches the Graph.
class ChainPartition {
public:
    struct Location {
        std::size_t cls = 0;
        std::uint32_t index = 0;
    };

    ChainPartition() = default;

    /// View of `g` on the given classes. Classes must be disjoint, non-empty,
    /// of equal size and in range. Throws std::invalid_argument otherwise.
    static ChainPartition view(std::shared_ptr<const Graph> g, std::vector<std::vector<Vertex>> classes,
                               double reference_p);

    std::size_t class_count() const { return classes_.size(); }
    std::size_t class_size() const { return classes_.empty() ? 0 : classes_.front().size(); }
    double reference_p() const { return reference_p_; }
    const Graph& graph() const { return *graph_; }
    const std::shared_ptr<const Graph>& graph_ptr() const { return graph_; }
    const std::vector<std::vector<Vertex>>& classes() const { return classes_; }
    const std::vector<Vertex>& members(std::size_t i) const { return classes_.at(i); }

    /// step is 1 or 2; i + step < class_count().
    const BitMatrix& link(std::size_t i, std::size_t step) const;
    /// Transpose of link(i, step): rows V_{i+step}, columns V_i.
    const BitMatrix& link_back(std::size_t i, std::size_t step) const;

    std::optional<Location> locate(Vertex v) const;
    Vertex global(std::size_t cls, std::uint32_t index) const { return classes_[cls][index]; }

    /// Surviving edge (in either orientation) between classes at distance 1 or 2.
    bool has_edge(Vertex u, Vertex v) const;
    /// Surviving edges of pair (V_i, V_{i+1}).
    std::size_t pair_edge_count(std::size_t i) const { return link(i, 1).count(); }
    /// All surviving edges, sorted.
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;
    /// The surviving edges as a graph on the same vertex set as graph().
    Graph masked_graph() const;

    /// Drops the set bits of `removed` (shaped like link(i, step)).
    void remove_links(std::size_t i, std::size_t step, const BitMatrix& removed);
    /// Keeps only the listed edges; edges outside the chain pairs are ignored.
    void retain_only(std::span<const Edge> keep);

    /// Same graph and masks with the class order reversed.
    ChainPartition reversed() const;

private:
    std::shared_ptr<const Graph> graph_;
    std::vector<std::vector<Vertex>> classes_;
    double reference_p_ = 0.0;
    std::vector<std::uint32_t> class_of_;  // kNoClass outside the chain
    std::vector<std::uint32_t> local_of_;
    std::vector<BitMatrix> fwd1_, fwd2_, back1_, back2_;

    void index_classes();
};

inline constexpr std::uint32_t kNoClass = ~std::uint32_t{0};

/// Synthetic chain: class i is vertices [i*n0, (i+1)*n0); every distance-1 and
/// distance-2 class pair gets independent Bernoulli(p0) edges. Throws unless
/// k >= 3, n0 >= 3, p0 in [0,1].
ChainPartition build_chain_random(std::size_t k, std::size_t n0, double p0, std::uint64_t seed);

/// Chain view over an existing graph (the graph is copied once and shared by the view).
ChainPartition chain_view(const Graph& g, std::vector<std::vector<Vertex>> classes, double reference_p);
ChainPartition chain_view(std::shared_ptr<const Graph> g, std::vector<std::vector<Vertex>> classes,
                          double reference_p);

/// delta_i = (eps_{i-1}/4)^4/2 and eps_i = min(delta_i/4, eps_cor_factor*delta_i).
/// Both sequences underflow double after a handful of steps, so they are kept
/// as base-10 logarithms; index 0 holds eps_0 (delta_0 is unused).
struct PruneSchedule {
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon0 = 0.0;
    double eps_cor_factor = 0.25;
    std::vector<double> log10_delta;
    std::vector<double> log10_epsilon;
    std::vector<double> m;  // ceil((1-eps_i) n0^2 p0)

    /// Indices 0..k-1.
    static PruneSchedule make(std::size_t k, double alpha, double epsilon0, std::size_t n0, double p0,
                              double eps_cor_factor = 0.25);

    std::size_t size() const { return log10_epsilon.size(); }
    double delta(std::size_t i) const;
    double epsilon(std::size_t i) const;
    /// 2 delta_i m_i.
    double removal_limit(std::size_t i) const;
    /// True when eps_cor was not given explicitly (always, currently: the
    /// correction term is a configured model, not a derived value).
    bool eps_cor_modelled() const { return true; }
};

struct PairRemoval {
    std::size_t pair = 0;  // classes (pair, pair+1)
    std::size_t schedule_index = 0;
    std::size_t initial_edges = 0;
    std::size_t removed = 0;
    double fraction = 0.0;
    double limit = 0.0;
    bool exceeds_limit = false;
};

struct PruneResult {
    ChainPartition chain;
    std::vector<PairRemoval> pairs;  // in processing order (last pair first)
    double threshold = 0.0;          // (1-eps) n0 p0^2
    std::size_t total_removed = 0;
    bool eps_cor_modelled = true;
};

/// Pair i = K-3 down to 0: drop every edge of (V_i, V_{i+1}) closing fewer than
/// (1-eps) n0 p0^2 triangles with V_{i+2} over surviving edges. Removal inside a
/// step is simultaneous. The last pair has no third class and is kept.
PruneResult prune_to_gtilde(const ChainPartition& chain, double epsilon, const PruneSchedule& schedule,
                            Exec exec = Exec::parallel);

/// Surviving edges of processed pairs whose triangle count is below threshold (direct recount).
std::size_t count_threshold_violations(const ChainPartition& chain, double threshold);

struct ClassExceptions {
    std::size_t cls = 0;  // middle class index
    std::size_t window_failures = 0;
    std::size_t regularity_failures = 0;
    std::size_t exceptions = 0;
    double budget = 0.0;  // eps * n0
    bool within_budget = true;
};

struct GtildeIIReport {
    std::vector<ClassExceptions> classes;
    bool within_budget = true;
};

/// For every middle vertex v of V_{i+1}: its neighbourhoods in V_i and V_{i+2}
/// must have size (1 +- eps) n0 p0 and span a pair with no sampled lower-regularity violation.
GtildeIIReport check_gtilde_ii(const ChainPartition& chain, double epsilon, double reference_p,
                               std::size_t sample_count, std::uint64_t seed);

struct ExpansionParams {
    double gamma = 0.0;
    double s = 0.0;        // log^2(n) n0 p / n^gamma
    double s_prime = 0.0;  // 2 eps n0 p0

    static ExpansionParams make(std::size_t n, std::size_t n0, double p, double p0, double epsilon, double gamma);
};

struct TriangleExpansion {
    std::vector<EdgeState> edges;    // in pair (i+1, i+2), sorted
    std::vector<Vertex> middle;      // incident vertices of V_{i+1}, sorted
    std::size_t s = 0;               // min over middle of degree into the input set
};

/// Edges (v,w) of (V_{i+1}, V_{i+2}) forming a triangle with some (u,v) of `input`.
/// `input` must be non-empty and contain surviving edges oriented V_i -> V_{i+1}.
TriangleExpansion triangle_expand(const ChainPartition& chain, std::size_t i, std::span<const EdgeState> input);

struct TriangleBounds {
    double dense = 0.0;    // |V~| n0 p0^2 / (2p), valid when s >= ExpansionParams::s
    double regular = 0.0;  // (1-eps)^2 (|V~| - 5 eps n0) n0 p0, valid when s >= s_prime
    bool dense_applies = false;
    bool regular_applies = false;
};

TriangleBounds triangle_bounds(const TriangleExpansion& t, const ExpansionParams& params, std::size_t n0, double p,
                               double p0, double epsilon);

/// Layered reachability from one first-pair edge to the last pair.
struct EdgeExpansion {
    EdgeState start;
    std::vector<BitMatrix> pred;   // pred[L]: rows V_{L+1}, row v = reachable (u, v) in pair L
    std::size_t reachable = 0;     // states in the last pair
    std::size_t target_edges = 0;  // surviving edges of the last pair
    double fraction = 0.0;
    std::size_t certified = 0;     // targets with a recovered vertex-distinct path (when requested)
};

struct ExpansionOptions {
    Exec exec = Exec::serial;
    bool certify_all = false;
};

/// `start` must be a surviving edge oriented V_0 -> V_1.
EdgeExpansion edge_expansion(const ChainPartition& chain, EdgeState start, const ExpansionOptions& options = {});

/// Reachable last-pair states, oriented V_{K-2} -> V_{K-1}.
std::vector<EdgeState> reachable_targets(const ChainPartition& chain, const EdgeExpansion& expansion);

/// One concrete square path from the start edge to `target`, or nullopt if
/// `target` is unreachable or the recovered walk repeats a vertex.
std::optional<std::vector<Vertex>> recover_square_path(const ChainPartition& chain, const EdgeExpansion& expansion,
                                                       EdgeState target);

/// Expansion fraction for every start edge; parallel over starts.
std::vector<double> expansion_fractions(const ChainPartition& chain, std::span<const EdgeState> starts, Exec exec);

/// Number of square paths V_0, ..., V_{K-1} starting with e1 (in pair 0) and
/// ending with e2 (in pair K-2). Throws std::overflow_error past 2^64.
std::uint64_t count_square_paths_between(const ChainPartition& chain, EdgeState e1, EdgeState e2);

/// Number of square paths through every class starting with e1.
std::uint64_t count_square_paths_from(const ChainPartition& chain, EdgeState e1);

/// Uniform sample of surviving edges of pair i, oriented V_i -> V_{i+1}.
std::vector<EdgeState> sample_pair_edges(const ChainPartition& chain, std::size_t i, std::size_t count,
                                         std::uint64_t seed);

/// Snapshot: `<prefix>.graph` in the graph text format and `<prefix>.chain.json`
/// with classes, reference_p and the sorted surviving edge list.
void write_chain_snapshot(const std::string& prefix, const ChainPartition& chain);
ChainPartition read_chain_snapshot(const std::string& prefix);

}  // namespace sqlab
