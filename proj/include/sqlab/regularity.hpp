#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlab/bitset.hpp"
#include "sqlab/graph.hpp"

namespace sqlab {

/// Exact non-negative rational, kept reduced.
struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static Fraction of(std::uint64_t num, std::uint64_t den);
    double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Bipartite graph in local coordinates: rows are left vertices, columns right vertices.
class BipartiteAdjacency {
public:
    BipartiteAdjacency() = default;
    explicit BipartiteAdjacency(BitMatrix rows) : rows_(std::move(rows)) {}
    static BipartiteAdjacency from_pair(const BipartitePairView& pair);

    std::size_t left_size() const { return rows_.rows(); }
    std::size_t right_size() const { return rows_.cols(); }
    std::size_t edge_count() const { return rows_.count(); }
    const BitMatrix& rows() const { return rows_; }
    bool adjacent(std::size_t l, std::size_t r) const { return rows_.test(l, r); }

    /// e(L', R') for local index lists.
    std::size_t edges_between(std::span<const std::uint32_t> left, std::span<const std::uint32_t> right) const;

private:
    BitMatrix rows_;
};

enum class RegularityMode { two_sided, lower };
enum class Verdict { violated, no_violation_found };

std::string to_string(Verdict v);

/// Smallest subset size allowed by the definition: ceil(eps * size), at least 1.
std::size_t subset_floor(double epsilon, std::size_t size);

struct LocalWitness {
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    std::size_t edges = 0;
    std::size_t sample_index = 0;
};

struct LocalRegularityReport {
    Fraction density;
    Verdict verdict = Verdict::no_violation_found;
    std::optional<LocalWitness> witness;
    std::size_t samples_evaluated = 0;
};

/// Randomised one-sided test. Even-numbered samples are uniform subset pairs;
/// odd-numbered ones are drawn uniformly from the (non-)neighbourhoods of a
/// random left vertex and of a random right vertex, which find block
/// structure that uniform pairs rarely hit. A violation is a proof; the
/// absence of one is only evidence.
LocalRegularityReport test_pair_local(const BipartiteAdjacency& adj, RegularityMode mode, double reference_p,
                                      double epsilon, std::size_t sample_count, std::uint64_t seed);

struct RegularityWitness {
    std::vector<Vertex> left;
    std::vector<Vertex> right;
    Fraction density;
    double deviation = 0.0;  // |d(witness) - d(pair)| two-sided; (1-eps)p - d(witness) lower
    std::size_t sample_index = 0;
};

struct RegularityReport {
    BipartitePairView pair;
    RegularityMode mode = RegularityMode::two_sided;
    Fraction density;
    double reference_p = 0.0;
    double epsilon = 0.0;
    Verdict verdict = Verdict::no_violation_found;
    std::optional<RegularityWitness> witness;
    std::size_t samples_evaluated = 0;
};

Fraction density(const Graph& g, std::span<const Vertex> a, std::span<const Vertex> b);

RegularityReport test_regular(const BipartitePairView& pair, double reference_p, double epsilon,
                              std::size_t sample_count = 200, std::uint64_t seed = 0);
RegularityReport test_lower_regular(const BipartitePairView& pair, double reference_p, double epsilon,
                                    std::size_t sample_count = 200, std::uint64_t seed = 0);

/// Recomputes the witness deviation straight from the graph's edge queries.
double replay_deviation(const RegularityReport& report);

/// True if the report's witness still proves a violation at `epsilon`
/// (subset floors recomputed at that epsilon).
bool witness_violates(const RegularityReport& report, double epsilon);

/// Left vertices whose degree into `right_subset` falls below (1-eps)|W'|p,
/// or (two-sided) exceeds (1+eps)|W'|p. Throws if |W'| < ceil(eps |right|).
std::size_t degree_exception_count(const BipartitePairView& pair, std::span<const Vertex> right_subset,
                                   double reference_p, double epsilon, bool two_sided = false);

/// Copy of the graph with e(pair) - target_m seeded pair edges removed.
Graph extract_exact_count_subgraph(const BipartitePairView& pair, std::size_t target_m, std::uint64_t seed);

struct EquitablePartition {
    std::vector<Vertex> exceptional;
    std::vector<std::vector<Vertex>> classes;

    std::size_t class_size() const { return classes.empty() ? 0 : classes.front().size(); }
    /// Throws std::invalid_argument unless the classes are disjoint, equal-sized and cover 0..n-1 with V0.
    void validate(std::size_t n) const;
};

struct PartitionOptions {
    double reference_p = 1.0;
    double epsilon = 0.3;   // |V0| <= eps n and the pair regularity tests
    double alpha = 0.1;     // density floor alpha * reference_p for a reduced edge
    double mu = 2.0 / 3.0;
    double nu = 0.1;
    std::size_t r_min = 3;
    std::size_t r_max = 30;
    std::size_t sample_count = 200;
    std::size_t refinement_rounds = 0;  // at most 5
};

struct PartitionResult {
    EquitablePartition partition;
    std::vector<std::vector<std::size_t>> reduced;  // reduced[i]: sorted j with a dense regular pair
    std::vector<std::vector<double>> densities;
    std::vector<std::size_t> reduced_degree;
    std::size_t violated_pairs = 0;
    std::size_t rounds_used = 0;
    bool min_degree_ok = true;
    std::vector<std::string> warnings;
};

/// Seeded random equitable partition, optionally refined along violation
/// witnesses, with every class pair scored by density and test_regular.
PartitionResult partition_heuristic(const Graph& g, const PartitionOptions& options, std::uint64_t seed);

}  // namespace sqlab
