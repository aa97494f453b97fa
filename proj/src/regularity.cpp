#include "sqlab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sqlab/rng.hpp"

namespace sqlab {

Fraction Fraction::of(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw std::invalid_argument("fraction with zero denominator");
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? Fraction{0, 1} : Fraction{num / g, den / g};
}

std::string to_string(Verdict v) { return v == Verdict::violated ? "violated" : "no-violation-found"; }

std::size_t subset_floor(double epsilon, std::size_t size) {
    const auto k = static_cast<std::size_t>(std::ceil(epsilon * static_cast<double>(size) - 1e-9));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(size, 1));
}

BipartiteAdjacency BipartiteAdjacency::from_pair(const BipartitePairView& pair) {
    BitMatrix m(pair.left.size(), pair.right.size());
    for (std::size_t j = 0; j < pair.right.size(); ++j) {
        const VertexSet& nb = pair.graph->neighbors(pair.right[j]);
        for (std::size_t i = 0; i < pair.left.size(); ++i)
            if (nb.contains(pair.left[i])) m.set(i, j);
    }
    return BipartiteAdjacency(std::move(m));
}

std::size_t BipartiteAdjacency::edges_between(std::span<const std::uint32_t> left,
                                               std::span<const std::uint32_t> right) const {
    std::vector<Word> mask(rows_.stride(), 0);
    for (std::uint32_t r : right) bits::set(mask, r);
    std::size_t total = 0;
    for (std::uint32_t l : left) total += bits::popcount_and(rows_.row(l), mask);
    return total;
}

namespace {

using Index = std::uint32_t;

struct SubsetPair {
    std::vector<Index> left;
    std::vector<Index> right;
};

std::vector<Index> iota_indices(std::size_t n) {
    std::vector<Index> v(n);
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

std::vector<Index> row_members(std::span<const Word> row, std::size_t size, bool complement, Index skip) {
    std::vector<Index> out;
    for (std::size_t i = 0; i < size; ++i)
        if (bits::test(row, i) != complement && i != skip) out.push_back(static_cast<Index>(i));
    return out;
}

class SubsetSampler {
public:
    SubsetSampler(const BipartiteAdjacency& adj, std::size_t a, std::size_t b, std::uint64_t seed)
        : adj_(adj), cols_(adj.rows().transposed()), a_(a), b_(b), rng_(seed),
          all_left_(iota_indices(adj.left_size())), all_right_(iota_indices(adj.right_size())) {}

    SubsetPair draw(std::size_t index) {
        if (index % 2 == 1) {
            if (auto seeded = neighbourhood_pair(index % 4 == 3)) return std::move(*seeded);
        }
        return uniform_pair();
    }

private:
    SubsetPair uniform_pair() { return {rng_.sample(all_left_, a_), rng_.sample(all_right_, b_)}; }

    // W' from the (non-)neighbourhood of a random left vertex u, U' from the
    // (non-)neighbourhood of a right vertex w outside W'. Neither u nor w is in
    // the returned pair.
    std::optional<SubsetPair> neighbourhood_pair(bool complement) {
        const auto u = static_cast<Index>(rng_.below(adj_.left_size()));
        std::vector<Index> around_u = row_members(adj_.rows().row(u), adj_.right_size(), complement, Index(-1));
        if (around_u.size() < b_ + 1) return std::nullopt;
        const Index w = around_u[static_cast<std::size_t>(rng_.below(around_u.size()))];
        around_u.erase(std::find(around_u.begin(), around_u.end(), w));
        std::vector<Index> around_w = row_members(cols_.row(w), adj_.left_size(), complement, u);
        if (around_w.size() < a_) return std::nullopt;
        SubsetPair p;
        p.right = rng_.sample(around_u, b_);
        p.left = rng_.sample(around_w, a_);
        return p;
    }

    const BipartiteAdjacency& adj_;
    BitMatrix cols_;
    std::size_t a_, b_;
    Rng rng_;
    std::vector<Index> all_left_, all_right_;
};

bool violates(RegularityMode mode, double sub_density, double density, double reference_p, double epsilon) {
    if (mode == RegularityMode::two_sided) return std::abs(sub_density - density) > epsilon * reference_p;
    return sub_density < (1.0 - epsilon) * reference_p;
}

double deviation_of(RegularityMode mode, double sub_density, double density, double reference_p, double epsilon) {
    if (mode == RegularityMode::two_sided) return std::abs(sub_density - density);
    return (1.0 - epsilon) * reference_p - sub_density;
}

}  // namespace

LocalRegularityReport test_pair_local(const BipartiteAdjacency& adj, RegularityMode mode, double reference_p,
                                      double epsilon, std::size_t sample_count, std::uint64_t seed) {
    if (adj.left_size() == 0 || adj.right_size() == 0) throw std::invalid_argument("regularity test on an empty side");
    if (sample_count == 0) throw std::invalid_argument("sample_count must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");

    LocalRegularityReport rep;
    const std::size_t cells = adj.left_size() * adj.right_size();
    rep.density = Fraction::of(adj.edge_count(), cells);
    const double d = rep.density.value();
    const std::size_t a = subset_floor(epsilon, adj.left_size());
    const std::size_t b = subset_floor(epsilon, adj.right_size());
    const double area = static_cast<double>(a * b);

    SubsetSampler sampler(adj, a, b, seed);
    constexpr std::size_t kBlock = 32;
    for (std::size_t start = 0; start < sample_count; start += kBlock) {
        const std::size_t stop = std::min(sample_count, start + kBlock);
        std::vector<SubsetPair> block;
        block.reserve(stop - start);
        for (std::size_t s = start; s < stop; ++s) block.push_back(sampler.draw(s));
        std::vector<std::size_t> edges(block.size());
        const auto count = static_cast<std::ptrdiff_t>(block.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < count; ++i) edges[i] = adj.edges_between(block[i].left, block[i].right);
        for (std::size_t i = 0; i < block.size(); ++i) {
            rep.samples_evaluated = start + i + 1;
            if (violates(mode, static_cast<double>(edges[i]) / area, d, reference_p, epsilon)) {
                rep.verdict = Verdict::violated;
                rep.witness = LocalWitness{std::move(block[i].left), std::move(block[i].right), edges[i], start + i};
                return rep;
            }
        }
    }
    return rep;
}

Fraction density(const Graph& g, std::span<const Vertex> a, std::span<const Vertex> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("density of an empty set");
    const auto pair = BipartitePairView::of(g, {a.begin(), a.end()}, {b.begin(), b.end()});
    return Fraction::of(pair.edge_count(), a.size() * b.size());
}

namespace {

RegularityReport run_test(const BipartitePairView& pair, RegularityMode mode, double reference_p, double epsilon,
                          std::size_t sample_count, std::uint64_t seed) {
    const auto adj = BipartiteAdjacency::from_pair(pair);
    const auto local = test_pair_local(adj, mode, reference_p, epsilon, sample_count, seed);
    RegularityReport rep;
    rep.pair = pair;
    rep.mode = mode;
    rep.density = local.density;
    rep.reference_p = reference_p;
    rep.epsilon = epsilon;
    rep.verdict = local.verdict;
    rep.samples_evaluated = local.samples_evaluated;
    if (local.witness) {
        RegularityWitness w;
        for (auto i : local.witness->left) w.left.push_back(pair.left[i]);
        for (auto j : local.witness->right) w.right.push_back(pair.right[j]);
        w.density = Fraction::of(local.witness->edges, w.left.size() * w.right.size());
        w.deviation = deviation_of(mode, w.density.value(), rep.density.value(), reference_p, epsilon);
        w.sample_index = local.witness->sample_index;
        rep.witness = std::move(w);
    }
    return rep;
}

}  // namespace

RegularityReport test_regular(const BipartitePairView& pair, double reference_p, double epsilon,
                              std::size_t sample_count, std::uint64_t seed) {
    return run_test(pair, RegularityMode::two_sided, reference_p, epsilon, sample_count, seed);
}

RegularityReport test_lower_regular(const BipartitePairView& pair, double reference_p, double epsilon,
                                    std::size_t sample_count, std::uint64_t seed) {
    return run_test(pair, RegularityMode::lower, reference_p, epsilon, sample_count, seed);
}

namespace {

double replayed_density(const Graph& g, const std::vector<Vertex>& left, const std::vector<Vertex>& right) {
    std::size_t e = 0;
    for (Vertex u : left)
        for (Vertex w : right)
            if (g.has_edge(u, w)) ++e;
    return static_cast<double>(e) / static_cast<double>(left.size() * right.size());
}

}  // namespace

double replay_deviation(const RegularityReport& report) {
    if (!report.witness) throw std::invalid_argument("report carries no witness");
    const Graph& g = *report.pair.graph;
    const double whole = replayed_density(g, report.pair.left, report.pair.right);
    const double sub = replayed_density(g, report.witness->left, report.witness->right);
    return deviation_of(report.mode, sub, whole, report.reference_p, report.epsilon);
}

bool witness_violates(const RegularityReport& report, double epsilon) {
    if (!report.witness) return false;
    const auto& w = *report.witness;
    if (w.left.size() < subset_floor(epsilon, report.pair.left.size())) return false;
    if (w.right.size() < subset_floor(epsilon, report.pair.right.size())) return false;
    const Graph& g = *report.pair.graph;
    return violates(report.mode, replayed_density(g, w.left, w.right), replayed_density(g, report.pair.left, report.pair.right),
                    report.reference_p, epsilon);
}

std::size_t degree_exception_count(const BipartitePairView& pair, std::span<const Vertex> right_subset,
                                   double reference_p, double epsilon, bool two_sided) {
    const Graph& g = *pair.graph;
    const VertexSet right = VertexSet::from(g.n(), pair.right);
    const VertexSet sub = VertexSet::from(g.n(), right_subset);
    if (!sub.is_subset_of(right)) throw std::invalid_argument("W' must be a subset of the right side");
    if (sub.count() < subset_floor(epsilon, pair.right.size()))
        throw std::invalid_argument("W' is smaller than eps |W|");
    const double expected = static_cast<double>(sub.count()) * reference_p;
    std::size_t exceptions = 0;
    for (Vertex u : pair.left) {
        const auto deg = static_cast<double>(g.neighbors(u).intersection_count(sub));
        if (deg < (1.0 - epsilon) * expected || (two_sided && deg > (1.0 + epsilon) * expected)) ++exceptions;
    }
    return exceptions;
}

Graph extract_exact_count_subgraph(const BipartitePairView& pair, std::size_t target_m, std::uint64_t seed) {
    const Graph& g = *pair.graph;
    const VertexSet right = VertexSet::from(g.n(), pair.right);
    std::vector<Edge> pair_edges;
    for (Vertex u : pair.left) (g.neighbors(u) & right).for_each([&](Vertex w) { pair_edges.push_back(Edge::of(u, w)); });
    std::sort(pair_edges.begin(), pair_edges.end());
    if (target_m > pair_edges.size()) throw std::invalid_argument("target edge count exceeds the pair's edges");
    Rng rng(seed);
    rng.shuffle(pair_edges);
    pair_edges.resize(pair_edges.size() - target_m);
    return g.without_edges(pair_edges);
}

void EquitablePartition::validate(std::size_t n) const {
    VertexSet seen(n);
    auto take = [&](Vertex v) {
        if (v >= n) throw std::invalid_argument("partition member out of range");
        if (seen.contains(v)) throw std::invalid_argument("partition classes overlap");
        seen.insert(v);
    };
    for (Vertex v : exceptional) take(v);
    for (const auto& c : classes) {
        if (c.size() != class_size()) throw std::invalid_argument("partition classes differ in size");
        for (Vertex v : c) take(v);
    }
    if (seen.count() != n) throw std::invalid_argument("partition does not cover the vertex set");
}

PartitionResult partition_heuristic(const Graph& g, const PartitionOptions& opt, std::uint64_t seed) {
    if (opt.r_min > opt.r_max) throw std::invalid_argument("r_min exceeds r_max");
    if (opt.r_min == 0) throw std::invalid_argument("r_min must be positive");
    if (opt.refinement_rounds > 5) throw std::invalid_argument("at most 5 refinement rounds");
    const std::size_t n = g.n();
    PartitionResult res;

    const double needed = (opt.mu + opt.nu) * static_cast<double>(n) * opt.reference_p;
    if (static_cast<double>(g.min_degree()) < needed) {
        res.min_degree_ok = false;
        std::ostringstream os;
        os << "min degree " << g.min_degree() << " below (mu+nu) n p = " << needed;
        res.warnings.push_back(os.str());
    }

    std::size_t r = 0;
    for (std::size_t cand = opt.r_min; cand <= opt.r_max; ++cand) {
        if (n / cand == 0) break;
        if (static_cast<double>(n % cand) <= opt.epsilon * static_cast<double>(n)) {
            r = cand;
            break;
        }
    }
    if (r == 0) throw std::invalid_argument("no class count in [r_min, r_max] gives an equitable partition");
    const std::size_t size = n / r;

    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), Vertex{0});
    Rng rng(seed);
    rng.shuffle(order);
    const std::vector<Vertex> exceptional(order.begin() + static_cast<std::ptrdiff_t>(r * size), order.end());
    order.resize(r * size);

    const std::size_t pair_count = r * (r - 1) / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(pair_count);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i + 1; j < r; ++j) pairs.push_back({i, j});

    std::vector<RegularityReport> reports(pair_count);
    std::vector<std::vector<Vertex>> classes;
    for (std::size_t round = 0;; ++round) {
        classes.assign(r, {});
        for (std::size_t i = 0; i < r; ++i) {
            classes[i].assign(order.begin() + static_cast<std::ptrdiff_t>(i * size),
                              order.begin() + static_cast<std::ptrdiff_t>((i + 1) * size));
            std::sort(classes[i].begin(), classes[i].end());
        }
        const auto count = static_cast<std::ptrdiff_t>(pair_count);
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < count; ++k) {
            const auto [i, j] = pairs[static_cast<std::size_t>(k)];
            const auto view = BipartitePairView::of(g, classes[i], classes[j]);
            reports[static_cast<std::size_t>(k)] =
                test_regular(view, opt.reference_p, opt.epsilon, opt.sample_count, derive_seed(seed, k, round));
        }
        res.rounds_used = round;
        const bool any_violation = std::any_of(reports.begin(), reports.end(),
                                               [](const auto& rep) { return rep.verdict == Verdict::violated; });
        if (!any_violation || round >= opt.refinement_rounds) break;

        // Split along the witnesses: every vertex gets one bit per witness side,
        // set when its density into that side exceeds the pair density. Vertices
        // with equal bit strings are kept together when the order is re-cut.
        std::vector<std::vector<bool>> signature(n);
        for (const auto& rep : reports) {
            if (!rep.witness) continue;
            const double d = rep.density.value();
            for (const auto* side : {&rep.witness->left, &rep.witness->right}) {
                const VertexSet s = VertexSet::from(n, *side);
                const double cut = d * static_cast<double>(side->size());
                for (Vertex v : order)
                    signature[v].push_back(static_cast<double>(g.neighbors(v).intersection_count(s)) > cut);
            }
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](Vertex a, Vertex b) { return signature[a] < signature[b]; });
    }

    res.partition.exceptional = exceptional;
    std::sort(res.partition.exceptional.begin(), res.partition.exceptional.end());
    res.partition.classes = classes;
    res.reduced.assign(r, {});
    res.densities.assign(r, std::vector<double>(r, 0.0));
    for (std::size_t k = 0; k < pair_count; ++k) {
        const auto [i, j] = pairs[k];
        const double d = reports[k].density.value();
        res.densities[i][j] = res.densities[j][i] = d;
        if (reports[k].verdict == Verdict::violated) ++res.violated_pairs;
        if (d >= opt.alpha * opt.reference_p && d > 0.0 && reports[k].verdict == Verdict::no_violation_found) {
            res.reduced[i].push_back(j);
            res.reduced[j].push_back(i);
        }
    }
    res.reduced_degree.resize(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::sort(res.reduced[i].begin(), res.reduced[i].end());
        res.reduced_degree[i] = res.reduced[i].size();
    }
    return res;
}

}  // namespace sqlab
