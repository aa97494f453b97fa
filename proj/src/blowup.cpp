#include "sqlab/blowup.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "sqlab/regularity.hpp"
#include "sqlab/rng.hpp"

namespace sqlab {

// ---------------------------------------------------------------- chain

const BitMatrix& ChainPartition::link(std::size_t i, std::size_t step) const {
    if (step == 1 && i < fwd1_.size()) return fwd1_[i];
    if (step == 2 && i < fwd2_.size()) return fwd2_[i];
    throw std::out_of_range("chain link out of range");
}

const BitMatrix& ChainPartition::link_back(std::size_t i, std::size_t step) const {
    if (step == 1 && i < back1_.size()) return back1_[i];
    if (step == 2 && i < back2_.size()) return back2_[i];
    throw std::out_of_range("chain link out of range");
}

void ChainPartition::index_classes() {
    class_of_.assign(graph_->n(), kNoClass);
    local_of_.assign(graph_->n(), 0);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        for (std::size_t j = 0; j < classes_[c].size(); ++j) {
            const Vertex v = classes_[c][j];
            if (v >= graph_->n()) throw std::invalid_argument("chain class vertex out of range");
            if (class_of_[v] != kNoClass) throw std::invalid_argument("chain classes overlap");
            class_of_[v] = static_cast<std::uint32_t>(c);
            local_of_[v] = static_cast<std::uint32_t>(j);
        }
    }
}

ChainPartition ChainPartition::view(std::shared_ptr<const Graph> g, std::vector<std::vector<Vertex>> classes,
                                    double reference_p) {
    if (!g) throw std::invalid_argument("chain view without a graph");
    if (classes.empty()) throw std::invalid_argument("chain needs at least one class");
    const std::size_t n0 = classes.front().size();
    if (n0 == 0) throw std::invalid_argument("chain classes must be non-empty");
    for (const auto& c : classes)
        if (c.size() != n0) throw std::invalid_argument("chain classes must have equal size");

    ChainPartition ch;
    ch.graph_ = std::move(g);
    ch.classes_ = std::move(classes);
    ch.reference_p_ = reference_p;
    ch.index_classes();

    const std::size_t k = ch.classes_.size();
    auto fill = [&](std::size_t i, std::size_t j) {
        BitMatrix m(n0, n0);
        for (std::size_t a = 0; a < n0; ++a) {
            const VertexSet& nb = ch.graph_->neighbors(ch.classes_[i][a]);
            for (std::size_t b = 0; b < n0; ++b)
                if (nb.contains(ch.classes_[j][b])) m.set(a, b);
        }
        return m;
    };
    for (std::size_t i = 0; i + 1 < k; ++i) {
        ch.fwd1_.push_back(fill(i, i + 1));
        ch.back1_.push_back(ch.fwd1_.back().transposed());
    }
    for (std::size_t i = 0; i + 2 < k; ++i) {
        ch.fwd2_.push_back(fill(i, i + 2));
        ch.back2_.push_back(ch.fwd2_.back().transposed());
    }
    return ch;
}

std::optional<ChainPartition::Location> ChainPartition::locate(Vertex v) const {
    if (v >= class_of_.size() || class_of_[v] == kNoClass) return std::nullopt;
    return Location{class_of_[v], local_of_[v]};
}

bool ChainPartition::has_edge(Vertex u, Vertex v) const {
    auto a = locate(u);
    auto b = locate(v);
    if (!a || !b) return false;
    if (a->cls > b->cls) std::swap(a, b);
    const std::size_t step = b->cls - a->cls;
    if (step == 0 || step > 2) return false;
    return link(a->cls, step).test(a->index, b->index);
}

std::vector<Edge> ChainPartition::edges() const {
    std::vector<Edge> out;
    auto collect = [&](const std::vector<BitMatrix>& links, std::size_t step) {
        for (std::size_t i = 0; i < links.size(); ++i)
            for (std::size_t a = 0; a < links[i].rows(); ++a)
                bits::for_each_set(links[i].row(a),
                                   [&](Vertex b) { out.push_back(Edge::of(classes_[i][a], classes_[i + step][b])); });
    };
    collect(fwd1_, 1);
    collect(fwd2_, 2);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t ChainPartition::edge_count() const {
    std::size_t total = 0;
    for (const auto& m : fwd1_) total += m.count();
    for (const auto& m : fwd2_) total += m.count();
    return total;
}

Graph ChainPartition::masked_graph() const {
    const auto e = edges();
    return Graph::from_edges(graph_->n(), e);
}

void ChainPartition::remove_links(std::size_t i, std::size_t step, const BitMatrix& removed) {
    if (step != 1 && step != 2) throw std::invalid_argument("chain step must be 1 or 2");
    BitMatrix& fwd = step == 1 ? fwd1_.at(i) : fwd2_.at(i);
    BitMatrix& back = step == 1 ? back1_.at(i) : back2_.at(i);
    if (removed.rows() != fwd.rows() || removed.cols() != fwd.cols())
        throw std::invalid_argument("removal mask shape mismatch");
    for (std::size_t a = 0; a < removed.rows(); ++a) {
        auto row = fwd.row(a);
        const auto del = removed.row(a);
        for (std::size_t w = 0; w < row.size(); ++w) row[w] &= ~del[w];
        bits::for_each_set(del, [&](Vertex b) { back.reset(b, a); });
    }
}

void ChainPartition::retain_only(std::span<const Edge> keep) {
    std::vector<BitMatrix> k1, k2;
    for (const auto& m : fwd1_) k1.emplace_back(m.rows(), m.cols());
    for (const auto& m : fwd2_) k2.emplace_back(m.rows(), m.cols());
    for (const Edge& e : keep) {
        auto a = locate(e.u);
        auto b = locate(e.v);
        if (!a || !b) continue;
        if (a->cls > b->cls) std::swap(a, b);
        const std::size_t step = b->cls - a->cls;
        if (step == 1) k1[a->cls].set(a->index, b->index);
        if (step == 2) k2[a->cls].set(a->index, b->index);
    }
    auto apply = [&](std::vector<BitMatrix>& fwd, std::vector<BitMatrix>& back, const std::vector<BitMatrix>& k) {
        for (std::size_t i = 0; i < fwd.size(); ++i) {
            for (std::size_t a = 0; a < fwd[i].rows(); ++a) {
                auto row = fwd[i].row(a);
                const auto mask = k[i].row(a);
                for (std::size_t w = 0; w < row.size(); ++w) row[w] &= mask[w];
            }
            back[i] = fwd[i].transposed();
        }
    };
    apply(fwd1_, back1_, k1);
    apply(fwd2_, back2_, k2);
}

ChainPartition ChainPartition::reversed() const {
    ChainPartition r;
    r.graph_ = graph_;
    r.classes_.assign(classes_.rbegin(), classes_.rend());
    r.reference_p_ = reference_p_;
    r.index_classes();
    r.fwd1_.assign(back1_.rbegin(), back1_.rend());
    r.back1_.assign(fwd1_.rbegin(), fwd1_.rend());
    r.fwd2_.assign(back2_.rbegin(), back2_.rend());
    r.back2_.assign(fwd2_.rbegin(), fwd2_.rend());
    return r;
}

namespace {

// Bernoulli(p) over n cells via geometric gaps; visits kept cells in order.
template <class F>
void bernoulli_cells(Rng& rng, std::size_t n, double p, F&& keep) {
    if (p <= 0.0) return;
    if (p >= 1.0) {
        for (std::size_t i = 0; i < n; ++i) keep(i);
        return;
    }
    const double log_q = std::log1p(-p);
    std::size_t i = 0;
    while (true) {
        const double u = 1.0 - rng.uniform01();  // (0, 1]
        const double gap = std::floor(std::log(u) / log_q);
        if (gap >= static_cast<double>(n - i)) return;
        i += static_cast<std::size_t>(gap);
        keep(i);
        if (++i >= n) return;
    }
}

}  // namespace

ChainPartition build_chain_random(std::size_t k, std::size_t n0, double p0, std::uint64_t seed) {
    if (k < 3) throw std::invalid_argument("chain needs at least 3 classes");
    if (n0 < 3) throw std::invalid_argument("chain classes need at least 3 vertices");
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0,1]");
    GraphBuilder b(k * n0);
    Rng rng(seed);
    // pair order: (0,1), (0,2), (1,2), (1,3), ...
    for (std::size_t i = 0; i + 1 < k; ++i) {
        for (std::size_t step = 1; step <= 2 && i + step < k; ++step) {
            const std::size_t j = i + step;
            bernoulli_cells(rng, n0 * n0, p0, [&](std::size_t cell) {
                b.add_edge(static_cast<Vertex>(i * n0 + cell / n0), static_cast<Vertex>(j * n0 + cell % n0));
            });
        }
    }
    std::vector<std::vector<Vertex>> classes(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < n0; ++a) classes[i].push_back(static_cast<Vertex>(i * n0 + a));
    return ChainPartition::view(std::make_shared<const Graph>(std::move(b).build()), std::move(classes), p0);
}

ChainPartition chain_view(const Graph& g, std::vector<std::vector<Vertex>> classes, double reference_p) {
    return ChainPartition::view(std::make_shared<const Graph>(g), std::move(classes), reference_p);
}

ChainPartition chain_view(std::shared_ptr<const Graph> g, std::vector<std::vector<Vertex>> classes,
                          double reference_p) {
    return ChainPartition::view(std::move(g), std::move(classes), reference_p);
}

// ---------------------------------------------------------------- pruning

PruneSchedule PruneSchedule::make(std::size_t k, double alpha, double epsilon0, std::size_t n0, double p0,
                                  double eps_cor_factor) {
    if (k == 0) throw std::invalid_argument("schedule needs at least one index");
    if (!(alpha > 0.0) || !(epsilon0 > 0.0) || !(eps_cor_factor > 0.0))
        throw std::invalid_argument("schedule parameters must be positive");
    PruneSchedule s;
    s.alpha = alpha;
    s.beta = std::pow(alpha / (4.0 * std::numbers::e), 3.0);
    s.epsilon0 = epsilon0;
    s.eps_cor_factor = eps_cor_factor;
    const double log4 = std::log10(4.0);
    const double log2 = std::log10(2.0);
    const double log_factor = std::log10(std::min(0.25, eps_cor_factor));
    s.log10_delta.push_back(0.0);
    s.log10_epsilon.push_back(std::log10(epsilon0));
    for (std::size_t i = 1; i < k; ++i) {
        const double ld = 4.0 * (s.log10_epsilon[i - 1] - log4) - log2;
        s.log10_delta.push_back(ld);
        s.log10_epsilon.push_back(ld + log_factor);
    }
    const double base = static_cast<double>(n0) * static_cast<double>(n0) * p0;
    for (std::size_t i = 0; i < k; ++i) s.m.push_back(std::ceil((1.0 - s.epsilon(i)) * base - 1e-9));
    return s;
}

double PruneSchedule::delta(std::size_t i) const {
    if (i == 0 || i >= size()) throw std::out_of_range("schedule index");
    return std::pow(10.0, log10_delta[i]);
}

double PruneSchedule::epsilon(std::size_t i) const { return std::pow(10.0, log10_epsilon.at(i)); }

double PruneSchedule::removal_limit(std::size_t i) const { return 2.0 * delta(i) * m.at(i); }

PruneResult prune_to_gtilde(const ChainPartition& chain, double epsilon, const PruneSchedule& schedule, Exec exec) {
    const std::size_t k = chain.class_count();
    if (k < 3) throw std::invalid_argument("pruning needs at least 3 classes");
    if (schedule.size() < k - 1) throw std::invalid_argument("schedule shorter than the chain");
    const double n0 = static_cast<double>(chain.class_size());
    const double p0 = chain.reference_p();

    PruneResult res;
    res.chain = chain;
    res.threshold = (1.0 - epsilon) * n0 * p0 * p0;
    for (std::size_t step = 0; step + 2 < k; ++step) {
        const std::size_t i = k - 3 - step;
        ChainPartition& ch = res.chain;
        const BitMatrix low = kernels::low_triangle_edges(ch.link(i, 1), ch.link(i, 2), ch.link(i + 1, 1),
                                                          res.threshold, exec);
        PairRemoval pr;
        pr.pair = i;
        pr.schedule_index = i + 1;
        pr.initial_edges = ch.pair_edge_count(i);
        pr.removed = low.count();
        pr.fraction = pr.initial_edges ? static_cast<double>(pr.removed) / static_cast<double>(pr.initial_edges) : 0.0;
        pr.limit = schedule.removal_limit(pr.schedule_index);
        pr.exceeds_limit = static_cast<double>(pr.removed) > pr.limit;
        ch.remove_links(i, 1, low);
        res.total_removed += pr.removed;
        res.pairs.push_back(pr);
    }
    res.eps_cor_modelled = schedule.eps_cor_modelled();
    return res;
}

std::size_t count_threshold_violations(const ChainPartition& chain, double threshold) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i + 2 < chain.class_count(); ++i) {
        const auto counts =
            kernels::pair_triangle_counts(chain.link(i, 1), chain.link(i, 2), chain.link(i + 1, 1), Exec::serial);
        for (auto c : counts)
            if (static_cast<double>(c) < threshold) ++bad;
    }
    return bad;
}

GtildeIIReport check_gtilde_ii(const ChainPartition& chain, double epsilon, double reference_p,
                               std::size_t sample_count, std::uint64_t seed) {
    const std::size_t k = chain.class_count();
    if (k < 3) throw std::invalid_argument("check needs at least 3 classes");
    const std::size_t n0 = chain.class_size();
    const double p0 = chain.reference_p();
    const double lo = (1.0 - epsilon) * static_cast<double>(n0) * p0;
    const double hi = (1.0 + epsilon) * static_cast<double>(n0) * p0;

    GtildeIIReport rep;
    for (std::size_t i = 0; i + 2 < k; ++i) {
        ClassExceptions ce;
        ce.cls = i + 1;
        ce.budget = epsilon * static_cast<double>(n0);
        const BitMatrix& skip = chain.link(i, 2);
        for (std::size_t v = 0; v < n0; ++v) {
            std::vector<std::uint32_t> left, right;
            bits::for_each_set(chain.link_back(i, 1).row(v), [&](Vertex a) { left.push_back(a); });
            bits::for_each_set(chain.link(i + 1, 1).row(v), [&](Vertex b) { right.push_back(b); });
            const auto in_window = [&](std::size_t s) {
                const double d = static_cast<double>(s);
                return d >= lo - 1e-9 && d <= hi + 1e-9;
            };
            if (left.empty() || right.empty() || !in_window(left.size()) || !in_window(right.size())) {
                ++ce.window_failures;
                continue;
            }
            BitMatrix sub(left.size(), right.size());
            for (std::size_t a = 0; a < left.size(); ++a)
                for (std::size_t b = 0; b < right.size(); ++b)
                    if (skip.test(left[a], right[b])) sub.set(a, b);
            const auto r = test_pair_local(BipartiteAdjacency(std::move(sub)), RegularityMode::lower, reference_p,
                                           epsilon, sample_count, derive_seed(seed, ce.cls, v));
            if (r.verdict == Verdict::violated) ++ce.regularity_failures;
        }
        ce.exceptions = ce.window_failures + ce.regularity_failures;
        ce.within_budget = static_cast<double>(ce.exceptions) <= ce.budget + 1e-9;
        rep.within_budget = rep.within_budget && ce.within_budget;
        rep.classes.push_back(ce);
    }
    return rep;
}

// ---------------------------------------------------------------- triangle expansion

ExpansionParams ExpansionParams::make(std::size_t n, std::size_t n0, double p, double p0, double epsilon,
                                      double gamma) {
    if (n < 2 || n0 == 0 || !(p > 0.0) || !(p0 > 0.0) || !(epsilon > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("expansion parameters must be positive");
    ExpansionParams e;
    e.gamma = gamma;
    const double ln = std::log(static_cast<double>(n));
    e.s = ln * ln * static_cast<double>(n0) * p / std::pow(static_cast<double>(n), gamma);
    e.s_prime = 2.0 * epsilon * static_cast<double>(n0) * p0;
    return e;
}

TriangleExpansion triangle_expand(const ChainPartition& chain, std::size_t i, std::span<const EdgeState> input) {
    if (input.empty()) throw std::invalid_argument("triangle_expand needs a non-empty edge set");
    if (i + 2 >= chain.class_count()) throw std::invalid_argument("triangle_expand needs classes i, i+1, i+2");
    const std::size_t n0 = chain.class_size();
    BitMatrix by_middle(n0, n0);  // rows V_{i+1}, cols V_i
    for (const EdgeState& e : input) {
        const auto a = chain.locate(e.first);
        const auto b = chain.locate(e.second);
        if (!a || !b || a->cls != i || b->cls != i + 1 || !chain.link(i, 1).test(a->index, b->index))
            throw std::invalid_argument("triangle_expand edge outside the pair");
        by_middle.set(b->index, a->index);
    }
    TriangleExpansion out;
    out.s = ~std::size_t{0};
    const BitMatrix& skip = chain.link(i, 2);
    const BitMatrix& step = chain.link(i + 1, 1);
    std::vector<Word> reach(step.stride());
    for (std::size_t v = 0; v < n0; ++v) {
        if (by_middle.row_empty(v)) continue;
        out.middle.push_back(chain.global(i + 1, static_cast<std::uint32_t>(v)));
        out.s = std::min(out.s, by_middle.row_count(v));
        std::fill(reach.begin(), reach.end(), Word{0});
        bits::for_each_set(by_middle.row(v), [&](Vertex u) {
            const auto s = skip.row(u);
            for (std::size_t w = 0; w < reach.size(); ++w) reach[w] |= s[w];
        });
        const auto st = step.row(v);
        for (std::size_t w = 0; w < reach.size(); ++w) reach[w] &= st[w];
        bits::for_each_set(std::span<const Word>(reach), [&](Vertex w) {
            out.edges.push_back({chain.global(i + 1, static_cast<std::uint32_t>(v)), chain.global(i + 2, w)});
        });
    }
    std::sort(out.edges.begin(), out.edges.end());
    std::sort(out.middle.begin(), out.middle.end());
    return out;
}

TriangleBounds triangle_bounds(const TriangleExpansion& t, const ExpansionParams& params, std::size_t n0, double p,
                               double p0, double epsilon) {
    TriangleBounds b;
    const double vt = static_cast<double>(t.middle.size());
    const double n = static_cast<double>(n0);
    b.dense = vt * n * p0 * p0 / (2.0 * p);
    b.regular = (1.0 - epsilon) * (1.0 - epsilon) * (vt - 5.0 * epsilon * n) * n * p0;
    b.dense_applies = static_cast<double>(t.s) >= params.s;
    b.regular_applies = static_cast<double>(t.s) >= params.s_prime;
    return b;
}

// ---------------------------------------------------------------- path expansion

EdgeExpansion edge_expansion(const ChainPartition& chain, EdgeState start, const ExpansionOptions& options) {
    const std::size_t k = chain.class_count();
    if (k < 2) throw std::invalid_argument("expansion needs at least 2 classes");
    const auto a = chain.locate(start.first);
    const auto b = chain.locate(start.second);
    if (!a || !b || a->cls != 0 || b->cls != 1 || !chain.link(0, 1).test(a->index, b->index))
        throw std::invalid_argument("expansion start is not a first-pair edge");
    const std::size_t n0 = chain.class_size();

    EdgeExpansion ex;
    ex.start = start;
    BitMatrix first(n0, n0);
    first.set(b->index, a->index);
    ex.pred.push_back(std::move(first));
    for (std::size_t layer = 0; layer + 2 < k; ++layer) {
        const BitMatrix& pred = ex.pred.back();
        const std::size_t states = pred.count();
        BitMatrix next;
        if (states == 0) {
            next = BitMatrix(n0, n0);
        } else {
            // push touches one skip row per state; pull one intersection per step edge
            const std::size_t pull_cost = chain.pair_edge_count(layer + 1);
            if (states <= pull_cost)
                next = kernels::advance_push(pred, chain.link(layer, 2), chain.link(layer + 1, 1), options.exec);
            else
                next = kernels::advance_pull(pred, chain.link_back(layer + 1, 1), chain.link_back(layer, 2),
                                             options.exec);
        }
        ex.pred.push_back(std::move(next));
    }
    ex.reachable = ex.pred.back().count();
    ex.target_edges = chain.pair_edge_count(k - 2);
    ex.fraction = ex.target_edges ? static_cast<double>(ex.reachable) / static_cast<double>(ex.target_edges) : 0.0;
    if (options.certify_all) {
        for (const EdgeState& t : reachable_targets(chain, ex))
            if (recover_square_path(chain, ex, t)) ++ex.certified;
    }
    return ex;
}

std::vector<EdgeState> reachable_targets(const ChainPartition& chain, const EdgeExpansion& expansion) {
    std::vector<EdgeState> out;
    const std::size_t last = chain.class_count() - 1;
    const BitMatrix& pred = expansion.pred.back();
    for (std::size_t y = 0; y < pred.rows(); ++y)
        bits::for_each_set(pred.row(y), [&](Vertex x) {
            out.push_back({chain.global(last - 1, x), chain.global(last, static_cast<std::uint32_t>(y))});
        });
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::vector<Vertex>> recover_square_path(const ChainPartition& chain, const EdgeExpansion& expansion,
                                                       EdgeState target) {
    const std::size_t k = chain.class_count();
    const auto x = chain.locate(target.first);
    const auto y = chain.locate(target.second);
    if (!x || !y || x->cls != k - 2 || y->cls != k - 1) return std::nullopt;
    if (!expansion.pred.back().test(y->index, x->index)) return std::nullopt;
    std::vector<std::uint32_t> local(k);
    local[k - 1] = y->index;
    local[k - 2] = x->index;
    for (std::size_t layer = k - 2; layer-- > 0;) {
        // choose w in V_layer with (w, local[layer+1]) reachable and w ~ local[layer+2]
        const auto pred_row = expansion.pred[layer].row(local[layer + 1]);
        const auto skip_row = chain.link_back(layer, 2).row(local[layer + 2]);
        std::optional<std::uint32_t> pick;
        for (std::size_t w = 0; w < pred_row.size() && !pick; ++w) {
            const Word both = pred_row[w] & skip_row[w];
            if (both) pick = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(both)));
        }
        if (!pick) return std::nullopt;
        local[layer] = *pick;
    }
    std::vector<Vertex> path(k);
    for (std::size_t c = 0; c < k; ++c) path[c] = chain.global(c, local[c]);
    if (path[0] != expansion.start.first || path[1] != expansion.start.second) return std::nullopt;
    std::vector<Vertex> sorted = path;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return std::nullopt;
    return path;
}

std::vector<double> expansion_fractions(const ChainPartition& chain, std::span<const EdgeState> starts, Exec exec) {
    std::vector<double> out(starts.size());
    const auto n = static_cast<std::ptrdiff_t>(starts.size());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = edge_expansion(chain, starts[i]).fraction;
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = edge_expansion(chain, starts[i]).fraction;
    }
    return out;
}

// ---------------------------------------------------------------- counting

namespace {

using StateCounts = std::unordered_map<std::uint64_t, std::uint64_t>;

std::uint64_t key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }

void add_checked(std::uint64_t& acc, std::uint64_t x) {
    if (__builtin_add_overflow(acc, x, &acc)) throw std::overflow_error("square path count exceeds 64 bits");
}

std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("square path count exceeds 64 bits");
    return r;
}

// Counts of walks from (a, b) in pair 0 to each state of pair `last_pair`; keys are local (x, y).
StateCounts forward_counts(const ChainPartition& chain, std::uint32_t a, std::uint32_t b, std::size_t last_pair) {
    StateCounts cur;
    cur[key(a, b)] = 1;
    for (std::size_t layer = 0; layer < last_pair; ++layer) {
        StateCounts nxt;
        const BitMatrix& skip = chain.link(layer, 2);
        const BitMatrix& step = chain.link(layer + 1, 1);
        for (const auto& [k, c] : cur) {
            const auto u = static_cast<std::uint32_t>(k >> 32);
            const auto v = static_cast<std::uint32_t>(k & 0xffffffffu);
            const auto s = skip.row(u);
            const auto t = step.row(v);
            for (std::size_t w = 0; w < s.size(); ++w) {
                Word both = s[w] & t[w];
                while (both) {
                    const auto bit = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(both)));
                    add_checked(nxt[key(v, bit)], c);
                    both &= both - 1;
                }
            }
        }
        cur = std::move(nxt);
    }
    return cur;
}

struct LocalEdge {
    std::uint32_t a, b;
};

LocalEdge locate_pair(const ChainPartition& chain, EdgeState e, std::size_t pair, const char* what) {
    const auto x = chain.locate(e.first);
    const auto y = chain.locate(e.second);
    if (!x || !y || x->cls != pair || y->cls != pair + 1 || !chain.link(pair, 1).test(x->index, y->index))
        throw std::invalid_argument(what);
    return {x->index, y->index};
}

}  // namespace

std::uint64_t count_square_paths_between(const ChainPartition& chain, EdgeState e1, EdgeState e2) {
    const std::size_t k = chain.class_count();
    if (k < 3) throw std::invalid_argument("counting needs at least 3 classes");
    const auto s = locate_pair(chain, e1, 0, "e1 is not a first-pair edge");
    const auto t = locate_pair(chain, e2, k - 2, "e2 is not a last-pair edge");
    const std::size_t last = k - 2;
    const std::size_t mid = last / 2;
    const StateCounts front = forward_counts(chain, s.a, s.b, mid);
    if (front.empty()) return 0;
    const ChainPartition rev = chain.reversed();
    // in the reversed chain e2 becomes (t.b, t.a) in pair 0, and pair `mid` becomes pair last - mid
    const StateCounts back = forward_counts(rev, t.b, t.a, last - mid);
    std::uint64_t total = 0;
    for (const auto& [kk, c] : front) {
        const auto x = static_cast<std::uint32_t>(kk >> 32);
        const auto y = static_cast<std::uint32_t>(kk & 0xffffffffu);
        const auto it = back.find(key(y, x));
        if (it != back.end()) add_checked(total, mul_checked(c, it->second));
    }
    return total;
}

std::uint64_t count_square_paths_from(const ChainPartition& chain, EdgeState e1) {
    const std::size_t k = chain.class_count();
    if (k < 2) throw std::invalid_argument("counting needs at least 2 classes");
    const auto s = locate_pair(chain, e1, 0, "e1 is not a first-pair edge");
    std::uint64_t total = 0;
    for (const auto& [kk, c] : forward_counts(chain, s.a, s.b, k - 2)) add_checked(total, c);
    return total;
}

std::vector<EdgeState> sample_pair_edges(const ChainPartition& chain, std::size_t i, std::size_t count,
                                         std::uint64_t seed) {
    const BitMatrix& m = chain.link(i, 1);
    std::vector<EdgeState> all;
    all.reserve(m.count());
    for (std::size_t a = 0; a < m.rows(); ++a)
        bits::for_each_set(m.row(a), [&](Vertex b) {
            all.push_back({chain.global(i, static_cast<std::uint32_t>(a)), chain.global(i + 1, b)});
        });
    Rng rng(seed);
    return rng.sample(all, std::min(count, all.size()));
}

// ---------------------------------------------------------------- snapshots

void write_chain_snapshot(const std::string& prefix, const ChainPartition& chain) {
    write_graph_file(prefix + ".graph", chain.graph());
    nlohmann::json j;
    j["classes"] = chain.classes();
    j["reference_p"] = chain.reference_p();
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : chain.edges()) edges.push_back({e.u, e.v});
    j["surviving_edges"] = std::move(edges);
    std::ofstream out(prefix + ".chain.json");
    if (!out) throw std::ios_base::failure("cannot write " + prefix + ".chain.json");
    out << j.dump(1) << '\n';
    if (!out) throw std::ios_base::failure("write failed for " + prefix + ".chain.json");
}

ChainPartition read_chain_snapshot(const std::string& prefix) {
    auto g = std::make_shared<const Graph>(read_graph_file(prefix + ".graph"));
    std::ifstream in(prefix + ".chain.json");
    if (!in) throw std::ios_base::failure("cannot read " + prefix + ".chain.json");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw GraphFormatError(std::string("bad chain sidecar: ") + e.what());
    }
    try {
        auto classes = j.at("classes").get<std::vector<std::vector<Vertex>>>();
        auto chain = ChainPartition::view(std::move(g), std::move(classes), j.at("reference_p").get<double>());
        std::vector<Edge> keep;
        for (const auto& e : j.at("surviving_edges")) keep.push_back(Edge::of(e.at(0).get<Vertex>(), e.at(1).get<Vertex>()));
        chain.retain_only(keep);
        return chain;
    } catch (const nlohmann::json::exception& e) {
        throw GraphFormatError(std::string("bad chain sidecar: ") + e.what());
    }
}

}  // namespace sqlab
