#include "sqlab/kernels.hpp"

#include <stdexcept>

namespace sqlab::kernels {

std::vector<std::uint32_t> edge_triangle_counts(const Graph& g, std::span<const Edge> edges, Exec exec) {
    std::vector<std::uint32_t> out(edges.size());
    const auto n = static_cast<std::ptrdiff_t>(edges.size());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[i] = static_cast<std::uint32_t>(g.neighbors(edges[i].u).intersection_count(g.neighbors(edges[i].v)));
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            out[i] = static_cast<std::uint32_t>(g.neighbors(edges[i].u).intersection_count(g.neighbors(edges[i].v)));
    }
    return out;
}

namespace {

void check_shapes(const BitMatrix& pair, const BitMatrix& a, const BitMatrix& b) {
    if (a.rows() != pair.rows() || b.rows() != pair.cols() || a.cols() != b.cols())
        throw std::invalid_argument("kernel matrix shapes disagree");
}

void low_row(const BitMatrix& pair, const BitMatrix& a, const BitMatrix& b, double threshold, BitMatrix& out,
             std::size_t r) {
    bits::for_each_set(pair.row(r), [&](Vertex c) {
        if (static_cast<double>(bits::popcount_and(a.row(r), b.row(c))) < threshold) out.set(r, c);
    });
}

}  // namespace

BitMatrix low_triangle_edges(const BitMatrix& pair, const BitMatrix& a, const BitMatrix& b, double threshold,
                             Exec exec) {
    check_shapes(pair, a, b);
    BitMatrix out(pair.rows(), pair.cols());
    const auto rows = static_cast<std::ptrdiff_t>(pair.rows());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t r = 0; r < rows; ++r) low_row(pair, a, b, threshold, out, static_cast<std::size_t>(r));
    } else {
        // rows own disjoint word ranges of `out`
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t r = 0; r < rows; ++r) low_row(pair, a, b, threshold, out, static_cast<std::size_t>(r));
    }
    return out;
}

std::vector<std::uint32_t> pair_triangle_counts(const BitMatrix& pair, const BitMatrix& a, const BitMatrix& b,
                                                Exec exec) {
    check_shapes(pair, a, b);
    std::vector<std::size_t> offset(pair.rows() + 1, 0);
    for (std::size_t r = 0; r < pair.rows(); ++r) offset[r + 1] = offset[r] + pair.row_count(r);
    std::vector<std::uint32_t> out(offset.back());
    auto fill = [&](std::size_t r) {
        std::size_t k = offset[r];
        bits::for_each_set(pair.row(r), [&](Vertex c) {
            out[k++] = static_cast<std::uint32_t>(bits::popcount_and(a.row(r), b.row(c)));
        });
    };
    const auto rows = static_cast<std::ptrdiff_t>(pair.rows());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t r = 0; r < rows; ++r) fill(static_cast<std::size_t>(r));
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t r = 0; r < rows; ++r) fill(static_cast<std::size_t>(r));
    }
    return out;
}

namespace {

void push_row(const BitMatrix& pred, const BitMatrix& skip, const BitMatrix& step, BitMatrix& succ, std::size_t v) {
    if (pred.row_empty(v)) return;
    auto out = succ.row(v);
    bits::for_each_set(pred.row(v), [&](Vertex u) {
        const auto s = skip.row(u);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] |= s[k];
    });
    const auto st = step.row(v);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] &= st[k];
}

void pull_row(const BitMatrix& pred, const BitMatrix& step_back, const BitMatrix& skip_back, BitMatrix& next,
              std::size_t w) {
    bits::for_each_set(step_back.row(w), [&](Vertex v) {
        if (bits::intersects(pred.row(v), skip_back.row(w))) next.set(w, v);
    });
}

}  // namespace

BitMatrix advance_push(const BitMatrix& pred, const BitMatrix& skip, const BitMatrix& step, Exec exec) {
    if (pred.rows() != step.rows() || pred.cols() != skip.rows() || skip.cols() != step.cols())
        throw std::invalid_argument("advance_push shapes disagree");
    BitMatrix succ(step.rows(), step.cols());
    const auto rows = static_cast<std::ptrdiff_t>(pred.rows());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t v = 0; v < rows; ++v) push_row(pred, skip, step, succ, static_cast<std::size_t>(v));
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t v = 0; v < rows; ++v) push_row(pred, skip, step, succ, static_cast<std::size_t>(v));
    }
    return succ.transposed();
}

BitMatrix advance_pull(const BitMatrix& pred, const BitMatrix& step_back, const BitMatrix& skip_back, Exec exec) {
    if (step_back.cols() != pred.rows() || skip_back.cols() != pred.cols() || step_back.rows() != skip_back.rows())
        throw std::invalid_argument("advance_pull shapes disagree");
    BitMatrix next(step_back.rows(), pred.rows());
    const auto rows = static_cast<std::ptrdiff_t>(step_back.rows());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t w = 0; w < rows; ++w) pull_row(pred, step_back, skip_back, next, static_cast<std::size_t>(w));
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::ptrdiff_t w = 0; w < rows; ++w) pull_row(pred, step_back, skip_back, next, static_cast<std::size_t>(w));
    }
    return next;
}

}  // namespace sqlab::kernels
