#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqlab {

using Vertex = std::uint32_t;
using Word = std::uint64_t;

inline constexpr std::size_t kWordBits = 64;

inline constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

namespace bits {

inline std::size_t popcount(std::span<const Word> a) {
    std::size_t c = 0;
    for (Word w : a) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

inline std::size_t popcount_and(std::span<const Word> a, std::span<const Word> b) {
    std::size_t c = 0;
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i) c += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
    return c;
}

inline std::size_t popcount_and3(std::span<const Word> a, std::span<const Word> b, std::span<const Word> c) {
    std::size_t total = 0;
    std::size_t n = a.size();
    if (b.size() < n) n = b.size();
    if (c.size() < n) n = c.size();
    for (std::size_t i = 0; i < n; ++i) total += static_cast<std::size_t>(std::popcount(a[i] & b[i] & c[i]));
    return total;
}

inline bool intersects(std::span<const Word> a, std::span<const Word> b) {
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] & b[i]) return true;
    return false;
}

// Calls f(index) for every set bit, in increasing order.
template <class F>
void for_each_set(std::span<const Word> a, F&& f) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        Word w = a[i];
        while (w) {
            const auto b = static_cast<std::size_t>(std::countr_zero(w));
            f(static_cast<Vertex>(i * kWordBits + b));
            w &= w - 1;
        }
    }
}

inline bool test(std::span<const Word> a, std::size_t i) { return (a[i / kWordBits] >> (i % kWordBits)) & 1U; }
inline void set(std::span<Word> a, std::size_t i) { a[i / kWordBits] |= Word{1} << (i % kWordBits); }
inline void reset(std::span<Word> a, std::size_t i) { a[i / kWordBits] &= ~(Word{1} << (i % kWordBits)); }

}  // namespace bits

/// Fixed-universe set of vertex ids backed by 64-bit words.
class VertexSet {
public:
    VertexSet() = default;
    explicit VertexSet(std::size_t universe) : universe_(universe), words_(words_for(universe), 0) {}

    static VertexSet from(std::size_t universe, std::span<const Vertex> members) {
        VertexSet s(universe);
        for (Vertex v : members) s.insert(v);
        return s;
    }
    static VertexSet full(std::size_t universe) {
        VertexSet s(universe);
        for (std::size_t v = 0; v < universe; ++v) s.insert(static_cast<Vertex>(v));
        return s;
    }

    std::size_t universe() const { return universe_; }

    void insert(Vertex v) {
        check(v);
        bits::set(words_, v);
    }
    void erase(Vertex v) {
        check(v);
        bits::reset(words_, v);
    }
    bool contains(Vertex v) const { return v < universe_ && bits::test(words_, v); }

    std::size_t count() const { return bits::popcount(words_); }
    bool empty() const {
        for (Word w : words_)
            if (w) return false;
        return true;
    }
    void clear() { std::fill(words_.begin(), words_.end(), Word{0}); }

    VertexSet& operator&=(const VertexSet& o) {
        same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    VertexSet& operator|=(const VertexSet& o) {
        same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    VertexSet& operator-=(const VertexSet& o) {
        same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }
    friend VertexSet operator&(VertexSet a, const VertexSet& b) { return a &= b; }
    friend VertexSet operator|(VertexSet a, const VertexSet& b) { return a |= b; }
    friend VertexSet operator-(VertexSet a, const VertexSet& b) { return a -= b; }
    friend bool operator==(const VertexSet&, const VertexSet&) = default;

    std::size_t intersection_count(const VertexSet& o) const { return bits::popcount_and(words_, o.words_); }
    bool intersects(const VertexSet& o) const { return bits::intersects(words_, o.words_); }
    bool is_subset_of(const VertexSet& o) const {
        same_universe(o);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    template <class F>
    void for_each(F&& f) const {
        bits::for_each_set(words_, std::forward<F>(f));
    }

    std::vector<Vertex> to_vector() const {
        std::vector<Vertex> out;
        out.reserve(count());
        for_each([&](Vertex v) { out.push_back(v); });
        return out;
    }

    std::optional<Vertex> first() const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i]) return static_cast<Vertex>(i * kWordBits + static_cast<std::size_t>(std::countr_zero(words_[i])));
        return std::nullopt;
    }

    std::span<const Word> words() const { return words_; }
    std::span<Word> words() { return words_; }

private:
    void check(Vertex v) const {
        if (v >= universe_) throw std::out_of_range("vertex id outside set universe");
    }
    void same_universe(const VertexSet& o) const {
        if (o.universe_ != universe_) throw std::invalid_argument("vertex sets over different universes");
    }

    std::size_t universe_ = 0;
    std::vector<Word> words_;
};

/// Dense row-major bit matrix; rows are word-aligned so a row is usable as a bit span.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(words_for(cols)), words_(rows * stride_, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t stride() const { return stride_; }

    std::span<const Word> row(std::size_t r) const { return {words_.data() + r * stride_, stride_}; }
    std::span<Word> row(std::size_t r) { return {words_.data() + r * stride_, stride_}; }

    bool test(std::size_t r, std::size_t c) const { return bits::test(row(r), c); }
    void set(std::size_t r, std::size_t c) { bits::set(row(r), c); }
    void reset(std::size_t r, std::size_t c) { bits::reset(row(r), c); }

    std::size_t row_count(std::size_t r) const { return bits::popcount(row(r)); }
    std::size_t count() const { return bits::popcount(words_); }
    bool row_empty(std::size_t r) const {
        for (Word w : row(r))
            if (w) return false;
        return true;
    }
    void clear() { std::fill(words_.begin(), words_.end(), Word{0}); }

    BitMatrix transposed() const {
        BitMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            bits::for_each_set(row(r), [&](Vertex c) { t.set(c, r); });
        return t;
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<Word> words_;
};

}  // namespace sqlab
