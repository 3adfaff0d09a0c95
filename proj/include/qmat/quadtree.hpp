#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmat/dense.hpp"
#include "qmat/errors.hpp"
#include "qmat/rings.hpp"

// Quadtree block matrix: a node is either all-zero (represented by a null
// pointer), a small dense leaf, or a split into four half-order children.
// Zero blocks are elided at every level, which is the only sparsity device
// in the library; canonical form (no all-zero leaf, no split of four zero
// children) is enforced by the node constructors, so a matrix that sums to
// zero really is the null root.

namespace qmat {

inline constexpr std::int64_t default_leaf_order = 32;

namespace detail {

template <ring_element R>
struct qnode {
    std::int64_t order = 0;   // power of two
    std::int64_t nnz = 0;
    bool is_leaf = false;
    std::vector<R> dense;     // order*order, row-major (leaves only)
    std::array<std::shared_ptr<const qnode<R>>, 4> kid{};   // NW NE SW SE
};

template <ring_element R>
using node_ptr = std::shared_ptr<const qnode<R>>;

template <ring_element R>
node_ptr<R> make_leaf(std::int64_t order, std::vector<R> dense) {
    std::int64_t nnz = 0;
    for (const auto& v : dense)
        if (!is_zero(v)) ++nnz;
    if (nnz == 0) return nullptr;
    auto n = std::make_shared<qnode<R>>();
    n->order = order;
    n->nnz = nnz;
    n->is_leaf = true;
    n->dense = std::move(dense);
    return n;
}

template <ring_element R>
node_ptr<R> make_split(std::int64_t order, node_ptr<R> nw, node_ptr<R> ne,
                       node_ptr<R> sw, node_ptr<R> se) {
    if (!nw && !ne && !sw && !se) return nullptr;
    auto n = std::make_shared<qnode<R>>();
    n->order = order;
    n->kid = {std::move(nw), std::move(ne), std::move(sw), std::move(se)};
    for (const auto& k : n->kid)
        if (k) n->nnz += k->nnz;
    return n;
}

/// Child q (0=NW 1=NE 2=SW 3=SE) of a non-null node, materializing the
/// quadrant of a dense leaf on demand.
template <ring_element R>
node_ptr<R> quadrant(const node_ptr<R>& x, int q, const R& zero) {
    if (!x) return nullptr;
    if (!x->is_leaf) return x->kid[static_cast<std::size_t>(q)];
    const std::int64_t h = x->order / 2;
    const std::int64_t ri = (q / 2) * h, ci = (q % 2) * h;
    std::vector<R> d(static_cast<std::size_t>(h * h), zero);
    for (std::int64_t i = 0; i < h; ++i)
        for (std::int64_t j = 0; j < h; ++j)
            d[static_cast<std::size_t>(i * h + j)] =
                x->dense[static_cast<std::size_t>((ri + i) * x->order + ci + j)];
    return make_leaf<R>(h, std::move(d));
}

/// Wraps a node as the NW child of successively larger splits until it
/// reaches `to_order`.
template <ring_element R>
node_ptr<R> promote(node_ptr<R> x, std::int64_t from_order, std::int64_t to_order) {
    while (from_order < to_order) {
        from_order *= 2;
        if (x) x = make_split<R>(from_order, std::move(x), nullptr, nullptr, nullptr);
    }
    return x;
}

template <ring_element R>
node_ptr<R> node_neg(const node_ptr<R>& x) {
    if (!x) return nullptr;
    auto n = std::make_shared<qnode<R>>(*x);
    if (n->is_leaf) {
        for (auto& v : n->dense) v = -v;
    } else {
        for (auto& k : n->kid) k = node_neg<R>(k);
    }
    return n;
}

// add (Sub=false) or subtract (Sub=true); null operands short-circuit
// without traversing the other side.
template <ring_element R, bool Sub>
node_ptr<R> node_combine(const node_ptr<R>& x, const node_ptr<R>& y,
                         std::int64_t order, const R& zero) {
    if (!y) return x;
    if (!x) return Sub ? node_neg<R>(y) : y;
    if (x->is_leaf && y->is_leaf) {
        std::vector<R> d(x->dense);
        for (std::size_t i = 0; i < d.size(); ++i) {
            if constexpr (Sub) d[i] = d[i] - y->dense[i];
            else d[i] = d[i] + y->dense[i];
        }
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    return make_split<R>(order,
        node_combine<R, Sub>(quadrant(x, 0, zero), quadrant(y, 0, zero), h, zero),
        node_combine<R, Sub>(quadrant(x, 1, zero), quadrant(y, 1, zero), h, zero),
        node_combine<R, Sub>(quadrant(x, 2, zero), quadrant(y, 2, zero), h, zero),
        node_combine<R, Sub>(quadrant(x, 3, zero), quadrant(y, 3, zero), h, zero));
}

template <ring_element R>
node_ptr<R> node_transpose(const node_ptr<R>& x) {
    if (!x) return nullptr;
    auto n = std::make_shared<qnode<R>>();
    n->order = x->order;
    n->nnz = x->nnz;
    n->is_leaf = x->is_leaf;
    if (x->is_leaf) {
        n->dense.resize(x->dense.size(), x->dense[0]);
        for (std::int64_t i = 0; i < x->order; ++i)
            for (std::int64_t j = 0; j < x->order; ++j)
                n->dense[static_cast<std::size_t>(j * x->order + i)] =
                    x->dense[static_cast<std::size_t>(i * x->order + j)];
    } else {
        n->kid = {node_transpose<R>(x->kid[0]), node_transpose<R>(x->kid[2]),
                  node_transpose<R>(x->kid[1]), node_transpose<R>(x->kid[3])};
    }
    return n;
}

template <ring_element R, typename Fn>
node_ptr<R> node_map(const node_ptr<R>& x, Fn&& fn) {
    if (!x) return nullptr;
    if (x->is_leaf) {
        std::vector<R> d(x->dense);
        for (auto& v : d)
            if (!is_zero(v)) v = fn(v);
        return make_leaf<R>(x->order, std::move(d));
    }
    return make_split<R>(x->order, node_map<R>(x->kid[0], fn), node_map<R>(x->kid[1], fn),
                         node_map<R>(x->kid[2], fn), node_map<R>(x->kid[3], fn));
}

template <ring_element R, typename Fn>
void node_visit(const node_ptr<R>& x, std::int64_t row0, std::int64_t col0, Fn&& fn) {
    if (!x) return;
    if (x->is_leaf) {
        for (std::int64_t i = 0; i < x->order; ++i)
            for (std::int64_t j = 0; j < x->order; ++j) {
                const R& v = x->dense[static_cast<std::size_t>(i * x->order + j)];
                if (!is_zero(v)) fn(row0 + i, col0 + j, v);
            }
        return;
    }
    const std::int64_t h = x->order / 2;
    node_visit<R>(x->kid[0], row0, col0, fn);
    node_visit<R>(x->kid[1], row0, col0 + h, fn);
    node_visit<R>(x->kid[2], row0 + h, col0, fn);
    node_visit<R>(x->kid[3], row0 + h, col0 + h, fn);
}

/// Zeroes everything at or beyond row `rows` / column `cols` of the block.
template <ring_element R>
node_ptr<R> node_crop(const node_ptr<R>& x, std::int64_t order, std::int64_t rows,
                      std::int64_t cols, const R& zero) {
    if (!x || rows <= 0 || cols <= 0) return nullptr;
    if (rows >= order && cols >= order) return x;
    if (x->is_leaf) {
        std::vector<R> d(x->dense);
        for (std::int64_t i = 0; i < order; ++i)
            for (std::int64_t j = 0; j < order; ++j)
                if (i >= rows || j >= cols)
                    d[static_cast<std::size_t>(i * order + j)] = zero;
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    return make_split<R>(order,
        node_crop<R>(x->kid[0], h, rows, cols, zero),
        node_crop<R>(x->kid[1], h, rows, cols - h, zero),
        node_crop<R>(x->kid[2], h, rows - h, cols, zero),
        node_crop<R>(x->kid[3], h, rows - h, cols - h, zero));
}

template <ring_element R>
bool node_equal(const node_ptr<R>& x, const node_ptr<R>& y, std::int64_t order,
                const R& zero) {
    if (x == y) return true;
    if (!x || !y) return false;   // canonical: non-null has nnz > 0
    if (x->nnz != y->nnz) return false;
    if (x->is_leaf && y->is_leaf) return x->dense == y->dense;
    const std::int64_t h = order / 2;
    for (int q = 0; q < 4; ++q)
        if (!node_equal<R>(quadrant(x, q, zero), quadrant(y, q, zero), h, zero))
            return false;
    return true;
}

/// Diagonal matrix with `value` at positions [lo, hi) of the block diagonal.
template <ring_element R>
node_ptr<R> build_diag(std::int64_t order, std::int64_t lo, std::int64_t hi,
                       const R& value, const R& zero, std::int64_t leaf_order) {
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min(hi, order);
    if (lo >= hi || is_zero(value)) return nullptr;
    if (order <= leaf_order) {
        std::vector<R> d(static_cast<std::size_t>(order * order), zero);
        for (std::int64_t k = lo; k < hi; ++k)
            d[static_cast<std::size_t>(k * order + k)] = value;
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    return make_split<R>(order,
        build_diag<R>(h, lo, hi, value, zero, leaf_order), nullptr, nullptr,
        build_diag<R>(h, lo - h, hi - h, value, zero, leaf_order));
}

} // namespace detail

// ---------------------------------------------------------------------------

template <ring_element R>
struct triplet {
    std::int64_t row;
    std::int64_t col;
    R value;
};

enum class pad_mode { zero_pad, identity_pad };

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_string(double d) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

template <ring_element R>
class quad_matrix {
public:
    quad_matrix() : quad_matrix(0, 0, R{}) {}

    quad_matrix(std::int64_t rows, std::int64_t cols, R zero,
                std::int64_t leaf_order = default_leaf_order)
        : rows_(rows), cols_(cols),
          padded_(std::max<std::int64_t>(std::bit_ceil(
              static_cast<std::uint64_t>(std::max<std::int64_t>({rows, cols, 1}))), 1)),
          leaf_order_(leaf_order), zero_(std::move(zero)) {
        if (rows < 0 || cols < 0) throw invalid_spec("negative matrix dimension");
        if (leaf_order < 1 || std::popcount(static_cast<std::uint64_t>(leaf_order)) != 1)
            throw invalid_spec("leaf order must be a power of two");
    }

    static quad_matrix from_triplets(std::int64_t rows, std::int64_t cols,
                                     std::vector<triplet<R>> entries, R zero = R{},
                                     std::int64_t leaf_order = default_leaf_order) {
        quad_matrix m(rows, cols, std::move(zero), leaf_order);
        for (const auto& t : entries)
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw index_out_of_range("entry (" + std::to_string(t.row) + "," +
                                         std::to_string(t.col) + ") outside " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t i = 1; i < entries.size(); ++i)
            if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col)
                throw duplicate_entry("duplicate entry (" + std::to_string(entries[i].row) +
                                      "," + std::to_string(entries[i].col) + ")");
        std::erase_if(entries, [](const auto& t) { return is_zero(t.value); });
        m.root_ = m.build(std::span<triplet<R>>(entries), m.padded_, 0, 0);
        return m;
    }

    static quad_matrix from_dense(const dense_matrix<R>& d, R zero = R{},
                                  std::int64_t leaf_order = default_leaf_order) {
        std::vector<triplet<R>> ts;
        for (std::int64_t i = 0; i < d.rows(); ++i)
            for (std::int64_t j = 0; j < d.cols(); ++j)
                if (!is_zero(d.at(i, j))) ts.push_back({i, j, d.at(i, j)});
        return from_triplets(d.rows(), d.cols(), std::move(ts), std::move(zero), leaf_order);
    }

    static quad_matrix identity(std::int64_t n, R zero = R{},
                                std::int64_t leaf_order = default_leaf_order) {
        return scaled_identity(n, ring_one(zero), std::move(zero), leaf_order);
    }

    /// d * I (the d = 0 case canonicalizes to the zero matrix).
    static quad_matrix scaled_identity(std::int64_t n, const R& d, R zero = R{},
                                       std::int64_t leaf_order = default_leaf_order) {
        quad_matrix m(n, n, std::move(zero), leaf_order);
        m.root_ = detail::build_diag<R>(m.padded_, 0, n, d, m.zero_, leaf_order);
        return m;
    }

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::int64_t padded_order() const { return padded_; }
    std::int64_t leaf_order() const { return leaf_order_; }
    const R& zero_element() const { return zero_; }
    const detail::node_ptr<R>& root() const { return root_; }

    bool is_zero_matrix() const { return root_ == nullptr; }
    std::int64_t nnz() const { return root_ ? root_->nnz : 0; }

    /// Exact nonzero fraction of the logical area, from cached subtree counts.
    double density() const {
        if (rows_ == 0 || cols_ == 0) return 0.0;
        return static_cast<double>(nnz()) /
               (static_cast<double>(rows_) * static_cast<double>(cols_));
    }

    const R& get(std::int64_t i, std::int64_t j) const {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
            throw index_out_of_range("get(" + std::to_string(i) + "," + std::to_string(j) + ")");
        const detail::qnode<R>* n = root_.get();
        std::int64_t order = padded_;
        while (n) {
            if (n->is_leaf)
                return n->dense[static_cast<std::size_t>(i * order + j)];
            order /= 2;
            int q = static_cast<int>((i >= order) * 2 + (j >= order));
            if (i >= order) i -= order;
            if (j >= order) j -= order;
            n = n->kid[static_cast<std::size_t>(q)].get();
        }
        return zero_;
    }

    dense_matrix<R> to_dense() const {
        dense_matrix<R> d(rows_, cols_, zero_);
        for_each_nonzero([&](std::int64_t i, std::int64_t j, const R& v) { d.at(i, j) = v; });
        return d;
    }

    template <typename Fn>
    void for_each_nonzero(Fn&& fn) const {
        detail::node_visit<R>(root_, 0, 0, fn);
    }

    quad_matrix transpose() const {
        quad_matrix r(cols_, rows_, zero_, leaf_order_);
        r.root_ = detail::promote<R>(detail::node_transpose<R>(root_), padded_, r.padded_);
        r.padded_ = std::max(r.padded_, padded_);
        return r;
    }

    quad_matrix negate() const {
        quad_matrix r = *this;
        r.root_ = detail::node_neg<R>(root_);
        return r;
    }

    quad_matrix scale(const R& d) const {
        quad_matrix r = *this;
        r.root_ = is_zero(d) ? nullptr
                             : detail::node_map<R>(root_, [&](const R& v) -> R { return v * d; });
        return r;
    }

    /// Elementwise exact division by a nonzero scalar.
    quad_matrix div_scale(const R& d) const {
        if (is_zero(d)) throw division_by_zero("matrix division by zero scalar");
        quad_matrix r = *this;
        r.root_ = detail::node_map<R>(root_, [&](const R& v) -> R { return div_exact(v, d); });
        return r;
    }

    quad_matrix embed_padded(pad_mode mode) const {
        quad_matrix r = *this;
        r.rows_ = r.cols_ = padded_;
        if (mode == pad_mode::identity_pad) {
            if (rows_ != cols_)
                throw shape_mismatch("identity padding needs a square logical shape");
            auto tail = detail::build_diag<R>(padded_, rows_, padded_, ring_one(zero_),
                                              zero_, leaf_order_);
            r.root_ = detail::node_combine<R, false>(r.root_, tail, padded_, zero_);
        }
        return r;
    }

    /// Restricts the logical shape to rows x cols, discarding entries outside.
    quad_matrix crop(std::int64_t rows, std::int64_t cols) const {
        if (rows > padded_ || cols > padded_)
            throw shape_mismatch("crop cannot grow the matrix");
        quad_matrix r = *this;
        r.rows_ = rows;
        r.cols_ = cols;
        r.root_ = detail::node_crop<R>(root_, padded_, rows, cols, zero_);
        return r;
    }

    friend quad_matrix operator+(const quad_matrix& a, const quad_matrix& b) {
        return a.combine<false>(b);
    }
    friend quad_matrix operator-(const quad_matrix& a, const quad_matrix& b) {
        return a.combine<true>(b);
    }

    friend bool operator==(const quad_matrix& a, const quad_matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        const std::int64_t p = std::max(a.padded_, b.padded_);
        return detail::node_equal<R>(detail::promote<R>(a.root_, a.padded_, p),
                                     detail::promote<R>(b.root_, b.padded_, p), p, a.zero_);
    }

    /// Order-independent digest of shape + entries; used for the bitwise
    /// determinism checks across worker counts.
    std::uint64_t fingerprint() const {
        std::uint64_t acc = 0;
        for_each_nonzero([&](std::int64_t i, std::int64_t j, const R& v) {
            std::uint64_t h = 0xcbf29ce484222325ULL;
            h = fnv1a(h, &i, sizeof(i));
            h = fnv1a(h, &j, sizeof(j));
            using qmat::to_string;
            std::string s = to_string(v);
            h = fnv1a(h, s.data(), s.size());
            acc += h | 1;   // commutative: leaf granularity must not matter
        });
        std::uint64_t h = 0xcbf29ce484222325ULL;
        h = fnv1a(h, &rows_, sizeof(rows_));
        h = fnv1a(h, &cols_, sizeof(cols_));
        return acc ^ h;
    }

    // internal: adopt a prebuilt node tree
    static quad_matrix from_root(detail::node_ptr<R> root, std::int64_t rows,
                                 std::int64_t cols, std::int64_t padded, R zero,
                                 std::int64_t leaf_order) {
        quad_matrix m(rows, cols, std::move(zero), leaf_order);
        m.root_ = detail::promote<R>(std::move(root), padded, m.padded_);
        m.padded_ = std::max(m.padded_, padded);
        return m;
    }

private:
    template <bool Sub>
    quad_matrix combine(const quad_matrix& b) const {
        if (rows_ != b.rows_ || cols_ != b.cols_)
            throw shape_mismatch(std::to_string(rows_) + "x" + std::to_string(cols_) +
                                 " vs " + std::to_string(b.rows_) + "x" +
                                 std::to_string(b.cols_));
        quad_matrix r = *this;
        r.padded_ = std::max(padded_, b.padded_);
        r.root_ = detail::node_combine<R, Sub>(
            detail::promote<R>(root_, padded_, r.padded_),
            detail::promote<R>(b.root_, b.padded_, r.padded_), r.padded_, zero_);
        return r;
    }

    detail::node_ptr<R> build(std::span<triplet<R>> ts, std::int64_t order,
                              std::int64_t row0, std::int64_t col0) const {
        if (ts.empty()) return nullptr;
        if (order <= leaf_order_) {
            std::vector<R> d(static_cast<std::size_t>(order * order), zero_);
            for (const auto& t : ts)
                d[static_cast<std::size_t>((t.row - row0) * order + (t.col - col0))] = t.value;
            return detail::make_leaf<R>(order, std::move(d));
        }
        const std::int64_t h = order / 2;
        auto top = std::partition(ts.begin(), ts.end(),
                                  [&](const auto& t) { return t.row < row0 + h; });
        auto nw = std::partition(ts.begin(), top,
                                 [&](const auto& t) { return t.col < col0 + h; });
        auto sw = std::partition(top, ts.end(),
                                 [&](const auto& t) { return t.col < col0 + h; });
        return detail::make_split<R>(order,
            build({ts.begin(), nw}, h, row0, col0),
            build({nw, top}, h, row0, col0 + h),
            build({top, sw}, h, row0 + h, col0),
            build({sw, ts.end()}, h, row0 + h, col0 + h));
    }

    std::int64_t rows_, cols_;
    std::int64_t padded_;
    std::int64_t leaf_order_;
    R zero_;
    detail::node_ptr<R> root_;
};

// ---------------------------------------------------------------------------
// diagonal 0/1 selectors and pivot structures
// ---------------------------------------------------------------------------

/// Diagonal 0/1 matrix of a given order stored as a bitset. The complement
/// is the involution I -> 1 - I.
class diag_selector {
public:
    explicit diag_selector(std::int64_t n, bool value = false)
        : bits_(static_cast<std::size_t>(n), value) {}

    std::int64_t order() const { return static_cast<std::int64_t>(bits_.size()); }
    bool get(std::int64_t i) const { return bits_[static_cast<std::size_t>(i)]; }
    void set(std::int64_t i, bool v = true) { bits_[static_cast<std::size_t>(i)] = v; }

    std::int64_t popcount() const {
        return std::count(bits_.begin(), bits_.end(), true);
    }
    std::int64_t range_popcount(std::int64_t lo, std::int64_t hi) const {
        lo = std::max<std::int64_t>(lo, 0);
        hi = std::min<std::int64_t>(hi, order());
        if (lo >= hi) return 0;
        return std::count(bits_.begin() + lo, bits_.begin() + hi, true);
    }

    diag_selector complement() const {
        diag_selector c = *this;
        c.bits_.flip();
        return c;
    }

    friend bool operator==(const diag_selector&, const diag_selector&) = default;

private:
    std::vector<bool> bits_;
};

namespace detail {

// keep = true: zero out rows where the selector bit is clear (I * M);
// row selection applied structurally so untouched subtrees are shared.
template <ring_element R>
node_ptr<R> node_select_rows(const node_ptr<R>& x, std::int64_t order, std::int64_t row0,
                             const diag_selector& sel, const R& zero) {
    if (!x) return nullptr;
    const std::int64_t inside = sel.range_popcount(row0, row0 + order);
    if (inside == 0) return nullptr;
    if (inside == order) return x;
    if (x->is_leaf) {
        std::vector<R> d(x->dense);
        for (std::int64_t i = 0; i < order; ++i)
            if (!sel.get(row0 + i))
                for (std::int64_t j = 0; j < order; ++j)
                    d[static_cast<std::size_t>(i * order + j)] = zero;
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    return make_split<R>(order,
        node_select_rows<R>(x->kid[0], h, row0, sel, zero),
        node_select_rows<R>(x->kid[1], h, row0, sel, zero),
        node_select_rows<R>(x->kid[2], h, row0 + h, sel, zero),
        node_select_rows<R>(x->kid[3], h, row0 + h, sel, zero));
}

template <ring_element R>
node_ptr<R> node_select_cols(const node_ptr<R>& x, std::int64_t order, std::int64_t col0,
                             const diag_selector& sel, const R& zero) {
    if (!x) return nullptr;
    const std::int64_t inside = sel.range_popcount(col0, col0 + order);
    if (inside == 0) return nullptr;
    if (inside == order) return x;
    if (x->is_leaf) {
        std::vector<R> d(x->dense);
        for (std::int64_t j = 0; j < order; ++j)
            if (!sel.get(col0 + j))
                for (std::int64_t i = 0; i < order; ++i)
                    d[static_cast<std::size_t>(i * order + j)] = zero;
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    return make_split<R>(order,
        node_select_cols<R>(x->kid[0], h, col0, sel, zero),
        node_select_cols<R>(x->kid[1], h, col0 + h, sel, zero),
        node_select_cols<R>(x->kid[2], h, col0, sel, zero),
        node_select_cols<R>(x->kid[3], h, col0 + h, sel, zero));
}

} // namespace detail

/// Quadrant q (0=NW 1=NE 2=SW 3=SE) of a full square block matrix
/// (logical shape equal to the padded order).
template <ring_element R>
quad_matrix<R> block_quadrant(const quad_matrix<R>& m, int q) {
    if (m.rows() != m.padded_order() || m.cols() != m.padded_order() || m.padded_order() < 2)
        throw shape_mismatch("quadrant of a non-block matrix");
    const std::int64_t h = m.padded_order() / 2;
    return quad_matrix<R>::from_root(detail::quadrant(m.root(), q, m.zero_element()), h, h,
                                     h, m.zero_element(), m.leaf_order());
}

/// Inverse of block_quadrant: assembles four equally sized square blocks.
template <ring_element R>
quad_matrix<R> block_assemble(const quad_matrix<R>& nw, const quad_matrix<R>& ne,
                              const quad_matrix<R>& sw, const quad_matrix<R>& se) {
    const std::int64_t h = nw.padded_order();
    for (const auto* m : {&nw, &ne, &sw, &se})
        if (m->rows() != h || m->cols() != h || m->padded_order() != h)
            throw shape_mismatch("assembling blocks of unequal order");
    return quad_matrix<R>::from_root(
        detail::make_split<R>(2 * h, nw.root(), ne.root(), sw.root(), se.root()), 2 * h,
        2 * h, 2 * h, nw.zero_element(), nw.leaf_order());
}

/// I_E * M: keeps the selected rows.
template <ring_element R>
quad_matrix<R> select_rows(const diag_selector& sel, const quad_matrix<R>& m) {
    if (sel.order() != m.padded_order()) throw shape_mismatch("selector vs matrix order");
    return quad_matrix<R>::from_root(
        detail::node_select_rows<R>(m.root(), m.padded_order(), 0, sel, m.zero_element()),
        m.rows(), m.cols(), m.padded_order(), m.zero_element(), m.leaf_order());
}

/// M * J_E: keeps the selected columns.
template <ring_element R>
quad_matrix<R> select_cols(const quad_matrix<R>& m, const diag_selector& sel) {
    if (sel.order() != m.padded_order()) throw shape_mismatch("selector vs matrix order");
    return quad_matrix<R>::from_root(
        detail::node_select_cols<R>(m.root(), m.padded_order(), 0, sel, m.zero_element()),
        m.rows(), m.cols(), m.padded_order(), m.zero_element(), m.leaf_order());
}

/// Member of P_n: a 0/1 matrix with at most one unit per row and per column,
/// i.e. rank = number of unit entries. Stored as the set of unit positions.
class pivot_structure {
public:
    pivot_structure() = default;

    explicit pivot_structure(std::vector<std::pair<std::int64_t, std::int64_t>> pivots)
        : piv_(std::move(pivots)) {
        std::sort(piv_.begin(), piv_.end());
        for (std::size_t i = 1; i < piv_.size(); ++i)
            if (piv_[i].first == piv_[i - 1].first)
                throw invalid_spec("two pivots in one row");
        std::vector<std::int64_t> cols;
        for (const auto& [r, c] : piv_) cols.push_back(c);
        std::sort(cols.begin(), cols.end());
        if (std::adjacent_find(cols.begin(), cols.end()) != cols.end())
            throw invalid_spec("two pivots in one column");
    }

    const std::vector<std::pair<std::int64_t, std::int64_t>>& pivots() const { return piv_; }
    std::int64_t rank() const { return static_cast<std::int64_t>(piv_.size()); }

    /// I_E = E E^T: diagonal selector of the pivot rows.
    diag_selector row_selector(std::int64_t n) const {
        diag_selector s(n);
        for (const auto& [r, c] : piv_) s.set(r);
        return s;
    }

    /// J_E = E^T E: diagonal selector of the pivot columns.
    diag_selector col_selector(std::int64_t n) const {
        diag_selector s(n);
        for (const auto& [r, c] : piv_) s.set(c);
        return s;
    }

    template <ring_element R>
    quad_matrix<R> to_matrix(std::int64_t n, const R& zero,
                             std::int64_t leaf_order = default_leaf_order) const {
        std::vector<triplet<R>> ts;
        for (const auto& [r, c] : piv_) ts.push_back({r, c, ring_one(zero)});
        return quad_matrix<R>::from_triplets(n, n, std::move(ts), zero, leaf_order);
    }

    template <ring_element R>
    quad_matrix<R> to_matrix_transposed(std::int64_t n, const R& zero,
                                        std::int64_t leaf_order = default_leaf_order) const {
        std::vector<triplet<R>> ts;
        for (const auto& [r, c] : piv_) ts.push_back({c, r, ring_one(zero)});
        return quad_matrix<R>::from_triplets(n, n, std::move(ts), zero, leaf_order);
    }

    /// Union of four quadrant structures placed at their block offsets.
    static pivot_structure assemble(const pivot_structure& nw, const pivot_structure& ne,
                                    const pivot_structure& sw, const pivot_structure& se,
                                    std::int64_t half) {
        std::vector<std::pair<std::int64_t, std::int64_t>> ps;
        auto push = [&](const pivot_structure& p, std::int64_t dr, std::int64_t dc) {
            for (const auto& [r, c] : p.piv_) ps.emplace_back(r + dr, c + dc);
        };
        push(nw, 0, 0);
        push(ne, 0, half);
        push(sw, half, 0);
        push(se, half, half);
        return pivot_structure(std::move(ps));
    }

    /// Sign of the permutation row -> column; requires rank == order (a full
    /// permutation matrix).
    int permutation_sign() const {
        std::vector<std::int64_t> perm(piv_.size());
        std::vector<std::int64_t> col_rank(piv_.size());
        std::vector<std::int64_t> cols;
        for (const auto& [r, c] : piv_) cols.push_back(c);
        std::sort(cols.begin(), cols.end());
        for (std::size_t i = 0; i < piv_.size(); ++i)
            perm[i] = static_cast<std::int64_t>(
                std::lower_bound(cols.begin(), cols.end(), piv_[i].second) - cols.begin());
        int sign = 1;
        std::vector<bool> seen(perm.size(), false);
        for (std::size_t i = 0; i < perm.size(); ++i) {
            if (seen[i]) continue;
            std::size_t len = 0, j = i;
            while (!seen[j]) {
                seen[j] = true;
                j = static_cast<std::size_t>(perm[j]);
                ++len;
            }
            if (len % 2 == 0) sign = -sign;
        }
        return sign;
    }

    /// Stable serialization, used as the consistency key for CRT runs.
    std::string key() const {
        std::string s;
        for (const auto& [r, c] : piv_)
            s += std::to_string(r) + ":" + std::to_string(c) + ";";
        return s;
    }

    friend bool operator==(const pivot_structure&, const pivot_structure&) = default;

private:
    std::vector<std::pair<std::int64_t, std::int64_t>> piv_;
};

} // namespace qmat
