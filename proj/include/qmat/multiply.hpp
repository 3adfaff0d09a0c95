#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "qmat/executor.hpp"
#include "qmat/quadtree.hpp"

// Recursive standard multiplication with fused accumulation (D = A*B + C,
// splitting into the eight half-order sub-products) and Strassen's seven-
// multiplication scheme. Over exact domains both produce bit-identical
// results; the density switch picks between them because block additions
// densify sparse operands until standard recursion wins.

namespace qmat {

enum class mul_algorithm { standard, strassen, auto_select };

struct mul_config {
    std::int64_t strassen_min_order = 128;
    double density_boundary = 0.3;
    mul_algorithm algorithm = mul_algorithm::auto_select;
};

namespace detail {

inline void validate(const mul_config& cfg, std::int64_t leaf_order) {
    if (cfg.strassen_min_order < 2 * leaf_order ||
        std::popcount(static_cast<std::uint64_t>(cfg.strassen_min_order)) != 1)
        throw invalid_spec("strassen_min_order must be a power of two >= twice the leaf order");
    if (!(cfg.density_boundary > 0.0 && cfg.density_boundary <= 1.0))
        throw invalid_spec("density_boundary must lie in (0,1]");
}

template <ring_element R>
std::vector<R> to_dense_vec(const node_ptr<R>& x, std::int64_t order, const R& zero) {
    std::vector<R> d(static_cast<std::size_t>(order * order), zero);
    node_visit<R>(x, 0, 0, [&](std::int64_t i, std::int64_t j, const R& v) {
        d[static_cast<std::size_t>(i * order + j)] = v;
    });
    return d;
}

template <ring_element R>
node_ptr<R> node_mul_acc(const node_ptr<R>& a, const node_ptr<R>& b, const node_ptr<R>& c,
                         std::int64_t order, const R& zero, executor& ex) {
    if (!a || !b) return c;
    if (a->is_leaf && b->is_leaf) {
        std::vector<R> d = to_dense_vec<R>(c, order, zero);
        for (std::int64_t i = 0; i < order; ++i)
            for (std::int64_t k = 0; k < order; ++k) {
                const R& aik = a->dense[static_cast<std::size_t>(i * order + k)];
                if (is_zero(aik)) continue;
                const R* brow = &b->dense[static_cast<std::size_t>(k * order)];
                R* drow = &d[static_cast<std::size_t>(i * order)];
                for (std::int64_t j = 0; j < order; ++j)
                    drow[j] += aik * brow[j];
            }
        return make_leaf<R>(order, std::move(d));
    }
    const std::int64_t h = order / 2;
    std::array<node_ptr<R>, 4> r;
    auto compute = [&](int i, int j) {
        node_ptr<R> acc = node_mul_acc<R>(quadrant(a, 2 * i + 1, zero), quadrant(b, 2 + j, zero),
                                          quadrant(c, 2 * i + j, zero), h, zero, ex);
        r[static_cast<std::size_t>(2 * i + j)] =
            node_mul_acc<R>(quadrant(a, 2 * i, zero), quadrant(b, j, zero), acc, h, zero, ex);
    };
    if (ex.should_spawn(order)) {
        std::array<std::function<void()>, 4> tasks = {
            [&] { compute(0, 0); }, [&] { compute(0, 1); },
            [&] { compute(1, 0); }, [&] { compute(1, 1); }};
        ex.invoke(tasks);
    } else {
        compute(0, 0);
        compute(0, 1);
        compute(1, 0);
        compute(1, 1);
    }
    return make_split<R>(order, std::move(r[0]), std::move(r[1]), std::move(r[2]),
                         std::move(r[3]));
}

template <ring_element R>
node_ptr<R> node_strassen(const node_ptr<R>& a, const node_ptr<R>& b, std::int64_t order,
                          const R& zero, std::int64_t min_order, executor& ex) {
    if (!a || !b) return nullptr;
    if (order < min_order || a->is_leaf || b->is_leaf)
        return node_mul_acc<R>(a, b, nullptr, order, zero, ex);
    const std::int64_t h = order / 2;
    auto add = [&](const node_ptr<R>& x, const node_ptr<R>& y) {
        return node_combine<R, false>(x, y, h, zero);
    };
    auto sub = [&](const node_ptr<R>& x, const node_ptr<R>& y) {
        return node_combine<R, true>(x, y, h, zero);
    };
    const node_ptr<R> a0 = quadrant(a, 0, zero), a1 = quadrant(a, 1, zero),
                      a2 = quadrant(a, 2, zero), a3 = quadrant(a, 3, zero);
    const node_ptr<R> b0 = quadrant(b, 0, zero), b1 = quadrant(b, 1, zero),
                      b2 = quadrant(b, 2, zero), b3 = quadrant(b, 3, zero);
    std::array<node_ptr<R>, 7> p;
    std::array<std::function<void()>, 7> tasks = {
        [&] { p[0] = node_strassen<R>(add(a0, a3), add(b0, b3), h, zero, min_order, ex); },
        [&] { p[1] = node_strassen<R>(add(a2, a3), b0, h, zero, min_order, ex); },
        [&] { p[2] = node_strassen<R>(a0, sub(b1, b3), h, zero, min_order, ex); },
        [&] { p[3] = node_strassen<R>(a3, sub(b2, b0), h, zero, min_order, ex); },
        [&] { p[4] = node_strassen<R>(add(a0, a1), b3, h, zero, min_order, ex); },
        [&] { p[5] = node_strassen<R>(sub(a2, a0), add(b0, b1), h, zero, min_order, ex); },
        [&] { p[6] = node_strassen<R>(sub(a1, a3), add(b2, b3), h, zero, min_order, ex); }};
    if (ex.should_spawn(order)) {
        ex.invoke(tasks);
    } else {
        for (auto& t : tasks) t();
    }
    return make_split<R>(order,
        add(sub(add(p[0], p[3]), p[4]), p[6]),
        add(p[2], p[4]),
        add(p[1], p[3]),
        add(sub(p[0], p[1]), add(p[2], p[5])));
}

} // namespace detail

/// Deterministic algorithm switch: Strassen pays off only for operands that
/// are both large and dense enough.
template <ring_element R>
mul_algorithm choose_algorithm(const quad_matrix<R>& a, const quad_matrix<R>& b,
                               const mul_config& cfg = {}) {
    detail::validate(cfg, std::max(a.leaf_order(), b.leaf_order()));
    const std::int64_t order = std::max(a.padded_order(), b.padded_order());
    const double dens = std::min(a.density(), b.density());
    return (dens >= cfg.density_boundary && order >= cfg.strassen_min_order)
               ? mul_algorithm::strassen
               : mul_algorithm::standard;
}

/// D = A*B + C over the ring. C may be the zero matrix of any shape; a
/// nonzero C must match the product shape.
template <ring_element R>
quad_matrix<R> multiply_accumulate(const quad_matrix<R>& a, const quad_matrix<R>& b,
                                   const quad_matrix<R>& c, const mul_config& cfg = {},
                                   executor& ex = serial_executor()) {
    detail::validate(cfg, std::max(a.leaf_order(), b.leaf_order()));
    if (a.cols() != b.rows())
        throw shape_mismatch("product inner dimensions " + std::to_string(a.cols()) +
                             " vs " + std::to_string(b.rows()));
    if (!c.is_zero_matrix() && (c.rows() != a.rows() || c.cols() != b.cols()))
        throw shape_mismatch("accumulator shape does not match the product");

    const std::int64_t p =
        std::max({a.padded_order(), b.padded_order(), c.padded_order()});
    auto ar = detail::promote<R>(a.root(), a.padded_order(), p);
    auto br = detail::promote<R>(b.root(), b.padded_order(), p);
    auto cr = detail::promote<R>(c.root(), c.padded_order(), p);

    mul_algorithm alg = cfg.algorithm == mul_algorithm::auto_select
                            ? choose_algorithm(a, b, cfg)
                            : cfg.algorithm;
    detail::node_ptr<R> root;
    if (alg == mul_algorithm::strassen) {
        root = detail::node_strassen<R>(ar, br, p, a.zero_element(),
                                        cfg.strassen_min_order, ex);
        root = detail::node_combine<R, false>(root, cr, p, a.zero_element());
    } else {
        root = detail::node_mul_acc<R>(ar, br, cr, p, a.zero_element(), ex);
    }
    return quad_matrix<R>::from_root(std::move(root), a.rows(), b.cols(), p,
                                     a.zero_element(), a.leaf_order());
}

template <ring_element R>
quad_matrix<R> multiply(const quad_matrix<R>& a, const quad_matrix<R>& b,
                        const mul_config& cfg = {}, executor& ex = serial_executor()) {
    return multiply_accumulate(a, b, quad_matrix<R>(a.rows(), b.cols(), a.zero_element()),
                               cfg, ex);
}

/// Strassen path, bit-identical to multiply_accumulate(a, b, 0) on exact
/// domains. Pre: square operands of one padded order.
template <ring_element R>
quad_matrix<R> multiply_strassen(const quad_matrix<R>& a, const quad_matrix<R>& b,
                                 const mul_config& cfg = {},
                                 executor& ex = serial_executor()) {
    detail::validate(cfg, std::max(a.leaf_order(), b.leaf_order()));
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw shape_mismatch("Strassen multiplication expects equal square operands");
    const std::int64_t p = std::max(a.padded_order(), b.padded_order());
    auto root = detail::node_strassen<R>(detail::promote<R>(a.root(), a.padded_order(), p),
                                         detail::promote<R>(b.root(), b.padded_order(), p),
                                         p, a.zero_element(), cfg.strassen_min_order, ex);
    return quad_matrix<R>::from_root(std::move(root), a.rows(), b.cols(), p,
                                     a.zero_element(), a.leaf_order());
}

} // namespace qmat
