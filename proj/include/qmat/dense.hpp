#pragma once

#include <cstdint>
#include <vector>

#include "qmat/errors.hpp"
#include "qmat/rings.hpp"

namespace qmat {

/// Plain row-major dense matrix. Used for quadtree leaves, file I/O and as
/// the exchange type for test oracles; all heavy algebra lives on the
/// quadtree representation.
template <ring_element R>
class dense_matrix {
public:
    dense_matrix() : rows_(0), cols_(0) {}
    dense_matrix(std::int64_t rows, std::int64_t cols, const R& fill)
        : rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(rows * cols), fill) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }

    R& at(std::int64_t i, std::int64_t j) {
        return data_[static_cast<std::size_t>(i * cols_ + j)];
    }
    const R& at(std::int64_t i, std::int64_t j) const {
        return data_[static_cast<std::size_t>(i * cols_ + j)];
    }

    std::vector<R>& data() { return data_; }
    const std::vector<R>& data() const { return data_; }

    friend bool operator==(const dense_matrix& a, const dense_matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::int64_t rows_, cols_;
    std::vector<R> data_;
};

} // namespace qmat
