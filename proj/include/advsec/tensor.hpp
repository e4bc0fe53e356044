#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "advsec/error.hpp"

namespace advsec {

enum class Norm { l1, l2, linf };

/// Immutable numeric array, dense or sparse (compressed rows).
///
/// Sparse storage keeps sorted column indices and no explicit zeros, so a
/// sparse tensor and its densified twin are logically interchangeable.
/// Every stored value is finite; factories reject NaN/Inf.
class Tensor {
public:
    Tensor() = default;

    static Tensor dense(std::vector<std::size_t> shape, std::vector<double> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.dense_ = std::move(values);
        if (t.shape_.empty() || t.shape_.size() > 2)
            throw ShapeError("tensor rank must be 1 or 2, got " + std::to_string(t.shape_.size()));
        if (element_count(t.shape_) != t.dense_.size())
            throw ShapeError("value count " + std::to_string(t.dense_.size()) +
                             " does not match shape product " +
                             std::to_string(element_count(t.shape_)));
        check_finite(t.dense_);
        return t;
    }

    /// 1-D dense tensor.
    static Tensor vector(std::vector<double> values) {
        const std::size_t n = values.size();
        return dense({n}, std::move(values));
    }

    static Tensor zeros(std::vector<std::size_t> shape) {
        const std::size_t n = element_count(shape);
        return dense(std::move(shape), std::vector<double>(n, 0.0));
    }

    /// Sparse matrix in compressed-row form. Column indices must be strictly
    /// increasing within each row; explicit zeros are dropped.
    static Tensor sparse_csr(std::size_t rows, std::size_t cols,
                             std::vector<std::size_t> row_ptr,
                             std::vector<std::size_t> col_idx,
                             std::vector<double> values) {
        if (row_ptr.size() != rows + 1)
            throw ShapeError("row_ptr length must be rows + 1");
        if (row_ptr.front() != 0 || row_ptr.back() != col_idx.size() ||
            col_idx.size() != values.size())
            throw ShapeError("inconsistent CSR index arrays");
        check_finite(values);

        Tensor t;
        t.shape_ = {rows, cols};
        t.sparse_ = true;
        t.row_ptr_.assign(rows + 1, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            if (row_ptr[r] > row_ptr[r + 1])
                throw ShapeError("row_ptr must be non-decreasing");
            std::size_t prev_col = 0;
            bool first = true;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                if (col_idx[k] >= cols)
                    throw ShapeError("column index out of range in row " + std::to_string(r));
                if (!first && col_idx[k] <= prev_col)
                    throw ShapeError("column indices must be strictly increasing in row " +
                                     std::to_string(r));
                first = false;
                prev_col = col_idx[k];
                if (values[k] == 0.0) continue;  // no explicit zeros
                t.col_idx_.push_back(col_idx[k]);
                t.nz_.push_back(values[k]);
            }
            t.row_ptr_[r + 1] = t.col_idx_.size();
        }
        return t;
    }

    /// Sparse 1-D tensor (stored as a single compressed row).
    static Tensor sparse_vector(std::size_t n, std::vector<std::size_t> indices,
                                std::vector<double> values) {
        std::vector<std::size_t> row_ptr = {0, indices.size()};
        Tensor t = sparse_csr(1, n, std::move(row_ptr), std::move(indices), std::move(values));
        t.shape_ = {n};
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t size() const { return element_count(shape_); }
    bool is_sparse() const { return sparse_; }
    std::size_t nnz() const { return sparse_ ? nz_.size() : dense_.size(); }

    double at(std::size_t i) const {
        require_rank(1);
        require(i < shape_[0], "index out of range");
        if (!sparse_) return dense_[i];
        return sparse_lookup(0, i);
    }

    double at(std::size_t i, std::size_t j) const {
        require_rank(2);
        require(i < shape_[0] && j < shape_[1], "index out of range");
        if (!sparse_) return dense_[i * shape_[1] + j];
        return sparse_lookup(i, j);
    }

    /// Row i of a matrix, preserving the storage kind.
    Tensor row(std::size_t i) const {
        require_rank(2);
        require(i < shape_[0], "row index out of range");
        const std::size_t cols = shape_[1];
        if (!sparse_) {
            std::vector<double> v(dense_.begin() + i * cols, dense_.begin() + (i + 1) * cols);
            return vector(std::move(v));
        }
        std::vector<std::size_t> idx(col_idx_.begin() + row_ptr_[i],
                                     col_idx_.begin() + row_ptr_[i + 1]);
        std::vector<double> vals(nz_.begin() + row_ptr_[i], nz_.begin() + row_ptr_[i + 1]);
        return sparse_vector(cols, std::move(idx), std::move(vals));
    }

    Tensor to_dense() const {
        if (!sparse_) return *this;
        Tensor t;
        t.shape_ = shape_;
        t.dense_.assign(size(), 0.0);
        const std::size_t cols = ndim() == 2 ? shape_[1] : shape_[0];
        const std::size_t rows = ndim() == 2 ? shape_[0] : 1;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                t.dense_[r * cols + col_idx_[k]] = nz_[k];
        return t;
    }

    Tensor to_sparse() const {
        if (sparse_) return *this;
        const std::size_t rows = ndim() == 2 ? shape_[0] : 1;
        const std::size_t cols = ndim() == 2 ? shape_[1] : shape_[0];
        std::vector<std::size_t> row_ptr(rows + 1, 0), col_idx;
        std::vector<double> vals;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const double v = dense_[r * cols + c];
                if (v != 0.0) {
                    col_idx.push_back(c);
                    vals.push_back(v);
                }
            }
            row_ptr[r + 1] = col_idx.size();
        }
        Tensor t = sparse_csr(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(vals));
        t.shape_ = shape_;
        return t;
    }

    /// Row-major flattened copy of all elements.
    std::vector<double> to_dense_vector() const {
        if (!sparse_) return dense_;
        return to_dense().dense_;
    }

    /// Direct access to dense storage; only valid for dense tensors.
    const std::vector<double>& dense_values() const {
        if (sparse_) throw ShapeError("dense_values() called on a sparse tensor");
        return dense_;
    }

    /// Visit nonzeros of a 1-D tensor as (index, value).
    template <class F>
    void for_each_nonzero(F&& f) const {
        require_rank(1);
        if (sparse_) {
            for (std::size_t k = row_ptr_[0]; k < row_ptr_[1]; ++k) f(col_idx_[k], nz_[k]);
        } else {
            for (std::size_t i = 0; i < dense_.size(); ++i)
                if (dense_[i] != 0.0) f(i, dense_[i]);
        }
    }

private:
    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t e : shape) n *= e;
        return shape.empty() ? 0 : n;
    }

    static void check_finite(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!std::isfinite(v[i]))
                throw InvalidValueError("non-finite value at flat index " + std::to_string(i));
    }

    void require_rank(std::size_t r) const {
        if (ndim() != r)
            throw ShapeError("expected rank-" + std::to_string(r) + " tensor, got rank " +
                             std::to_string(ndim()));
    }

    static void require(bool cond, const char* msg) {
        if (!cond) throw ShapeError(msg);
    }

    double sparse_lookup(std::size_t r, std::size_t c) const {
        const auto first = col_idx_.begin() + row_ptr_[r];
        const auto last = col_idx_.begin() + row_ptr_[r + 1];
        const auto it = std::lower_bound(first, last, c);
        if (it != last && *it == c) return nz_[it - col_idx_.begin()];
        return 0.0;
    }

    std::vector<std::size_t> shape_;
    bool sparse_ = false;
    std::vector<double> dense_;
    std::vector<std::size_t> row_ptr_, col_idx_;
    std::vector<double> nz_;
};

/// Dot product of a 1-D tensor with a dense coefficient vector.
/// Exploits sparsity: only stored nonzeros are touched.
inline double dot(const Tensor& x, const std::vector<double>& w) {
    if (x.ndim() != 1 || x.size() != w.size())
        throw ShapeError("dot: dimension mismatch");
    double s = 0.0;
    x.for_each_nonzero([&](std::size_t i, double v) { s += v * w[i]; });
    return s;
}

/// Squared Euclidean distance between a 1-D tensor and a dense vector.
inline double squared_distance(const Tensor& x, const std::vector<double>& y) {
    if (x.ndim() != 1 || x.size() != y.size())
        throw ShapeError("squared_distance: dimension mismatch");
    // ||x - y||^2 = ||x||^2 - 2 x.y + ||y||^2 keeps sparse x cheap.
    double xx = 0.0, xy = 0.0;
    x.for_each_nonzero([&](std::size_t i, double v) {
        xx += v * v;
        xy += v * y[i];
    });
    double yy = 0.0;
    for (double v : y) yy += v * v;
    double d = xx - 2.0 * xy + yy;
    return d > 0.0 ? d : 0.0;
}

/// lp norm of a 1-D tensor for p in {1, 2, inf}.
inline double norm(const Tensor& x, Norm p) {
    if (x.ndim() != 1) throw ShapeError("norm expects a 1-D tensor");
    double acc = 0.0;
    switch (p) {
        case Norm::l1:
            x.for_each_nonzero([&](std::size_t, double v) { acc += std::abs(v); });
            return acc;
        case Norm::l2: {
            // Scale by the largest magnitude so subnormal inputs don't underflow to 0.
            double scale = 0.0;
            x.for_each_nonzero([&](std::size_t, double v) { scale = std::max(scale, std::abs(v)); });
            if (scale == 0.0) return 0.0;
            x.for_each_nonzero([&](std::size_t, double v) { acc += (v / scale) * (v / scale); });
            return scale * std::sqrt(acc);
        }
        case Norm::linf:
            x.for_each_nonzero([&](std::size_t, double v) { acc = std::max(acc, std::abs(v)); });
            return acc;
    }
    throw InvalidArgumentError("unsupported norm order");
}

inline const char* norm_name(Norm p) {
    switch (p) {
        case Norm::l1: return "l1";
        case Norm::l2: return "l2";
        case Norm::linf: return "linf";
    }
    return "?";
}

}  // namespace advsec
