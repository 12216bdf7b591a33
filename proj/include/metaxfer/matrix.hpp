#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace metaxfer {

// Dense row-major matrix of doubles. NaN entries encode missing values in
// pre-imputation feature tables.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }

    double* row_ptr(size_t r) { return data.data() + r * cols; }
    const double* row_ptr(size_t r) const { return data.data() + r * cols; }

    std::span<const double> row(size_t r) const { return {row_ptr(r), cols}; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool operator==(const Matrix& other) const = default;
};

// Rows of `m` listed by `indices`, in order.
inline Matrix take_rows(const Matrix& m, std::span<const size_t> indices) {
    Matrix out(indices.size(), m.cols);
    for (size_t i = 0; i < indices.size(); ++i) {
        const double* src = m.row_ptr(indices[i]);
        double* dst = out.row_ptr(i);
        for (size_t c = 0; c < m.cols; ++c) dst[c] = src[c];
    }
    return out;
}

}  // namespace metaxfer
