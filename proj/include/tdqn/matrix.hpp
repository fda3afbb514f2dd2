#pragma once

#include <cstddef>
#include <vector>

#include "tdqn/error.hpp"

namespace tdqn {

// Dense row-major matrix of doubles. Deliberately minimal: the network code
// needs plain storage plus three multiply shapes, nothing more.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    void resize(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, 0.0);
    }

    void fill(double value) { data_.assign(data_.size(), value); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// out = a * b, shapes [m x k] [k x n].
inline void matmul(Matrix& out, const Matrix& a, const Matrix& b) {
    TDQN_INVARIANT(a.cols() == b.rows(), "matmul shape mismatch");
    out.resize(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t i = 0; i < m; ++i) {
        double* out_row = out.row(i);
        const double* a_row = a.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a_row[p];
            if (av == 0.0) continue;
            const double* b_row = b.row(p);
            for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
        }
    }
}

// out = a * b^T, shapes [m x k] [n x k].
inline void matmul_tb(Matrix& out, const Matrix& a, const Matrix& b) {
    TDQN_INVARIANT(a.cols() == b.cols(), "matmul_tb shape mismatch");
    out.resize(a.rows(), b.rows());
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = a.row(i);
        double* out_row = out.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* b_row = b.row(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
            out_row[j] = acc;
        }
    }
}

// out = a^T * b, shapes [k x m] [k x n].
inline void matmul_ta(Matrix& out, const Matrix& a, const Matrix& b) {
    TDQN_INVARIANT(a.rows() == b.rows(), "matmul_ta shape mismatch");
    out.resize(a.cols(), b.cols());
    const std::size_t m = a.cols(), k = a.rows(), n = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* a_row = a.row(p);
        const double* b_row = b.row(p);
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a_row[i];
            if (av == 0.0) continue;
            double* out_row = out.row(i);
            for (std::size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
        }
    }
}

}  // namespace tdqn
