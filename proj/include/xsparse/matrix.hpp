#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace xsparse {

// Dense row-major matrix of doubles. All block, image and transform data in
// this library lives in one of these; entry (r, c) is row r (the vertical,
// y direction of an image) and column c (the horizontal, x direction).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0.0) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int r, int c) { return data_[size_t(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[size_t(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int r) { return data_.data() + size_t(r) * cols_; }
    const double* row(int r) const { return data_.data() + size_t(r) * cols_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    // *this += s * m
    void add_scaled(const Matrix& m, double s) {
        require_same_shape(m);
        const double* src = m.data();
        double* dst = data();
        for (std::size_t i = 0; i < data_.size(); ++i) dst[i] += s * src[i];
    }

    // *this += s * col * row^T  (col has rows() entries, row has cols() entries)
    void add_outer_scaled(std::span<const double> col, std::span<const double> row, double s) {
        if (int(col.size()) != rows_ || int(row.size()) != cols_)
            throw std::invalid_argument("Matrix::add_outer_scaled: length mismatch");
        for (int r = 0; r < rows_; ++r) {
            const double f = s * col[size_t(r)];
            double* dst = this->row(r);
            for (int c = 0; c < cols_; ++c) dst[c] += f * row[size_t(c)];
        }
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    void require_same_shape(const Matrix& m) const {
        if (!same_shape(m)) throw std::invalid_argument("Matrix: shape mismatch");
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// <G1, G2>_F = sum_ij G1(i,j) * G2(i,j). Throws on shape mismatch.
double frobenius_inner(const Matrix& g1, const Matrix& g2);

double frobenius_norm_squared(const Matrix& g);
double frobenius_norm(const Matrix& g);

}  // namespace xsparse
