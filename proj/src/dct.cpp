#include "xsparse/dct.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xsparse {

namespace {

// Row k holds the k-th orthonormal DCT-II basis vector.
const Matrix& dct_basis() {
    static const Matrix basis = [] {
        const int n = kDctBlockSize;
        Matrix c(n, n);
        for (int k = 0; k < n; ++k) {
            const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (int i = 0; i < n; ++i)
                c(k, i) = s * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
        }
        return c;
    }();
    return basis;
}

}  // namespace

Matrix dct2_block(const Matrix& block, DctDirection direction) {
    const int n = kDctBlockSize;
    if (block.rows() != n || block.cols() != n)
        throw std::invalid_argument("dct2_block: block must be 8x8");
    const Matrix& c = dct_basis();

    // forward: C * X * C^T;  inverse: C^T * Y * C
    Matrix tmp(n, n);
    Matrix out(n, n);
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += (direction == DctDirection::forward ? c(r, i) : c(i, r)) * block(i, j);
            tmp(r, j) = acc;
        }
    }
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += tmp(r, i) * (direction == DctDirection::forward ? c(j, i) : c(i, j));
            out(r, j) = acc;
        }
    }
    return out;
}

}  // namespace xsparse
