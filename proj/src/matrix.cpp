#include "xsparse/matrix.hpp"

#include <cmath>

namespace xsparse {

double frobenius_inner(const Matrix& g1, const Matrix& g2) {
    if (!g1.same_shape(g2)) throw std::invalid_argument("frobenius_inner: shape mismatch");
    const double* a = g1.data();
    const double* b = g2.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < g1.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double frobenius_norm_squared(const Matrix& g) {
    const double* a = g.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += a[i] * a[i];
    return acc;
}

double frobenius_norm(const Matrix& g) { return std::sqrt(frobenius_norm_squared(g)); }

}  // namespace xsparse
