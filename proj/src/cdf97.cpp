#include "xsparse/cdf97.hpp"

#include <stdexcept>
#include <vector>

#include "xsparse/image.hpp"

namespace xsparse {

const LiftingConstants& cdf97_constants() {
    static const LiftingConstants k{
        -1.5861343420599236,  // alpha
        -0.052980118572961415, // beta
        0.88291107553093330,  // gamma
        0.44350685204397115,  // delta
        1.1496043988602412,   // zeta
    };
    return k;
}

int max_wavelet_levels(int width, int height) {
    int m = std::min(width, height);
    int levels = 0;
    while (m >= 2) {
        m >>= 1;
        ++levels;
    }
    return levels;
}

namespace {

// In-place lifting of one interleaved signal x[0..n-1], n >= 2. Boundary
// neighbours mirror about the end samples (whole-sample symmetric), which
// keeps every step exactly invertible for both parities of n.
void lift_forward(double* x, int n, const LiftingConstants& k) {
    auto mirror = [n](int i) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
    for (int j = 1; j < n; j += 2) x[j] += k.alpha * (x[j - 1] + x[mirror(j + 1)]);
    for (int j = 0; j < n; j += 2) x[j] += k.beta * (x[mirror(j - 1)] + x[mirror(j + 1)]);
    for (int j = 1; j < n; j += 2) x[j] += k.gamma * (x[j - 1] + x[mirror(j + 1)]);
    for (int j = 0; j < n; j += 2) x[j] += k.delta * (x[mirror(j - 1)] + x[mirror(j + 1)]);
    for (int j = 0; j < n; j += 2) x[j] *= k.zeta;
    for (int j = 1; j < n; j += 2) x[j] /= k.zeta;
}

void lift_inverse(double* x, int n, const LiftingConstants& k) {
    auto mirror = [n](int i) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
    for (int j = 1; j < n; j += 2) x[j] *= k.zeta;
    for (int j = 0; j < n; j += 2) x[j] /= k.zeta;
    for (int j = 0; j < n; j += 2) x[j] -= k.delta * (x[mirror(j - 1)] + x[mirror(j + 1)]);
    for (int j = 1; j < n; j += 2) x[j] -= k.gamma * (x[j - 1] + x[mirror(j + 1)]);
    for (int j = 0; j < n; j += 2) x[j] -= k.beta * (x[mirror(j - 1)] + x[mirror(j + 1)]);
    for (int j = 1; j < n; j += 2) x[j] -= k.alpha * (x[j - 1] + x[mirror(j + 1)]);
}

// scratch holds the interleaved signal; approx samples move to the front.
void forward_1d(std::vector<double>& scratch, int n, const LiftingConstants& k) {
    lift_forward(scratch.data(), n, k);
    std::vector<double> packed(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < n; i += 2) packed[size_t(i / 2)] = scratch[size_t(i)];
    for (int i = 1; i < n; i += 2) packed[size_t(half + i / 2)] = scratch[size_t(i)];
    std::copy(packed.begin(), packed.begin() + n, scratch.begin());
}

void inverse_1d(std::vector<double>& scratch, int n, const LiftingConstants& k) {
    std::vector<double> interleaved(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < n; i += 2) interleaved[size_t(i)] = scratch[size_t(i / 2)];
    for (int i = 1; i < n; i += 2) interleaved[size_t(i)] = scratch[size_t(half + i / 2)];
    std::copy(interleaved.begin(), interleaved.begin() + n, scratch.begin());
    lift_inverse(scratch.data(), n, k);
}

void check_levels(const Matrix& arr, const WaveletSpec& spec) {
    if (spec.levels < 1) throw std::invalid_argument("cdf97: levels must be >= 1");
    if (spec.levels > max_wavelet_levels(arr.cols(), arr.rows()))
        throw std::invalid_argument("cdf97: levels exceeds log2 of the smallest dimension");
}

}  // namespace

Matrix cdf97_forward(const Matrix& arr, const WaveletSpec& spec) {
    check_levels(arr, spec);
    Matrix out = arr;
    std::vector<double> scratch(static_cast<std::size_t>(std::max(out.rows(), out.cols())));
    int h = out.rows(), w = out.cols();
    for (int level = 0; level < spec.levels; ++level) {
        for (int r = 0; r < h; ++r) {
            double* row = out.row(r);
            std::copy(row, row + w, scratch.begin());
            forward_1d(scratch, w, spec.lifting);
            std::copy(scratch.begin(), scratch.begin() + w, row);
        }
        for (int c = 0; c < w; ++c) {
            for (int r = 0; r < h; ++r) scratch[size_t(r)] = out(r, c);
            forward_1d(scratch, h, spec.lifting);
            for (int r = 0; r < h; ++r) out(r, c) = scratch[size_t(r)];
        }
        h = (h + 1) / 2;
        w = (w + 1) / 2;
    }
    return out;
}

Matrix cdf97_inverse(const Matrix& arr, const WaveletSpec& spec) {
    check_levels(arr, spec);
    Matrix out = arr;
    std::vector<double> scratch(static_cast<std::size_t>(std::max(out.rows(), out.cols())));

    std::vector<std::pair<int, int>> dims;  // (h, w) per level, outermost first
    int h = out.rows(), w = out.cols();
    for (int level = 0; level < spec.levels; ++level) {
        dims.emplace_back(h, w);
        h = (h + 1) / 2;
        w = (w + 1) / 2;
    }
    for (int level = spec.levels - 1; level >= 0; --level) {
        auto [lh, lw] = dims[size_t(level)];
        for (int c = 0; c < lw; ++c) {
            for (int r = 0; r < lh; ++r) scratch[size_t(r)] = out(r, c);
            inverse_1d(scratch, lh, spec.lifting);
            for (int r = 0; r < lh; ++r) out(r, c) = scratch[size_t(r)];
        }
        for (int r = 0; r < lh; ++r) {
            double* row = out.row(r);
            std::copy(row, row + lw, scratch.begin());
            inverse_1d(scratch, lw, spec.lifting);
            std::copy(scratch.begin(), scratch.begin() + lw, row);
        }
    }
    return out;
}

ImageArray cdf97_forward(const ImageArray& arr, const WaveletSpec& spec) {
    return ImageArray(cdf97_forward(arr.values, spec), arr.bit_depth);
}

ImageArray cdf97_inverse(const ImageArray& arr, const WaveletSpec& spec) {
    return ImageArray(cdf97_inverse(arr.values, spec), arr.bit_depth);
}

}  // namespace xsparse
