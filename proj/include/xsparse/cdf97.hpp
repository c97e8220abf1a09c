#pragma once

#include "xsparse/image.hpp"
#include "xsparse/matrix.hpp"

namespace xsparse {

// CDF 9/7 lifting constants (Daubechies-Sweldens factorization). zeta scales
// the approximation samples so a constant signal gains sqrt(2) per level,
// which keeps the transform close to energy preserving.
struct LiftingConstants {
    double alpha;
    double beta;
    double gamma;
    double delta;
    double zeta;
};

const LiftingConstants& cdf97_constants();

enum class BoundaryRule { whole_sample_symmetric };

struct WaveletSpec {
    int levels = 5;
    BoundaryRule boundary = BoundaryRule::whole_sample_symmetric;
    LiftingConstants lifting = cdf97_constants();
};

// Largest admissible decomposition depth: floor(log2(min(width, height))).
int max_wavelet_levels(int width, int height);

// Multilevel separable 2D forward transform, rows then columns per level.
// Subband layout is recursive: the approximation occupies the top-left
// ceil(h/2) x ceil(w/2) corner of each level. Odd lengths are handled by the
// symmetric boundary rule. Throws std::invalid_argument when levels exceeds
// max_wavelet_levels.
Matrix cdf97_forward(const Matrix& arr, const WaveletSpec& spec);
ImageArray cdf97_forward(const ImageArray& arr, const WaveletSpec& spec);

// Exact inverse of cdf97_forward under the same spec. No rounding or clamping
// is performed here. A spec mismatch with the forward pass is undetectable.
Matrix cdf97_inverse(const Matrix& arr, const WaveletSpec& spec);
ImageArray cdf97_inverse(const ImageArray& arr, const WaveletSpec& spec);

}  // namespace xsparse
