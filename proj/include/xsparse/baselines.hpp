#pragma once

#include "xsparse/image.hpp"
#include "xsparse/metrics.hpp"

namespace xsparse {

struct BaselineResult {
    QualityReport report;
    ImageArray reconstruction;
    long long kept_coefficients = 0;
};

// Whole-image CDF 9/7 transform, then the smallest magnitude-ordered
// coefficient set whose rounded reconstruction meets the PSNR target, found
// by bisection on the kept count with a +-1 fine adjustment at the boundary.
// No band is exempt from thresholding. A +inf target keeps every nonzero
// coefficient. Throws TargetUnreachableError when even the full set misses.
BaselineResult dwt_threshold_baseline(const ImageArray& image, double psnr_target_db, int levels);

// 8x8 block DCT of the intensity image with coefficients ranked globally by
// magnitude across all blocks. The orthonormal DCT makes the pre-rounding
// pixel MSE equal the discarded coefficient energy over N, so the kept count
// comes from exact energy bookkeeping and is then verified in the pixel
// domain after rounding.
BaselineResult dct_threshold_baseline(const ImageArray& image, double psnr_target_db);

}  // namespace xsparse
