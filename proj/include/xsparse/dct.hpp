#pragma once

#include "xsparse/matrix.hpp"

namespace xsparse {

inline constexpr int kDctBlockSize = 8;

enum class DctDirection { forward, inverse };

// Orthonormal 2D DCT on an 8x8 block: DCT-II forward, DCT-III inverse.
// Parseval holds (Frobenius norm preserved). Throws on any other size.
Matrix dct2_block(const Matrix& block, DctDirection direction);

}  // namespace xsparse
