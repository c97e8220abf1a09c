#include "xsparse/image.hpp"

#include <cmath>
#include <stdexcept>

namespace xsparse {

bool ImageArray::is_intensity() const {
    const double hi = max_intensity();
    for (int r = 0; r < height; ++r) {
        const double* row = values.row(r);
        for (int c = 0; c < width; ++c) {
            double v = row[c];
            if (!(v >= 0.0 && v <= hi)) return false;
            if (v != std::floor(v)) return false;
        }
    }
    return true;
}

ImageArray round_to_intensity(const Matrix& values, int bit_depth) {
    ImageArray out(values.cols(), values.rows(), bit_depth);
    const double hi = out.max_intensity();
    for (int r = 0; r < values.rows(); ++r) {
        const double* src = values.row(r);
        double* dst = out.values.row(r);
        for (int c = 0; c < values.cols(); ++c) {
            double v = std::round(src[c]);  // halves away from zero
            if (v < 0.0) v = 0.0;
            if (v > hi) v = hi;
            dst[c] = v;
        }
    }
    return out;
}

BlockPartition partition(const Matrix& arr, int block_size, PadPolicy pad) {
    if (arr.rows() == 0 || arr.cols() == 0) throw std::invalid_argument("partition: empty array");
    if (block_size < 2) throw std::invalid_argument("partition: block size must be >= 2");
    if (block_size > arr.cols() && block_size > arr.rows())
        throw std::invalid_argument("partition: block size exceeds both image dimensions");

    const int grid_rows = (arr.rows() + block_size - 1) / block_size;
    const int grid_cols = (arr.cols() + block_size - 1) / block_size;
    BlockPartition p(block_size, grid_rows, grid_cols, arr.cols(), arr.rows(), pad);

    for (int br = 0; br < grid_rows; ++br) {
        for (int bc = 0; bc < grid_cols; ++bc) {
            Matrix& blk = p.block(br * grid_cols + bc);
            const int r0 = br * block_size;
            const int c0 = bc * block_size;
            const int rn = std::min(block_size, arr.rows() - r0);
            const int cn = std::min(block_size, arr.cols() - c0);
            for (int r = 0; r < rn; ++r) {
                const double* src = arr.row(r0 + r) + c0;
                double* dst = blk.row(r);
                for (int c = 0; c < cn; ++c) dst[c] = src[c];
                // remaining entries stay at the zero fill
            }
        }
    }
    return p;
}

BlockPartition partition(const ImageArray& arr, int block_size, PadPolicy pad) {
    return partition(arr.values, block_size, pad);
}

Matrix assemble(const BlockPartition& p) {
    const int nb = p.block_size();
    Matrix out(p.original_height(), p.original_width());
    for (int br = 0; br < p.grid_rows(); ++br) {
        for (int bc = 0; bc < p.grid_cols(); ++bc) {
            const Matrix& blk = p.block(br * p.grid_cols() + bc);
            if (blk.rows() != nb || blk.cols() != nb)
                throw std::logic_error("assemble: block has been resized");
            const int r0 = br * nb;
            const int c0 = bc * nb;
            const int rn = std::min(nb, out.rows() - r0);
            const int cn = std::min(nb, out.cols() - c0);
            for (int r = 0; r < rn; ++r) {
                const double* src = blk.row(r);
                double* dst = out.row(r0 + r) + c0;
                for (int c = 0; c < cn; ++c) dst[c] = src[c];
            }
        }
    }
    return out;
}

}  // namespace xsparse
