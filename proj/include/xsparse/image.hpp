#pragma once

#include <vector>

#include "xsparse/matrix.hpp"

namespace xsparse {

// Grayscale image or transform-domain array. For intensity images every value
// is an integer in [0, 2^bit_depth - 1]; transform-domain arrays hold
// unrestricted reals and keep bit_depth only so PSNR can be computed later.
struct ImageArray {
    int width = 0;    // N_x, number of columns
    int height = 0;   // N_y, number of rows
    int bit_depth = 8;
    Matrix values;    // height x width

    ImageArray() = default;
    ImageArray(int w, int h, int bits) : width(w), height(h), bit_depth(bits), values(h, w) {}
    ImageArray(Matrix m, int bits)
        : width(m.cols()), height(m.rows()), bit_depth(bits), values(std::move(m)) {}

    long long pixel_count() const { return (long long)width * height; }
    double max_intensity() const { return double((1u << bit_depth) - 1u); }
    bool is_intensity() const;
};

// Rounds half away from zero, clamps to [0, 2^bit_depth - 1].
ImageArray round_to_intensity(const Matrix& values, int bit_depth);

enum class PadPolicy { zero_fill };

// Disjoint square blocks covering an array, zero-padded on the right/bottom
// edges when the dimensions do not divide. Blocks are traversed row-major
// over the block grid; that order defines the block index q used everywhere.
class BlockPartition {
public:
    BlockPartition(int block_size, int grid_rows, int grid_cols, int orig_width, int orig_height,
                   PadPolicy pad)
        : block_size_(block_size),
          grid_rows_(grid_rows),
          grid_cols_(grid_cols),
          orig_width_(orig_width),
          orig_height_(orig_height),
          pad_(pad),
          blocks_(size_t(grid_rows) * grid_cols, Matrix(block_size, block_size)) {}

    int block_size() const { return block_size_; }
    int grid_rows() const { return grid_rows_; }
    int grid_cols() const { return grid_cols_; }
    int block_count() const { return grid_rows_ * grid_cols_; }  // Q
    int original_width() const { return orig_width_; }
    int original_height() const { return orig_height_; }
    PadPolicy pad_policy() const { return pad_; }

    Matrix& block(int q) { return blocks_.at(size_t(q)); }
    const Matrix& block(int q) const { return blocks_.at(size_t(q)); }

private:
    int block_size_;
    int grid_rows_;
    int grid_cols_;
    int orig_width_;
    int orig_height_;
    PadPolicy pad_;
    std::vector<Matrix> blocks_;
};

// Q = ceil(width/block_size) * ceil(height/block_size). block_size must be >= 2
// and no larger than both dimensions.
BlockPartition partition(const Matrix& arr, int block_size, PadPolicy pad = PadPolicy::zero_fill);
BlockPartition partition(const ImageArray& arr, int block_size,
                         PadPolicy pad = PadPolicy::zero_fill);

// Inverse of partition restricted to the original dimensions; padding is
// discarded. Throws if any block was resized.
Matrix assemble(const BlockPartition& p);

}  // namespace xsparse
