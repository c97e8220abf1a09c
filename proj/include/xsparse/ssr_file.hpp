#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xsparse/dictionary.hpp"
#include "xsparse/pursuit.hpp"

namespace xsparse {

// Serialized sparse representation (.ssr). The decoder needs nothing beyond
// this file and the deterministic dictionary builders to reconstruct the
// image. Layout, all little-endian:
//   magic "XSPARSE1" (8 bytes), u32 version,
//   u32 width, u32 height, u32 bit_depth, u32 block_size, u32 levels,
//   u32 config_length, config text (dictionary key-value echo),
//   per block in q order: u32 q, u32 k_q,
//     k_q * (u16 index_x, u16 index_y), k_q * f64 coefficient.
struct SparseImageFile {
    std::uint32_t version = 1;
    int width = 0;
    int height = 0;
    int bit_depth = 8;
    int block_size = 0;
    int wavelet_levels = 0;
    DictionaryConfig dict_config;
    std::vector<AtomicDecomposition> blocks;  // q order

    long long total_atoms() const;
};

void write_ssr(const SparseImageFile& file, std::ostream& out);
void write_ssr(const SparseImageFile& file, const std::string& path);
SparseImageFile read_ssr(std::istream& in);
SparseImageFile read_ssr(const std::string& path);

}  // namespace xsparse
