#pragma once

#include <cstdint>

#include "xsparse/dictionary.hpp"
#include "xsparse/image.hpp"

namespace xsparse {

// Small deterministic generator (splitmix64 core) so fixtures are identical
// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform() {  // [0, 1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi_inclusive) {  // small ranges only
        return lo + int(next_u64() % std::uint64_t(hi_inclusive - lo + 1));
    }

    double gaussian();  // Box-Muller

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct SyntheticSpec {
    int width = 256;
    int height = 256;
    int bit_depth = 8;
    int block_size = 8;
    int wavelet_levels = 5;
    int atom_count = 100;
    double noise_psnr_db = 56.0;  // of the added noise, relative to peak
    std::uint64_t seed = 1;
    DictionaryConfig dictionary;  // block_size is synced
};

struct SyntheticImage {
    ImageArray image;              // noisy, rounded
    ImageArray clean;              // rounded, before noise
    double noise_psnr_db = 0.0;    // measured on the realized noise
};

// Random dictionary atoms dropped into blocks of the wavelet-domain array,
// inverse transformed, scaled into the intensity range and lightly corrupted
// with Gaussian noise. The workhorse fixture for end-to-end sparsity tests.
SyntheticImage make_wavelet_sparse_image(const SyntheticSpec& spec);

}  // namespace xsparse
