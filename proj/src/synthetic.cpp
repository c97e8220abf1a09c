#include "xsparse/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xsparse/cdf97.hpp"

namespace xsparse {

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

SyntheticImage make_wavelet_sparse_image(const SyntheticSpec& spec) {
    if (spec.atom_count < 1) throw std::invalid_argument("synthetic: need at least one atom");
    DictionaryConfig dict_config = spec.dictionary;
    dict_config.block_size = spec.block_size;
    const SeparableDictionary dict = build_mixed(dict_config);

    Rng rng(spec.seed);
    Matrix transform(spec.height, spec.width);
    const int grid_rows = (spec.height + spec.block_size - 1) / spec.block_size;
    const int grid_cols = (spec.width + spec.block_size - 1) / spec.block_size;
    for (int a = 0; a < spec.atom_count; ++a) {
        const int br = rng.uniform_int(0, grid_rows - 1);
        const int bc = rng.uniform_int(0, grid_cols - 1);
        const int ix = rng.uniform_int(0, dict.bank_x.atom_count() - 1);
        const int iy = rng.uniform_int(0, dict.bank_y.atom_count() - 1);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double coeff = sign * rng.uniform(0.25, 1.0);
        const double* ax = dict.bank_x.atom(ix);
        const double* ay = dict.bank_y.atom(iy);
        const int r0 = br * spec.block_size;
        const int c0 = bc * spec.block_size;
        for (int r = 0; r < spec.block_size && r0 + r < spec.height; ++r) {
            double* row = transform.row(r0 + r);
            for (int c = 0; c < spec.block_size && c0 + c < spec.width; ++c)
                row[c0 + c] += coeff * ay[r] * ax[c];
        }
    }

    WaveletSpec wspec;
    wspec.levels = spec.wavelet_levels;
    Matrix clean_real = cdf97_inverse(transform, wspec);

    // affine map into [3%, 97%] of the intensity range
    const double peak = double((1u << spec.bit_depth) - 1u);
    double lo = clean_real.data()[0], hi = lo;
    for (std::size_t i = 0; i < clean_real.size(); ++i) {
        lo = std::min(lo, clean_real.data()[i]);
        hi = std::max(hi, clean_real.data()[i]);
    }
    const double span = hi - lo;
    const double scale = span > 0 ? 0.94 * peak / span : 0.0;
    const double offset = 0.03 * peak;
    for (std::size_t i = 0; i < clean_real.size(); ++i)
        clean_real.data()[i] = offset + scale * (clean_real.data()[i] - lo);

    const double sigma = peak / std::pow(10.0, spec.noise_psnr_db / 20.0);
    Matrix noisy_real = clean_real;
    double noise_energy = 0.0;
    for (std::size_t i = 0; i < noisy_real.size(); ++i) {
        const double n = sigma * rng.gaussian();
        noise_energy += n * n;
        noisy_real.data()[i] += n;
    }
    const double noise_mse = noise_energy / double(noisy_real.size());

    SyntheticImage out;
    out.clean = round_to_intensity(clean_real, spec.bit_depth);
    out.image = round_to_intensity(noisy_real, spec.bit_depth);
    out.noise_psnr_db = 10.0 * std::log10(peak * peak / noise_mse);
    return out;
}

}  // namespace xsparse
