#include "xsparse/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "xsparse/cdf97.hpp"
#include "xsparse/dct.hpp"
#include "xsparse/errors.hpp"

namespace xsparse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool meets(double achieved_psnr, double target) { return achieved_psnr >= target - 1e-9; }

double target_mse_for(const ImageArray& image, double psnr_target_db) {
    const double peak = image.max_intensity();
    return peak * peak / std::pow(10.0, psnr_target_db / 10.0);
}

// Fixtures smaller than the SSIM window report NaN instead of failing.
double mssim_if_possible(const ImageArray& ref, const ImageArray& approx) {
    const MssimOptions opt;
    if (ref.width < opt.window_size || ref.height < opt.window_size)
        return std::numeric_limits<double>::quiet_NaN();
    return mssim(ref, approx, opt);
}

}  // namespace

BaselineResult dwt_threshold_baseline(const ImageArray& image, double psnr_target_db,
                                      int levels) {
    const auto start = Clock::now();
    if (std::isnan(psnr_target_db))
        throw std::invalid_argument("dwt_threshold_baseline: PSNR target is NaN");
    WaveletSpec spec;
    spec.levels = levels;
    const Matrix transform = cdf97_forward(image.values, spec);

    const std::size_t total = transform.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double* coeff = transform.data();
    std::stable_sort(order.begin(), order.end(), [coeff](std::size_t a, std::size_t b) {
        return std::fabs(coeff[a]) > std::fabs(coeff[b]);
    });
    std::size_t nonzero = 0;
    while (nonzero < total && coeff[order[nonzero]] != 0.0) ++nonzero;

    // reconstruction keeping the k largest-magnitude coefficients
    auto reconstruct = [&](std::size_t k) {
        Matrix kept(transform.rows(), transform.cols());
        for (std::size_t i = 0; i < k; ++i) kept.data()[order[i]] = coeff[order[i]];
        return round_to_intensity(cdf97_inverse(kept, spec), image.bit_depth);
    };
    auto psnr_at = [&](std::size_t k) { return psnr(image, reconstruct(k)); };

    std::size_t kept_count;
    if (std::isinf(psnr_target_db) && psnr_target_db > 0) {
        kept_count = std::max<std::size_t>(nonzero, 1);
        if (!std::isinf(psnr_at(kept_count)))
            throw TargetUnreachableError("dwt baseline: exact reconstruction not reached");
    } else {
        if (!meets(psnr_at(total), psnr_target_db))
            throw TargetUnreachableError("dwt baseline: target above the achievable PSNR");
        std::size_t lo = 1, hi = total;
        while (lo < hi) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (meets(psnr_at(mid), psnr_target_db))
                hi = mid;
            else
                lo = mid + 1;
        }
        kept_count = hi;
        while (kept_count > 1 && meets(psnr_at(kept_count - 1), psnr_target_db)) --kept_count;
    }

    BaselineResult result;
    result.kept_coefficients = (long long)kept_count;
    result.reconstruction = reconstruct(kept_count);
    result.report.method = "dwt-baseline";
    result.report.block_size = 0;
    result.report.wavelet_levels = levels;
    result.report.atoms_total = result.kept_coefficients;
    result.report.sr = sparsity_ratio(image.width, image.height, result.kept_coefficients);
    result.report.mse_value = mse(image, result.reconstruction);
    result.report.psnr_db = psnr(image, result.reconstruction);
    result.report.mssim_value = mssim_if_possible(image, result.reconstruction);
    result.report.elapsed_seconds = seconds_since(start);
    return result;
}

BaselineResult dct_threshold_baseline(const ImageArray& image, double psnr_target_db) {
    const auto start = Clock::now();
    if (std::isnan(psnr_target_db))
        throw std::invalid_argument("dct_threshold_baseline: PSNR target is NaN");
    if (image.width < kDctBlockSize || image.height < kDctBlockSize)
        throw std::invalid_argument("dct_threshold_baseline: image smaller than 8x8");

    BlockPartition blocks = partition(image.values, kDctBlockSize);
    const int q_count = blocks.block_count();
    std::vector<Matrix> spectra;
    spectra.reserve(size_t(q_count));
    for (int q = 0; q < q_count; ++q)
        spectra.push_back(dct2_block(blocks.block(q), DctDirection::forward));

    struct Entry {
        double value;
        int q;
        int pos;
    };
    std::vector<Entry> entries;
    entries.reserve(size_t(q_count) * kDctBlockSize * kDctBlockSize);
    for (int q = 0; q < q_count; ++q) {
        const double* data = spectra[size_t(q)].data();
        for (int p = 0; p < kDctBlockSize * kDctBlockSize; ++p)
            entries.push_back({data[p], q, p});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::fabs(a.value) > std::fabs(b.value);
    });
    const std::size_t total = entries.size();

    // discarded(k) = energy of everything past the first k entries
    std::vector<double> discarded(total + 1, 0.0);
    {
        long double acc = 0.0L;
        for (std::size_t i = total; i-- > 0;) {
            acc += (long double)entries[i].value * entries[i].value;
            discarded[i] = double(acc);
        }
    }
    std::size_t nonzero = 0;
    while (nonzero < total && entries[nonzero].value != 0.0) ++nonzero;

    auto reconstruct = [&](std::size_t k) {
        BlockPartition kept(blocks.block_size(), blocks.grid_rows(), blocks.grid_cols(),
                            blocks.original_width(), blocks.original_height(),
                            blocks.pad_policy());
        std::vector<Matrix> kept_spectra(size_t(q_count),
                                         Matrix(kDctBlockSize, kDctBlockSize));
        for (std::size_t i = 0; i < k; ++i)
            kept_spectra[size_t(entries[i].q)].data()[entries[i].pos] = entries[i].value;
        for (int q = 0; q < q_count; ++q)
            kept.block(q) = dct2_block(kept_spectra[size_t(q)], DctDirection::inverse);
        return round_to_intensity(assemble(kept), image.bit_depth);
    };

    std::size_t kept_count;
    if (std::isinf(psnr_target_db) && psnr_target_db > 0) {
        kept_count = std::max<std::size_t>(nonzero, 1);
        if (!std::isinf(psnr(image, reconstruct(kept_count))))
            throw TargetUnreachableError("dct baseline: exact reconstruction not reached");
    } else {
        double energy_budget = target_mse_for(image, psnr_target_db) * double(image.pixel_count());
        // smallest k with discarded(k) <= budget, then verify after rounding
        auto search = [&](double budget) {
            std::size_t lo = 1, hi = total;
            while (lo < hi) {
                const std::size_t mid = lo + (hi - lo) / 2;
                if (discarded[mid] <= budget)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            return hi;
        };
        kept_count = search(energy_budget);
        ImageArray recon = reconstruct(kept_count);
        for (int round = 0; round < 5 && !meets(psnr(image, recon), psnr_target_db); ++round) {
            if (kept_count == total)
                throw TargetUnreachableError("dct baseline: target above the achievable PSNR");
            const double gap =
                mse(image, recon) * double(image.pixel_count()) - discarded[kept_count];
            energy_budget = std::max(energy_budget - std::max(gap, 0.0),
                                     discarded[kept_count] * 0.5);
            std::size_t next = search(energy_budget);
            if (next <= kept_count) next = kept_count + 1;
            kept_count = std::min(next, total);
            recon = reconstruct(kept_count);
        }
        while (!meets(psnr(image, recon), psnr_target_db)) {
            if (kept_count == total)
                throw TargetUnreachableError("dct baseline: target above the achievable PSNR");
            ++kept_count;
            recon = reconstruct(kept_count);
        }
        while (kept_count > 1) {  // +-1 boundary adjustment
            ImageArray down = reconstruct(kept_count - 1);
            if (!meets(psnr(image, down), psnr_target_db)) break;
            --kept_count;
            recon = std::move(down);
        }
    }

    BaselineResult result;
    result.kept_coefficients = (long long)kept_count;
    result.reconstruction = reconstruct(kept_count);
    result.report.method = "dct-baseline";
    result.report.block_size = kDctBlockSize;
    result.report.wavelet_levels = 0;
    result.report.atoms_total = result.kept_coefficients;
    result.report.sr = sparsity_ratio(image.width, image.height, result.kept_coefficients);
    result.report.mse_value = mse(image, result.reconstruction);
    result.report.psnr_db = psnr(image, result.reconstruction);
    result.report.mssim_value = mssim_if_possible(image, result.reconstruction);
    result.report.elapsed_seconds = seconds_since(start);
    return result;
}

}  // namespace xsparse
