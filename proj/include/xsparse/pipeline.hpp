#pragma once

#include <optional>
#include <string>

#include "xsparse/dictionary.hpp"
#include "xsparse/hbw.hpp"
#include "xsparse/image.hpp"
#include "xsparse/metrics.hpp"
#include "xsparse/pursuit.hpp"
#include "xsparse/ssr_file.hpp"

namespace xsparse {

enum class Method { omp2d, spmp2d, hbw_omp2d, hbw_spmp2d, prune, dwt_baseline, dct_baseline };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct RunConfig {
    Method method = Method::hbw_omp2d;
    int block_size = 16;
    int wavelet_levels = 5;
    DictionaryConfig dictionary;  // block_size is synced from the field above
    StopRule stop = StopRule::target_psnr(45.0);
    double prune_overshoot_percent = 2.0;  // forward PSNR overshoot before pruning
    int threads = 1;
    std::uint64_t seed = 0;  // synthetic fixture reproducibility
    EngineOptions engine_options;

    // Method-specific completeness; throws std::invalid_argument.
    void validate(int image_width, int image_height) const;
};

struct ApproximationResult {
    SparseImageFile file;
    QualityReport report;
    ImageArray reconstruction;
};

// Full workflow: forward CDF 9/7 transform, partition, pursuit per config,
// assemble, inverse transform, round/clamp, metrics against the original.
// PSNR stop rules are driven through the transform-domain energy surrogate
// with pixel-domain verification; an unreachable stop returns the best-effort
// result (check report.psnr_db). Baseline methods have their own entry points
// in baselines.hpp and are rejected here.
ApproximationResult approximate_image(const ImageArray& image, const RunConfig& config);

// Rebuilds the dictionary from the header config, materializes the per-block
// decompositions, assembles, inverse transforms, rounds and clamps.
ImageArray decode_image(const SparseImageFile& file);

// The assembled transform-domain array U^K (decode without the inverse
// transform stage).
Matrix reconstruct_transform(const SparseImageFile& file);

}  // namespace xsparse
