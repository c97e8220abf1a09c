#include "xsparse/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xsparse/cdf97.hpp"
#include "xsparse/parallel.hpp"

namespace xsparse {

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kMaxPsnrRefinements = 5;

std::string_view method_names[] = {"omp2d", "spmp2d", "hbw-omp2d", "hbw-spmp2d",
                                   "prune", "dwt-baseline", "dct-baseline"};

double target_mse_from_psnr(double peak, double psnr_db) {
    return peak * peak / std::pow(10.0, psnr_db / 10.0);
}

Matrix assemble_decompositions(const std::vector<AtomicDecomposition>& decomps,
                               const BlockPartition& geometry, const SeparableDictionary& dict) {
    BlockPartition out(geometry.block_size(), geometry.grid_rows(), geometry.grid_cols(),
                       geometry.original_width(), geometry.original_height(),
                       geometry.pad_policy());
    for (int q = 0; q < geometry.block_count(); ++q)
        out.block(q) = reconstruct_block(decomps[size_t(q)], dict);
    return assemble(out);
}

double mssim_if_possible(const ImageArray& ref, const ImageArray& approx) {
    const MssimOptions opt;
    if (ref.width < opt.window_size || ref.height < opt.window_size)
        return std::numeric_limits<double>::quiet_NaN();
    return mssim(ref, approx, opt);
}

// Per-block pursuit with resumable engines, so a PSNR surrogate can tighten
// the shared tolerance and continue where the previous round stopped.
class PerBlockRun {
public:
    PerBlockRun(const BlockPartition& partition, const SeparableDictionary& dict,
                EngineKind kind, const EngineOptions& options, int threads)
        : threads_(threads) {
        engines_.resize(size_t(partition.block_count()));
        parallel_for(partition.block_count(), threads, [&](int q) {
            engines_[size_t(q)] = make_block_engine(kind, partition.block(q), dict, options);
        });
        for (int q = 0; q < partition.block_count(); ++q)
            engines_[size_t(q)]->set_block_index(q);
    }

    void run_max_atoms(long long per_block) {
        parallel_for(int(engines_.size()), threads_, [&](int q) {
            BlockEngine& e = *engines_[size_t(q)];
            while (e.decomposition().atom_count() < per_block)
                if (e.step() == StepResult::exhausted) break;
        });
    }

    void run_to_tolerance(double frobenius_tol) {
        const double tol2 = frobenius_tol * frobenius_tol;
        parallel_for(int(engines_.size()), threads_, [&](int q) {
            BlockEngine& e = *engines_[size_t(q)];
            while (e.residual_norm_squared() > tol2)
                if (e.step() == StepResult::exhausted) break;
        });
    }

    std::vector<AtomicDecomposition> decompositions() const {
        std::vector<AtomicDecomposition> out;
        out.reserve(engines_.size());
        for (const auto& e : engines_) out.push_back(e->decomposition());
        return out;
    }

private:
    std::vector<std::unique_ptr<BlockEngine>> engines_;
    int threads_;
};

}  // namespace

std::string method_name(Method m) { return std::string(method_names[size_t(m)]); }

std::optional<Method> parse_method(const std::string& name) {
    for (std::size_t i = 0; i < std::size(method_names); ++i)
        if (name == method_names[i]) return Method(i);
    return std::nullopt;
}

void RunConfig::validate(int image_width, int image_height) const {
    if (method == Method::dwt_baseline || method == Method::dct_baseline)
        throw std::invalid_argument("approximate_image: baselines have dedicated entry points");
    if (block_size < 2) throw std::invalid_argument("config: block size must be >= 2");
    if (block_size > image_width && block_size > image_height)
        throw std::invalid_argument("config: block size exceeds both image dimensions");
    if (wavelet_levels < 1 || wavelet_levels > max_wavelet_levels(image_width, image_height))
        throw std::invalid_argument("config: wavelet levels out of range for this image");
    if (threads < 1) throw std::invalid_argument("config: thread count must be >= 1");
    if (method == Method::prune) {
        if (stop.mode != StopRule::Mode::target_psnr_global)
            throw std::invalid_argument("config: the prune method needs a PSNR target");
        if (!(prune_overshoot_percent >= 0))
            throw std::invalid_argument("config: prune overshoot must be >= 0");
    }
    if (stop.mode == StopRule::Mode::target_psnr_global &&
        (std::isinf(stop.value) || stop.value <= 0))
        throw std::invalid_argument("config: PSNR target must be finite and positive");
}

ApproximationResult approximate_image(const ImageArray& image, const RunConfig& config) {
    const auto start = Clock::now();
    config.validate(image.width, image.height);

    WaveletSpec spec;
    spec.levels = config.wavelet_levels;
    DictionaryConfig dict_config = config.dictionary;
    dict_config.block_size = config.block_size;
    const SeparableDictionary dict = build_mixed(dict_config);

    const Matrix transform = cdf97_forward(image.values, spec);
    const BlockPartition part = partition(transform, config.block_size);

    const double peak = image.max_intensity();
    auto measure_mse = [&](const std::vector<AtomicDecomposition>& decomps) {
        const Matrix u_k = assemble_decompositions(decomps, part, dict);
        const ImageArray recon = round_to_intensity(cdf97_inverse(u_k, spec), image.bit_depth);
        return mse(image, recon);
    };

    std::vector<AtomicDecomposition> decomps;
    const EngineKind per_block_kind =
        config.method == Method::spmp2d || config.method == Method::prune ? EngineKind::spmp2d
                                                                          : EngineKind::omp2d;

    switch (config.method) {
        case Method::omp2d:
        case Method::spmp2d: {
            PerBlockRun run(part, dict, per_block_kind, config.engine_options, config.threads);
            switch (config.stop.mode) {
                case StopRule::Mode::max_atoms:
                    run.run_max_atoms((long long)config.stop.value);
                    break;
                case StopRule::Mode::residual_tolerance:
                    run.run_to_tolerance(config.stop.value);
                    break;
                case StopRule::Mode::target_psnr_global: {
                    const double target_mse = target_mse_from_psnr(peak, config.stop.value);
                    double budget = target_mse * double(image.pixel_count());
                    for (int round = 0;; ++round) {
                        run.run_to_tolerance(std::sqrt(budget / part.block_count()));
                        const double achieved = measure_mse(run.decompositions());
                        if (achieved <= target_mse * (1.0 + 1e-12)) break;
                        if (round >= kMaxPsnrRefinements) break;
                        budget *= target_mse / achieved;
                    }
                    break;
                }
            }
            decomps = run.decompositions();
            break;
        }
        case Method::hbw_omp2d:
        case Method::hbw_spmp2d: {
            const EngineKind kind = config.method == Method::hbw_omp2d ? EngineKind::omp2d
                                                                       : EngineKind::spmp2d;
            GlobalPsnrDriver driver;
            const GlobalPsnrDriver* driver_ptr = nullptr;
            if (config.stop.mode == StopRule::Mode::target_psnr_global) {
                driver.target_mse = target_mse_from_psnr(peak, config.stop.value);
                driver.pixel_count = double(image.pixel_count());
                driver.measure = measure_mse;
                driver.max_refinements = kMaxPsnrRefinements;
                driver_ptr = &driver;
            }
            decomps = hbw_forward(part, dict, kind, config.stop, config.engine_options,
                                  config.threads, driver_ptr)
                          .decompositions;
            break;
        }
        case Method::prune: {
            const double target_mse = target_mse_from_psnr(peak, config.stop.value);
            const double forward_psnr =
                config.stop.value * (1.0 + config.prune_overshoot_percent / 100.0);
            const double forward_mse = target_mse_from_psnr(peak, forward_psnr);

            PerBlockRun run(part, dict, per_block_kind, config.engine_options, config.threads);
            double budget = forward_mse * double(image.pixel_count());
            for (int round = 0;; ++round) {
                run.run_to_tolerance(std::sqrt(budget / part.block_count()));
                const double achieved = measure_mse(run.decompositions());
                if (achieved <= forward_mse * (1.0 + 1e-12)) break;
                if (round >= kMaxPsnrRefinements) break;
                budget *= forward_mse / achieved;
            }
            const std::vector<AtomicDecomposition> forward = run.decompositions();

            double prune_budget = target_mse * double(image.pixel_count());
            decomps = forward;
            for (int round = 0; round <= kMaxPsnrRefinements; ++round) {
                HbwPruneResult pruned =
                    hbw_prune(part, forward, dict,
                              StopRule::residual_tolerance(std::sqrt(prune_budget)),
                              config.engine_options.eps_proj_rel, config.threads);
                const double achieved = measure_mse(pruned.decompositions);
                if (achieved <= target_mse * (1.0 + 1e-12)) {
                    decomps = std::move(pruned.decompositions);
                    break;
                }
                prune_budget *= target_mse / achieved;
            }
            break;
        }
        default:
            throw std::invalid_argument("approximate_image: unsupported method");
    }

    ApproximationResult result;
    result.file.width = image.width;
    result.file.height = image.height;
    result.file.bit_depth = image.bit_depth;
    result.file.block_size = config.block_size;
    result.file.wavelet_levels = config.wavelet_levels;
    result.file.dict_config = dict_config;
    result.file.blocks = std::move(decomps);

    const Matrix u_k = assemble_decompositions(result.file.blocks, part, dict);
    result.reconstruction = round_to_intensity(cdf97_inverse(u_k, spec), image.bit_depth);

    result.report.method = method_name(config.method);
    result.report.block_size = config.block_size;
    result.report.wavelet_levels = config.wavelet_levels;
    result.report.atoms_total = result.file.total_atoms();
    result.report.sr =
        sparsity_ratio(image.width, image.height, std::max(result.report.atoms_total, 1LL));
    result.report.mse_value = mse(image, result.reconstruction);
    result.report.psnr_db = psnr(image, result.reconstruction);
    result.report.mssim_value = mssim_if_possible(image, result.reconstruction);
    result.report.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    return result;
}

Matrix reconstruct_transform(const SparseImageFile& file) {
    const SeparableDictionary dict = build_mixed(file.dict_config);
    const int nb = file.block_size;
    const int grid_rows = (file.height + nb - 1) / nb;
    const int grid_cols = (file.width + nb - 1) / nb;
    BlockPartition part(nb, grid_rows, grid_cols, file.width, file.height, PadPolicy::zero_fill);
    if (int(file.blocks.size()) != part.block_count())
        throw std::invalid_argument("reconstruct_transform: block record count mismatch");
    for (int q = 0; q < part.block_count(); ++q)
        part.block(q) = reconstruct_block(file.blocks[size_t(q)], dict);
    return assemble(part);
}

ImageArray decode_image(const SparseImageFile& file) {
    WaveletSpec spec;
    spec.levels = file.wavelet_levels;
    return round_to_intensity(cdf97_inverse(reconstruct_transform(file), spec), file.bit_depth);
}

}  // namespace xsparse
