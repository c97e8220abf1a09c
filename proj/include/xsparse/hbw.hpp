#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "xsparse/image.hpp"
#include "xsparse/pursuit.hpp"

namespace xsparse {

struct HbwStats {
    long long select_calls = 0;  // candidate computations across all blocks
    long long steps = 0;         // atoms appended
    long long masked_atoms = 0;
    int refinement_rounds = 0;   // budget tightenings in PSNR mode
};

// Forward HBW pursuit with persistent per-block engines: each call picks the
// block whose next-atom correlation is globally largest (q*), appends one
// atom there and re-ranks only that block. Runs can be resumed with a
// tightened target, which is how the PSNR refinement loop works.
class HbwForwardRun {
public:
    HbwForwardRun(const BlockPartition& partition, const SeparableDictionary& dict,
                  EngineKind engine, const EngineOptions& options = {}, int threads = 1);
    ~HbwForwardRun();
    HbwForwardRun(const HbwForwardRun&) = delete;
    HbwForwardRun& operator=(const HbwForwardRun&) = delete;

    // Each returns false when every block exhausted before the target.
    bool run_until_total_atoms(long long k);
    bool run_until_global_energy(double energy);  // sum_q ||R_q||_F^2 <= energy

    long long total_atoms() const;
    double global_residual_energy() const;
    bool exhausted() const;
    std::vector<AtomicDecomposition> decompositions() const;  // snapshot in q order
    const HbwStats& stats() const;
    void note_refinement_round();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct HbwForwardResult {
    std::vector<AtomicDecomposition> decompositions;
    HbwStats stats;
    bool exhausted = false;  // exact representation reached before the stop
};

// Measures the achieved pixel-domain MSE of the given decompositions
// (assemble, inverse transform, round, compare); supplied by the pipeline.
using PixelMseCallback = std::function<double(const std::vector<AtomicDecomposition>&)>;

// Pixel-domain PSNR targets are driven through a transform-domain energy
// surrogate: run to the surrogate budget, measure the real MSE through the
// callback, tighten the budget by the miss ratio and continue, at most
// max_refinements times.
struct GlobalPsnrDriver {
    double target_mse = 0.0;   // pixel domain
    double pixel_count = 0.0;  // true N_x * N_y
    PixelMseCallback measure;
    int max_refinements = 5;
};

// Global stop modes: max_atoms is the total atom budget K, and
// residual_tolerance bounds the global Frobenius norm of the transform-domain
// residual. target_psnr_global requires the driver.
HbwForwardResult hbw_forward(const BlockPartition& partition, const SeparableDictionary& dict,
                             EngineKind engine, const StopRule& stop,
                             const EngineOptions& options = {}, int threads = 1,
                             const GlobalPsnrDriver* psnr_driver = nullptr);

struct PruneStats {
    long long removals = 0;
    long long projection_iterations = 0;
};

struct HbwPruneResult {
    std::vector<AtomicDecomposition> decompositions;
    double global_residual_energy = 0.0;  // vs the partition blocks
    PruneStats stats;
    bool target_reached = true;  // false when everything emptied first
};

// Backward HBW pruning: repeatedly removes the globally smallest-|c|^2
// coefficient (q-diamond), redistributes its contribution over the block's
// remaining atoms via project_iterative and updates the coefficients.
// Targets: max_atoms prunes down to a total atom budget; residual_tolerance
// prunes as far as possible while the global residual Frobenius norm stays
// within the value (the step that would cross it is not taken).
HbwPruneResult hbw_prune(const BlockPartition& partition,
                         std::vector<AtomicDecomposition> decompositions,
                         const SeparableDictionary& dict, const StopRule& target,
                         double eps_proj_rel = 1e-9, int threads = 1);

}  // namespace xsparse
