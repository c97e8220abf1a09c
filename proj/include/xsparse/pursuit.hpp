#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "xsparse/dictionary.hpp"
#include "xsparse/matrix.hpp"

namespace xsparse {

// Stopping condition for a pursuit run. Exactly one mode is active; construct
// through the factories. target_psnr_global is only meaningful to the drivers
// that see the whole image (hbw, pipeline) and is rejected by the block-level
// engines.
struct StopRule {
    enum class Mode { max_atoms, residual_tolerance, target_psnr_global };

    Mode mode = Mode::max_atoms;
    double value = 0.0;

    static StopRule max_atoms(long long k);
    static StopRule residual_tolerance(double tol);
    static StopRule target_psnr(double db);
};

// Selected index pairs and coefficients for one block.
struct AtomicDecomposition {
    int block_index = 0;
    std::vector<std::uint16_t> index_x;
    std::vector<std::uint16_t> index_y;
    std::vector<double> coefficients;

    int atom_count() const { return int(coefficients.size()); }
    int find_pair(int ix, int iy) const;  // -1 if absent
};

struct Selection {
    int index_x = 0;
    int index_y = 0;
    double inner = 0.0;  // signed inner product at the argmax
};

// C(n, m) = <ax_n, R ay_m>_F for all atom pairs; the selection matrix.
Matrix correlate_all(const SeparableDictionary& dict, const Matrix& residual);

// U_q^{k_q} = sum_n c(n) * atom_2d(index_x[n], index_y[n]).
Matrix reconstruct_block(const AtomicDecomposition& d, const SeparableDictionary& dict);

// Flat mask over (index_x, index_y) pairs, used to exclude atoms that turned
// out linearly dependent on the selected span.
class SelectionMask {
public:
    SelectionMask(int mx, int my) : my_(my), masked_(size_t(mx) * my, 0) {}
    void mask(int ix, int iy) { masked_[size_t(ix) * my_ + iy] = 1; }
    bool is_masked(int ix, int iy) const { return masked_[size_t(ix) * my_ + iy] != 0; }

private:
    int my_;
    std::vector<std::uint8_t> masked_;
};

// Argmax of |C(n, m)| over unmasked pairs, lowest (n, then m) on ties.
// Returns nullopt when every unmasked correlation is exactly zero, which for
// a spanning dictionary means the residual is exactly represented.
std::optional<Selection> select_atom(const Matrix& residual, const SeparableDictionary& dict,
                                     const SelectionMask* mask = nullptr);

enum class CachePolicy { automatic, downdate, recompute };

struct ProjectionResult {
    Matrix projection;                        // T, the span component of the residual
    std::vector<double> coefficient_updates;  // accumulated t per selected atom
    long long iterations = 0;
    bool converged = true;
};

inline constexpr long long kProjectionIterationCap = 1000000;

// Matching-pursuit realization of the orthogonal projection of `residual`
// onto the span of the selected atom pairs. Iterates restricted selection and
// rank-one updates until the projection increment falls below epsilon
// (absolute, Frobenius). Hits of the iteration cap are reported through
// converged = false with the last T.
ProjectionResult project_iterative(const Matrix& residual, std::span<const std::uint16_t> index_x,
                                   std::span<const std::uint16_t> index_y,
                                   const SeparableDictionary& dict, double epsilon,
                                   CachePolicy cache = CachePolicy::automatic);

struct EngineOptions {
    double dependence_threshold = 1e-10;  // on the orthogonalized norm, omp2d only
    double eps_proj_rel = 1e-9;           // projection tolerance relative to ||block||_F
    CachePolicy cache = CachePolicy::automatic;
};

struct EngineStats {
    long long select_calls = 0;     // candidate recomputations
    long long masked_atoms = 0;     // linear-dependence skips
    int basis_matrices_stored = 0;  // current W/B count (0 for spmp2d)
};

enum class EngineKind { omp2d, spmp2d };

// Outcome of one engine step. `masked` means the ranked candidate turned out
// linearly dependent on the selected span and was excluded without appending;
// callers that rank blocks globally must re-rank on it. `exhausted` covers a
// residual at machine-noise level, a complete span, or all atoms masked.
enum class StepResult { appended, masked, exhausted };

// Stepwise per-block pursuit. step() tries to append the current candidate
// atom, running the engine's projection machinery. Blocks are independent;
// distinct engines may run concurrently.
class BlockEngine {
public:
    virtual ~BlockEngine() = default;

    // Best (index, inner) on the current residual; nullopt when exhausted.
    virtual std::optional<Selection> candidate() = 0;
    virtual StepResult step() = 0;

    const AtomicDecomposition& decomposition() const { return decomposition_; }
    void set_block_index(int q) { decomposition_.block_index = q; }
    const Matrix& block() const { return block_; }
    const Matrix& residual() const { return residual_; }
    double residual_norm_squared() const;
    const EngineStats& stats() const { return stats_; }

protected:
    BlockEngine(Matrix block, const SeparableDictionary& dict, const EngineOptions& options);

    bool at_noise_floor() const;  // ||R||_F below machine noise relative to the block

    const SeparableDictionary& dict_;
    EngineOptions options_;
    Matrix block_;
    Matrix residual_;
    double block_norm_ = 0.0;
    AtomicDecomposition decomposition_;
    EngineStats stats_;
};

std::unique_ptr<BlockEngine> make_block_engine(EngineKind kind, Matrix block,
                                               const SeparableDictionary& dict,
                                               const EngineOptions& options = {});

// Orthogonal Matching Pursuit over the separable 2D dictionary: greedy
// selection, Gram-Schmidt orthogonalization with one re-orthogonalization
// pass, adaptive biorthogonal set for the coefficients, exact orthogonal
// projection residual.
AtomicDecomposition omp2d(const Matrix& block, const SeparableDictionary& dict,
                          const StopRule& stop, const EngineOptions& options = {});

// Self-Projected Matching Pursuit: plain MP selection plus project_iterative
// over the selected set after every step. Equivalent to omp2d up to the
// projection tolerance, without storing any orthogonal basis.
AtomicDecomposition spmp2d(const Matrix& block, const SeparableDictionary& dict,
                           const StopRule& stop, const EngineOptions& options = {});

}  // namespace xsparse
