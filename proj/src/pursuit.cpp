#include "xsparse/pursuit.hpp"

#include <cmath>
#include <stdexcept>

namespace xsparse {

StopRule StopRule::max_atoms(long long k) {
    if (k < 0) throw std::invalid_argument("StopRule: atom budget must be >= 0");
    return {Mode::max_atoms, double(k)};
}

StopRule StopRule::residual_tolerance(double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("StopRule: tolerance must be >= 0");
    return {Mode::residual_tolerance, tol};
}

StopRule StopRule::target_psnr(double db) {
    if (std::isnan(db)) throw std::invalid_argument("StopRule: PSNR target must not be NaN");
    return {Mode::target_psnr_global, db};
}

int AtomicDecomposition::find_pair(int ix, int iy) const {
    for (size_t n = 0; n < coefficients.size(); ++n)
        if (index_x[n] == ix && index_y[n] == iy) return int(n);
    return -1;
}

Matrix correlate_all(const SeparableDictionary& dict, const Matrix& residual) {
    const int nb = dict.block_size();
    if (residual.rows() != nb || residual.cols() != nb)
        throw std::invalid_argument("correlate_all: residual size does not match dictionary");
    const int mx = dict.bank_x.atom_count();
    const int my = dict.bank_y.atom_count();

    // t(m, c) = sum_r ay_m(r) * R(r, c), then c(n, m) = sum_c ax_n(c) * t(m, c)
    Matrix t(my, nb);
    for (int m = 0; m < my; ++m) {
        const double* ay = dict.bank_y.atom(m);
        double* trow = t.row(m);
        for (int r = 0; r < nb; ++r) {
            const double f = ay[r];
            const double* rrow = residual.row(r);
            for (int c = 0; c < nb; ++c) trow[c] += f * rrow[c];
        }
    }
    Matrix c(mx, my);
    for (int n = 0; n < mx; ++n) {
        const double* ax = dict.bank_x.atom(n);
        double* crow = c.row(n);
        for (int m = 0; m < my; ++m) {
            const double* trow = t.row(m);
            double acc = 0.0;
            for (int i = 0; i < nb; ++i) acc += ax[i] * trow[i];
            crow[m] = acc;
        }
    }
    return c;
}

namespace {

double pair_correlation(const SeparableDictionary& dict, const Matrix& residual, int ix, int iy) {
    const int nb = dict.block_size();
    const double* ax = dict.bank_x.atom(ix);
    const double* ay = dict.bank_y.atom(iy);
    double acc = 0.0;
    for (int r = 0; r < nb; ++r) {
        const double* rrow = residual.row(r);
        double dot = 0.0;
        for (int c = 0; c < nb; ++c) dot += ax[c] * rrow[c];
        acc += ay[r] * dot;
    }
    return acc;
}

std::optional<Selection> scan_correlations(const Matrix& corr, const SelectionMask* mask) {
    Selection best;
    double best_abs = 0.0;
    bool found = false;
    for (int n = 0; n < corr.rows(); ++n) {
        const double* row = corr.row(n);
        for (int m = 0; m < corr.cols(); ++m) {
            if (mask && mask->is_masked(n, m)) continue;
            const double a = std::fabs(row[m]);
            if (!found || a > best_abs) {
                best = {n, m, row[m]};
                best_abs = a;
                found = true;
            }
        }
    }
    if (!found || best_abs == 0.0) return std::nullopt;
    return best;
}

std::span<const double> atom_span(const AtomBank1D& bank, int n) {
    return {bank.atom(n), size_t(bank.atom_length())};
}

}  // namespace

std::optional<Selection> select_atom(const Matrix& residual, const SeparableDictionary& dict,
                                     const SelectionMask* mask) {
    return scan_correlations(correlate_all(dict, residual), mask);
}

Matrix reconstruct_block(const AtomicDecomposition& d, const SeparableDictionary& dict) {
    const int nb = dict.block_size();
    Matrix out(nb, nb);
    for (int n = 0; n < d.atom_count(); ++n)
        out.add_outer_scaled(atom_span(dict.bank_y, d.index_y[size_t(n)]),
                             atom_span(dict.bank_x, d.index_x[size_t(n)]),
                             d.coefficients[size_t(n)]);
    return out;
}

ProjectionResult project_iterative(const Matrix& residual, std::span<const std::uint16_t> index_x,
                                   std::span<const std::uint16_t> index_y,
                                   const SeparableDictionary& dict, double epsilon,
                                   CachePolicy cache) {
    if (index_x.size() != index_y.size())
        throw std::invalid_argument("project_iterative: index span length mismatch");
    if (!(epsilon > 0.0)) throw std::invalid_argument("project_iterative: epsilon must be > 0");

    const int k = int(index_x.size());
    const int nb = dict.block_size();
    ProjectionResult result;
    result.projection = Matrix(nb, nb);
    result.coefficient_updates.assign(size_t(k), 0.0);
    if (k == 0) return result;

    std::vector<double> corr(static_cast<std::size_t>(k));
    for (int n = 0; n < k; ++n)
        corr[size_t(n)] = pair_correlation(dict, residual, index_x[size_t(n)], index_y[size_t(n)]);

    const bool use_downdate = cache != CachePolicy::recompute;
    Matrix pair_gram;
    Matrix work_residual;
    if (use_downdate) {
        pair_gram = Matrix(k, k);
        for (int n = 0; n < k; ++n)
            for (int j = 0; j < k; ++j)
                pair_gram(n, j) = dict.gram_x(index_x[size_t(n)], index_x[size_t(j)]) *
                                  dict.gram_y(index_y[size_t(n)], index_y[size_t(j)]);
    } else {
        work_residual = residual;
    }

    while (true) {
        int j = 0;
        double best = std::fabs(corr[0]);
        for (int n = 1; n < k; ++n) {
            const double a = std::fabs(corr[size_t(n)]);
            if (a > best) {
                best = a;
                j = n;
            }
        }
        const double t = corr[size_t(j)];
        if (std::fabs(t) < epsilon) break;
        if (result.iterations >= kProjectionIterationCap) {
            result.converged = false;
            break;
        }
        ++result.iterations;
        result.coefficient_updates[size_t(j)] += t;
        if (use_downdate) {
            const double* grow = pair_gram.row(j);
            for (int n = 0; n < k; ++n) corr[size_t(n)] -= t * grow[n];
        } else {
            work_residual.add_outer_scaled(atom_span(dict.bank_y, index_y[size_t(j)]),
                                           atom_span(dict.bank_x, index_x[size_t(j)]), -t);
            for (int n = 0; n < k; ++n)
                corr[size_t(n)] =
                    pair_correlation(dict, work_residual, index_x[size_t(n)], index_y[size_t(n)]);
        }
    }

    for (int n = 0; n < k; ++n) {
        const double u = result.coefficient_updates[size_t(n)];
        if (u != 0.0)
            result.projection.add_outer_scaled(atom_span(dict.bank_y, index_y[size_t(n)]),
                                               atom_span(dict.bank_x, index_x[size_t(n)]), u);
    }
    return result;
}

BlockEngine::BlockEngine(Matrix block, const SeparableDictionary& dict,
                         const EngineOptions& options)
    : dict_(dict), options_(options), block_(std::move(block)), residual_(block_) {
    const int nb = dict.block_size();
    if (block_.rows() != nb || block_.cols() != nb)
        throw std::invalid_argument("BlockEngine: block size does not match dictionary");
    for (std::size_t i = 0; i < block_.size(); ++i)
        if (!std::isfinite(block_.data()[i]))
            throw std::invalid_argument("BlockEngine: block must be finite-valued");
    block_norm_ = frobenius_norm(block_);
}

double BlockEngine::residual_norm_squared() const { return frobenius_norm_squared(residual_); }

bool BlockEngine::at_noise_floor() const {
    return frobenius_norm(residual_) <= 1e-13 * block_norm_;
}

namespace {

class Omp2dEngine final : public BlockEngine {
public:
    Omp2dEngine(Matrix block, const SeparableDictionary& dict, const EngineOptions& options)
        : BlockEngine(std::move(block), dict, options),
          mask_(dict.bank_x.atom_count(), dict.bank_y.atom_count()) {}

    std::optional<Selection> candidate() override {
        if (!candidate_fresh_) {
            candidate_.reset();
            const int nb = dict_.block_size();
            if (decomposition_.atom_count() < nb * nb && !at_noise_floor()) {
                candidate_ = select_atom(residual_, dict_, &mask_);
                ++stats_.select_calls;
            }
            candidate_fresh_ = true;
        }
        return candidate_;
    }

    StepResult step() override {
        auto sel = candidate();
        if (!sel) return StepResult::exhausted;
        candidate_fresh_ = false;

        Matrix atom = atom_2d(dict_, sel->index_x, sel->index_y);
        Matrix w = atom;
        const int k = int(orthogonal_.size());
        for (int pass = 0; pass < 2; ++pass)  // orthogonalize, then re-orthogonalize
            for (int j = 0; j < k; ++j)
                w.add_scaled(orthogonal_[size_t(j)], -frobenius_inner(orthogonal_[size_t(j)], w));
        const double nu = frobenius_norm(w);
        if (nu < options_.dependence_threshold) {
            mask_.mask(sel->index_x, sel->index_y);
            ++stats_.masked_atoms;
            return StepResult::masked;
        }

        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] /= nu;
        Matrix b = w;
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] /= nu;
        for (int j = 0; j < k; ++j)
            biorthogonal_[size_t(j)].add_scaled(b, -frobenius_inner(atom, biorthogonal_[size_t(j)]));

        residual_.add_scaled(w, -frobenius_inner(w, residual_));
        orthogonal_.push_back(std::move(w));
        biorthogonal_.push_back(std::move(b));
        decomposition_.index_x.push_back(std::uint16_t(sel->index_x));
        decomposition_.index_y.push_back(std::uint16_t(sel->index_y));
        decomposition_.coefficients.resize(orthogonal_.size());
        for (std::size_t n = 0; n < biorthogonal_.size(); ++n)
            decomposition_.coefficients[n] = frobenius_inner(biorthogonal_[n], block_);
        mask_.mask(sel->index_x, sel->index_y);  // in span now; never re-selected
        stats_.basis_matrices_stored = 2 * int(orthogonal_.size());
        return StepResult::appended;
    }

private:
    SelectionMask mask_;
    std::vector<Matrix> orthogonal_;    // W, unit Frobenius norm
    std::vector<Matrix> biorthogonal_;  // B, <B_i, A_j> = delta_ij
    std::optional<Selection> candidate_;
    bool candidate_fresh_ = false;
};

class Spmp2dEngine final : public BlockEngine {
public:
    Spmp2dEngine(Matrix block, const SeparableDictionary& dict, const EngineOptions& options)
        : BlockEngine(std::move(block), dict, options),
          eps_proj_(std::max(options.eps_proj_rel * block_norm_, 1e-300)) {}

    std::optional<Selection> candidate() override {
        if (!candidate_fresh_) {
            candidate_.reset();
            const int nb = dict_.block_size();
            if (decomposition_.atom_count() < nb * nb && !at_noise_floor()) {
                if (!cache_valid_) {
                    correlations_ = correlate_all(dict_, residual_);
                    cache_valid_ = true;
                }
                candidate_ = scan_correlations(correlations_, nullptr);
                ++stats_.select_calls;
            }
            candidate_fresh_ = true;
        }
        return candidate_;
    }

    StepResult step() override {
        auto sel = candidate();
        if (!sel) return StepResult::exhausted;
        // A re-pick of a selected pair means the residual sits in the span up
        // to the projection tolerance: the block is done.
        if (decomposition_.find_pair(sel->index_x, sel->index_y) >= 0)
            return StepResult::exhausted;
        candidate_fresh_ = false;

        const double t = sel->inner;
        residual_.add_outer_scaled(atom_span(dict_.bank_y, sel->index_y),
                                   atom_span(dict_.bank_x, sel->index_x), -t);
        decomposition_.index_x.push_back(std::uint16_t(sel->index_x));
        decomposition_.index_y.push_back(std::uint16_t(sel->index_y));
        decomposition_.coefficients.push_back(t);

        ProjectionResult proj =
            project_iterative(residual_, decomposition_.index_x, decomposition_.index_y, dict_,
                              eps_proj_, options_.cache);
        residual_.add_scaled(proj.projection, -1.0);
        int updates = 0;
        for (std::size_t n = 0; n < proj.coefficient_updates.size(); ++n) {
            if (proj.coefficient_updates[n] != 0.0) ++updates;
            decomposition_.coefficients[n] += proj.coefficient_updates[n];
        }
        refresh_cache(*sel, t, proj, updates);
        return StepResult::appended;
    }

private:
    // The residual changed by one rank-1 subtraction plus the projection's
    // rank-1 updates; the selection cache follows either by downdating each
    // of them through the bank Gram rows or by a full recompute.
    void refresh_cache(const Selection& sel, double t, const ProjectionResult& proj,
                       int updates) {
        if (!cache_valid_) return;
        const int nb = dict_.block_size();
        const long long m2 = dict_.atom_count_2d();
        const long long downdate_cost = (1 + updates) * m2;
        const long long recompute_cost =
            (long long)nb * nb * dict_.bank_y.atom_count() + nb * m2;
        bool downdate;
        switch (options_.cache) {
            case CachePolicy::downdate: downdate = true; break;
            case CachePolicy::recompute: downdate = false; break;
            default:
                downdate = m2 > 4LL * nb * nb && downdate_cost < recompute_cost;
        }
        if (!downdate) {
            cache_valid_ = false;
            return;
        }
        downdate_rank1(sel.index_x, sel.index_y, t);
        for (std::size_t n = 0; n < proj.coefficient_updates.size(); ++n)
            if (proj.coefficient_updates[n] != 0.0)
                downdate_rank1(decomposition_.index_x[n], decomposition_.index_y[n],
                               proj.coefficient_updates[n]);
    }

    void downdate_rank1(int ix, int iy, double t) {
        const double* gx = dict_.gram_x.row(ix);
        const double* gy = dict_.gram_y.row(iy);
        for (int n = 0; n < correlations_.rows(); ++n) {
            const double f = t * gx[n];
            double* row = correlations_.row(n);
            for (int m = 0; m < correlations_.cols(); ++m) row[m] -= f * gy[m];
        }
    }

    double eps_proj_;
    Matrix correlations_;
    bool cache_valid_ = false;
    std::optional<Selection> candidate_;
    bool candidate_fresh_ = false;
};

bool block_stop_reached(const StopRule& stop, const BlockEngine& engine) {
    switch (stop.mode) {
        case StopRule::Mode::max_atoms:
            return engine.decomposition().atom_count() >= (long long)stop.value;
        case StopRule::Mode::residual_tolerance:
            return std::sqrt(engine.residual_norm_squared()) <= stop.value;
        case StopRule::Mode::target_psnr_global:
            throw std::invalid_argument("block engines cannot evaluate a global PSNR stop");
    }
    return true;
}

AtomicDecomposition run_block_engine(EngineKind kind, const Matrix& block,
                                     const SeparableDictionary& dict, const StopRule& stop,
                                     const EngineOptions& options) {
    auto engine = make_block_engine(kind, block, dict, options);
    while (!block_stop_reached(stop, *engine)) {
        if (engine->step() == StepResult::exhausted) break;
    }
    return engine->decomposition();
}

}  // namespace

std::unique_ptr<BlockEngine> make_block_engine(EngineKind kind, Matrix block,
                                               const SeparableDictionary& dict,
                                               const EngineOptions& options) {
    if (kind == EngineKind::omp2d)
        return std::make_unique<Omp2dEngine>(std::move(block), dict, options);
    return std::make_unique<Spmp2dEngine>(std::move(block), dict, options);
}

AtomicDecomposition omp2d(const Matrix& block, const SeparableDictionary& dict,
                          const StopRule& stop, const EngineOptions& options) {
    return run_block_engine(EngineKind::omp2d, block, dict, stop, options);
}

AtomicDecomposition spmp2d(const Matrix& block, const SeparableDictionary& dict,
                           const StopRule& stop, const EngineOptions& options) {
    return run_block_engine(EngineKind::spmp2d, block, dict, stop, options);
}

}  // namespace xsparse
