#include "xsparse/hbw.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

#include "xsparse/parallel.hpp"

namespace xsparse {

namespace {

struct ForwardHeapEntry {
    double magnitude;
    int q;
    long long version;
};

// Max-heap on magnitude; equal magnitudes pop the smaller block first so the
// order matches the brute-force rescan reference.
struct ForwardLess {
    bool operator()(const ForwardHeapEntry& a, const ForwardHeapEntry& b) const {
        if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
        return a.q > b.q;
    }
};

}  // namespace

struct HbwForwardRun::Impl {
    std::vector<std::unique_ptr<BlockEngine>> engines;
    std::vector<long long> version;
    std::vector<double> energy;
    std::priority_queue<ForwardHeapEntry, std::vector<ForwardHeapEntry>, ForwardLess> heap;
    double global_energy = 0.0;
    long long total_atoms = 0;
    bool exhausted = false;
    HbwStats stats;

    void push_candidate(int q) {
        auto cand = engines[size_t(q)]->candidate();
        if (cand) heap.push({std::fabs(cand->inner), q, version[size_t(q)]});
    }

    // Appends one atom to the globally best block. Returns false when all
    // blocks are exhausted (exact representation reached).
    bool step_global() {
        while (!heap.empty()) {
            const ForwardHeapEntry entry = heap.top();
            heap.pop();
            if (entry.version != version[size_t(entry.q)]) continue;  // stale
            BlockEngine& engine = *engines[size_t(entry.q)];
            const StepResult result = engine.step();
            ++version[size_t(entry.q)];
            if (result == StepResult::appended) {
                const double e = engine.residual_norm_squared();
                global_energy += e - energy[size_t(entry.q)];
                energy[size_t(entry.q)] = e;
                ++total_atoms;
                ++stats.steps;
                push_candidate(entry.q);
                return true;
            }
            if (result == StepResult::masked) {
                ++stats.masked_atoms;
                push_candidate(entry.q);  // re-rank with the next candidate
                continue;
            }
            // exhausted: drop the block
        }
        exhausted = true;
        return false;
    }

    void sync_select_calls() {
        stats.select_calls = 0;
        for (const auto& e : engines) stats.select_calls += e->stats().select_calls;
    }
};

HbwForwardRun::HbwForwardRun(const BlockPartition& partition, const SeparableDictionary& dict,
                             EngineKind engine, const EngineOptions& options, int threads)
    : impl_(std::make_unique<Impl>()) {
    const int q_count = partition.block_count();
    if (q_count == 0) throw std::invalid_argument("hbw_forward: empty partition");
    impl_->engines.resize(size_t(q_count));
    impl_->version.assign(size_t(q_count), 0);
    impl_->energy.assign(size_t(q_count), 0.0);
    parallel_for(q_count, threads, [&](int q) {
        impl_->engines[size_t(q)] = make_block_engine(engine, partition.block(q), dict, options);
        impl_->engines[size_t(q)]->candidate();  // prime the per-block ranking
        impl_->energy[size_t(q)] = impl_->engines[size_t(q)]->residual_norm_squared();
    });
    for (int q = 0; q < q_count; ++q) {
        impl_->engines[size_t(q)]->set_block_index(q);
        impl_->global_energy += impl_->energy[size_t(q)];
        impl_->push_candidate(q);
    }
}

HbwForwardRun::~HbwForwardRun() = default;

bool HbwForwardRun::run_until_total_atoms(long long k) {
    while (impl_->total_atoms < k) {
        if (!impl_->step_global()) return false;
    }
    return true;
}

bool HbwForwardRun::run_until_global_energy(double energy) {
    while (impl_->global_energy > energy) {
        if (!impl_->step_global()) return false;
    }
    return true;
}

long long HbwForwardRun::total_atoms() const { return impl_->total_atoms; }
double HbwForwardRun::global_residual_energy() const { return impl_->global_energy; }
bool HbwForwardRun::exhausted() const { return impl_->exhausted; }

const HbwStats& HbwForwardRun::stats() const {
    impl_->sync_select_calls();
    return impl_->stats;
}

void HbwForwardRun::note_refinement_round() { ++impl_->stats.refinement_rounds; }

std::vector<AtomicDecomposition> HbwForwardRun::decompositions() const {
    std::vector<AtomicDecomposition> out;
    out.reserve(impl_->engines.size());
    for (const auto& e : impl_->engines) out.push_back(e->decomposition());
    return out;
}

HbwForwardResult hbw_forward(const BlockPartition& partition, const SeparableDictionary& dict,
                             EngineKind engine, const StopRule& stop,
                             const EngineOptions& options, int threads,
                             const GlobalPsnrDriver* psnr_driver) {
    HbwForwardRun run(partition, dict, engine, options, threads);
    switch (stop.mode) {
        case StopRule::Mode::max_atoms:
            run.run_until_total_atoms((long long)stop.value);
            break;
        case StopRule::Mode::residual_tolerance:
            run.run_until_global_energy(stop.value * stop.value);
            break;
        case StopRule::Mode::target_psnr_global: {
            if (!psnr_driver || !psnr_driver->measure)
                throw std::invalid_argument("hbw_forward: PSNR stop needs a pixel-domain driver");
            double budget = psnr_driver->target_mse * psnr_driver->pixel_count;
            int rounds = 0;
            while (true) {
                const bool reached = run.run_until_global_energy(budget);
                const double achieved = psnr_driver->measure(run.decompositions());
                if (achieved <= psnr_driver->target_mse * (1.0 + 1e-12)) break;
                if (!reached || rounds >= psnr_driver->max_refinements) break;
                budget *= psnr_driver->target_mse / achieved;
                ++rounds;
                run.note_refinement_round();
            }
            break;
        }
    }
    HbwForwardResult result;
    result.decompositions = run.decompositions();
    result.stats = run.stats();
    result.exhausted = run.exhausted();
    return result;
}

namespace {

struct PruneHeapEntry {
    double energy;  // |c|^2 of the block's smallest coefficient
    int q;
    long long version;
};

// Min-heap on |c|^2; ties pop the smaller block first.
struct PruneGreater {
    bool operator()(const PruneHeapEntry& a, const PruneHeapEntry& b) const {
        if (a.energy != b.energy) return a.energy > b.energy;
        return a.q > b.q;
    }
};

int min_coefficient_index(const AtomicDecomposition& d) {
    int j = -1;
    double best = 0.0;
    for (int n = 0; n < d.atom_count(); ++n) {
        const double e = d.coefficients[size_t(n)] * d.coefficients[size_t(n)];
        if (j < 0 || e < best) {
            j = n;
            best = e;
        }
    }
    return j;
}

}  // namespace

HbwPruneResult hbw_prune(const BlockPartition& partition,
                         std::vector<AtomicDecomposition> decompositions,
                         const SeparableDictionary& dict, const StopRule& target,
                         double eps_proj_rel, int threads) {
    const int q_count = partition.block_count();
    if (int(decompositions.size()) != q_count)
        throw std::invalid_argument("hbw_prune: decomposition count does not match partition");
    if (target.mode == StopRule::Mode::target_psnr_global)
        throw std::invalid_argument("hbw_prune: PSNR targets are resolved by the pipeline");

    // Residual bookkeeping, exact per block: R_q = U_q - sum c A.
    std::vector<Matrix> residual(static_cast<std::size_t>(q_count));
    std::vector<double> energy(size_t(q_count), 0.0);
    std::vector<double> eps(size_t(q_count), 0.0);
    parallel_for(q_count, threads, [&](int q) {
        Matrix r = partition.block(q);
        r.add_scaled(reconstruct_block(decompositions[size_t(q)], dict), -1.0);
        energy[size_t(q)] = frobenius_norm_squared(r);
        eps[size_t(q)] = std::max(eps_proj_rel * frobenius_norm(partition.block(q)), 1e-300);
        residual[size_t(q)] = std::move(r);
    });

    HbwPruneResult result;
    double global_energy = 0.0;
    long long total_atoms = 0;
    for (int q = 0; q < q_count; ++q) {
        global_energy += energy[size_t(q)];
        total_atoms += decompositions[size_t(q)].atom_count();
    }

    std::vector<long long> version(size_t(q_count), 0);
    std::priority_queue<PruneHeapEntry, std::vector<PruneHeapEntry>, PruneGreater> heap;
    auto push_candidate = [&](int q) {
        const int j = min_coefficient_index(decompositions[size_t(q)]);
        if (j >= 0) {
            const double c = decompositions[size_t(q)].coefficients[size_t(j)];
            heap.push({c * c, q, version[size_t(q)]});
        }
    };
    for (int q = 0; q < q_count; ++q) push_candidate(q);

    const double energy_budget = target.mode == StopRule::Mode::residual_tolerance
                                     ? target.value * target.value
                                     : 0.0;

    while (true) {
        if (target.mode == StopRule::Mode::max_atoms && total_atoms <= (long long)target.value)
            break;
        PruneHeapEntry entry{};
        bool have = false;
        while (!heap.empty()) {
            entry = heap.top();
            heap.pop();
            if (entry.version == version[size_t(entry.q)]) {
                have = true;
                break;
            }
        }
        if (!have) {
            // every decomposition emptied: an atom budget of >= 0 is trivially
            // met, but a quality floor was never reached
            result.target_reached = target.mode == StopRule::Mode::max_atoms;
            break;
        }

        const int q = entry.q;
        AtomicDecomposition& d = decompositions[size_t(q)];
        const int j = min_coefficient_index(d);
        const double c = d.coefficients[size_t(j)];
        const int ix = d.index_x[size_t(j)];
        const int iy = d.index_y[size_t(j)];
        const int nb = dict.block_size();

        // Delta = c * A_j, redistributed over the remaining atoms.
        Matrix delta(nb, nb);
        delta.add_outer_scaled({dict.bank_y.atom(iy), size_t(nb)},
                               {dict.bank_x.atom(ix), size_t(nb)}, c);
        std::vector<std::uint16_t> rem_x, rem_y;
        rem_x.reserve(size_t(d.atom_count()) - 1);
        rem_y.reserve(size_t(d.atom_count()) - 1);
        for (int n = 0; n < d.atom_count(); ++n) {
            if (n == j) continue;
            rem_x.push_back(d.index_x[size_t(n)]);
            rem_y.push_back(d.index_y[size_t(n)]);
        }
        ProjectionResult proj = project_iterative(delta, rem_x, rem_y, dict, eps[size_t(q)]);
        result.stats.projection_iterations += proj.iterations;

        Matrix new_residual = residual[size_t(q)];
        new_residual.add_scaled(delta, 1.0);
        new_residual.add_scaled(proj.projection, -1.0);
        const double new_energy = frobenius_norm_squared(new_residual);
        const double new_global = global_energy - energy[size_t(q)] + new_energy;

        if (target.mode == StopRule::Mode::residual_tolerance && new_global > energy_budget)
            break;  // this removal would cross the floor

        // commit
        int out = 0;
        for (int n = 0; n < d.atom_count(); ++n) {
            if (n == j) continue;
            d.index_x[size_t(out)] = d.index_x[size_t(n)];
            d.index_y[size_t(out)] = d.index_y[size_t(n)];
            d.coefficients[size_t(out)] =
                d.coefficients[size_t(n)] + proj.coefficient_updates[size_t(out)];
            ++out;
        }
        d.index_x.resize(size_t(out));
        d.index_y.resize(size_t(out));
        d.coefficients.resize(size_t(out));
        residual[size_t(q)] = std::move(new_residual);
        global_energy = new_global;
        energy[size_t(q)] = new_energy;
        --total_atoms;
        ++result.stats.removals;
        ++version[size_t(q)];
        push_candidate(q);
    }

    result.decompositions = std::move(decompositions);
    result.global_residual_energy = global_energy;
    return result;
}

}  // namespace xsparse
