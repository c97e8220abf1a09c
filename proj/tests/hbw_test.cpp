#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xsparse/hbw.hpp"

using namespace xsparse;

namespace {

SeparableDictionary default_dict(int nb, int m_trig = 0) {
    DictionaryConfig config;
    config.block_size = nb;
    config.m_trig = m_trig;
    return build_mixed(config);
}

// Brute-force HBW reference: rescans every block's best candidate with a
// fresh select_atom each iteration and steps the winner.
std::vector<AtomicDecomposition> brute_force_hbw(const BlockPartition& part,
                                                 const SeparableDictionary& dict,
                                                 EngineKind kind, long long total_atoms) {
    std::vector<std::unique_ptr<BlockEngine>> engines;
    for (int q = 0; q < part.block_count(); ++q) {
        engines.push_back(make_block_engine(kind, part.block(q), dict));
        engines.back()->set_block_index(q);
    }
    long long placed = 0;
    while (placed < total_atoms) {
        int best_q = -1;
        double best_mag = 0.0;
        for (int q = 0; q < part.block_count(); ++q) {
            const auto cand = select_atom(engines[size_t(q)]->residual(), dict);
            if (!cand) continue;
            const double mag = std::fabs(cand->inner);
            if (best_q < 0 || mag > best_mag) {
                best_q = q;
                best_mag = mag;
            }
        }
        if (best_q < 0) break;
        const StepResult r = engines[size_t(best_q)]->step();
        if (r == StepResult::appended) ++placed;
        if (r == StepResult::exhausted) break;
    }
    std::vector<AtomicDecomposition> out;
    for (auto& e : engines) out.push_back(e->decomposition());
    return out;
}

Matrix padded_random_blocks(Rng& rng, int blocks_per_side, int nb) {
    return oracles::random_matrix(rng, blocks_per_side * nb, blocks_per_side * nb, -20.0, 20.0);
}

}  // namespace

TEST_CASE("hbw_forward: a zero block never receives an atom") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(61);
    Matrix arr(8, 16);  // two blocks side by side
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) arr(r, c) = rng.uniform(-5.0, 5.0);
    const BlockPartition part = partition(arr, 8);
    const auto result = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(12));
    CHECK(result.decompositions[0].atom_count() == 12);
    CHECK(result.decompositions[1].atom_count() == 0);
}

TEST_CASE("hbw_forward equals the brute-force rescan reference") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(62);
    const BlockPartition part = partition(padded_random_blocks(rng, 2, 8), 8);
    const long long k_total = 64;
    const auto fast = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(k_total));
    const auto slow = brute_force_hbw(part, dict, EngineKind::omp2d, k_total);
    REQUIRE(fast.decompositions.size() == slow.size());
    for (std::size_t q = 0; q < slow.size(); ++q) {
        const auto& a = fast.decompositions[q];
        const auto& b = slow[q];
        REQUIRE(a.atom_count() == b.atom_count());
        for (int n = 0; n < a.atom_count(); ++n) {
            CHECK(a.index_x[size_t(n)] == b.index_x[size_t(n)]);
            CHECK(a.index_y[size_t(n)] == b.index_y[size_t(n)]);
            CHECK(a.coefficients[size_t(n)] == b.coefficients[size_t(n)]);  // bitwise
        }
    }
}

TEST_CASE("hbw_forward: a global atom budget is spent exactly") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(63);
    const BlockPartition part = partition(padded_random_blocks(rng, 3, 8), 8);
    const auto result = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(41));
    long long total = 0;
    for (const auto& d : result.decompositions) total += d.atom_count();
    CHECK(total == 41);
    CHECK(!result.exhausted);
}

TEST_CASE("hbw_forward: candidate recomputation is limited to the stepped block") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(64);
    const BlockPartition part = partition(padded_random_blocks(rng, 4, 8), 8);
    const long long k_total = 48;
    const auto result = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(k_total));
    // one candidate per block up front, then one refresh per appended atom
    // (plus one per masked atom, none expected here)
    CHECK(result.stats.select_calls ==
          part.block_count() + k_total + result.stats.masked_atoms);
}

TEST_CASE("hbw_forward: global residual-norm stop") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(69);
    const BlockPartition part = partition(padded_random_blocks(rng, 2, 8), 8);
    double start_energy = 0.0;
    for (int q = 0; q < part.block_count(); ++q)
        start_energy += frobenius_norm_squared(part.block(q));
    const double target_norm = 0.25 * std::sqrt(start_energy);
    const auto result = hbw_forward(part, dict, EngineKind::omp2d,
                                    StopRule::residual_tolerance(target_norm));
    double residual_energy = 0.0;
    for (int q = 0; q < part.block_count(); ++q) {
        Matrix r = part.block(q);
        r.add_scaled(reconstruct_block(result.decompositions[size_t(q)], dict), -1.0);
        residual_energy += frobenius_norm_squared(r);
    }
    CHECK(residual_energy <= target_norm * target_norm * (1.0 + 1e-9));
}

TEST_CASE("hbw_forward: threaded candidate priming changes nothing") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(70);
    const BlockPartition part = partition(padded_random_blocks(rng, 3, 8), 8);
    const auto a =
        hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(40), {}, 1);
    const auto b =
        hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(40), {}, 4);
    for (int q = 0; q < part.block_count(); ++q) {
        const auto& da = a.decompositions[size_t(q)];
        const auto& db = b.decompositions[size_t(q)];
        REQUIRE(da.atom_count() == db.atom_count());
        for (int n = 0; n < da.atom_count(); ++n)
            CHECK(da.coefficients[size_t(n)] == db.coefficients[size_t(n)]);
    }
}

TEST_CASE("hbw_forward: spmp engine tracks the omp engine reconstruction") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(65);
    const BlockPartition part = partition(padded_random_blocks(rng, 2, 8), 8);
    const auto a = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(30));
    const auto b = hbw_forward(part, dict, EngineKind::spmp2d, StopRule::max_atoms(30));
    for (int q = 0; q < part.block_count(); ++q) {
        Matrix diff = reconstruct_block(a.decompositions[size_t(q)], dict);
        diff.add_scaled(reconstruct_block(b.decompositions[size_t(q)], dict), -1.0);
        CHECK(frobenius_norm(diff) <= 1e-5 * frobenius_norm(part.block(q)));
    }
}

TEST_CASE("hbw_forward: exact representation reached before an oversized budget") {
    const SeparableDictionary dict = default_dict(8, 16);
    Matrix arr(8, 8);
    arr.add_scaled(atom_2d(dict, 2, 3), 4.0);
    arr.add_scaled(atom_2d(dict, 40, 11), -1.5);
    const BlockPartition part = partition(arr, 8);
    const auto result = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(1000));
    CHECK(result.exhausted);
    CHECK(result.decompositions[0].atom_count() <= 64);
    Matrix diff = reconstruct_block(result.decompositions[0], dict);
    diff.add_scaled(arr, -1.0);
    CHECK(frobenius_norm(diff) <= 1e-9 * frobenius_norm(arr));
}

TEST_CASE("hbw_prune: orthogonal decomposition prunes with vanishing redistribution") {
    // local-only dictionary keeps the planted spikes the clear greedy winners
    const SeparableDictionary dict =
        make_dictionary(build_local(8), build_local(8));
    Matrix arr(8, 8);
    std::vector<std::pair<int, int>> pairs = {{1, 1}, {2, 3}, {4, 1}, {5, 6}};
    std::vector<double> coeffs = {4.0, -3.0, 2.0, 1.0};
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        Matrix atom = atom_2d(dict, pairs[n].first, pairs[n].second);
        arr.add_scaled(atom, coeffs[n]);
    }
    const BlockPartition part = partition(arr, 8);
    auto decomps = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(4))
                       .decompositions;
    REQUIRE(decomps[0].atom_count() == 4);

    const auto pruned = hbw_prune(part, decomps, dict, StopRule::max_atoms(3), 1e-9);
    REQUIRE(pruned.decompositions[0].atom_count() == 3);
    // the smallest coefficient (1.0) is gone, the others untouched
    for (int n = 0; n < 3; ++n) {
        const double c = pruned.decompositions[0].coefficients[size_t(n)];
        CHECK((std::fabs(c - 4.0) < 1e-9 || std::fabs(c + 3.0) < 1e-9 ||
               std::fabs(c - 2.0) < 1e-9));
    }
    // quality dropped by exactly the removed |c|^2
    CHECK(pruned.global_residual_energy == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hbw_prune: single step equals the min-energy removal plus re-projection oracle") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(66);
    const BlockPartition part = partition(padded_random_blocks(rng, 2, 8), 8);
    auto decomps = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(40))
                       .decompositions;
    long long total = 0;
    for (const auto& d : decomps) total += d.atom_count();

    const double eps_rel = 1e-9;
    const auto pruned = hbw_prune(part, decomps, dict, StopRule::max_atoms(total - 1), eps_rel);

    // oracle: find the globally smallest |c|^2, drop it, least-squares refit
    int oq = -1, oj = -1;
    double omin = 0.0;
    for (int q = 0; q < part.block_count(); ++q)
        for (int n = 0; n < decomps[size_t(q)].atom_count(); ++n) {
            const double e = decomps[size_t(q)].coefficients[size_t(n)] *
                             decomps[size_t(q)].coefficients[size_t(n)];
            if (oq < 0 || e < omin) {
                oq = q;
                oj = n;
                omin = e;
            }
        }
    REQUIRE(pruned.decompositions[size_t(oq)].atom_count() ==
            decomps[size_t(oq)].atom_count() - 1);

    std::vector<std::uint16_t> ix, iy;
    for (int n = 0; n < decomps[size_t(oq)].atom_count(); ++n) {
        if (n == oj) continue;
        ix.push_back(decomps[size_t(oq)].index_x[size_t(n)]);
        iy.push_back(decomps[size_t(oq)].index_y[size_t(n)]);
    }
    const auto refit =
        oracles::least_squares_coefficients(dict, ix, iy, part.block(oq));
    AtomicDecomposition oracle_d;
    oracle_d.index_x = ix;
    oracle_d.index_y = iy;
    oracle_d.coefficients = refit;
    Matrix diff = reconstruct_block(pruned.decompositions[size_t(oq)], dict);
    diff.add_scaled(reconstruct_block(oracle_d, dict), -1.0);
    const double eps_abs = eps_rel * frobenius_norm(part.block(oq));
    CHECK(frobenius_norm(diff) <= 100 * eps_abs);
}

TEST_CASE("hbw_prune: energy bookkeeping bound and span-optimal updates per step") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(67);
    const BlockPartition part = partition(padded_random_blocks(rng, 3, 8), 8);
    auto decomps = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(90))
                       .decompositions;
    long long total = 90;
    double prev_energy = hbw_prune(part, decomps, dict, StopRule::max_atoms(total), 1e-9)
                             .global_residual_energy;
    for (int step = 0; step < 40; ++step) {
        // find what will be removed next
        double cmin = 0.0;
        bool first = true;
        for (const auto& d : decomps)
            for (double c : d.coefficients) {
                if (first || c * c < cmin) cmin = c * c;
                first = false;
            }
        const auto pruned =
            hbw_prune(part, decomps, dict, StopRule::max_atoms(total - 1), 1e-9);
        const double increase = pruned.global_residual_energy - prev_energy;
        CHECK(increase <= cmin * (1.0 + 1e-6) + 1e-6);

        // the pruned block's coefficients stay the span-optimal fit
        int changed = -1;
        for (int q = 0; q < part.block_count(); ++q)
            if (pruned.decompositions[size_t(q)].atom_count() !=
                decomps[size_t(q)].atom_count())
                changed = q;
        REQUIRE(changed >= 0);
        const auto& d = pruned.decompositions[size_t(changed)];
        const auto want =
            oracles::least_squares_coefficients(dict, d.index_x, d.index_y,
                                                part.block(changed));
        AtomicDecomposition refit = d;
        refit.coefficients = want;
        Matrix diff = reconstruct_block(d, dict);
        diff.add_scaled(reconstruct_block(refit, dict), -1.0);
        CHECK(frobenius_norm(diff) <= 100.0 * 1e-9 * frobenius_norm(part.block(changed)));

        decomps = pruned.decompositions;
        prev_energy = pruned.global_residual_energy;
        --total;
    }
}

TEST_CASE("hbw_forward re-ranks a block after masking a dependent candidate") {
    AtomBank1D bank_x;
    bank_x.atoms = Matrix(3, 4);
    bank_x.atoms(0, 0) = 1.0;
    bank_x.atoms(1, 1) = 1.0;
    bank_x.atoms(2, 0) = 1.0 / std::sqrt(2.0);
    bank_x.atoms(2, 1) = 1.0 / std::sqrt(2.0);
    bank_x.family.assign(3, AtomFamily::local);
    AtomBank1D bank_y = bank_x;
    const SeparableDictionary dict = make_dictionary(std::move(bank_x), std::move(bank_y));

    Matrix arr(4, 8);  // two 4x4 blocks
    arr(0, 0) = 2.0;
    arr(0, 1) = 1.0;  // left block: forces masking under the big threshold
    arr(1, 5) = 0.4;  // right block: one clean atom
    const BlockPartition part = partition(arr, 4);

    EngineOptions options;
    options.dependence_threshold = 0.9;
    const auto result =
        hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(10), options);
    CHECK(result.exhausted);
    CHECK(result.stats.masked_atoms > 0);
    CHECK(result.decompositions[0].atom_count() == 1);
    CHECK(result.decompositions[1].atom_count() == 1);
}

TEST_CASE("hbw_prune: quality-floor target stops before crossing") {
    const SeparableDictionary dict = default_dict(8, 16);
    Rng rng(68);
    const BlockPartition part = partition(padded_random_blocks(rng, 2, 8), 8);
    auto decomps = hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(60))
                       .decompositions;
    double start_energy = 0.0;
    for (int q = 0; q < part.block_count(); ++q) {
        Matrix r = part.block(q);
        r.add_scaled(reconstruct_block(decomps[size_t(q)], dict), -1.0);
        start_energy += frobenius_norm_squared(r);
    }
    double min_coeff_energy = 0.0;
    bool first = true;
    for (const auto& d : decomps)
        for (double c : d.coefficients) {
            if (first || c * c < min_coeff_energy) min_coeff_energy = c * c;
            first = false;
        }
    // room for several removals: the cheapest one costs at most min |c|^2
    const double floor_energy = start_energy + 30.0 * (min_coeff_energy + 1e-12);
    const auto pruned = hbw_prune(part, decomps, dict,
                                  StopRule::residual_tolerance(std::sqrt(floor_energy)), 1e-9);
    CHECK(pruned.target_reached);
    CHECK(pruned.global_residual_energy <= floor_energy);
    long long total_before = 0, total_after = 0;
    for (const auto& d : decomps) total_before += d.atom_count();
    for (const auto& d : pruned.decompositions) total_after += d.atom_count();
    CHECK(total_after < total_before);
}

TEST_CASE("hbw_prune: emptying everything before a floor signals unreachable") {
    const SeparableDictionary dict = default_dict(8, 16);
    Matrix arr(8, 8);
    arr.add_scaled(atom_2d(dict, 3, 3), 0.5);
    const BlockPartition part = partition(arr, 8);
    auto decomps =
        hbw_forward(part, dict, EngineKind::omp2d, StopRule::max_atoms(1)).decompositions;
    const auto pruned =
        hbw_prune(part, decomps, dict, StopRule::residual_tolerance(1e6), 1e-9);
    CHECK(!pruned.target_reached);
    CHECK(pruned.decompositions[0].atom_count() == 0);
}
