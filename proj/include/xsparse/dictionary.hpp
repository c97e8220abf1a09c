#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xsparse/matrix.hpp"

namespace xsparse {

enum class AtomFamily : std::uint8_t { cosine, sine, local };

// Bank of unit-norm 1D atoms, one per row. bank_x atoms modulate the image
// x direction (columns), bank_y atoms the y direction (rows); the implicit
// 2D atom for the pair (ix, iy) has entries atom(r, c) = ay(r) * ax(c).
struct AtomBank1D {
    Matrix atoms;  // atom_count x atom_length
    std::vector<AtomFamily> family;

    int atom_length() const { return atoms.cols(); }
    int atom_count() const { return atoms.rows(); }
    const double* atom(int n) const { return atoms.row(n); }
};

// Everything needed to rebuild the default mixed dictionary deterministically.
// m_trig = 0 means the default 2 * block_size per trigonometric family.
struct DictionaryConfig {
    int block_size = 16;
    int m_trig = 0;
    std::vector<std::vector<double>> local_prototypes;  // empty means default set

    int effective_m_trig() const { return m_trig > 0 ? m_trig : 2 * block_size; }

    std::string to_text() const;
    static DictionaryConfig from_text(const std::string& text);
};

const std::vector<std::vector<double>>& default_local_prototypes();

// d_n(i) = w_c(n) cos(pi (2i-1)(n-1) / (2M)), i = 1..nb, n = 1..m, unit norm.
// m >= nb; for m == nb this is the orthonormal DCT-II basis.
AtomBank1D build_trig_cos(int nb, int m);

// d_n(i) = w_s(n) sin(pi (2i-1) n / (2M)), i = 1..nb, n = 1..m, unit norm.
AtomBank1D build_trig_sin(int nb, int m);

// All one-point translations of each prototype (supports 1..3 by default),
// each normalized. nb >= 3.
AtomBank1D build_local(int nb, const std::vector<std::vector<double>>& prototypes = {});

struct SeparableDictionary {
    AtomBank1D bank_x;
    AtomBank1D bank_y;
    DictionaryConfig config;
    Matrix gram_x;  // bank_x.atoms * bank_x.atoms^T
    Matrix gram_y;

    int block_size() const { return bank_x.atom_length(); }
    long long atom_count_2d() const {
        return (long long)bank_x.atom_count() * bank_y.atom_count();
    }
};

// D^x = D_C union D_S union D_L, D^y = D^x. Family tags are retained and
// exact duplicates across families are kept.
SeparableDictionary build_mixed(const DictionaryConfig& config);

// Wraps arbitrary banks (computes the Gram tables); banks must share the atom
// length.
SeparableDictionary make_dictionary(AtomBank1D bank_x, AtomBank1D bank_y,
                                    DictionaryConfig config = {});

// Outer-product 2D atom for the index pair; unit Frobenius norm.
Matrix atom_2d(const SeparableDictionary& dict, int index_x, int index_y);

}  // namespace xsparse
