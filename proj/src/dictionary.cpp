#include "xsparse/dictionary.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace xsparse {

namespace {

void normalize_row(Matrix& atoms, int n) {
    double* row = atoms.row(n);
    double norm2 = 0.0;
    for (int i = 0; i < atoms.cols(); ++i) norm2 += row[i] * row[i];
    const double norm = std::sqrt(norm2);
    if (norm == 0.0) throw std::logic_error("dictionary: zero atom");
    for (int i = 0; i < atoms.cols(); ++i) row[i] /= norm;
}

Matrix bank_gram(const AtomBank1D& bank) {
    const int m = bank.atom_count();
    Matrix g(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            double acc = 0.0;
            const double* pa = bank.atom(a);
            const double* pb = bank.atom(b);
            for (int i = 0; i < bank.atom_length(); ++i) acc += pa[i] * pb[i];
            g(a, b) = acc;
            g(b, a) = acc;
        }
    }
    return g;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw std::invalid_argument("DictionaryConfig: bad number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty())
        throw std::invalid_argument("DictionaryConfig: bad integer: '" + s + "'");
    return v;
}

}  // namespace

const std::vector<std::vector<double>>& default_local_prototypes() {
    static const std::vector<std::vector<double>> protos = {
        {1.0}, {1.0, 1.0}, {1.0, -1.0}, {1.0, 1.0, 1.0}, {1.0, -1.0, 1.0}};
    return protos;
}

AtomBank1D build_trig_cos(int nb, int m) {
    if (nb < 1) throw std::invalid_argument("build_trig_cos: block size must be positive");
    if (m < nb) throw std::invalid_argument("build_trig_cos: need at least block_size atoms");
    AtomBank1D bank;
    bank.atoms = Matrix(m, nb);
    bank.family.assign(size_t(m), AtomFamily::cosine);
    for (int n = 1; n <= m; ++n) {
        for (int i = 1; i <= nb; ++i)
            bank.atoms(n - 1, i - 1) =
                std::cos(std::numbers::pi * (2 * i - 1) * (n - 1) / (2.0 * m));
        normalize_row(bank.atoms, n - 1);
    }
    return bank;
}

AtomBank1D build_trig_sin(int nb, int m) {
    if (nb < 1) throw std::invalid_argument("build_trig_sin: block size must be positive");
    if (m < nb) throw std::invalid_argument("build_trig_sin: need at least block_size atoms");
    AtomBank1D bank;
    bank.atoms = Matrix(m, nb);
    bank.family.assign(size_t(m), AtomFamily::sine);
    for (int n = 1; n <= m; ++n) {
        for (int i = 1; i <= nb; ++i)
            bank.atoms(n - 1, i - 1) = std::sin(std::numbers::pi * (2 * i - 1) * n / (2.0 * m));
        normalize_row(bank.atoms, n - 1);
    }
    return bank;
}

AtomBank1D build_local(int nb, const std::vector<std::vector<double>>& prototypes) {
    if (nb < 3) throw std::invalid_argument("build_local: block size must be >= 3");
    const auto& protos = prototypes.empty() ? default_local_prototypes() : prototypes;
    int count = 0;
    for (const auto& p : protos) {
        if (p.empty() || int(p.size()) > nb)
            throw std::invalid_argument("build_local: prototype support out of range");
        count += nb - int(p.size()) + 1;
    }
    AtomBank1D bank;
    bank.atoms = Matrix(count, nb);
    bank.family.assign(size_t(count), AtomFamily::local);
    int n = 0;
    for (const auto& p : protos) {
        const int support = int(p.size());
        for (int pos = 0; pos + support <= nb; ++pos) {
            for (int i = 0; i < support; ++i) bank.atoms(n, pos + i) = p[size_t(i)];
            normalize_row(bank.atoms, n);
            ++n;
        }
    }
    return bank;
}

SeparableDictionary build_mixed(const DictionaryConfig& config) {
    const int nb = config.block_size;
    const int mt = config.effective_m_trig();
    AtomBank1D cosb = build_trig_cos(nb, mt);
    AtomBank1D sinb = build_trig_sin(nb, mt);
    AtomBank1D locb = build_local(nb, config.local_prototypes);

    AtomBank1D bank;
    const int total = cosb.atom_count() + sinb.atom_count() + locb.atom_count();
    bank.atoms = Matrix(total, nb);
    bank.family.reserve(size_t(total));
    int n = 0;
    for (const AtomBank1D* part : {&cosb, &sinb, &locb}) {
        for (int a = 0; a < part->atom_count(); ++a, ++n) {
            for (int i = 0; i < nb; ++i) bank.atoms(n, i) = part->atoms(a, i);
            bank.family.push_back(part->family[size_t(a)]);
        }
    }

    SeparableDictionary dict;
    dict.bank_x = bank;
    dict.bank_y = std::move(bank);
    dict.config = config;
    dict.gram_x = bank_gram(dict.bank_x);
    dict.gram_y = dict.gram_x;  // bank_y == bank_x
    return dict;
}

SeparableDictionary make_dictionary(AtomBank1D bank_x, AtomBank1D bank_y,
                                    DictionaryConfig config) {
    if (bank_x.atom_length() != bank_y.atom_length())
        throw std::invalid_argument("make_dictionary: atom length mismatch");
    SeparableDictionary dict;
    dict.bank_x = std::move(bank_x);
    dict.bank_y = std::move(bank_y);
    config.block_size = dict.bank_x.atom_length();
    dict.config = config;
    dict.gram_x = bank_gram(dict.bank_x);
    dict.gram_y = bank_gram(dict.bank_y);
    return dict;
}

Matrix atom_2d(const SeparableDictionary& dict, int index_x, int index_y) {
    if (index_x < 0 || index_x >= dict.bank_x.atom_count() || index_y < 0 ||
        index_y >= dict.bank_y.atom_count())
        throw std::out_of_range("atom_2d: atom index out of range");
    const int nb = dict.block_size();
    const double* ax = dict.bank_x.atom(index_x);
    const double* ay = dict.bank_y.atom(index_y);
    Matrix a(nb, nb);
    for (int r = 0; r < nb; ++r)
        for (int c = 0; c < nb; ++c) a(r, c) = ay[r] * ax[c];
    return a;
}

std::string DictionaryConfig::to_text() const {
    std::ostringstream out;
    out << "nb=" << block_size << "\n";
    out << "m_trig=" << effective_m_trig() << "\n";
    out << "prototypes=";
    const auto& protos = local_prototypes.empty() ? default_local_prototypes() : local_prototypes;
    for (size_t p = 0; p < protos.size(); ++p) {
        if (p) out << "|";
        for (size_t i = 0; i < protos[p].size(); ++i) {
            if (i) out << ",";
            out << format_double(protos[p][i]);
        }
    }
    out << "\n";
    return out.str();
}

DictionaryConfig DictionaryConfig::from_text(const std::string& text) {
    DictionaryConfig config;
    config.block_size = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("DictionaryConfig: malformed line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "nb") {
            config.block_size = parse_int(value);
        } else if (key == "m_trig") {
            config.m_trig = parse_int(value);
        } else if (key == "prototypes") {
            config.local_prototypes.clear();
            std::istringstream ps(value);
            std::string proto;
            while (std::getline(ps, proto, '|')) {
                std::vector<double> entries;
                std::istringstream es(proto);
                std::string entry;
                while (std::getline(es, entry, ',')) entries.push_back(parse_double(entry));
                if (entries.empty())
                    throw std::invalid_argument("DictionaryConfig: empty prototype");
                config.local_prototypes.push_back(std::move(entries));
            }
        } else {
            throw std::invalid_argument("DictionaryConfig: unknown key: " + key);
        }
    }
    if (config.block_size < 2) throw std::invalid_argument("DictionaryConfig: missing nb");
    return config;
}

}  // namespace xsparse
