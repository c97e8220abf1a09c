#include "xsparse/ssr_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "xsparse/errors.hpp"

namespace xsparse {

namespace {

constexpr char kMagic[8] = {'X', 'S', 'P', 'A', 'R', 'S', 'E', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                          (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_f64(std::ostream& out, double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FileError("ssr: truncated file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

std::uint16_t get_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw FileError("ssr: truncated file");
    return std::uint16_t(b[0] | b[1] << 8);
}

double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw FileError("ssr: truncated file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

long long SparseImageFile::total_atoms() const {
    long long k = 0;
    for (const auto& b : blocks) k += b.atom_count();
    return k;
}

void write_ssr(const SparseImageFile& file, std::ostream& out) {
    out.write(kMagic, 8);
    put_u32(out, file.version);
    put_u32(out, std::uint32_t(file.width));
    put_u32(out, std::uint32_t(file.height));
    put_u32(out, std::uint32_t(file.bit_depth));
    put_u32(out, std::uint32_t(file.block_size));
    put_u32(out, std::uint32_t(file.wavelet_levels));
    const std::string config = file.dict_config.to_text();
    put_u32(out, std::uint32_t(config.size()));
    out.write(config.data(), std::streamsize(config.size()));
    for (std::size_t q = 0; q < file.blocks.size(); ++q) {
        const AtomicDecomposition& d = file.blocks[q];
        put_u32(out, std::uint32_t(q));
        put_u32(out, std::uint32_t(d.atom_count()));
        for (int n = 0; n < d.atom_count(); ++n) {
            put_u16(out, d.index_x[size_t(n)]);
            put_u16(out, d.index_y[size_t(n)]);
        }
        for (int n = 0; n < d.atom_count(); ++n) put_f64(out, d.coefficients[size_t(n)]);
    }
    if (!out) throw FileError("ssr: write failed");
}

void write_ssr(const SparseImageFile& file, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path + " for writing");
    write_ssr(file, f);
}

SparseImageFile read_ssr(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw FileError("ssr: bad magic");
    SparseImageFile file;
    file.version = get_u32(in);
    if (file.version != 1) throw FileError("ssr: unsupported version");
    file.width = int(get_u32(in));
    file.height = int(get_u32(in));
    file.bit_depth = int(get_u32(in));
    file.block_size = int(get_u32(in));
    file.wavelet_levels = int(get_u32(in));
    if (file.width <= 0 || file.height <= 0 || file.block_size < 2)
        throw FileError("ssr: bad header geometry");
    const std::uint32_t config_len = get_u32(in);
    if (config_len > (1u << 20)) throw FileError("ssr: oversized dictionary config");
    std::string config(config_len, '\0');
    in.read(config.data(), std::streamsize(config_len));
    if (!in) throw FileError("ssr: truncated dictionary config");
    try {
        file.dict_config = DictionaryConfig::from_text(config);
    } catch (const std::exception& e) {
        throw FileError(std::string("ssr: bad dictionary config: ") + e.what());
    }
    if (file.dict_config.block_size != file.block_size)
        throw FileError("ssr: dictionary block size disagrees with the header");

    // bank size implied by the config; atom indices must stay below it
    int bank_size = 2 * file.dict_config.effective_m_trig();
    const auto& protos = file.dict_config.local_prototypes.empty()
                             ? default_local_prototypes()
                             : file.dict_config.local_prototypes;
    for (const auto& p : protos) {
        if (p.empty() || int(p.size()) > file.block_size)
            throw FileError("ssr: prototype support exceeds the block size");
        bank_size += file.block_size - int(p.size()) + 1;
    }

    const int grid_rows = (file.height + file.block_size - 1) / file.block_size;
    const int grid_cols = (file.width + file.block_size - 1) / file.block_size;
    const int q_count = grid_rows * grid_cols;
    file.blocks.resize(size_t(q_count));
    for (int q = 0; q < q_count; ++q) {
        const std::uint32_t stored_q = get_u32(in);
        if (int(stored_q) != q) throw FileError("ssr: block records out of order");
        const std::uint32_t k = get_u32(in);
        if (k > std::uint32_t(file.block_size) * std::uint32_t(file.block_size))
            throw FileError("ssr: atom count exceeds the block dimension");
        AtomicDecomposition& d = file.blocks[size_t(q)];
        d.block_index = q;
        d.index_x.resize(k);
        d.index_y.resize(k);
        d.coefficients.resize(k);
        for (std::uint32_t n = 0; n < k; ++n) {
            d.index_x[n] = get_u16(in);
            d.index_y[n] = get_u16(in);
            if (d.index_x[n] >= bank_size || d.index_y[n] >= bank_size)
                throw FileError("ssr: atom index outside the dictionary");
        }
        for (std::uint32_t n = 0; n < k; ++n) d.coefficients[n] = get_f64(in);
    }
    return file;
}

SparseImageFile read_ssr(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path);
    return read_ssr(f);
}

}  // namespace xsparse
