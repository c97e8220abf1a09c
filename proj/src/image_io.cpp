#include "xsparse/image_io.hpp"

#include <bit>
#include <limits>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "xsparse/errors.hpp"

namespace xsparse {

namespace {

constexpr char kRawMagic[8] = {'X', 'S', 'R', 'A', 'W', 'F', '6', '4'};

// Skips whitespace and '#' comment lines, then reads one unsigned decimal.
int read_pnm_token(std::istream& in) {
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF || !std::isdigit(ch)) throw FileError("PGM: malformed header");
    long value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1 << 30) throw FileError("PGM: header value out of range");
        ch = in.get();
    }
    return int(value);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                          (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FileError("raw f64: truncated header");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void write_f64_le(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (unsigned char)((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw FileError("raw f64: truncated payload");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

ImageArray read_pgm(std::istream& in) {
    char p = 0, five = 0;
    in.get(p);
    in.get(five);
    if (!in || p != 'P' || five != '5') throw FileError("PGM: not a P5 file");
    const int width = read_pnm_token(in);
    const int height = read_pnm_token(in);
    const int maxval = read_pnm_token(in);
    if (width <= 0 || height <= 0) throw FileError("PGM: bad dimensions");
    if (maxval <= 0 || maxval > 65535) throw FileError("PGM: unsupported maxval");
    // the single whitespace after maxval was consumed by read_pnm_token

    const int bit_depth = maxval < 256 ? 8 : 16;
    ImageArray img(width, height, bit_depth);
    if (bit_depth == 8) {
        std::vector<unsigned char> line(static_cast<std::size_t>(width));
        for (int r = 0; r < height; ++r) {
            in.read(reinterpret_cast<char*>(line.data()), width);
            if (!in) throw FileError("PGM: truncated pixel data");
            double* dst = img.values.row(r);
            for (int c = 0; c < width; ++c) dst[c] = double(line[size_t(c)]);
        }
    } else {
        std::vector<unsigned char> line(size_t(width) * 2);
        for (int r = 0; r < height; ++r) {
            in.read(reinterpret_cast<char*>(line.data()), width * 2);
            if (!in) throw FileError("PGM: truncated pixel data");
            double* dst = img.values.row(r);
            for (int c = 0; c < width; ++c)
                dst[c] = double(int(line[size_t(c) * 2]) << 8 | int(line[size_t(c) * 2 + 1]));
        }
    }
    return img;
}

ImageArray read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path);
    return read_pgm(f);
}

void write_pgm(const ImageArray& img, std::ostream& out) {
    if (img.bit_depth != 8 && img.bit_depth != 16)
        throw std::invalid_argument("write_pgm: bit depth must be 8 or 16");
    const int maxval = int(img.max_intensity());
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    if (img.bit_depth == 8) {
        std::vector<unsigned char> line(static_cast<std::size_t>(img.width));
        for (int r = 0; r < img.height; ++r) {
            const double* src = img.values.row(r);
            for (int c = 0; c < img.width; ++c) line[size_t(c)] = (unsigned char)(src[c]);
            out.write(reinterpret_cast<const char*>(line.data()), img.width);
        }
    } else {
        std::vector<unsigned char> line(size_t(img.width) * 2);
        for (int r = 0; r < img.height; ++r) {
            const double* src = img.values.row(r);
            for (int c = 0; c < img.width; ++c) {
                const unsigned v = unsigned(src[c]);
                line[size_t(c) * 2] = (unsigned char)(v >> 8);
                line[size_t(c) * 2 + 1] = (unsigned char)(v & 0xff);
            }
            out.write(reinterpret_cast<const char*>(line.data()), img.width * 2);
        }
    }
    if (!out) throw FileError("write_pgm: write failed");
}

void write_pgm(const ImageArray& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path + " for writing");
    write_pgm(img, f);
}

Matrix read_raw_f64(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kRawMagic, 8) != 0) throw FileError("raw f64: bad magic");
    const std::uint32_t width = read_u32_le(in);
    const std::uint32_t height = read_u32_le(in);
    if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
        throw FileError("raw f64: bad dimensions");
    Matrix m(static_cast<int>(height), static_cast<int>(width));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = read_f64_le(in);
    return m;
}

Matrix read_raw_f64(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path);
    return read_raw_f64(f);
}

void write_raw_f64(const Matrix& m, std::ostream& out) {
    out.write(kRawMagic, 8);
    write_u32_le(out, std::uint32_t(m.cols()));
    write_u32_le(out, std::uint32_t(m.rows()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) write_f64_le(out, m(r, c));
    if (!out) throw FileError("raw f64: write failed");
}

void write_raw_f64(const Matrix& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot open " + path + " for writing");
    write_raw_f64(m, f);
}

}  // namespace xsparse
