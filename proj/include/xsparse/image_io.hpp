#pragma once

#include <iosfwd>
#include <string>

#include "xsparse/image.hpp"

namespace xsparse {

// Binary PGM (P5). maxval up to 255 reads as 8-bit, larger maxval as 16-bit
// big-endian samples, per the Netpbm convention.
ImageArray read_pgm(std::istream& in);
ImageArray read_pgm(const std::string& path);
void write_pgm(const ImageArray& img, std::ostream& out);
void write_pgm(const ImageArray& img, const std::string& path);

// Raw transform-domain array: 16-byte header (8-byte magic "XSRAWF64",
// uint32 width, uint32 height, little-endian) followed by row-major
// little-endian float64 samples.
Matrix read_raw_f64(std::istream& in);
Matrix read_raw_f64(const std::string& path);
void write_raw_f64(const Matrix& m, std::ostream& out);
void write_raw_f64(const Matrix& m, const std::string& path);

}  // namespace xsparse
