#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xsparse/pipeline.hpp"

namespace xsparse {

struct BenchEntry {
    std::string path;
    std::optional<double> psnr_target;  // overrides the default per image
};

// Manifest: one image per line as "<path> [psnr_target_db]"; blank lines and
// '#' comments are skipped. No image data ships with the repository.
std::vector<BenchEntry> read_manifest(const std::string& path);

struct BenchOptions {
    std::vector<Method> methods;  // row order per image
    RunConfig base;               // block size, levels, dictionary, threads
    double default_psnr_target = 45.0;
};

// Runs every image x method cell, emitting one CSV data row each, then mean
// and stddev summary rows per method. The DWT baseline is always computed per
// image (it anchors the gain column) but only emitted as a row when listed in
// methods. Per-image failures are logged and the run continues.
void benchmark_corpus(const std::vector<BenchEntry>& entries, const BenchOptions& options,
                      std::ostream& csv, std::ostream& log);

}  // namespace xsparse
