#pragma once

#include <optional>
#include <string>

#include "xsparse/image.hpp"

namespace xsparse {

// MSE over intensity images: ||ref - approx||_F^2 / (N_x N_y). The caller is
// responsible for rounding/clamping the approximation first.
double mse(const ImageArray& ref, const ImageArray& approx);

// 10 log10((2^l - 1)^2 / MSE); +infinity when the images are identical.
double psnr(const ImageArray& ref, const ImageArray& approx);

// Standard structural-similarity parameterization: 11x11 Gaussian window,
// sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range L = 2^l - 1.
struct MssimOptions {
    int window_size = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

// Mean of local SSIM over all fully interior (valid) window positions.
// Equals 1 exactly iff the images agree on every window. Throws when the
// image is smaller than the window.
double mssim(const ImageArray& ref, const ImageArray& approx, const MssimOptions& opt = {});

// SR = N_x N_y / K with the true pixel count, also when blocks were padded.
double sparsity_ratio(int width, int height, long long atom_count);
double sparsity_ratio(const BlockPartition& p, long long atom_count);

// G = (SR_A - SR_B) / SR_B * 100.
double gain_percent(double sr_a, double sr_b);

struct QualityReport {
    std::string method;
    int block_size = 0;      // 0 when not block based
    int wavelet_levels = 0;  // 0 when no wavelet stage
    double psnr_db = 0.0;    // may be +inf
    double mse_value = 0.0;
    double mssim_value = 0.0;
    double sr = 0.0;
    long long atoms_total = 0;
    double elapsed_seconds = 0.0;
};

// CSV schema v1:
// image,method,N_b,levels,psnr_target,psnr,mssim,K,sr,gain_vs_dwt,seconds
std::string csv_header();
std::string csv_row(const std::string& image, double psnr_target, const QualityReport& report,
                    std::optional<double> gain_vs_dwt = std::nullopt);

}  // namespace xsparse
