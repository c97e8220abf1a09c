#include "xsparse/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace xsparse {

namespace {

void require_comparable(const ImageArray& ref, const ImageArray& approx) {
    if (ref.width != approx.width || ref.height != approx.height)
        throw std::invalid_argument("metrics: image dimensions differ");
    if (ref.bit_depth != approx.bit_depth)
        throw std::invalid_argument("metrics: bit depths differ");
}

// Separable valid-mode convolution with a unit-sum kernel.
Matrix filter_valid(const Matrix& img, const std::vector<double>& kernel) {
    const int k = int(kernel.size());
    Matrix horiz(img.rows(), img.cols() - k + 1);
    for (int r = 0; r < img.rows(); ++r) {
        const double* src = img.row(r);
        double* dst = horiz.row(r);
        for (int c = 0; c < horiz.cols(); ++c) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += kernel[size_t(i)] * src[c + i];
            dst[c] = acc;
        }
    }
    Matrix out(img.rows() - k + 1, horiz.cols());
    for (int c = 0; c < out.cols(); ++c) {
        for (int r = 0; r < out.rows(); ++r) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += kernel[size_t(i)] * horiz(r + i, c);
            out(r, c) = acc;
        }
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
    return out;
}

std::string format_number(double v, const char* fmt) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

double mse(const ImageArray& ref, const ImageArray& approx) {
    require_comparable(ref, approx);
    double acc = 0.0;
    for (int r = 0; r < ref.height; ++r) {
        const double* a = ref.values.row(r);
        const double* b = approx.values.row(r);
        for (int c = 0; c < ref.width; ++c) {
            const double d = a[c] - b[c];
            acc += d * d;
        }
    }
    return acc / double(ref.pixel_count());
}

double psnr(const ImageArray& ref, const ImageArray& approx) {
    const double m = mse(ref, approx);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    const double peak = ref.max_intensity();
    return 10.0 * std::log10(peak * peak / m);
}

double mssim(const ImageArray& ref, const ImageArray& approx, const MssimOptions& opt) {
    require_comparable(ref, approx);
    if (opt.window_size < 1 || opt.window_size % 2 == 0)
        throw std::invalid_argument("mssim: window size must be odd and positive");
    if (ref.width < opt.window_size || ref.height < opt.window_size)
        throw std::invalid_argument("mssim: image smaller than the window");

    std::vector<double> kernel(static_cast<std::size_t>(opt.window_size));
    const double mid = (opt.window_size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < opt.window_size; ++i) {
        const double d = i - mid;
        kernel[size_t(i)] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
        sum += kernel[size_t(i)];
    }
    for (double& v : kernel) v /= sum;

    const double peak = ref.max_intensity();
    const double c1 = (opt.k1 * peak) * (opt.k1 * peak);
    const double c2 = (opt.k2 * peak) * (opt.k2 * peak);

    const Matrix& x = ref.values;
    const Matrix& y = approx.values;
    Matrix mu1 = filter_valid(x, kernel);
    Matrix mu2 = filter_valid(y, kernel);
    Matrix e11 = filter_valid(hadamard(x, x), kernel);
    Matrix e22 = filter_valid(hadamard(y, y), kernel);
    Matrix e12 = filter_valid(hadamard(x, y), kernel);

    double acc = 0.0;
    for (int r = 0; r < mu1.rows(); ++r) {
        for (int c = 0; c < mu1.cols(); ++c) {
            const double m1 = mu1(r, c);
            const double m2 = mu2(r, c);
            const double s1 = e11(r, c) - m1 * m1;
            const double s2 = e22(r, c) - m2 * m2;
            const double s12 = e12(r, c) - m1 * m2;
            const double num = (2.0 * m1 * m2 + c1) * (2.0 * s12 + c2);
            const double den = (m1 * m1 + m2 * m2 + c1) * (s1 + s2 + c2);
            acc += num / den;
        }
    }
    return acc / (double(mu1.rows()) * mu1.cols());
}

double sparsity_ratio(int width, int height, long long atom_count) {
    if (atom_count < 1) throw std::invalid_argument("sparsity_ratio: atom count must be >= 1");
    return double(width) * height / double(atom_count);
}

double sparsity_ratio(const BlockPartition& p, long long atom_count) {
    return sparsity_ratio(p.original_width(), p.original_height(), atom_count);
}

double gain_percent(double sr_a, double sr_b) {
    if (!(sr_b > 0.0)) throw std::invalid_argument("gain_percent: reference SR must be > 0");
    return (sr_a - sr_b) / sr_b * 100.0;
}

std::string csv_header() {
    return "image,method,N_b,levels,psnr_target,psnr,mssim,K,sr,gain_vs_dwt,seconds";
}

std::string csv_row(const std::string& image, double psnr_target, const QualityReport& report,
                    std::optional<double> gain_vs_dwt) {
    std::ostringstream out;
    out << image << ',' << report.method << ',' << report.block_size << ','
        << report.wavelet_levels << ',' << format_number(psnr_target, "%.4f") << ','
        << format_number(report.psnr_db, "%.4f") << ','
        << format_number(report.mssim_value, "%.6f") << ',' << report.atoms_total << ','
        << format_number(report.sr, "%.4f") << ','
        << (gain_vs_dwt ? format_number(*gain_vs_dwt, "%.2f") : std::string()) << ','
        << format_number(report.elapsed_seconds, "%.3f");
    return out.str();
}

}  // namespace xsparse
