#include "xsparse/bench.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "xsparse/baselines.hpp"
#include "xsparse/errors.hpp"
#include "xsparse/image_io.hpp"
#include "xsparse/parallel.hpp"

namespace xsparse {

std::vector<BenchEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open manifest " + path);
    std::vector<BenchEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        BenchEntry entry;
        if (!(ls >> entry.path) || entry.path[0] == '#') continue;
        double target;
        if (ls >> target) entry.psnr_target = target;
        entries.push_back(std::move(entry));
    }
    return entries;
}

namespace {

struct MethodAccumulator {
    std::vector<double> psnr, mssim, sr, gain, seconds, targets;
    std::vector<long long> atoms;

    void add(double target, const QualityReport& r, double g) {
        targets.push_back(target);
        psnr.push_back(r.psnr_db);
        mssim.push_back(r.mssim_value);
        sr.push_back(r.sr);
        gain.push_back(g);
        seconds.push_back(r.elapsed_seconds);
        atoms.push_back(r.atoms_total);
    }
};

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / double(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / double(v.size() - 1));
}

QualityReport run_one(const ImageArray& image, Method method, const RunConfig& base,
                      double target, const BaselineResult& dwt) {
    if (method == Method::dwt_baseline) return dwt.report;
    if (method == Method::dct_baseline) return dct_threshold_baseline(image, target).report;
    RunConfig config = base;
    config.method = method;
    config.stop = StopRule::target_psnr(target);
    return approximate_image(image, config).report;
}

struct ImageOutcome {
    double target = 0.0;
    std::vector<std::pair<Method, QualityReport>> reports;  // succeeded cells
    std::vector<double> gains;
    std::string log;
};

}  // namespace

void benchmark_corpus(const std::vector<BenchEntry>& entries, const BenchOptions& options,
                      std::ostream& csv, std::ostream& log) {
    // Images are independent: fan the corpus across the worker pool and emit
    // rows in manifest order afterwards.
    std::vector<ImageOutcome> outcomes(entries.size());
    RunConfig per_image = options.base;
    const int pool = options.base.threads;
    if (pool > 1) per_image.threads = 1;

    parallel_for(int(entries.size()), pool, [&](int i) {
        const BenchEntry& entry = entries[size_t(i)];
        ImageOutcome& out = outcomes[size_t(i)];
        out.target = entry.psnr_target.value_or(options.default_psnr_target);
        std::ostringstream olog;
        ImageArray image;
        try {
            image = read_pgm(entry.path);
        } catch (const std::exception& e) {
            olog << "bench: skipping " << entry.path << ": " << e.what() << "\n";
            out.log = olog.str();
            return;
        }
        BaselineResult dwt;
        try {
            dwt = dwt_threshold_baseline(image, out.target, options.base.wavelet_levels);
        } catch (const std::exception& e) {
            olog << "bench: skipping " << entry.path << " (dwt reference failed): " << e.what()
                 << "\n";
            out.log = olog.str();
            return;
        }
        for (Method method : options.methods) {
            try {
                const QualityReport report =
                    run_one(image, method, per_image, out.target, dwt);
                const double gain = gain_percent(report.sr, dwt.report.sr);
                if (std::isfinite(out.target) && report.mssim_value < 0.998)
                    olog << "bench: " << entry.path << " " << method_name(method) << ": MSSIM "
                         << report.mssim_value << " below 0.998\n";
                out.reports.emplace_back(method, report);
                out.gains.push_back(gain);
            } catch (const std::exception& e) {
                olog << "bench: " << entry.path << " " << method_name(method) << ": "
                     << e.what() << "\n";
            }
        }
        out.log = olog.str();
    });

    csv << csv_header() << "\n";
    std::map<Method, MethodAccumulator> summary;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ImageOutcome& out = outcomes[i];
        log << out.log;
        for (std::size_t m = 0; m < out.reports.size(); ++m) {
            const auto& [method, report] = out.reports[m];
            csv << csv_row(entries[i].path, out.target, report, out.gains[m]) << "\n";
            summary[method].add(out.target, report, out.gains[m]);
        }
    }

    for (const auto& [method, acc] : summary) {
        QualityReport mean_report;
        mean_report.method = method_name(method);
        mean_report.block_size = method == Method::dct_baseline   ? 8
                                 : method == Method::dwt_baseline ? 0
                                                                  : options.base.block_size;
        mean_report.wavelet_levels =
            method == Method::dct_baseline ? 0 : options.base.wavelet_levels;
        mean_report.psnr_db = mean_of(acc.psnr);
        mean_report.mssim_value = mean_of(acc.mssim);
        mean_report.sr = mean_of(acc.sr);
        mean_report.elapsed_seconds = mean_of(acc.seconds);
        long long k = 0;
        for (long long a : acc.atoms) k += a;
        mean_report.atoms_total = acc.atoms.empty() ? 0 : k / (long long)acc.atoms.size();
        csv << csv_row("mean", mean_of(acc.targets), mean_report, mean_of(acc.gain)) << "\n";

        QualityReport sd_report = mean_report;
        sd_report.psnr_db = stddev_of(acc.psnr);
        sd_report.mssim_value = stddev_of(acc.mssim);
        sd_report.sr = stddev_of(acc.sr);
        sd_report.elapsed_seconds = stddev_of(acc.seconds);
        sd_report.atoms_total = 0;
        csv << csv_row("stddev", 0.0, sd_report, stddev_of(acc.gain)) << "\n";
    }
}

}  // namespace xsparse
