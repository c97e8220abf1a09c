#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "xsparse/baselines.hpp"
#include "xsparse/bench.hpp"
#include "xsparse/errors.hpp"
#include "xsparse/image_io.hpp"
#include "xsparse/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitTargetUnreachable = 3;
constexpr int kExitIoError = 4;

struct CommonFlags {
    std::string method;
    int block_size = 16;
    int levels = 5;
    int m_trig = 0;
    std::string prototypes;
    double psnr_target = 45.0;
    std::optional<long long> max_atoms;
    std::optional<double> tolerance;
    double prune_overshoot = 2.0;
    int threads = 1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_method) {
    if (with_method)
        cmd->add_option("--method", flags.method,
                        "omp2d|spmp2d|hbw-omp2d|hbw-spmp2d|prune (default: hbw-omp2d, or "
                        "hbw-spmp2d for blocks larger than 16)");
    cmd->add_option("--nb", flags.block_size, "Block size N_b")->check(CLI::Range(2, 256));
    cmd->add_option("--levels", flags.levels, "Wavelet decomposition depth")
        ->check(CLI::Range(1, 16));
    cmd->add_option("--m-trig", flags.m_trig,
                    "Atoms per trigonometric family (0 = 2*N_b default)");
    cmd->add_option("--prototypes", flags.prototypes,
                    "Local prototype atoms, e.g. \"1|1,1|1,-1|1,1,1|1,-1,1\"");
    auto* target = cmd->add_option("--target", flags.psnr_target, "PSNR target in dB");
    auto* atoms = cmd->add_option("--max-atoms", flags.max_atoms,
                                  "Atom budget: global for hbw methods, per block otherwise");
    auto* tol = cmd->add_option("--tolerance", flags.tolerance,
                                "Residual Frobenius-norm tolerance: global for hbw methods, "
                                "per block otherwise");
    target->excludes(atoms)->excludes(tol);
    atoms->excludes(tol);
    cmd->add_option("--prune-overshoot", flags.prune_overshoot,
                    "Forward PSNR overshoot percent before pruning");
    cmd->add_option("--threads", flags.threads, "Worker threads for per-block stages")
        ->check(CLI::Range(1, 256));
}

xsparse::RunConfig make_config(const CommonFlags& flags) {
    xsparse::RunConfig config;
    if (flags.method.empty()) {
        config.method = flags.block_size > 16 ? xsparse::Method::hbw_spmp2d
                                              : xsparse::Method::hbw_omp2d;
    } else {
        auto method = xsparse::parse_method(flags.method);
        if (!method || *method == xsparse::Method::dwt_baseline ||
            *method == xsparse::Method::dct_baseline)
            throw std::invalid_argument("unknown method: " + flags.method);
        config.method = *method;
    }
    config.block_size = flags.block_size;
    config.wavelet_levels = flags.levels;
    config.dictionary.block_size = flags.block_size;
    config.dictionary.m_trig = flags.m_trig;
    if (!flags.prototypes.empty()) {
        const auto parsed = xsparse::DictionaryConfig::from_text(
            "nb=" + std::to_string(flags.block_size) + "\nprototypes=" + flags.prototypes +
            "\n");
        config.dictionary.local_prototypes = parsed.local_prototypes;
    }
    if (flags.max_atoms)
        config.stop = xsparse::StopRule::max_atoms(*flags.max_atoms);
    else if (flags.tolerance)
        config.stop = xsparse::StopRule::residual_tolerance(*flags.tolerance);
    else
        config.stop = xsparse::StopRule::target_psnr(flags.psnr_target);
    config.prune_overshoot_percent = flags.prune_overshoot;
    config.threads = flags.threads;
    return config;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw xsparse::FileError("cannot open " + path + " for writing");
    return out;
}

int run_encode(const std::string& input, const std::string& output, const CommonFlags& flags,
               const std::string& report_path) {
    const xsparse::ImageArray image = xsparse::read_pgm(input);
    const xsparse::RunConfig config = make_config(flags);
    const xsparse::ApproximationResult result = xsparse::approximate_image(image, config);
    xsparse::write_ssr(result.file, output);

    const double target = config.stop.mode == xsparse::StopRule::Mode::target_psnr_global
                              ? config.stop.value
                              : std::numeric_limits<double>::quiet_NaN();
    if (config.stop.mode == xsparse::StopRule::Mode::target_psnr_global &&
        result.report.psnr_db < target - 1e-9)
        std::cerr << "encode: target " << target << " dB not reached, best effort "
                  << result.report.psnr_db << " dB\n";
    const std::string row = xsparse::csv_row(input, target, result.report);
    if (report_path.empty()) {
        std::cout << xsparse::csv_header() << "\n" << row << "\n";
    } else {
        auto out = open_output(report_path);
        out << xsparse::csv_header() << "\n" << row << "\n";
    }
    return kExitOk;
}

int run_decode(const std::string& input, const std::string& output) {
    const xsparse::SparseImageFile file = xsparse::read_ssr(input);
    xsparse::write_pgm(xsparse::decode_image(file), output);
    return kExitOk;
}

int run_baseline(const std::string& kind, const std::string& input, const CommonFlags& flags,
                 const std::string& report_path) {
    const xsparse::ImageArray image = xsparse::read_pgm(input);
    xsparse::BaselineResult result;
    if (kind == "dwt")
        result = xsparse::dwt_threshold_baseline(image, flags.psnr_target, flags.levels);
    else if (kind == "dct")
        result = xsparse::dct_threshold_baseline(image, flags.psnr_target);
    else
        throw std::invalid_argument("baseline kind must be dwt or dct");
    const std::string row = xsparse::csv_row(input, flags.psnr_target, result.report);
    if (report_path.empty()) {
        std::cout << xsparse::csv_header() << "\n" << row << "\n";
    } else {
        auto out = open_output(report_path);
        out << xsparse::csv_header() << "\n" << row << "\n";
    }
    return kExitOk;
}

std::vector<xsparse::Method> parse_method_list(const std::string& list) {
    std::vector<xsparse::Method> methods;
    std::istringstream in(list);
    std::string name;
    while (std::getline(in, name, ',')) {
        auto method = xsparse::parse_method(name);
        if (!method) throw std::invalid_argument("unknown method: " + name);
        methods.push_back(*method);
    }
    if (methods.empty()) throw std::invalid_argument("empty method list");
    return methods;
}

int run_bench(const std::string& manifest, const std::string& methods_csv,
              const CommonFlags& flags, const std::string& out_path) {
    xsparse::BenchOptions options;
    options.methods = parse_method_list(methods_csv);
    options.base = make_config(flags);
    options.default_psnr_target = flags.psnr_target;
    const auto entries = xsparse::read_manifest(manifest);
    if (out_path.empty()) {
        xsparse::benchmark_corpus(entries, options, std::cout, std::cerr);
    } else {
        auto out = open_output(out_path);
        xsparse::benchmark_corpus(entries, options, out, std::cerr);
    }
    return kExitOk;
}

int run_sweep(const std::string& input, const std::string& nb_list,
              const std::string& methods_csv, const CommonFlags& flags,
              const std::string& out_path) {
    const xsparse::ImageArray image = xsparse::read_pgm(input);
    const std::vector<xsparse::Method> methods = parse_method_list(methods_csv);
    std::vector<int> sizes;
    {
        std::istringstream in(nb_list);
        std::string tok;
        while (std::getline(in, tok, ',')) sizes.push_back(std::stoi(tok));
        if (sizes.empty()) throw std::invalid_argument("empty block-size list");
    }

    std::ostringstream csv;
    csv << xsparse::csv_header() << "\n";
    const xsparse::BaselineResult dwt =
        xsparse::dwt_threshold_baseline(image, flags.psnr_target, flags.levels);
    for (xsparse::Method method : methods) {
        if (method == xsparse::Method::dwt_baseline) {
            csv << xsparse::csv_row(input, flags.psnr_target, dwt.report, 0.0) << "\n";
            continue;
        }
        if (method == xsparse::Method::dct_baseline) {
            const auto dct = xsparse::dct_threshold_baseline(image, flags.psnr_target);
            csv << xsparse::csv_row(input, flags.psnr_target, dct.report,
                                    xsparse::gain_percent(dct.report.sr, dwt.report.sr))
                << "\n";
            continue;
        }
        for (int nb : sizes) {
            CommonFlags per = flags;
            per.block_size = nb;
            per.method = xsparse::method_name(method);
            xsparse::RunConfig config = make_config(per);
            const auto result = xsparse::approximate_image(image, config);
            csv << xsparse::csv_row(input, flags.psnr_target, result.report,
                                    xsparse::gain_percent(result.report.sr, dwt.report.sr))
                << "\n";
        }
    }
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        auto out = open_output(out_path);
        out << csv.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse representation of grayscale images over separable mixed dictionaries "
                 "in the wavelet domain"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string input, output, report_path, baseline_kind, manifest;
    std::string methods_csv = "dwt-baseline,dct-baseline,omp2d,hbw-omp2d";
    std::string nb_list = "8,16,24";

    CLI::App* encode = app.add_subcommand("encode", "Image -> sparse .ssr file plus report");
    encode->add_option("input", input, "Input PGM")->required();
    encode->add_option("output", output, "Output .ssr path")->required();
    encode->add_option("--report", report_path, "Write the CSV report here instead of stdout");
    add_common_flags(encode, flags, true);

    CLI::App* decode = app.add_subcommand("decode", "Sparse .ssr file -> PGM");
    decode->add_option("input", input, "Input .ssr")->required();
    decode->add_option("output", output, "Output PGM path")->required();

    CLI::App* baseline = app.add_subcommand("baseline", "DWT/DCT thresholding reference");
    baseline->add_option("kind", baseline_kind, "dwt or dct")->required();
    baseline->add_option("input", input, "Input PGM")->required();
    baseline->add_option("--report", report_path, "Write the CSV report here instead of stdout");
    add_common_flags(baseline, flags, false);

    CLI::App* bench = app.add_subcommand("bench", "Manifest of images -> CSV comparison");
    bench->add_option("--manifest", manifest, "Text manifest: <path> [psnr_target]")->required();
    bench->add_option("--methods", methods_csv, "Comma-separated method list");
    bench->add_option("--out", report_path, "CSV output path (default stdout)");
    add_common_flags(bench, flags, false);

    CLI::App* sweep = app.add_subcommand("sweep", "Block-size x method sweep on one image");
    sweep->add_option("input", input, "Input PGM")->required();
    sweep->add_option("--nb-list", nb_list, "Comma-separated block sizes");
    sweep->add_option("--methods", methods_csv, "Comma-separated method list");
    sweep->add_option("--out", report_path, "CSV output path (default stdout)");
    add_common_flags(sweep, flags, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidConfig;
    }

    try {
        if (encode->parsed()) return run_encode(input, output, flags, report_path);
        if (decode->parsed()) return run_decode(input, output);
        if (baseline->parsed()) return run_baseline(baseline_kind, input, flags, report_path);
        if (bench->parsed()) return run_bench(manifest, methods_csv, flags, report_path);
        if (sweep->parsed()) return run_sweep(input, nb_list, methods_csv, flags, report_path);
    } catch (const xsparse::TargetUnreachableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTargetUnreachable;
    } catch (const xsparse::FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
