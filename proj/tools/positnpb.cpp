// positnpb command-line driver: run, timing, summarize.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "positnpb/harness.hpp"

using namespace positnpb;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_diverged = 2;

const std::vector<std::string> kernel_names{"cg", "mg", "ft"};
const std::vector<std::string> class_names{"S", "W", "A"};
const std::vector<std::string> format_names{"float", "double", "quad-ref", "posit32", "quire32"};

struct CommonArgs {
    std::string problem_class = "S";
    int iters = 0;
    std::string quire_scope = "all";
    long long seed = 0;
    std::string out;
    std::string cg_assembly = "format";
    std::string ft_factors = "format";
    CLI::Option* iters_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* app, CommonArgs& a)
{
    app->add_option("--class", a.problem_class, "Problem class")
        ->check(CLI::IsMember(class_names))
        ->capture_default_str();
    a.iters_opt = app->add_option("--iters", a.iters,
                                  "Iteration override: CG outer iterations, MG V-cycles, FT time steps");
    app->add_option("--quire-scope", a.quire_scope,
                    "quire32 accumulation scope: dots, or all (also matvec rows, stencils, butterflies)")
        ->check(CLI::IsMember({"dots", "all"}))
        ->capture_default_str();
    a.seed_opt = app->add_option("--seed", a.seed, "Generator seed, integer in [1, 2^46)");
    app->add_option("--cg-assembly", a.cg_assembly,
                    "CG matrix assembly arithmetic: format (run format) or binary64")
        ->check(CLI::IsMember({"format", "binary64"}))
        ->capture_default_str();
    app->add_option("--ft-factors", a.ft_factors,
                    "FT evolve factor table arithmetic: format (run format) or binary64")
        ->check(CLI::IsMember({"format", "binary64"}))
        ->capture_default_str();
}

RunConfig make_config(const CommonArgs& a, const std::string& kernel, const std::string& format)
{
    RunConfig cfg;
    cfg.kernel = *parse_kernel(kernel);
    cfg.problem_class = *parse_problem_class(a.problem_class);
    cfg.format = *parse_format(format);
    if (a.iters_opt->count()) cfg.iters = a.iters;
    cfg.quire_scope = *parse_quire_scope(a.quire_scope);
    if (a.seed_opt->count()) cfg.seed = static_cast<double>(a.seed);
    cfg.out_path = a.out;
    cfg.cg_assembly = a.cg_assembly == "binary64" ? CgAssembly::binary64 : CgAssembly::format;
    cfg.ft_factors = a.ft_factors == "binary64" ? FtFactorSource::binary64 : FtFactorSource::format;
    return cfg;
}

std::vector<std::string> split_list(const std::vector<std::string>& items)
{
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::size_t start = 0;
        while (start <= item.size()) {
            const auto comma = item.find(',', start);
            const auto piece = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!piece.empty()) out.push_back(piece);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

int do_run(const CommonArgs& a, const std::string& kernel, const std::string& format)
{
    const RunConfig cfg = make_config(a, kernel, format);
    const KernelRun r = run(cfg);
    const auto path = cfg.out_path.empty() ? default_out_path(cfg) : std::filesystem::path(cfg.out_path);
    write_file_atomic(path, to_csv(r));
    std::fprintf(stderr, "%s class %s %s: %zu records, %.3f s -> %s\n", kernel.c_str(), a.problem_class.c_str(),
                 format.c_str(), r.records.size(), r.wall_seconds.front(), path.c_str());
    if (r.status == RunStatus::diverged) {
        std::fprintf(stderr, "diverged at iteration %d\n", r.diverged_at);
        return exit_diverged;
    }
    return exit_ok;
}

int do_timing(const CommonArgs& a, const std::vector<std::string>& kernels, const std::vector<std::string>& formats,
              int repeats)
{
    std::vector<KernelRun> rows;
    std::printf("%-6s %-5s %-9s %8s %22s %22s\n", "kernel", "class", "format", "repeats", "exclusive s",
                "inclusive s");
    for (const auto& k : kernels) {
        for (const auto& f : formats) {
            RunConfig cfg = make_config(a, k, f);
            cfg.timing_repeats = repeats;
            const TimingRow row = time_kernel(cfg);
            const auto ex = row.exclusive_stats();
            const auto in = row.inclusive_stats();
            std::printf("%-6s %-5s %-9s %8d %11.4f +- %7.4f %11.4f +- %7.4f\n", k.c_str(), a.problem_class.c_str(),
                        f.c_str(), repeats, ex.mean, ex.stddev, in.mean, in.stddev);
            std::fflush(stdout);
            rows.push_back(timing_records(row));
        }
    }
    std::string csv(csv_header);
    csv += '\n';
    for (const auto& r : rows) {
        const std::string body = to_csv(r);
        csv += body.substr(body.find('\n') + 1);
    }
    std::filesystem::path path = a.out;
    if (path.empty()) {
        std::filesystem::path dir = ".";
        if (const char* env = std::getenv("POSITNPB_OUT_DIR"); env && *env) dir = env;
        path = dir / ("timing_" + a.problem_class + ".csv");
    }
    write_file_atomic(path, csv);
    std::fprintf(stderr, "timing -> %s\n", path.c_str());
    return exit_ok;
}

int do_summarize(const std::vector<std::string>& files, const std::vector<std::string>& metrics,
                 const std::string& out)
{
    std::vector<KernelRun> runs;
    for (const auto& file : files) {
        std::ifstream is(file, std::ios::binary);
        if (!is) throw std::runtime_error("cannot open " + file);
        for (auto& r : read_csv(is)) runs.push_back(std::move(r));
    }
    const std::string csv = summary_csv(summarize(runs, split_list(metrics)));
    std::cout << csv;
    if (!out.empty()) write_file_atomic(out, csv);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Posit32 vs IEEE precision study on the NPB CG, MG and FT kernels"};
    app.require_subcommand(1);

    CommonArgs run_args;
    std::string run_kernel, run_format;
    auto* run_cmd = app.add_subcommand("run", "Run one kernel in one format and write its metric CSV");
    run_cmd->add_option("--kernel", run_kernel, "Kernel")->required()->check(CLI::IsMember(kernel_names));
    run_cmd->add_option("--format", run_format, "Number format")->required()->check(CLI::IsMember(format_names));
    run_cmd->add_option("--out", run_args.out,
                        "Output CSV (default $POSITNPB_OUT_DIR/<kernel>_<class>_<format>.csv)");
    add_common(run_cmd, run_args);

    CommonArgs timing_args;
    std::vector<std::string> timing_kernels{"cg,mg,ft"};
    std::vector<std::string> timing_formats{"quad-ref,double,float,posit32,quire32"};
    int repeats = 5;
    auto* timing_cmd = app.add_subcommand("timing", "Time kernels per format (mean and stddev over repeats)");
    timing_cmd->add_option("--kernel", timing_kernels, "Kernels, comma separated or repeated")
        ->capture_default_str();
    timing_cmd->add_option("--format", timing_formats, "Formats, comma separated or repeated")
        ->capture_default_str();
    timing_cmd->add_option("--repeats", repeats, "Timed executions per kernel and format")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    timing_cmd->add_option("--out", timing_args.out, "Timing CSV (default $POSITNPB_OUT_DIR/timing_<class>.csv)");
    add_common(timing_cmd, timing_args);

    std::vector<std::string> files, metrics;
    std::string summary_out;
    auto* sum_cmd = app.add_subcommand("summarize", "Error floors and digit gains over float from run CSVs");
    sum_cmd->add_option("files", files, "CSV files written by run")->required()->check(CLI::ExistingFile);
    sum_cmd->add_option("--metric", metrics, "Metrics to summarize (default: per-kernel set)");
    sum_cmd->add_option("--out", summary_out, "Also write the summary CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*run_cmd) return do_run(run_args, run_kernel, run_format);
        if (*timing_cmd) {
            const auto ks = split_list(timing_kernels);
            const auto fs = split_list(timing_formats);
            for (const auto& k : ks)
                if (!parse_kernel(k)) throw std::invalid_argument("unknown kernel: " + k);
            for (const auto& f : fs)
                if (!parse_format(f)) throw std::invalid_argument("unknown format: " + f);
            return do_timing(timing_args, ks, fs, repeats);
        }
        if (*sum_cmd) return do_summarize(files, metrics, summary_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    return exit_usage;
}
