#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unistd.h>

#include "positnpb/cg.hpp"
#include "positnpb/formats.hpp"
#include "positnpb/ft.hpp"
#include "positnpb/kernel_run.hpp"
#include "positnpb/mg.hpp"

namespace positnpb {

enum class KernelKind { cg, mg, ft };
enum class FormatId { binary32, binary64, quad_ref, posit32, quire32 };

inline constexpr KernelKind all_kernels[] = {KernelKind::cg, KernelKind::mg, KernelKind::ft};
inline constexpr FormatId all_formats[] = {FormatId::quad_ref, FormatId::binary64, FormatId::binary32,
                                           FormatId::posit32, FormatId::quire32};

inline std::string_view to_string(KernelKind k)
{
    switch (k) {
        case KernelKind::cg: return "cg";
        case KernelKind::mg: return "mg";
        case KernelKind::ft: return "ft";
    }
    return "?";
}

inline std::string_view to_string(FormatId f)
{
    switch (f) {
        case FormatId::binary32: return FloatFormat::name;
        case FormatId::binary64: return DoubleFormat::name;
        case FormatId::quad_ref: return QuadRefFormat::name;
        case FormatId::posit32: return Posit32Format::name;
        case FormatId::quire32: return Quire32Format::name;
    }
    return "?";
}

inline std::optional<KernelKind> parse_kernel(std::string_view s)
{
    for (auto k : all_kernels)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline std::optional<FormatId> parse_format(std::string_view s)
{
    for (auto f : all_formats)
        if (to_string(f) == s) return f;
    return std::nullopt;
}

inline std::optional<QuireScope> parse_quire_scope(std::string_view s)
{
    if (s == "dots") return QuireScope::dots;
    if (s == "all") return QuireScope::all;
    return std::nullopt;
}

/// Calls fn with a default-constructed format tag for the runtime id.
template <class Fn>
decltype(auto) with_format(FormatId id, Fn&& fn)
{
    switch (id) {
        case FormatId::binary32: return fn(FloatFormat{});
        case FormatId::binary64: return fn(DoubleFormat{});
        case FormatId::quad_ref: return fn(QuadRefFormat{});
        case FormatId::posit32: return fn(Posit32Format{});
        case FormatId::quire32: return fn(Quire32Format{});
    }
    throw std::invalid_argument("unknown format");
}

struct RunConfig {
    KernelKind kernel = KernelKind::cg;
    ProblemClass problem_class = ProblemClass::S;
    FormatId format = FormatId::binary32;
    std::optional<int> iters;
    QuireScope quire_scope = QuireScope::all;
    std::optional<double> seed;
    std::string out_path;
    int timing_repeats = 5;
    CgAssembly cg_assembly = CgAssembly::format;
    FtFactorSource ft_factors = FtFactorSource::format;
};

/// Throws std::invalid_argument on a bad configuration.
inline void validate(const RunConfig& cfg)
{
    if (cfg.iters && *cfg.iters < 1) throw std::invalid_argument("--iters must be >= 1");
    if (cfg.timing_repeats < 1) throw std::invalid_argument("--repeats must be >= 1");
    if (cfg.seed) {
        const double s = *cfg.seed;
        if (!(s >= 1.0 && s < 0x1p46 && std::trunc(s) == s))
            throw std::invalid_argument("--seed must be an integer in [1, 2^46)");
    }
    if (cfg.kernel == KernelKind::ft && cfg.format == FormatId::quire32 &&
        cfg.quire_scope == QuireScope::dots)
        throw std::invalid_argument(
            "ft has no dot products; quire32 on ft needs --quire-scope all (fused butterflies)");
}

/// Problem instance for any kernel.
struct Problem {
    KernelKind kernel = KernelKind::cg;
    std::optional<CgProblem> cg;
    std::optional<MgProblem> mg;
    std::optional<FtProblem> ft;
};

inline Problem make_problem(KernelKind k, ProblemClass c, std::optional<double> seed)
{
    const double s = seed.value_or(npb_default_seed);
    Problem p;
    p.kernel = k;
    switch (k) {
        case KernelKind::cg: p.cg = cg_make_problem(c, s); break;
        case KernelKind::mg: p.mg = mg_make_problem(c, s); break;
        case KernelKind::ft: p.ft = ft_make_problem(c, s); break;
    }
    return p;
}

/// Runs one kernel. With `diagnostics` off the kernel skips work that
/// only feeds metrics (per-step true residuals, the FT reference run).
inline KernelRun execute(const Problem& p, const RunConfig& cfg, bool diagnostics = true)
{
    return with_format(cfg.format, [&]<class F>(F) {
        switch (p.kernel) {
            case KernelKind::cg: {
                CgOptions o;
                o.assembly = cfg.cg_assembly;
                o.quire_scope = cfg.quire_scope;
                if (cfg.iters) o.outer_iterations = *cfg.iters;
                o.true_residual_each_step = diagnostics;
                return cg_run<F>(*p.cg, o);
            }
            case KernelKind::mg: {
                MgOptions o;
                o.quire_scope = cfg.quire_scope;
                o.iterations = cfg.iters.value_or(0);
                return mg_run<F>(*p.mg, o);
            }
            case KernelKind::ft: {
                FtOptions o;
                o.quire_scope = cfg.quire_scope;
                o.factors = cfg.ft_factors;
                o.steps = cfg.iters.value_or(0);
                o.compare_reference = diagnostics;
                return ft_run<F>(*p.ft, o);
            }
        }
        throw std::invalid_argument("unknown kernel");
    });
}

/// Generates the problem and runs the kernel. A diverged run gets a final
/// "diverged" record whose value is the iteration index.
inline KernelRun run(const RunConfig& cfg)
{
    validate(cfg);
    const Problem p = make_problem(cfg.kernel, cfg.problem_class, cfg.seed);
    const auto t0 = std::chrono::steady_clock::now();
    KernelRun r = execute(p, cfg);
    r.wall_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (r.status == RunStatus::diverged) r.log(r.diverged_at, "diverged", r.diverged_at);
    return r;
}

/// Default output location: $POSITNPB_OUT_DIR (or the working directory)
/// joined with <kernel>_<class>_<format>.csv.
inline std::filesystem::path default_out_path(const RunConfig& cfg, std::string_view suffix = "")
{
    std::filesystem::path dir = ".";
    if (const char* env = std::getenv("POSITNPB_OUT_DIR"); env && *env) dir = env;
    std::string name = std::string(to_string(cfg.kernel)) + "_" + std::string(to_string(cfg.problem_class)) +
                       "_" + std::string(to_string(cfg.format)) + std::string(suffix) + ".csv";
    return dir / name;
}

/// Writes via a temporary file in the target directory and renames it over
/// the destination, so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string());
        os << contents;
        os.flush();
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename to " + path.string() + ": " + ec.message());
    }
}

inline std::string to_csv(const KernelRun& r)
{
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

struct TimingStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for one sample
};

inline TimingStats timing_stats(const std::vector<double>& xs)
{
    TimingStats s;
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

/// Wall-clock samples for one (kernel, class, format).
///
/// exclusive: the kernel alone with metric-only work disabled.
/// inclusive: problem generation plus the full run with all metrics,
/// including the FT double-double reference (the "validation").
struct TimingRow {
    KernelKind kernel = KernelKind::cg;
    ProblemClass problem_class = ProblemClass::S;
    FormatId format = FormatId::binary32;
    std::vector<double> exclusive, inclusive;
    TimingStats exclusive_stats() const { return timing_stats(exclusive); }
    TimingStats inclusive_stats() const { return timing_stats(inclusive); }
};

/// Iteration counts of the paper's timing table: CG 30, MG 100, FT 6.
inline int timing_default_iters(KernelKind k)
{
    switch (k) {
        case KernelKind::cg: return 30;
        case KernelKind::mg: return 100;
        case KernelKind::ft: return 6;
    }
    return 1;
}

inline TimingRow time_kernel(const RunConfig& base)
{
    RunConfig cfg = base;
    if (!cfg.iters) cfg.iters = timing_default_iters(cfg.kernel);
    validate(cfg);
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    TimingRow row{cfg.kernel, cfg.problem_class, cfg.format, {}, {}};
    const Problem problem = make_problem(cfg.kernel, cfg.problem_class, cfg.seed);
    for (int rep = 0; rep < cfg.timing_repeats; ++rep) {
        auto t0 = clock::now();
        execute(problem, cfg, false);
        row.exclusive.push_back(seconds(t0, clock::now()));

        t0 = clock::now();
        const Problem fresh = make_problem(cfg.kernel, cfg.problem_class, cfg.seed);
        execute(fresh, cfg, true);
        row.inclusive.push_back(seconds(t0, clock::now()));
    }
    return row;
}

/// Timing rows in the metric CSV schema: per-sample rows (iteration = repeat,
/// 1-based) and summary rows at iteration 0.
inline KernelRun timing_records(const TimingRow& row)
{
    KernelRun r;
    r.kernel = std::string(to_string(row.kernel));
    r.problem_class = row.problem_class;
    r.format = std::string(to_string(row.format));
    for (std::size_t i = 0; i < row.exclusive.size(); ++i) {
        r.log(static_cast<int>(i + 1), "seconds_exclusive", row.exclusive[i]);
        r.log(static_cast<int>(i + 1), "seconds_inclusive", row.inclusive[i]);
    }
    const auto ex = row.exclusive_stats();
    const auto in = row.inclusive_stats();
    r.log(0, "seconds_exclusive_mean", ex.mean);
    r.log(0, "seconds_exclusive_stddev", ex.stddev);
    r.log(0, "seconds_inclusive_mean", in.mean);
    r.log(0, "seconds_inclusive_stddev", in.stddev);
    return r;
}

struct FormatFloor {
    std::string format;
    double floor = 0.0;
    double gain = 0.0;  // log10(floor_float / floor)
};

struct DigitGainSummary {
    std::string kernel;
    ProblemClass problem_class = ProblemClass::S;
    std::string metric;
    std::vector<FormatFloor> formats;
};

inline double digit_gain(double baseline_floor, double floor) { return std::log10(baseline_floor / floor); }

/// Metrics whose floors are compared across formats, per kernel.
inline std::vector<std::string> summary_metrics(std::string_view kernel)
{
    if (kernel == "cg") return {"zeta_error", "cg_true_residual", "rnorm"};
    if (kernel == "mg") return {"residual_l2"};
    if (kernel == "ft") return {"error_forward", "error_evolve", "error_inverse"};
    return {};
}

/// Floors (minimum logged value) and digit gains against the float run,
/// per (kernel, class, metric). Throws on empty input or when a group has
/// no float baseline.
inline std::vector<DigitGainSummary> summarize(const std::vector<KernelRun>& runs,
                                               const std::vector<std::string>& metrics = {})
{
    if (runs.empty()) throw std::invalid_argument("summarize: no runs");
    std::vector<DigitGainSummary> out;
    std::map<std::pair<std::string, ProblemClass>, std::vector<const KernelRun*>> groups;
    std::vector<std::pair<std::string, ProblemClass>> order;
    for (const auto& r : runs) {
        auto key = std::make_pair(r.kernel, r.problem_class);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    for (const auto& key : order) {
        const auto& group = groups[key];
        const KernelRun* baseline = nullptr;
        for (const auto* r : group)
            if (r->format == FloatFormat::name) baseline = r;
        if (!baseline)
            throw std::invalid_argument("summarize: no float run for " + key.first + " class " +
                                        std::string(to_string(key.second)));
        const auto ms = metrics.empty() ? summary_metrics(key.first) : metrics;
        for (const auto& m : ms) {
            const auto base = baseline->floor(m);
            if (!base) continue;
            DigitGainSummary s{key.first, key.second, m, {}};
            for (const auto* r : group) {
                const auto f = r->floor(m);
                if (!f) continue;
                s.formats.push_back({r->format, *f, digit_gain(*base, *f)});
            }
            out.push_back(std::move(s));
        }
    }
    if (out.empty()) throw std::invalid_argument("summarize: no matching metrics");
    return out;
}

inline std::string summary_csv(const std::vector<DigitGainSummary>& sums)
{
    std::ostringstream os;
    os << "kernel,class,metric,format,floor,gain\n";
    for (const auto& s : sums)
        for (const auto& f : s.formats)
            os << s.kernel << ',' << to_string(s.problem_class) << ',' << s.metric << ',' << f.format << ','
               << format_value(f.floor) << ',' << format_value(f.gain) << '\n';
    return os.str();
}

}  // namespace positnpb
