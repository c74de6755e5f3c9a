#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace positnpb {

enum class ProblemClass { S, W, A };

inline std::string_view to_string(ProblemClass c)
{
    switch (c) {
        case ProblemClass::S: return "S";
        case ProblemClass::W: return "W";
        case ProblemClass::A: return "A";
    }
    return "?";
}

inline std::optional<ProblemClass> parse_problem_class(std::string_view s)
{
    if (s == "S") return ProblemClass::S;
    if (s == "W") return ProblemClass::W;
    if (s == "A") return ProblemClass::A;
    return std::nullopt;
}

enum class QuireScope { dots, all };

inline std::string_view to_string(QuireScope s) { return s == QuireScope::dots ? "dots" : "all"; }

struct MetricRecord {
    int iteration;
    std::string metric;
    double value;
};

enum class RunStatus { completed, diverged };

/// One kernel execution: the metric log plus timing samples.
///
/// The iteration index is per metric (outer iterations for eigenvalue
/// metrics, cumulative inner iterations for residual series) and records
/// of one metric appear in increasing iteration order.
struct KernelRun {
    std::string kernel;
    ProblemClass problem_class = ProblemClass::S;
    std::string format;
    std::vector<MetricRecord> records;
    std::vector<double> wall_seconds;
    RunStatus status = RunStatus::completed;
    int diverged_at = -1;

    void log(int iteration, std::string metric, double value)
    {
        records.push_back({iteration, std::move(metric), value});
    }

    void mark_diverged(int iteration)
    {
        if (status == RunStatus::diverged) return;
        status = RunStatus::diverged;
        diverged_at = iteration;
    }

    std::vector<double> series(std::string_view metric) const
    {
        std::vector<double> out;
        for (const auto& r : records)
            if (r.metric == metric) out.push_back(r.value);
        return out;
    }

    /// Minimum logged value of a metric (the error floor).
    std::optional<double> floor(std::string_view metric) const
    {
        std::optional<double> best;
        for (const auto& r : records)
            if (r.metric == metric && (!best || r.value < *best)) best = r.value;
        return best;
    }

    std::optional<double> last(std::string_view metric) const
    {
        std::optional<double> v;
        for (const auto& r : records)
            if (r.metric == metric) v = r.value;
        return v;
    }
};

inline constexpr std::string_view csv_header = "kernel,class,format,iteration,metric,value";

/// 17 significant digits: parses back to the identical binary64.
inline std::string format_value(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const KernelRun& run)
{
    os << csv_header << '\n';
    for (const auto& r : run.records) {
        os << run.kernel << ',' << to_string(run.problem_class) << ',' << run.format << ','
           << r.iteration << ',' << r.metric << ',' << format_value(r.value) << '\n';
    }
}

/// Parses CSV written by write_csv. Rows may mix kernels/formats; each
/// distinct (kernel, class, format) becomes one KernelRun.
inline std::vector<KernelRun> read_csv(std::istream& is)
{
    std::vector<KernelRun> runs;
    std::string line;
    if (!std::getline(is, line) || line != csv_header)
        throw std::runtime_error("csv: missing or unexpected header");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 6)
            throw std::runtime_error("csv: wrong field count on line " + std::to_string(lineno));
        const auto cls = parse_problem_class(fields[1]);
        if (!cls) throw std::runtime_error("csv: bad class on line " + std::to_string(lineno));

        KernelRun* target = nullptr;
        for (auto& r : runs)
            if (r.kernel == fields[0] && r.problem_class == *cls && r.format == fields[2]) target = &r;
        if (!target) {
            runs.push_back({});
            target = &runs.back();
            target->kernel = fields[0];
            target->problem_class = *cls;
            target->format = fields[2];
        }
        char* end_it = nullptr;
        char* end_v = nullptr;
        const long it = std::strtol(fields[3].c_str(), &end_it, 10);
        const double v = std::strtod(fields[5].c_str(), &end_v);
        if (fields[3].empty() || *end_it || fields[5].empty() || *end_v)
            throw std::runtime_error("csv: bad number on line " + std::to_string(lineno));
        target->log(static_cast<int>(it), fields[4], v);
    }
    return runs;
}

}  // namespace positnpb
