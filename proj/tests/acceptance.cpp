// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle/rational_posit.hpp"
#include "positnpb/exact_real.hpp"
#include "positnpb/harness.hpp"
#include "positnpb/quire.hpp"

using namespace positnpb;
using oracle::Int;
using oracle::Rational;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// |log10(measured / expected)| <= 0.5
bool within_half_order(double measured, double expected)
{
    return measured > 0.0 && std::fabs(std::log10(measured / expected)) <= 0.5;
}

std::string floor_text(const std::string& name, double measured, double expected)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s floor %.3e (target %.2e)", name.c_str(), measured, expected);
    return buf;
}

Rational to_rational(const ExactReal& x)
{
    Rational v = Rational(x.mantissa) * oracle::pow2(x.scale - x.mantissa_bits);
    return x.sign < 0 ? Rational(-v) : v;
}

template <PositConfig C>
std::uint32_t oracle_round(const Rational& x)
{
    return static_cast<std::uint32_t>(oracle::round(x, C.n, C.es));
}

KernelRun run_kernel(KernelKind k, ProblemClass c, FormatId f, int iters)
{
    RunConfig cfg;
    cfg.kernel = k;
    cfg.problem_class = c;
    cfg.format = f;
    cfg.iters = iters;
    return run(cfg);
}

double floor_of(const KernelRun& r, const std::string& metric)
{
    const auto f = r.floor(metric);
    return f ? *f : NAN;
}

Outcome machine_epsilons()
{
    Outcome o;
    o.check(machine_epsilon<FloatFormat>() == 0x1p-23, "float " + fmt("%a", machine_epsilon<FloatFormat>()));
    o.check(machine_epsilon<DoubleFormat>() == 0x1p-52, "double " + fmt("%a", machine_epsilon<DoubleFormat>()));
    o.check(machine_epsilon<Posit32Format>() == 0x1p-27,
            "posit32 " + fmt("%a", machine_epsilon<Posit32Format>()));
    return o;
}

Outcome worked_example()
{
    Outcome o;
    const std::uint32_t bits = (0b01u << 29) | (0b00u << 27) | 130903708u;
    const posit32 p = posit32::from_bits(bits);
    const Rational want = (Rational(1) + Rational(130903708) / oracle::pow2(27)) / 16;
    const auto d = decode(p);
    o.check(d.sign == 1 && d.regime == -1 && d.exponent == 0 && d.fraction == 130903708u && d.fraction_bits == 27,
            "fields");
    o.check(to_rational(exact_value(p)) == want, "exact value (1 + 130903708/2^27)/16");
    o.check(d.value() == std::ldexp(1.0 + std::ldexp(130903708.0, -27), -4), fmt("decoded %.10f", d.value()));
    o.check(encode_round<posit32_config>(exact_value(p)).bits() == bits, "exact encode round trip");
    o.check(posit32{d.value()}.bits() == bits, "binary64 encode round trip");
    return o;
}

Outcome posit_conformance()
{
    Outcome o;
    using P8 = Posit<PositConfig{8, 2}>;
    long mismatches = 0;
    for (std::uint32_t a = 0; a < 256; ++a)
        for (std::uint32_t b = 0; b < 256; ++b) {
            const auto pa = P8::from_bits(a), pb = P8::from_bits(b);
            if (pa.is_nar() || pb.is_nar()) {
                mismatches += !(pa + pb).is_nar() + !(pa - pb).is_nar() + !(pa * pb).is_nar() + !(pa / pb).is_nar();
                continue;
            }
            const Rational x = oracle::value(a, 8, 2), y = oracle::value(b, 8, 2);
            mismatches += (pa + pb).bits() != oracle_round<P8::config>(x + y);
            mismatches += (pa - pb).bits() != oracle_round<P8::config>(x - y);
            mismatches += (pa * pb).bits() != oracle_round<P8::config>(x * y);
            mismatches += pb.is_zero() ? !(pa / pb).is_nar() : (pa / pb).bits() != oracle_round<P8::config>(x / y);
        }
    o.check(mismatches == 0, "posit8 add/sub/mul/div exhaustive, " + std::to_string(mismatches) + " mismatches");

    long sqrt_bad = 0, decode_bad = 0, encode_bad = 0;
    for (std::uint32_t b = 0; b < (1u << 16); ++b) {
        const auto p = posit16::from_bits(b);
        if (p.is_nar()) {
            sqrt_bad += !sqrt(p).is_nar();
            continue;
        }
        const Rational v = oracle::value(b, 16, 2);
        decode_bad += to_rational(exact_value(p)) != v;
        encode_bad += encode_round<posit16::config>(exact_value(p)).bits() != b;
        encode_bad += posit16{p.to_double()}.bits() != b;
        if (p.is_negative())
            sqrt_bad += !sqrt(p).is_nar();
        else
            sqrt_bad += sqrt(p).bits() != oracle::round_sqrt(v, 16, 2);
    }
    o.check(sqrt_bad == 0, "posit16 sqrt exhaustive, " + std::to_string(sqrt_bad) + " mismatches");
    o.check(decode_bad == 0, "posit16 decode exhaustive, " + std::to_string(decode_bad) + " mismatches");
    o.check(encode_bad == 0, "posit16 encode round trip exhaustive, " + std::to_string(encode_bad) + " mismatches");

    std::mt19937_64 rng(1000003);
    long rt_bad = 0;
    int samples = 0;
    while (samples < 1000000) {
        const auto p = posit32::from_bits(static_cast<std::uint32_t>(rng()));
        if (p.is_nar()) continue;
        ++samples;
        rt_bad += encode_round<posit32_config>(exact_value(p)) != p;
        rt_bad += posit32{p.to_double()} != p;
    }
    o.check(rt_bad == 0, "posit32 round trips 10^6 samples, " + std::to_string(rt_bad) + " mismatches");
    return o;
}

posit32 random_posit(std::mt19937_64& rng)
{
    if (rng() % 4 == 0) {
        posit32 p;
        do p = posit32::from_bits(static_cast<std::uint32_t>(rng()));
        while (p.is_nar());
        return p;
    }
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    return posit32{u(rng)};
}

// Every posit32 is an integer multiple of 2^-120, so x * 2^120 is exact in Int.
Int scaled_value(posit32 p)
{
    const Rational v = oracle::value(p.bits(), 32, 2) * oracle::pow2(120);
    return boost::multiprecision::numerator(v);
}

Outcome quire_exactness()
{
    Outcome o;
    std::mt19937_64 rng(4096);
    int wrong = 0, not_invariant = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = trial == 0 ? 1 : trial == 1 ? 4096 : 1 + static_cast<int>(rng() % 4096);
        std::vector<posit32> xs(n), ys(n);
        Int exact = 0;
        for (int i = 0; i < n; ++i) {
            xs[i] = random_posit(rng);
            ys[i] = random_posit(rng);
            exact += scaled_value(xs[i]) * scaled_value(ys[i]);
        }
        const std::uint32_t want = oracle_round<posit32_config>(Rational(exact) / oracle::pow2(240));
        Quire32 q;
        for (int i = 0; i < n; ++i) q.fma(xs[i], ys[i]);
        const posit32 got = q.to_posit();
        wrong += got.bits() != want;

        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        Quire32 r;
        for (int i : perm) r.fma(ys[i], xs[i]);
        not_invariant += r.to_posit() != got;
    }
    o.check(wrong == 0, "1000 dot products vs exact oracle, " + std::to_string(wrong) + " wrong");
    o.check(not_invariant == 0, "permutation invariance, " + std::to_string(not_invariant) + " differ");
    return o;
}

Outcome cg_class_w()
{
    Outcome o;
    const KernelRun f = run_kernel(KernelKind::cg, ProblemClass::W, FormatId::binary32, 15);
    const KernelRun p = run_kernel(KernelKind::cg, ProblemClass::W, FormatId::posit32, 15);
    const KernelRun q = run_kernel(KernelKind::cg, ProblemClass::W, FormatId::quire32, 15);
    const double zf = floor_of(f, "zeta_error"), zp = floor_of(p, "zeta_error");
    o.check(within_half_order(zf, 2.21e-4), floor_text("zeta float", zf, 2.21e-4));
    o.check(within_half_order(zp, 1.25e-5), floor_text("zeta posit32", zp, 1.25e-5));
    const double gain = digit_gain(zf, zp);
    o.check(std::fabs(gain - 1.25) <= 0.4, fmt("zeta gain %.3f (target 1.25 +- 0.4)", gain));
    const double rf = floor_of(f, "cg_true_residual"), rp = floor_of(p, "cg_true_residual"),
                 rq = floor_of(q, "cg_true_residual");
    o.check(within_half_order(rf, 7.35e-7), floor_text("residual float", rf, 7.35e-7));
    o.check(within_half_order(rp, 6.99e-8), floor_text("residual posit32", rp, 6.99e-8));
    o.check(within_half_order(rq, 2.50e-8), floor_text("residual quire32", rq, 2.50e-8));
    return o;
}

Outcome mg_class_w()
{
    Outcome o;
    const int iters = 40;
    const double ff = floor_of(run_kernel(KernelKind::mg, ProblemClass::W, FormatId::binary32, iters), "residual_l2");
    const double fp = floor_of(run_kernel(KernelKind::mg, ProblemClass::W, FormatId::posit32, iters), "residual_l2");
    const double fq = floor_of(run_kernel(KernelKind::mg, ProblemClass::W, FormatId::quire32, iters), "residual_l2");
    o.check(within_half_order(ff, 6.98e-7), floor_text("float", ff, 6.98e-7));
    o.check(within_half_order(fp, 7.07e-8), floor_text("posit32", fp, 7.07e-8));
    o.check(within_half_order(fq, 4.76e-8), floor_text("quire32", fq, 4.76e-8));
    const double gain = digit_gain(ff, fq);
    o.check(std::fabs(gain - 1.16) <= 0.4, fmt("quire32 gain %.3f (target 1.16 +- 0.4)", gain));
    return o;
}

Outcome ft_class_w()
{
    Outcome o;
    const KernelRun f = run_kernel(KernelKind::ft, ProblemClass::W, FormatId::binary32, 6);
    const KernelRun p = run_kernel(KernelKind::ft, ProblemClass::W, FormatId::posit32, 6);
    bool ordered = f.records.size() == p.records.size() && !f.records.empty();
    for (std::size_t i = 0; ordered && i < f.records.size(); ++i)
        ordered = f.records[i].metric == p.records[i].metric && f.records[i].iteration == p.records[i].iteration &&
                  p.records[i].value <= f.records[i].value;
    o.check(ordered, "posit32 <= float at every stage and step (" + std::to_string(f.records.size()) + " records)");
    const double inv_f = floor_of(f, "error_inverse"), inv_p = floor_of(p, "error_inverse");
    o.check(within_half_order(inv_f, 8.30e3), floor_text("inverse float", inv_f, 8.30e3));
    o.check(within_half_order(inv_p, 3.19e2), floor_text("inverse posit32", inv_p, 3.19e2));
    const double gain = digit_gain(inv_f, inv_p);
    o.check(std::fabs(gain - 1.4) <= 0.4, fmt("inverse gain %.3f (target 1.4 +- 0.4)", gain));
    return o;
}

Outcome timing_class_s()
{
    Outcome o;
    for (auto k : all_kernels) {
        RunConfig cfg;
        cfg.kernel = k;
        cfg.problem_class = ProblemClass::S;
        cfg.timing_repeats = 2;
        cfg.format = FormatId::binary32;
        const double tf = time_kernel(cfg).exclusive_stats().mean;
        cfg.format = FormatId::posit32;
        const double tp = time_kernel(cfg).exclusive_stats().mean;
        const double slowdown = tp / tf;
        o.check(slowdown > 1.0, std::string(to_string(k)) + fmt(" posit32/float %.1fx", slowdown));
    }
    o.detail += " (published range 4x-19x, informational)";
    return o;
}

Outcome determinism()
{
    Outcome o;
    int differ = 0, total = 0;
    for (auto k : all_kernels)
        for (auto f : all_formats) {
            const int iters = k == KernelKind::cg ? 3 : k == KernelKind::mg ? 4 : 2;
            const std::string a = to_csv(run_kernel(k, ProblemClass::S, f, iters));
            const std::string b = to_csv(run_kernel(k, ProblemClass::S, f, iters));
            differ += a != b;
            ++total;
        }
    o.check(differ == 0, std::to_string(total - differ) + "/" + std::to_string(total) + " configs byte-identical");

    volatile double a = 1.0 + 0x1p-30, b = 1.0 - 0x1p-30;
    const double x = a, y = b;
    const double r = x * y - 1.0;
    volatile float fa = 1.0f + 0x1p-13f, fb = 1.0f - 0x1p-13f;
    const float fx = fa, fy = fb;
    const float fr = fx * fy - 1.0f;
    o.check(r == 0.0 && fr == 0.0f, "contraction canary binary64 " + fmt("%a", r) + " binary32 " + fmt("%a", fr));
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "machine epsilon", machine_epsilons},
        {2, "posit32 worked example decode/encode", worked_example},
        {3, "posit conformance", posit_conformance},
        {4, "quire exactness", quire_exactness},
        {5, "CG class W precision", cg_class_w},
        {6, "MG class W precision", mg_class_w},
        {7, "FT class W stage errors", ft_class_w},
        {8, "posit32 overhead at class S", timing_class_s},
        {9, "determinism", determinism},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        char* end = nullptr;
        const long id = std::strtol(argv[i], &end, 10);
        if (*end || id < 1 || id > static_cast<long>(criteria.size())) {
            std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], criteria.size());
            return 2;
        }
        selected.insert(static_cast<int>(id));
    }
    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !out.pass;
    }
    return failed == 0 ? 0 : 1;
}
