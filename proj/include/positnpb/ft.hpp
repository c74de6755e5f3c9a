#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "positnpb/double_double.hpp"
#include "positnpb/formats.hpp"
#include "positnpb/kernel_run.hpp"
#include "positnpb/npb_rng.hpp"

namespace positnpb {

template <class T>
struct Complex {
    T re{}, im{};
};

struct FtClassParams {
    int nx, ny, nz;
    int steps;
};

inline FtClassParams ft_class_params(ProblemClass c)
{
    switch (c) {
        case ProblemClass::S: return {64, 64, 64, 6};
        case ProblemClass::W: return {128, 128, 32, 6};
        case ProblemClass::A: return {256, 256, 128, 6};
    }
    throw std::invalid_argument("ft: unknown class");
}

/// nx*ny*nz complex values, x fastest.
template <class T>
struct ComplexField3D {
    int nx = 0, ny = 0, nz = 0;
    std::vector<Complex<T>> data;

    ComplexField3D() = default;
    ComplexField3D(int x, int y, int z)
        : nx(x), ny(y), nz(z), data(static_cast<std::size_t>(x) * y * z)
    {
    }

    std::size_t index(int k, int j, int i) const noexcept
    {
        return (static_cast<std::size_t>(k) * ny + j) * nx + i;
    }
    std::size_t size() const noexcept { return data.size(); }
};

struct FtProblem {
    ProblemClass problem_class = ProblemClass::S;
    int nx = 0, ny = 0, nz = 0;
    int steps = 0;
    double alpha = 1e-6;
    ComplexField3D<double> u0;
};

inline FtProblem ft_make_problem(ProblemClass c, double seed = npb_default_seed)
{
    const auto params = ft_class_params(c);
    FtProblem p;
    p.problem_class = c;
    p.nx = params.nx;
    p.ny = params.ny;
    p.nz = params.nz;
    p.steps = params.steps;
    p.u0 = ComplexField3D<double>(p.nx, p.ny, p.nz);
    NpbRng rng(seed);
    for (auto& z : p.u0.data) {
        z.re = rng.next();
        z.im = rng.next();
    }
    return p;
}

enum class FftDirection { forward, inverse };

/// Where the evolve factor table exp(-4 alpha pi^2 m), m = 0..max, comes
/// from. Both build it NPB-style as ex[m] = ex[m-1] * ex[1]; `format` runs
/// that recurrence in the benchmark format, `binary64` runs it in binary64
/// and casts each entry.
enum class FtFactorSource { format, binary64 };

struct FtOptions {
    int steps = 0;  // 0: class default
    FtFactorSource factors = FtFactorSource::format;
    /// dots has nothing to fuse in FT; all: butterflies use the quire.
    QuireScope quire_scope = QuireScope::all;
    /// Run the double-double reference in lockstep and log stage errors.
    bool compare_reference = true;
};

namespace detail {

// exp(-2 pi i p / n) for p < n/2.
template <class F>
std::vector<Complex<typename F::value_type>> ft_twiddles(int n)
{
    std::vector<Complex<typename F::value_type>> w(n / 2);
    for (int p = 0; p < n / 2; ++p) {
        if constexpr (std::is_same_v<typename F::value_type, DoubleDouble>) {
            const auto [c, s] = sincos_2pi(p, n);
            w[p] = {c, -s};
        } else {
            const double theta = 2.0 * M_PI * p / n;
            w[p] = {F::from_double(std::cos(theta)), F::from_double(-std::sin(theta))};
        }
    }
    return w;
}

template <class F>
class Fft3D {
public:
    using T = typename F::value_type;

    Fft3D(int nx, int ny, int nz, bool fused)
        : fused_(fused), wx_(ft_twiddles<F>(nx)), wy_(ft_twiddles<F>(ny)), wz_(ft_twiddles<F>(nz))
    {
        const int longest = std::max(nx, std::max(ny, nz));
        line_.resize(longest);
        work_.resize(longest);
    }

    // Forward transforms x, y, z in that order; inverse z, y, x. Unscaled.
    void transform(ComplexField3D<T>& f, FftDirection dir)
    {
        const bool inv = dir == FftDirection::inverse;
        if (!inv) {
            axis(f, 0, inv);
            axis(f, 1, inv);
            axis(f, 2, inv);
        } else {
            axis(f, 2, inv);
            axis(f, 1, inv);
            axis(f, 0, inv);
        }
    }

private:
    void axis(ComplexField3D<T>& f, int dim, bool inv)
    {
        const int n = dim == 0 ? f.nx : dim == 1 ? f.ny : f.nz;
        const auto& w = dim == 0 ? wx_ : dim == 1 ? wy_ : wz_;
        const std::size_t stride = dim == 0 ? 1 : dim == 1 ? f.nx : static_cast<std::size_t>(f.nx) * f.ny;
        const int o1 = dim == 0 ? f.ny : f.nx;  // the two other extents
        const int o2 = dim == 2 ? f.ny : f.nz;
        for (int b = 0; b < o2; ++b)
            for (int a = 0; a < o1; ++a) {
                std::size_t base;
                if (dim == 0)
                    base = f.index(b, a, 0);
                else if (dim == 1)
                    base = f.index(b, 0, a);
                else
                    base = f.index(0, b, a);
                for (int k = 0; k < n; ++k) line_[k] = f.data[base + k * stride];
                const Complex<T>* out = stockham(n, w, inv);
                for (int k = 0; k < n; ++k) f.data[base + k * stride] = out[k];
            }
    }

    // Radix-2 Stockham decimation in frequency, natural order in and out.
    const Complex<T>* stockham(int n, const std::vector<Complex<T>>& w, bool inv)
    {
        Complex<T>* x = line_.data();
        Complex<T>* y = work_.data();
        Acc acc;
        int s = 1;
        for (int len = n; len > 1; len /= 2) {
            const int m = len / 2;
            for (int p = 0; p < m; ++p) {
                Complex<T> wp = w[static_cast<std::size_t>(p) * s];
                if (inv) wp.im = -wp.im;
                for (int q = 0; q < s; ++q) {
                    const Complex<T> a = x[q + s * p];
                    const Complex<T> b = x[q + s * (p + m)];
                    y[q + s * (2 * p)] = {a.re + b.re, a.im + b.im};
                    Complex<T>& t = y[q + s * (2 * p + 1)];
                    if (fused_) {
                        const T nwr = -wp.re, nwi = -wp.im;
                        acc.clear();
                        acc.add_product(a.re, wp.re);
                        acc.add_product(b.re, nwr);
                        acc.add_product(a.im, nwi);
                        acc.add_product(b.im, wp.im);
                        t.re = acc.result();
                        acc.clear();
                        acc.add_product(a.re, wp.im);
                        acc.add_product(b.re, nwi);
                        acc.add_product(a.im, wp.re);
                        acc.add_product(b.im, nwr);
                        t.im = acc.result();
                    } else {
                        const T dr = a.re - b.re, di = a.im - b.im;
                        t = {dr * wp.re - di * wp.im, dr * wp.im + di * wp.re};
                    }
                }
            }
            std::swap(x, y);
            s *= 2;
        }
        return x;
    }

    using Acc = fused_accumulator_t<F>;
    bool fused_;
    std::vector<Complex<T>> wx_, wy_, wz_;
    std::vector<Complex<T>> line_, work_;
};

inline int ft_wavenumber(int i, int n) { return (i + n / 2) % n - n / 2; }

// Squared wavenumber |k|^2 per grid point, in field order.
inline std::vector<int> ft_index_map(int nx, int ny, int nz)
{
    std::vector<int> map(static_cast<std::size_t>(nx) * ny * nz);
    std::size_t at = 0;
    for (int k = 0; k < nz; ++k) {
        const int kk = ft_wavenumber(k, nz);
        for (int j = 0; j < ny; ++j) {
            const int jj = ft_wavenumber(j, ny);
            for (int i = 0; i < nx; ++i) {
                const int ii = ft_wavenumber(i, nx);
                map[at++] = ii * ii + jj * jj + kk * kk;
            }
        }
    }
    return map;
}

inline int ft_max_factor_index(const FtProblem& p, int steps)
{
    return steps * (p.nx * p.nx / 4 + p.ny * p.ny / 4 + p.nz * p.nz / 4);
}

template <class F>
std::vector<typename F::value_type> ft_factor_table(double alpha, int max_index, FtFactorSource src)
{
    using T = typename F::value_type;
    std::vector<T> ex(max_index + 1);
    if constexpr (std::is_same_v<T, DoubleDouble>) {
        const DoubleDouble pi = ldexp(dd_const::two_pi, -1);
        const DoubleDouble e1 = exp(DoubleDouble{-4.0 * alpha} * pi * pi);
        ex[0] = DoubleDouble{1.0};
        for (int m = 1; m <= max_index; ++m) ex[m] = m == 1 ? e1 : ex[m - 1] * e1;
    } else {
        const double e1 = std::exp(-4.0 * alpha * M_PI * M_PI);
        if (src == FtFactorSource::format) {
            const T f1 = F::from_double(e1);
            ex[0] = F::from_double(1.0);
            for (int m = 1; m <= max_index; ++m) ex[m] = m == 1 ? f1 : ex[m - 1] * f1;
        } else {
            double d = 1.0;
            ex[0] = F::from_double(1.0);
            for (int m = 1; m <= max_index; ++m) {
                d = m == 1 ? e1 : d * e1;
                ex[m] = F::from_double(d);
            }
        }
    }
    return ex;
}

template <class F>
ComplexField3D<typename F::value_type> ft_cast_field(const ComplexField3D<double>& u)
{
    ComplexField3D<typename F::value_type> out(u.nx, u.ny, u.nz);
    for (std::size_t i = 0; i < u.size(); ++i)
        out.data[i] = {F::from_double(u.data[i].re), F::from_double(u.data[i].im)};
    return out;
}

template <class F>
void ft_evolve(const ComplexField3D<typename F::value_type>& in, ComplexField3D<typename F::value_type>& out,
               const std::vector<typename F::value_type>& ex, const std::vector<int>& map, int t)
{
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto f = ex[static_cast<std::size_t>(t) * map[i]];
        out.data[i] = {in.data[i].re * f, in.data[i].im * f};
    }
}

// Unnormalized L2 distance to the reference field.
template <class F>
double ft_distance(const ComplexField3D<typename F::value_type>& f, const ComplexField3D<DoubleDouble>& ref)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double dr = (F::to_dd(f.data[i].re) - ref.data[i].re).to_double();
        const double di = (F::to_dd(f.data[i].im) - ref.data[i].im).to_double();
        sum += dr * dr + di * di;
    }
    return std::sqrt(sum);
}

}  // namespace detail

/// Unscaled 3D FFT of a field in format F (forward: exp(-2 pi i jk/n)).
template <class F>
void fft3d(ComplexField3D<typename F::value_type>& f, FftDirection dir, bool fused = F::fused)
{
    detail::Fft3D<F> plan(f.nx, f.ny, f.nz, fused);
    plan.transform(f, dir);
}

/// Spectral heat-equation solver in format F with a lockstep double-double
/// reference. Metrics: error_forward (iteration 0), then error_evolve and
/// error_inverse for each step t = 1..steps.
template <class F>
KernelRun ft_run(const FtProblem& prob, const FtOptions& opt = {})
{
    using T = typename F::value_type;
    using R = QuadRefFormat;
    KernelRun run;
    run.kernel = "ft";
    run.problem_class = prob.problem_class;
    run.format = std::string(F::name);

    const int steps = opt.steps > 0 ? opt.steps : prob.steps;
    const auto map = detail::ft_index_map(prob.nx, prob.ny, prob.nz);
    const int max_index = detail::ft_max_factor_index(prob, steps);

    detail::Fft3D<F> plan(prob.nx, prob.ny, prob.nz, F::fused && opt.quire_scope == QuireScope::all);
    const auto ex = detail::ft_factor_table<F>(prob.alpha, max_index, opt.factors);
    auto u = detail::ft_cast_field<F>(prob.u0);
    ComplexField3D<T> w(prob.nx, prob.ny, prob.nz);

    std::unique_ptr<detail::Fft3D<R>> ref_plan;
    std::vector<DoubleDouble> ref_ex;
    ComplexField3D<DoubleDouble> ref_u, ref_w;
    if (opt.compare_reference) {
        ref_plan = std::make_unique<detail::Fft3D<R>>(prob.nx, prob.ny, prob.nz, false);
        ref_ex = detail::ft_factor_table<R>(prob.alpha, max_index, opt.factors);
        ref_u = detail::ft_cast_field<R>(prob.u0);
        ref_w = ComplexField3D<DoubleDouble>(prob.nx, prob.ny, prob.nz);
    }

    auto stage = [&](const ComplexField3D<T>& f, const ComplexField3D<DoubleDouble>& ref, int it,
                     const char* metric) {
        if (!opt.compare_reference) {
            for (const auto& z : f.data)
                if (!F::is_finite(z.re) || !F::is_finite(z.im)) {
                    run.mark_diverged(it);
                    return false;
                }
            return true;
        }
        const double e = detail::ft_distance<F>(f, ref);
        if (!std::isfinite(e)) {
            run.mark_diverged(it);
            return false;
        }
        run.log(it, metric, e);
        return true;
    };

    plan.transform(u, FftDirection::forward);
    if (ref_plan) ref_plan->transform(ref_u, FftDirection::forward);
    if (!stage(u, ref_u, 0, "error_forward")) return run;

    for (int t = 1; t <= steps; ++t) {
        detail::ft_evolve<F>(u, w, ex, map, t);
        if (ref_plan) detail::ft_evolve<R>(ref_u, ref_w, ref_ex, map, t);
        if (!stage(w, ref_w, t, "error_evolve")) break;
        plan.transform(w, FftDirection::inverse);
        if (ref_plan) ref_plan->transform(ref_w, FftDirection::inverse);
        if (!stage(w, ref_w, t, "error_inverse")) break;
    }
    return run;
}

}  // namespace positnpb
