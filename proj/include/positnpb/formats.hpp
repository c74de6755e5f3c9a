#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <vector>

#include "positnpb/double_double.hpp"
#include "positnpb/posit.hpp"
#include "positnpb/quire.hpp"

namespace positnpb {

/// Left-to-right multiply-then-add accumulation, one rounding per operation.
template <class T>
class SequentialAccumulator {
public:
    void clear() noexcept { sum_ = T{}; }
    void add(T a) noexcept { sum_ = sum_ + a; }
    void add_product(T a, T b) noexcept { sum_ = sum_ + a * b; }
    T result() const noexcept { return sum_; }

private:
    T sum_{};
};

/// Quire-backed accumulation: exact until result().
class QuireAccumulator {
public:
    void clear() noexcept { q_.clear(); }
    void add(posit32 a) noexcept { q_.add(a); }
    void add_product(posit32 a, posit32 b) noexcept { q_.fma(a, b); }
    posit32 result() const noexcept { return q_.to_posit(); }

private:
    Quire32 q_;
};

// Scalar formats. Every kernel is instantiated once per format; `fused`
// formats route dot products (and, by kernel option, stencil/matvec sums)
// through a quire.

struct FloatFormat {
    using value_type = float;
    static constexpr std::string_view name = "float";
    static constexpr bool fused = false;
    static value_type from_double(double x) noexcept { return static_cast<float>(x); }
    static double to_double(value_type v) noexcept { return v; }
    static DoubleDouble to_dd(value_type v) noexcept { return DoubleDouble{v}; }
    static value_type sqrt(value_type v) noexcept { return std::sqrt(v); }
    static bool is_finite(value_type v) noexcept { return std::isfinite(v); }
};

struct DoubleFormat {
    using value_type = double;
    static constexpr std::string_view name = "double";
    static constexpr bool fused = false;
    static value_type from_double(double x) noexcept { return x; }
    static double to_double(value_type v) noexcept { return v; }
    static DoubleDouble to_dd(value_type v) noexcept { return DoubleDouble{v}; }
    static value_type sqrt(value_type v) noexcept { return std::sqrt(v); }
    static bool is_finite(value_type v) noexcept { return std::isfinite(v); }
};

struct QuadRefFormat {
    using value_type = DoubleDouble;
    static constexpr std::string_view name = "quad-ref";
    static constexpr bool fused = false;
    /// The double-double lattice near 1 is not uniform (1 + 2^-1074 is
    /// representable), so the nominal 2^-104 is reported instead of a search.
    static constexpr double nominal_epsilon = 0x1p-104;
    static value_type from_double(double x) noexcept { return DoubleDouble{x}; }
    static double to_double(value_type v) noexcept { return v.to_double(); }
    static DoubleDouble to_dd(value_type v) noexcept { return v; }
    static value_type sqrt(value_type v) noexcept { return positnpb::sqrt(v); }
    static bool is_finite(value_type v) noexcept { return positnpb::isfinite(v); }
};

struct Posit32Format {
    using value_type = posit32;
    static constexpr std::string_view name = "posit32";
    static constexpr bool fused = false;
    static value_type from_double(double x) noexcept { return posit32{x}; }
    static double to_double(value_type v) noexcept { return v.to_double(); }
    static DoubleDouble to_dd(value_type v) noexcept { return DoubleDouble{v.to_double()}; }
    static value_type sqrt(value_type v) noexcept { return positnpb::sqrt(v); }
    static bool is_finite(value_type v) noexcept { return !v.is_nar(); }
};

struct Quire32Format : Posit32Format {
    static constexpr std::string_view name = "quire32";
    static constexpr bool fused = true;
};

template <class F>
using fused_accumulator_t =
    std::conditional_t<F::fused, QuireAccumulator, SequentialAccumulator<typename F::value_type>>;

template <class F>
using plain_accumulator_t = SequentialAccumulator<typename F::value_type>;

/// ulp(1): the smallest power of two g with 1 + g != 1 in the format,
/// found by a downward linear search over candidate gaps.
template <class F>
double machine_epsilon()
{
    if constexpr (requires { F::nominal_epsilon; }) {
        return F::nominal_epsilon;
    } else {
        using T = typename F::value_type;
        const T one = F::from_double(1.0);
        double gap = 1.0;
        for (;;) {
            const T candidate = F::from_double(gap / 2);
            if (!(one + candidate != one)) break;
            gap /= 2;
        }
        return gap;
    }
}

template <class F>
std::vector<typename F::value_type> cast_vector(std::span<const double> xs)
{
    std::vector<typename F::value_type> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(F::from_double(x));
    return out;
}

/// Dot product in the format: quire-fused for quire32, otherwise the
/// sequential left-to-right loop.
template <class F>
typename F::value_type dot(std::span<const typename F::value_type> xs,
                           std::span<const typename F::value_type> ys)
{
    if (xs.size() != ys.size()) throw std::invalid_argument("dot: length mismatch");
    fused_accumulator_t<F> acc;
    for (std::size_t i = 0; i < xs.size(); ++i) acc.add_product(xs[i], ys[i]);
    return acc.result();
}

}  // namespace positnpb
