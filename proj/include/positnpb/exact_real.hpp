#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "positnpb/posit.hpp"

namespace positnpb {

using BigInt = boost::multiprecision::cpp_int;

/// Exact dyadic rational sign * 2^scale * mantissa / 2^mantissa_bits.
///
/// Used as the intermediary for correct rounding; no operation on it rounds.
struct ExactReal {
    int sign = 1;
    std::int64_t scale = 0;
    BigInt mantissa = 0;
    std::int64_t mantissa_bits = 0;

    bool is_zero() const { return mantissa == 0; }

    static ExactReal from_double(double x)
    {
        ExactReal r;
        if (x == 0.0 || !std::isfinite(x)) return r;
        int exp;
        const double m = std::frexp(std::fabs(x), &exp);
        r.sign = x < 0 ? -1 : 1;
        r.mantissa = static_cast<std::uint64_t>(std::ldexp(m, 53));
        r.mantissa_bits = 53;
        r.scale = exp;
        return r;
    }

    static ExactReal from_integer(BigInt v, std::int64_t scale = 0)
    {
        ExactReal r;
        r.sign = v < 0 ? -1 : 1;
        r.mantissa = boost::multiprecision::abs(v);
        r.scale = scale;
        return r;
    }
};

/// Exact value of a finite posit. Zero for zero; NaR has no exact value and
/// maps to zero as well, so callers must test is_nar() first.
template <PositConfig C>
ExactReal exact_value(Posit<C> p)
{
    ExactReal r;
    const DecodedPosit d = decode(p);
    if (d.kind != PositKind::finite) return r;
    r.sign = d.sign;
    r.scale = d.scale();
    r.mantissa = (BigInt{1} << d.fraction_bits) + d.fraction;
    r.mantissa_bits = d.fraction_bits;
    return r;
}

/// Correctly rounded posit nearest to an exact value (ties to even pattern,
/// saturating at maxpos/minpos).
template <PositConfig C>
Posit<C> encode_round(const ExactReal& x)
{
    if (x.mantissa == 0) return Posit<C>::zero();
    const auto msb = static_cast<std::int64_t>(boost::multiprecision::msb(x.mantissa));

    std::uint64_t fraction;
    bool sticky;
    if (msb >= 64) {
        const BigInt rest = x.mantissa & ((BigInt{1} << (msb - 64)) - 1);
        fraction = static_cast<std::uint64_t>((x.mantissa >> (msb - 64)) & BigInt{~std::uint64_t{0}});
        sticky = rest != 0;
    } else {
        const BigInt below = x.mantissa & ((BigInt{1} << msb) - 1);
        fraction = static_cast<std::uint64_t>(below << (64 - msb));
        sticky = false;
    }

    // Exponents this far out saturate anyway; clamp to keep int arithmetic safe.
    std::int64_t scale = x.scale + msb - x.mantissa_bits;
    constexpr std::int64_t lim = 1 << 20;
    scale = std::clamp<std::int64_t>(scale, -lim, lim);
    return Posit<C>::from_bits(
        detail::round_pack<C>(x.sign < 0, static_cast<int>(scale), fraction, sticky));
}

}  // namespace positnpb
