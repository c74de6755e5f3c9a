#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>

namespace positnpb {

/// Bit width and maximum exponent-field width of a posit format.
///
/// useed = 2^(2^es) is never stored; everything is expressed through the
/// binary scale, so maxpos = 2^max_scale() and minpos = 2^-max_scale().
struct PositConfig {
    int n;
    int es;

    constexpr int useed_log2() const noexcept { return 1 << es; }
    constexpr int max_scale() const noexcept { return (n - 2) * useed_log2(); }
    constexpr int min_scale() const noexcept { return -max_scale(); }
    /// Fraction bits carried by patterns in [1, 2). Only meaningful when positive.
    constexpr int fraction_bits_at_one() const noexcept { return n - 3 - es; }
    constexpr std::uint32_t mask() const noexcept
    {
        return n == 32 ? 0xFFFFFFFFu : ((1u << n) - 1u);
    }
    constexpr std::uint32_t nar_bits() const noexcept { return 1u << (n - 1); }
    constexpr bool valid() const noexcept { return n >= 2 && n <= 32 && es >= 0 && es <= 6; }

    friend constexpr bool operator==(PositConfig, PositConfig) = default;
};

inline constexpr PositConfig posit32_config{32, 2};

enum class PositKind { zero, nar, finite };

/// Field-level view of a posit pattern.
///
/// For finite values the magnitude is useed^regime * 2^exponent *
/// (1 + fraction / 2^fraction_bits).
struct DecodedPosit {
    PositKind kind = PositKind::zero;
    int sign = 1;
    int regime = 0;
    int exponent = 0;
    std::uint32_t fraction = 0;
    int fraction_bits = 0;
    int es = 0;

    constexpr int scale() const noexcept { return regime * (1 << es) + exponent; }
    double value() const noexcept
    {
        if (kind == PositKind::zero) return 0.0;
        if (kind == PositKind::nar) return std::nan("");
        const double frac = std::ldexp(static_cast<double>(fraction), -fraction_bits);
        return sign * std::ldexp(1.0 + frac, scale());
    }
};

namespace detail {

using u128 = unsigned __int128;

// Finite nonzero posit in sign/scale/fraction form. The fraction is
// left-aligned: bit 63 is the first bit after the hidden one.
struct Unpacked {
    bool negative;
    int scale;
    std::uint64_t fraction;
};

template <PositConfig C>
constexpr std::int32_t signed_pattern(std::uint32_t bits) noexcept
{
    return static_cast<std::int32_t>(bits << (32 - C.n)) >> (32 - C.n);
}

template <PositConfig C>
constexpr Unpacked unpack(std::uint32_t bits) noexcept
{
    const bool negative = (bits >> (C.n - 1)) & 1u;
    const std::uint32_t mag = negative ? ((~bits + 1u) & C.mask()) : bits;

    // Drop the sign bit and left-align the remaining n-1 bits.
    std::uint64_t x = static_cast<std::uint64_t>(mag) << (65 - C.n);
    int remaining = C.n - 1;

    int run;
    int k;
    if (x >> 63) {
        run = std::min(std::countl_one(x), remaining);
        k = run - 1;
    } else {
        run = std::min(std::countl_zero(x), remaining);
        k = -run;
    }
    // The terminating bit is absent when the regime fills the word.
    const int consumed = std::min(run + 1, remaining);
    x <<= consumed;
    remaining -= consumed;

    // Missing low-order exponent bits read as zero from the padding.
    int e = 0;
    if constexpr (C.es > 0) {
        e = static_cast<int>(x >> (64 - C.es));
        x <<= C.es;
    }
    return {negative, k * C.useed_log2() + e, x};
}

/// Rounds sign * 2^scale * (1 + fraction/2^64 + sticky*tiny) onto the posit
/// lattice: nearest, ties to even pattern, saturating at maxpos/minpos.
template <PositConfig C>
constexpr std::uint32_t round_pack(bool negative, int scale, std::uint64_t fraction,
                                   bool sticky) noexcept
{
    std::uint32_t mag;
    if (scale >= C.max_scale()) {
        mag = C.mask() >> 1;
    } else if (scale < C.min_scale()) {
        mag = 1u;
    } else {
        const int k = scale >= 0 ? scale / C.useed_log2()
                                 : -((-scale + C.useed_log2() - 1) / C.useed_log2());
        const int e = scale - k * C.useed_log2();

        u128 str;
        int len;
        if (k >= 0) {
            str = ((u128{1} << (k + 1)) - 1) << 1;
            len = k + 2;
        } else {
            str = 1;
            len = -k + 1;
        }
        str = (str << C.es) | static_cast<u128>(e);
        len += C.es;
        str = (str << 64) | fraction;
        len += 64;

        const int shift = len - (C.n - 1);
        mag = static_cast<std::uint32_t>(str >> shift);
        const bool guard = (str >> (shift - 1)) & 1u;
        const bool rest = sticky || (str & ((u128{1} << (shift - 1)) - 1)) != 0;
        if (guard && (rest || (mag & 1u))) ++mag;
    }
    return negative ? ((~mag + 1u) & C.mask()) : mag;
}

inline std::uint64_t isqrt(std::uint64_t m) noexcept
{
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(m)));
    while (r * r > m) --r;
    while ((r + 1) * (r + 1) <= m) ++r;
    return r;
}

}  // namespace detail

/// An n-bit posit with es exponent bits, stored as its unsigned pattern.
template <PositConfig C>
class Posit {
    static_assert(C.valid(), "posit width must be 2..32 and es 0..6");

public:
    static constexpr PositConfig config = C;

    constexpr Posit() noexcept = default;
    explicit Posit(double x) noexcept : bits_(from_double_bits(x)) {}

    static constexpr Posit from_bits(std::uint32_t bits) noexcept
    {
        Posit p;
        p.bits_ = bits & C.mask();
        return p;
    }
    static constexpr Posit zero() noexcept { return {}; }
    static constexpr Posit one() noexcept { return from_bits(1u << (C.n - 2)); }
    static constexpr Posit nar() noexcept { return from_bits(C.nar_bits()); }
    static constexpr Posit maxpos() noexcept { return from_bits(C.mask() >> 1); }
    static constexpr Posit minpos() noexcept { return from_bits(1u); }

    constexpr std::uint32_t bits() const noexcept { return bits_; }
    constexpr std::int32_t signed_bits() const noexcept { return detail::signed_pattern<C>(bits_); }
    constexpr bool is_zero() const noexcept { return bits_ == 0; }
    constexpr bool is_nar() const noexcept { return bits_ == C.nar_bits(); }
    constexpr bool is_negative() const noexcept { return signed_bits() < 0 && !is_nar(); }

    double to_double() const noexcept
    {
        if (is_zero()) return 0.0;
        if (is_nar()) return std::nan("");
        const auto u = detail::unpack<C>(bits_);
        const std::uint64_t sig = (std::uint64_t{1} << 63) | (u.fraction >> 1);
        const double mag = std::ldexp(static_cast<double>(sig), u.scale - 63);
        return u.negative ? -mag : mag;
    }
    explicit operator double() const noexcept { return to_double(); }

    friend constexpr Posit operator-(Posit a) noexcept { return from_bits(~a.bits_ + 1u); }

    friend constexpr Posit operator+(Posit a, Posit b) noexcept
    {
        if (a.is_nar() || b.is_nar()) return nar();
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        auto ua = detail::unpack<C>(a.bits_);
        auto ub = detail::unpack<C>(b.bits_);
        if (ub.scale > ua.scale || (ub.scale == ua.scale && ub.fraction > ua.fraction))
            std::swap(ua, ub);

        // Hidden bit at 62 leaves room for the carry; at most 29 fraction bits
        // occupy 61..33, so anything shifted below bit 0 is far past the
        // rounding position and can be jammed into the lsb.
        const std::uint64_t sa = (std::uint64_t{1} << 62) | (ua.fraction >> 2);
        std::uint64_t sb = (std::uint64_t{1} << 62) | (ub.fraction >> 2);
        const int d = ua.scale - ub.scale;
        if (d >= 63) {
            sb = 1;
        } else if (d > 0) {
            const bool lost = (sb & ((std::uint64_t{1} << d) - 1)) != 0;
            sb = (sb >> d) | static_cast<std::uint64_t>(lost);
        }
        const std::uint64_t s = ua.negative == ub.negative ? sa + sb : sa - sb;
        if (s == 0) return zero();
        const int top = 63 - std::countl_zero(s);
        const std::uint64_t frac = (s << (63 - top)) << 1;
        return from_bits(detail::round_pack<C>(ua.negative, ua.scale + top - 62, frac, false));
    }

    friend constexpr Posit operator-(Posit a, Posit b) noexcept { return a + (-b); }

    friend constexpr Posit operator*(Posit a, Posit b) noexcept
    {
        if (a.is_nar() || b.is_nar()) return nar();
        if (a.is_zero() || b.is_zero()) return zero();
        const auto ua = detail::unpack<C>(a.bits_);
        const auto ub = detail::unpack<C>(b.bits_);
        const std::uint64_t p = static_cast<std::uint64_t>(significand32(ua)) * significand32(ub);
        int scale = ua.scale + ub.scale;
        std::uint64_t frac;
        if (p >> 63) {
            ++scale;
            frac = p << 1;
        } else {
            frac = p << 2;
        }
        return from_bits(detail::round_pack<C>(ua.negative != ub.negative, scale, frac, false));
    }

    friend constexpr Posit operator/(Posit a, Posit b) noexcept
    {
        if (a.is_nar() || b.is_nar() || b.is_zero()) return nar();
        if (a.is_zero()) return zero();
        const auto ua = detail::unpack<C>(a.bits_);
        const auto ub = detail::unpack<C>(b.bits_);
        const std::uint64_t num = static_cast<std::uint64_t>(significand32(ua)) << 32;
        const std::uint64_t den = significand32(ub);
        const std::uint64_t q = num / den;
        const bool sticky = num % den != 0;
        // q lies in (2^31, 2^33): at least fraction bits + 2 of quotient.
        const int top = 63 - std::countl_zero(q);
        const std::uint64_t frac = (q << (63 - top)) << 1;
        return from_bits(detail::round_pack<C>(ua.negative != ub.negative,
                                               ua.scale - ub.scale + top - 32, frac, sticky));
    }

    Posit& operator+=(Posit b) noexcept { return *this = *this + b; }
    Posit& operator-=(Posit b) noexcept { return *this = *this - b; }
    Posit& operator*=(Posit b) noexcept { return *this = *this * b; }
    Posit& operator/=(Posit b) noexcept { return *this = *this / b; }

    /// NaR is unordered against everything, itself included.
    friend constexpr std::partial_ordering operator<=>(Posit a, Posit b) noexcept
    {
        if (a.is_nar() || b.is_nar()) return std::partial_ordering::unordered;
        return a.signed_bits() <=> b.signed_bits();
    }
    friend constexpr bool operator==(Posit a, Posit b) noexcept
    {
        return !a.is_nar() && !b.is_nar() && a.bits_ == b.bits_;
    }

private:
    static constexpr std::uint32_t significand32(const detail::Unpacked& u) noexcept
    {
        return 0x80000000u | static_cast<std::uint32_t>(u.fraction >> 33);
    }

    static std::uint32_t from_double_bits(double x) noexcept
    {
        if (!std::isfinite(x)) return C.nar_bits();
        if (x == 0.0) return 0;
        int exp;
        const double m = std::frexp(std::fabs(x), &exp);
        const auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
        return detail::round_pack<C>(x < 0, exp - 1, mant << 12, false);
    }

    std::uint32_t bits_ = 0;
};

using posit32 = Posit<posit32_config>;
using posit16 = Posit<PositConfig{16, 2}>;
using posit8 = Posit<PositConfig{8, 2}>;

template <PositConfig C>
constexpr DecodedPosit decode(Posit<C> p) noexcept
{
    DecodedPosit d;
    d.es = C.es;
    if (p.is_zero()) return d;
    if (p.is_nar()) {
        d.kind = PositKind::nar;
        return d;
    }
    const auto u = detail::unpack<C>(p.bits());
    d.kind = PositKind::finite;
    d.sign = u.negative ? -1 : 1;
    const int s = u.scale;
    d.regime = s >= 0 ? s / C.useed_log2() : -((-s + C.useed_log2() - 1) / C.useed_log2());
    d.exponent = s - d.regime * C.useed_log2();

    // Field width left after sign, regime (with terminator) and exponent.
    const int regime_len = d.regime >= 0 ? d.regime + 2 : -d.regime + 1;
    d.fraction_bits = std::max(C.n - 1 - std::min(regime_len, C.n - 1) - C.es, 0);
    d.fraction = d.fraction_bits == 0
                     ? 0u
                     : static_cast<std::uint32_t>(u.fraction >> (64 - d.fraction_bits));
    return d;
}

template <PositConfig C>
constexpr std::partial_ordering compare(Posit<C> a, Posit<C> b) noexcept
{
    return a <=> b;
}

template <PositConfig C>
constexpr Posit<C> abs(Posit<C> a) noexcept
{
    return a.is_negative() ? -a : a;
}

/// Next pattern up the lattice; maxpos and NaR map to themselves.
template <PositConfig C>
constexpr Posit<C> nextup(Posit<C> a) noexcept
{
    if (a.is_nar() || a == Posit<C>::maxpos()) return a;
    return Posit<C>::from_bits(a.bits() + 1u);
}

template <PositConfig C>
Posit<C> sqrt(Posit<C> a) noexcept
{
    if (a.is_nar() || a.is_negative()) return Posit<C>::nar();
    if (a.is_zero()) return a;
    const auto u = detail::unpack<C>(a.bits());
    int scale = u.scale;
    std::uint64_t m = (std::uint64_t{1} << 60) | (u.fraction >> 4);
    if (scale & 1) {
        m <<= 1;
        --scale;
    }
    // m = significand * 2^60 (times 2 for odd scales); root has 31 bits.
    const std::uint64_t root = detail::isqrt(m);
    const bool sticky = root * root != m;
    const std::uint64_t frac = (root << 33) << 1;
    return Posit<C>::from_bits(detail::round_pack<C>(false, scale / 2, frac, sticky));
}

/// "positN.es:0xHEX", used in logs.
template <PositConfig C>
std::string to_string(Posit<C> p)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "posit%d.%d:0x%0*X", C.n, C.es, (C.n + 3) / 4, p.bits());
    return buf;
}

}  // namespace positnpb
