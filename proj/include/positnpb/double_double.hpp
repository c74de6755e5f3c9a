#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <utility>

namespace positnpb {

namespace eft {

/// a + b = s + e exactly.
inline std::pair<double, double> two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

/// Requires |a| >= |b| (or a == 0).
inline std::pair<double, double> fast_two_sum(double a, double b) noexcept
{
    const double s = a + b;
    const double e = b - (s - a);
    return {s, e};
}

/// a * b = p + e exactly.
inline std::pair<double, double> two_prod(double a, double b) noexcept
{
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

}  // namespace eft

/// Unevaluated sum hi + lo of two binary64 values with |lo| <= ulp(hi)/2.
///
/// Roughly 106 significant bits. Stands in for IEEE quad as the
/// high-precision reference format.
class DoubleDouble {
public:
    constexpr DoubleDouble() noexcept = default;
    constexpr DoubleDouble(double hi) noexcept : hi_(hi) {}
    constexpr DoubleDouble(double hi, double lo) noexcept : hi_(hi), lo_(lo) {}

    static DoubleDouble normalized(double hi, double lo) noexcept
    {
        const auto [s, e] = eft::fast_two_sum(hi, lo);
        return {s, e};
    }

    constexpr double hi() const noexcept { return hi_; }
    constexpr double lo() const noexcept { return lo_; }
    constexpr double to_double() const noexcept { return hi_ + lo_; }
    explicit constexpr operator double() const noexcept { return to_double(); }

    friend constexpr DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi_, -a.lo_}; }

    friend DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept
    {
        auto [s1, s2] = eft::two_sum(a.hi_, b.hi_);
        const auto [t1, t2] = eft::two_sum(a.lo_, b.lo_);
        s2 += t1;
        std::tie(s1, s2) = eft::fast_two_sum(s1, s2);
        s2 += t2;
        return normalized(s1, s2);
    }

    friend DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return a + (-b); }

    friend DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept
    {
        const auto [ch, cl1] = eft::two_prod(a.hi_, b.hi_);
        const double tl0 = a.lo_ * b.lo_;
        const double tl1 = std::fma(a.hi_, b.lo_, tl0);
        const double cl2 = std::fma(a.lo_, b.hi_, tl1);
        return normalized(ch, cl1 + cl2);
    }

    friend DoubleDouble operator/(DoubleDouble a, DoubleDouble b) noexcept
    {
        const double q1 = a.hi_ / b.hi_;
        DoubleDouble r = a - b * DoubleDouble{q1};
        const double q2 = r.hi_ / b.hi_;
        r = r - b * DoubleDouble{q2};
        const double q3 = r.hi_ / b.hi_;
        const DoubleDouble q = normalized(q1, q2);
        return q + DoubleDouble{q3};
    }

    DoubleDouble& operator+=(DoubleDouble b) noexcept { return *this = *this + b; }
    DoubleDouble& operator-=(DoubleDouble b) noexcept { return *this = *this - b; }
    DoubleDouble& operator*=(DoubleDouble b) noexcept { return *this = *this * b; }
    DoubleDouble& operator/=(DoubleDouble b) noexcept { return *this = *this / b; }

    friend constexpr std::partial_ordering operator<=>(DoubleDouble a, DoubleDouble b) noexcept
    {
        if (auto c = a.hi_ <=> b.hi_; c != 0) return c;
        return a.lo_ <=> b.lo_;
    }
    friend constexpr bool operator==(DoubleDouble a, DoubleDouble b) noexcept
    {
        return a.hi_ == b.hi_ && a.lo_ == b.lo_;
    }

private:
    double hi_ = 0.0;
    double lo_ = 0.0;
};

inline DoubleDouble abs(DoubleDouble a) noexcept { return a.hi() < 0 ? -a : a; }

inline bool isfinite(DoubleDouble a) noexcept { return std::isfinite(a.hi()) && std::isfinite(a.lo()); }

inline DoubleDouble ldexp(DoubleDouble a, int e) noexcept
{
    return {std::ldexp(a.hi(), e), std::ldexp(a.lo(), e)};
}

inline DoubleDouble sqrt(DoubleDouble a) noexcept
{
    if (a.hi() <= 0.0) return a.hi() == 0.0 ? DoubleDouble{} : DoubleDouble{std::nan("")};
    // One Newton correction of the binary64 root.
    const double x = std::sqrt(a.hi());
    const auto [p, e] = eft::two_prod(x, x);
    const DoubleDouble residual = a - DoubleDouble::normalized(p, e);
    return DoubleDouble::normalized(x, residual.hi() / (2.0 * x));
}

namespace dd_const {
inline constexpr DoubleDouble two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr DoubleDouble ln2{6.931471805599452862e-01, 2.319046813846299558e-17};
}  // namespace dd_const

/// cos and sin of 2*pi*j/n for integer j and power-of-two n.
inline std::pair<DoubleDouble, DoubleDouble> sincos_2pi(std::int64_t j, std::int64_t n) noexcept
{
    j %= n;
    if (j < 0) j += n;
    const std::int64_t quadrant = 4 * j / n;
    std::int64_t r = 4 * j - quadrant * n;  // angle = quadrant/4 + r/(4n) turns
    const bool complement = 2 * r > n;      // past an eighth turn
    if (complement) r = n - r;

    const DoubleDouble theta = dd_const::two_pi * DoubleDouble{static_cast<double>(r) / (4.0 * n)};
    const DoubleDouble t2 = theta * theta;
    DoubleDouble s = theta;
    DoubleDouble c{1.0};
    DoubleDouble sterm = theta;
    DoubleDouble cterm{1.0};
    for (int k = 1; k < 30; ++k) {
        sterm = -(sterm * t2) / DoubleDouble{static_cast<double>((2 * k) * (2 * k + 1))};
        cterm = -(cterm * t2) / DoubleDouble{static_cast<double>((2 * k - 1) * (2 * k))};
        s += sterm;
        c += cterm;
        if (std::fabs(sterm.hi()) < 1e-34 && std::fabs(cterm.hi()) < 1e-34) break;
    }
    if (complement) std::swap(s, c);

    switch (quadrant) {
        case 0: return {c, s};
        case 1: return {-s, c};
        case 2: return {-c, -s};
        default: return {s, -c};
    }
}

inline DoubleDouble exp(DoubleDouble x) noexcept
{
    if (x.hi() == 0.0) return DoubleDouble{1.0};
    const double m = std::nearbyint(x.hi() / dd_const::ln2.hi());
    DoubleDouble r = x - dd_const::ln2 * DoubleDouble{m};
    constexpr int squarings = 10;
    r = ldexp(r, -squarings);
    // exp(r) - 1 by Taylor series, then squared back up.
    DoubleDouble term = r;
    DoubleDouble sum = r;
    for (int k = 2; k < 30; ++k) {
        term = term * r / DoubleDouble{static_cast<double>(k)};
        sum += term;
        if (std::fabs(term.hi()) < 1e-36) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * (sum + DoubleDouble{2.0});
    return ldexp(sum + DoubleDouble{1.0}, static_cast<int>(m));
}

}  // namespace positnpb
