#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace positnpb {

inline constexpr double npb_multiplier = 1220703125.0;  // 5^13
inline constexpr double npb_default_seed = 314159265.0;

/// NPB linear congruential step x <- a*x mod 2^46, computed exactly in
/// binary64 with 23-bit limbs. Returns x * 2^-46.
inline double randlc(double& x, double a) noexcept
{
    constexpr double r23 = 0x1p-23;
    constexpr double r46 = r23 * r23;
    constexpr double t23 = 0x1p23;
    constexpr double t46 = t23 * t23;

    const double a1 = std::trunc(r23 * a);
    const double a2 = a - t23 * a1;
    const double x1 = std::trunc(r23 * x);
    const double x2 = x - t23 * x1;

    const double t1 = a1 * x2 + a2 * x1;
    const double t2 = std::trunc(r23 * t1);
    const double z = t1 - t23 * t2;
    const double t3 = t23 * z + a2 * x2;
    const double t4 = std::trunc(r46 * t3);
    x = t3 - t46 * t4;
    return r46 * x;
}

inline void vranlc(double& x, double a, std::span<double> out) noexcept
{
    for (double& y : out) y = randlc(x, a);
}

/// a^n mod 2^46 by binary powering through randlc.
inline double npb_power(double a, long long n) noexcept
{
    double result = 1.0;
    double aj = a;
    while (n != 0) {
        if (n % 2 == 1) randlc(result, aj);
        randlc(aj, aj);
        n /= 2;
    }
    return result;
}

/// Caller-owned generator state.
class NpbRng {
public:
    explicit NpbRng(double seed = npb_default_seed, double multiplier = npb_multiplier) noexcept
        : state_(seed), multiplier_(multiplier)
    {
    }

    double next() noexcept { return randlc(state_, multiplier_); }

    void fill(std::span<double> out) noexcept { vranlc(state_, multiplier_, out); }

    std::vector<double> draw(std::size_t count)
    {
        std::vector<double> out(count);
        fill(out);
        return out;
    }

    double state() const noexcept { return state_; }

private:
    double state_;
    double multiplier_;
};

}  // namespace positnpb
