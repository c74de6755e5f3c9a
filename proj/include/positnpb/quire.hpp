#pragma once

#include <array>
#include <bit>
#include <cstdint>

#include "positnpb/exact_real.hpp"
#include "positnpb/posit.hpp"

namespace positnpb {

/// 512-bit two's-complement fixed-point accumulator for posit32.
///
/// Bit 0 weighs 2^-240 (minpos^2). Layout from the top: sign, 31 carry
/// bits, 240 integer bits, 240 fraction bits. Every posit32 product is
/// exactly representable, and 2^31 extremal products cannot overflow.
class Quire32 {
public:
    static constexpr int limb_count = 8;
    static constexpr int fraction_bits = 240;

    Quire32() noexcept = default;

    void clear() noexcept
    {
        limbs_ = {};
        nar_ = false;
    }

    bool is_nar() const noexcept { return nar_; }
    bool is_zero() const noexcept
    {
        if (nar_) return false;
        for (auto l : limbs_)
            if (l) return false;
        return true;
    }
    bool is_negative() const noexcept { return !nar_ && (limbs_[7] >> 63); }

    /// q += a * b, exactly.
    Quire32& fma(posit32 a, posit32 b) noexcept
    {
        if (nar_) return *this;
        if (a.is_nar() || b.is_nar()) {
            nar_ = true;
            return *this;
        }
        if (a.is_zero() || b.is_zero()) return *this;
        const auto ua = detail::unpack<posit32_config>(a.bits());
        const auto ub = detail::unpack<posit32_config>(b.bits());
        std::uint64_t p = static_cast<std::uint64_t>(significand(ua)) * significand(ub);
        // p * 2^(scale_a + scale_b - 62); lsb position in the quire:
        int offset = ua.scale + ub.scale - 62 + fraction_bits;
        if (offset < 0) {
            // Only zero bits fall off: products never have bits below 2^-240.
            p >>= -offset;
            offset = 0;
        }
        accumulate(p, offset, ua.negative != ub.negative);
        return *this;
    }

    /// q += a, exactly.
    Quire32& add(posit32 a) noexcept
    {
        if (nar_) return *this;
        if (a.is_nar()) {
            nar_ = true;
            return *this;
        }
        if (a.is_zero()) return *this;
        const auto u = detail::unpack<posit32_config>(a.bits());
        accumulate(significand(u), u.scale - 31 + fraction_bits, u.negative);
        return *this;
    }

    /// Single rounding of the accumulated exact value.
    posit32 to_posit() const noexcept
    {
        if (nar_) return posit32::nar();
        const bool negative = limbs_[7] >> 63;
        const auto mag = negative ? negated() : limbs_;
        int top = -1;
        for (int i = limb_count - 1; i >= 0; --i) {
            if (mag[i]) {
                top = i * 64 + 63 - std::countl_zero(mag[i]);
                break;
            }
        }
        if (top < 0) return posit32::zero();

        // 64 bits just below the leading one, plus a sticky for the rest.
        const int lo = top - 64;
        std::uint64_t fraction;
        bool sticky = false;
        if (lo >= 0) {
            const int i = lo >> 6;
            const int s = lo & 63;
            fraction = mag[i] >> s;
            if (s && i + 1 < limb_count) fraction |= mag[i + 1] << (64 - s);
            for (int j = 0; j < i && !sticky; ++j) sticky = mag[j] != 0;
            if (!sticky && s) sticky = (mag[i] & ((std::uint64_t{1} << s) - 1)) != 0;
        } else {
            fraction = -lo >= 64 ? 0 : mag[0] << -lo;
        }
        return posit32::from_bits(detail::round_pack<posit32_config>(
            negative, top - fraction_bits, fraction, sticky));
    }

    /// Exact accumulated value (zero for a NaR quire).
    ExactReal exact_value() const
    {
        if (nar_) return {};
        const bool negative = limbs_[7] >> 63;
        const auto mag = negative ? negated() : limbs_;
        BigInt v = 0;
        for (int i = limb_count - 1; i >= 0; --i) v = (v << 64) | BigInt{mag[i]};
        ExactReal r;
        r.sign = negative ? -1 : 1;
        r.mantissa = v;
        r.mantissa_bits = fraction_bits;
        return r;
    }

    const std::array<std::uint64_t, limb_count>& limbs() const noexcept { return limbs_; }

private:
    static std::uint32_t significand(const detail::Unpacked& u) noexcept
    {
        return 0x80000000u | static_cast<std::uint32_t>(u.fraction >> 33);
    }

    std::array<std::uint64_t, limb_count> negated() const noexcept
    {
        std::array<std::uint64_t, limb_count> out{};
        unsigned carry = 1;
        for (int i = 0; i < limb_count; ++i) {
            const std::uint64_t x = ~limbs_[i];
            out[i] = x + carry;
            carry = carry && out[i] == 0;
        }
        return out;
    }

    void accumulate(std::uint64_t value, int offset, bool subtract) noexcept
    {
        const int limb = offset >> 6;
        const auto wide = static_cast<detail::u128>(value) << (offset & 63);
        const std::uint64_t lo = static_cast<std::uint64_t>(wide);
        const std::uint64_t hi = static_cast<std::uint64_t>(wide >> 64);
        const bool was_negative = limbs_[7] >> 63;

        if (!subtract) {
            std::uint64_t carry = 0;
            for (int i = limb; i < limb_count; ++i) {
                const std::uint64_t addend = i == limb ? lo : (i == limb + 1 ? hi : 0);
                const std::uint64_t s1 = limbs_[i] + addend;
                const std::uint64_t c1 = s1 < addend;
                const std::uint64_t s2 = s1 + carry;
                carry = c1 | (s2 < s1);
                limbs_[i] = s2;
                if (i > limb && !carry) break;
            }
            if (!was_negative && (limbs_[7] >> 63)) nar_ = true;
        } else {
            std::uint64_t borrow = 0;
            for (int i = limb; i < limb_count; ++i) {
                const std::uint64_t sub = i == limb ? lo : (i == limb + 1 ? hi : 0);
                const std::uint64_t d1 = limbs_[i] - sub;
                const std::uint64_t b1 = limbs_[i] < sub;
                const std::uint64_t d2 = d1 - borrow;
                borrow = b1 | (d1 < borrow);
                limbs_[i] = d2;
                if (i > limb && !borrow) break;
            }
            if (was_negative && !(limbs_[7] >> 63)) nar_ = true;
        }
    }

    std::array<std::uint64_t, limb_count> limbs_{};
    bool nar_ = false;
};

inline Quire32 quire_clear() noexcept { return {}; }

inline Quire32 qma(Quire32 q, posit32 a, posit32 b) noexcept
{
    q.fma(a, b);
    return q;
}

inline Quire32 quire_add_posit(Quire32 q, posit32 a) noexcept
{
    q.add(a);
    return q;
}

inline posit32 quire_to_posit(const Quire32& q) noexcept { return q.to_posit(); }

}  // namespace positnpb
