#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "oracle/rational_posit.hpp"
#include "positnpb/exact_real.hpp"
#include "positnpb/posit.hpp"

using namespace positnpb;
using oracle::Rational;

namespace {

Rational to_rational(const ExactReal& x)
{
    Rational v = Rational(x.mantissa) * oracle::pow2(x.scale - x.mantissa_bits);
    return x.sign < 0 ? Rational(-v) : v;
}

ExactReal from_rational_dyadic(const Rational& r)
{
    // Denominators here are powers of two.
    const auto den = boost::multiprecision::denominator(r);
    const auto num = boost::multiprecision::numerator(r);
    ExactReal x = ExactReal::from_integer(oracle::Int(num));
    x.mantissa_bits = static_cast<std::int64_t>(boost::multiprecision::msb(den));
    return x;
}

template <PositConfig C>
std::uint32_t oracle_round(const Rational& x)
{
    return static_cast<std::uint32_t>(oracle::round(x, C.n, C.es));
}

constexpr std::uint32_t fig1_bits = (0b01u << 29) | (0b00u << 27) | 130903708u;

}  // namespace

TEST(PositDecode, ZeroAndOne)
{
    EXPECT_EQ(decode(posit32::from_bits(0)).kind, PositKind::zero);
    const auto one = decode(posit32::from_bits(0x40000000u));
    EXPECT_EQ(one.kind, PositKind::finite);
    EXPECT_EQ(one.regime, 0);
    EXPECT_EQ(one.exponent, 0);
    EXPECT_EQ(one.fraction, 0u);
    EXPECT_EQ(one.value(), 1.0);
    EXPECT_EQ(decode(posit32::nar()).kind, PositKind::nar);
}

TEST(PositDecode, WorkedExampleFromFormatFigure)
{
    const auto d = decode(posit32::from_bits(fig1_bits));
    EXPECT_EQ(d.sign, 1);
    EXPECT_EQ(d.regime, -1);
    EXPECT_EQ(d.exponent, 0);
    EXPECT_EQ(d.fraction_bits, 27);
    EXPECT_EQ(d.fraction, 130903708u);
    const double expected = (1.0 + 130903708.0 / 134217728.0) / 16.0;
    EXPECT_EQ(d.value(), expected);
    EXPECT_NEAR(d.value(), 0.1234567891, 1e-10);
    EXPECT_EQ(to_rational(exact_value(posit32::from_bits(fig1_bits))),
              oracle::value(fig1_bits, 32, 2));
}

TEST(PositDecode, RegimeFillsWholeWord)
{
    // 0x7FFFFFFF: 31 regime ones, no terminator, no exponent bits.
    const auto maxd = decode(posit32::maxpos());
    EXPECT_EQ(maxd.regime, 30);
    EXPECT_EQ(maxd.exponent, 0);
    EXPECT_EQ(maxd.fraction_bits, 0);
    EXPECT_EQ(posit32::maxpos().to_double(), std::ldexp(1.0, 120));
    EXPECT_EQ(posit32::minpos().to_double(), std::ldexp(1.0, -120));
    // 0x7FFFFFFE: 30 regime ones and the terminator, nothing left (k = 29).
    EXPECT_EQ(posit32::from_bits(0x7FFFFFFEu).to_double(), std::ldexp(1.0, 116));
    // 0x7FFFFFFD: 29 ones, terminator, a single exponent bit "1" whose
    // missing low-order partner reads as 0, so e = 2.
    EXPECT_EQ(posit32::from_bits(0x7FFFFFFDu).to_double(), std::ldexp(1.0, 114));
}

TEST(PositEncode, Examples)
{
    EXPECT_EQ(encode_round<posit32_config>(ExactReal::from_double(1.0)).bits(), 0x40000000u);
    const ExactReal huge = ExactReal::from_integer(1, 200);
    EXPECT_EQ(encode_round<posit32_config>(huge), posit32::maxpos());
    const ExactReal tiny = ExactReal::from_integer(1, -200);
    EXPECT_EQ(encode_round<posit32_config>(tiny), posit32::minpos());
    EXPECT_EQ(encode_round<posit32_config>(exact_value(posit32::from_bits(fig1_bits))).bits(),
              fig1_bits);
    EXPECT_EQ(encode_round<posit32_config>(ExactReal{}), posit32::zero());
}

template <PositConfig C>
void expect_roundtrip_all()
{
    const std::uint32_t count = C.n == 32 ? 0 : (1u << C.n);
    for (std::uint32_t b = 0; b < count; ++b) {
        const auto p = Posit<C>::from_bits(b);
        if (p.is_nar()) continue;
        ASSERT_EQ(encode_round<C>(exact_value(p)).bits(), b) << "n=" << C.n << " es=" << C.es;
        ASSERT_EQ(Posit<C>{p.to_double()}.bits(), b);
    }
}

template <int... Ns>
void roundtrip_widths(std::integer_sequence<int, Ns...>)
{
    (expect_roundtrip_all<PositConfig{Ns + 2, 0}>(), ...);
    (expect_roundtrip_all<PositConfig{Ns + 2, 1}>(), ...);
    (expect_roundtrip_all<PositConfig{Ns + 2, 2}>(), ...);
    (expect_roundtrip_all<PositConfig{Ns + 2, 3}>(), ...);
}

TEST(PositInvariants, ExhaustiveRoundTripUpTo16Bits)
{
    roundtrip_widths(std::make_integer_sequence<int, 15>{});
}

TEST(PositInvariants, SampledPosit32RoundTrip)
{
    std::mt19937_64 rng(20190614);
    for (int i = 0; i < 200000; ++i) {
        const auto p = posit32::from_bits(static_cast<std::uint32_t>(rng()));
        if (p.is_nar()) continue;
        ASSERT_EQ(encode_round<posit32_config>(exact_value(p)), p) << to_string(p);
        ASSERT_EQ(posit32{p.to_double()}, p);
    }
}

TEST(PositInvariants, DecodeMatchesOracleExhaustive16)
{
    for (std::uint32_t b = 0; b < (1u << 16); ++b) {
        const auto p = posit16::from_bits(b);
        if (p.is_nar()) continue;
        ASSERT_EQ(to_rational(exact_value(p)), oracle::value(b, 16, 2)) << b;
    }
}

TEST(PositInvariants, OrderingAndNegationExhaustive16)
{
    std::vector<std::pair<Rational, posit16>> values;
    for (std::uint32_t b = 0; b < (1u << 16); ++b) {
        const auto p = posit16::from_bits(b);
        if (p.is_nar()) continue;
        values.emplace_back(oracle::value(b, 16, 2), p);
        if (!p.is_zero()) {
            ASSERT_EQ(oracle::value((-p).bits(), 16, 2), Rational(-values.back().first));
        }
    }
    std::sort(values.begin(), values.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < values.size(); ++i) {
        ASSERT_LT(values[i - 1].second.signed_bits(), values[i].second.signed_bits());
        ASSERT_TRUE(values[i - 1].second < values[i].second);
    }
}

template <PositConfig C>
void expect_exhaustive_arithmetic()
{
    using P = Posit<C>;
    constexpr std::uint32_t count = 1u << C.n;
    for (std::uint32_t a = 0; a < count; ++a) {
        const auto pa = P::from_bits(a);
        for (std::uint32_t b = 0; b < count; ++b) {
            const auto pb = P::from_bits(b);
            if (pa.is_nar() || pb.is_nar()) {
                ASSERT_TRUE((pa + pb).is_nar());
                ASSERT_TRUE((pa - pb).is_nar());
                ASSERT_TRUE((pa * pb).is_nar());
                ASSERT_TRUE((pa / pb).is_nar());
                continue;
            }
            const Rational x = oracle::value(a, C.n, C.es);
            const Rational y = oracle::value(b, C.n, C.es);
            ASSERT_EQ((pa + pb).bits(), oracle_round<C>(x + y)) << a << " + " << b;
            ASSERT_EQ((pa - pb).bits(), oracle_round<C>(x - y)) << a << " - " << b;
            ASSERT_EQ((pa * pb).bits(), oracle_round<C>(x * y)) << a << " * " << b;
            if (pb.is_zero()) {
                ASSERT_TRUE((pa / pb).is_nar());
            } else {
                ASSERT_EQ((pa / pb).bits(), oracle_round<C>(x / y)) << a << " / " << b;
            }
        }
    }
}

TEST(PositArithmetic, ExhaustivePosit8Es2)
{
    expect_exhaustive_arithmetic<PositConfig{8, 2}>();
}

TEST(PositArithmetic, ExhaustiveOtherSmallFormats)
{
    expect_exhaustive_arithmetic<PositConfig{8, 0}>();
    expect_exhaustive_arithmetic<PositConfig{7, 1}>();
    expect_exhaustive_arithmetic<PositConfig{6, 3}>();
}

template <PositConfig C>
void expect_sampled_arithmetic(int samples, std::uint64_t seed)
{
    using P = Posit<C>;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < samples; ++i) {
        const auto pa = P::from_bits(static_cast<std::uint32_t>(rng()));
        auto pb = P::from_bits(static_cast<std::uint32_t>(rng()));
        // Half the samples use nearby magnitudes so cancellation is exercised.
        if (i % 2) pb = P::from_bits(pa.bits() + static_cast<std::uint32_t>(rng() % 64) - 32);
        if (pa.is_nar() || pb.is_nar() || pb.is_zero()) continue;
        const Rational x = oracle::value(pa.bits(), C.n, C.es);
        const Rational y = oracle::value(pb.bits(), C.n, C.es);
        ASSERT_EQ((pa + pb).bits(), oracle_round<C>(x + y)) << to_string(pa) << to_string(pb);
        ASSERT_EQ((pa - pb).bits(), oracle_round<C>(x - y)) << to_string(pa) << to_string(pb);
        ASSERT_EQ((pa * pb).bits(), oracle_round<C>(x * y)) << to_string(pa) << to_string(pb);
        ASSERT_EQ((pa / pb).bits(), oracle_round<C>(x / y)) << to_string(pa) << to_string(pb);
    }
}

TEST(PositArithmetic, SampledPosit16)
{
    expect_sampled_arithmetic<PositConfig{16, 2}>(20000, 16);
}

TEST(PositArithmetic, SampledPosit32)
{
    expect_sampled_arithmetic<posit32_config>(10000, 32);
    expect_sampled_arithmetic<PositConfig{32, 0}>(2000, 320);
    expect_sampled_arithmetic<PositConfig{32, 3}>(2000, 323);
}

TEST(PositArithmetic, Examples)
{
    const auto one = posit32::one();
    EXPECT_EQ(one + posit32::zero(), one);
    EXPECT_EQ(posit32::maxpos() * posit32::maxpos(), posit32::maxpos());
    EXPECT_EQ(posit32::maxpos() + posit32::maxpos(), posit32::maxpos());
    EXPECT_EQ(posit32::minpos() * posit32::minpos(), posit32::minpos());
    EXPECT_EQ(-posit32::minpos() * posit32::minpos(), -posit32::minpos());
    EXPECT_EQ(posit32::minpos() / posit32::maxpos(), posit32::minpos());
    EXPECT_TRUE((one / posit32::zero()).is_nar());
    EXPECT_TRUE((posit32::zero() / posit32::zero()).is_nar());
    EXPECT_EQ(posit32{3.0} - posit32{3.0}, posit32::zero());
    EXPECT_EQ(posit32{1.5} * posit32{2.0}, posit32{3.0});
    EXPECT_EQ(posit32{1.0} / posit32{4.0}, posit32{0.25});
}

TEST(PositRounding, LatticeMidpointsTieToEven)
{
    using P = posit8;
    for (std::uint32_t p = 1; p + 1 < 0x80u; ++p) {
        const Rational mid = oracle::value(2 * p + 1, 9, 2);
        const std::uint32_t even = (p & 1u) ? p + 1 : p;
        EXPECT_EQ(encode_round<P::config>(from_rational_dyadic(mid)).bits(), even) << p;
        EXPECT_EQ(encode_round<P::config>(from_rational_dyadic(-mid)).bits(), (0x100u - even) & 0xFFu);

        // Inside a binade the lattice midpoint is the arithmetic midpoint.
        const auto lo = P::from_bits(p);
        const auto hi = P::from_bits(p + 1);
        const auto dl = decode(lo);
        const auto dh = decode(hi);
        if (dl.scale() == dh.scale() && dl.fraction_bits == dh.fraction_bits && dl.fraction_bits > 0) {
            const Rational arith = (oracle::value(p, 8, 2) + oracle::value(p + 1, 8, 2)) / 2;
            EXPECT_EQ(arith, mid);
        }
    }
}

TEST(PositRounding, Posit32RandomRealsMatchOracle)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 3000; ++i) {
        // Random 80-bit mantissas across the whole dynamic range.
        oracle::Int m = (oracle::Int(rng()) << 16) | (rng() & 0xFFFF);
        const int scale = static_cast<int>(rng() % 280) - 140;
        ExactReal x = ExactReal::from_integer(m, scale);
        x.mantissa_bits = 80;
        if (i % 3 == 0) x.sign = -1;
        const auto got = encode_round<posit32_config>(x);
        ASSERT_EQ(got.bits(), oracle_round<posit32_config>(to_rational(x)));
    }
}

TEST(PositSqrt, ExhaustivePosit16)
{
    for (std::uint32_t b = 0; b < (1u << 16); ++b) {
        const auto p = posit16::from_bits(b);
        const auto r = sqrt(p);
        if (p.is_nar() || p.is_negative()) {
            ASSERT_TRUE(r.is_nar()) << b;
            continue;
        }
        ASSERT_EQ(r.bits(), oracle::round_sqrt(oracle::value(b, 16, 2), 16, 2)) << b;
    }
}

TEST(PositSqrt, SampledPosit32)
{
    EXPECT_EQ(sqrt(posit32::one()), posit32::one());
    EXPECT_TRUE(sqrt(posit32::nar()).is_nar());
    EXPECT_TRUE(sqrt(posit32{-4.0}).is_nar());
    EXPECT_EQ(sqrt(posit32{4.0}), posit32{2.0});
    std::mt19937_64 rng(99);
    for (int i = 0; i < 3000; ++i) {
        const auto p = posit32::from_bits(static_cast<std::uint32_t>(rng()) & 0x7FFFFFFFu);
        if (p.is_zero()) continue;
        ASSERT_EQ(sqrt(p).bits(), oracle::round_sqrt(oracle::value(p.bits(), 32, 2), 32, 2));
    }
}

TEST(PositCompare, SignAndNaR)
{
    const auto one = posit32::one();
    EXPECT_EQ(decode(-one).value(), -1.0);
    EXPECT_EQ((-one).bits(), 0xC0000000u);
    EXPECT_EQ(compare(posit32::minpos(), posit32::zero()), std::partial_ordering::greater);
    EXPECT_EQ(compare(posit32::nar(), posit32::nar()), std::partial_ordering::unordered);
    EXPECT_EQ(compare(posit32::nar(), one), std::partial_ordering::unordered);
    EXPECT_FALSE(posit32::nar() == posit32::nar());
    EXPECT_EQ(compare(-one, one), std::partial_ordering::less);
    EXPECT_EQ(abs(-one), one);
    EXPECT_EQ(abs(posit32::zero()), posit32::zero());
}

TEST(PositConvert, Binary64)
{
    EXPECT_EQ(posit32{0.5}.to_double(), 0.5);
    EXPECT_EQ(posit32{0.5}.bits(), 0x38000000u);
    EXPECT_TRUE(posit32{std::nan("")}.is_nar());
    EXPECT_TRUE(posit32{std::numeric_limits<double>::infinity()}.is_nar());
    EXPECT_TRUE(std::isnan(posit32::nar().to_double()));
    EXPECT_EQ(posit32{0.0}, posit32::zero());
    EXPECT_EQ(posit32{-0.0}, posit32::zero());
    EXPECT_EQ(posit32{1e300}, posit32::maxpos());
    EXPECT_EQ(posit32{std::numeric_limits<double>::denorm_min()}, posit32::minpos());
    // from_binary64 rounds the binary64 value, not the decimal literal.
    EXPECT_EQ(posit32{0.1}.bits(),
              oracle_round<posit32_config>(to_rational(ExactReal::from_double(0.1))));
}

TEST(PositConvert, Binary32ValuesRoundTripNearOne)
{
    // Within [2^-20, 2^20) posit32 carries at least 23 fraction bits.
    std::mt19937 rng(32);
    std::uniform_int_distribution<int> exp_dist(-20, 19);
    for (int i = 0; i < 200000; ++i) {
        const std::uint32_t mant = rng() & 0x7FFFFFu;
        const int e = exp_dist(rng);
        const std::uint32_t fbits = (static_cast<std::uint32_t>(e + 127) << 23) | mant |
                                    ((rng() & 1u) << 31);
        const float f = std::bit_cast<float>(fbits);
        ASSERT_EQ(static_cast<float>(posit32{static_cast<double>(f)}.to_double()), f);
    }
}

TEST(PositInvariants, UlpOfOne)
{
    EXPECT_EQ(nextup(posit32::one()).to_double() - 1.0, std::ldexp(1.0, -27));
    EXPECT_EQ(nextup(posit16::one()).to_double() - 1.0, std::ldexp(1.0, -(16 - 3 - 2)));
    EXPECT_EQ(nextup(Posit<PositConfig{32, 0}>::one()).to_double() - 1.0, std::ldexp(1.0, -29));
    EXPECT_EQ(posit32_config.fraction_bits_at_one(), 27);
}

TEST(PositFormat, DebugString)
{
    EXPECT_EQ(to_string(posit32::one()), "posit32.2:0x40000000");
    EXPECT_EQ(to_string(posit8::nar()), "posit8.2:0x80");
    EXPECT_EQ(to_string(posit16{-1.0}), "posit16.2:0xC000");
}
