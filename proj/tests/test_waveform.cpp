// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "wpli/dsp.hpp"
#include "wpli/waveform.hpp"

#include <doctest.h>

#include <cmath>

using namespace wpli;
using namespace wpli::waveform;

namespace {

constexpr double kT = 1e-6;

DacModel fine_dac(double Tg)
{
    DacModel d;
    d.bits = 24;
    d.full_scale = 4.0;
    d.generation_period_s = Tg;
    return d;
}

std::vector<std::uint8_t> bits_of(unsigned v, int k)
{
    std::vector<std::uint8_t> b(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((v >> (k - 1 - i)) & 1u);
    return b;
}

// Welch PSD of half-sine shaped random QPSK, averaged over several realizations.
std::vector<double> shaped_psd(const ShapingFilter& f, std::size_t segment, double& fs)
{
    const double Tg = kT / 16.0;
    fs = 1.0 / Tg;
    std::vector<double> acc;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
        testkit::Gen g(100 + static_cast<std::uint64_t>(r));
        const auto stream = map_symbols(g.bits(2 * 65536), {Modulation::MPSK, 4}, kT);
        const auto u = shape_and_jitter(stream, f, {}, fine_dac(Tg));
        const auto p = dsp::welch_psd(u.samples, fs, segment);
        if (acc.empty())
            acc.assign(p.size(), 0.0);
        for (std::size_t k = 0; k < p.size(); ++k)
            acc[k] += p[k] / reps;
    }
    return acc;
}

} // namespace

TEST_CASE("PSK points")
{
    CHECK(std::abs(psk_point(1, 4) - std::polar(1.0, kPi / 4.0)) < 1e-15);
    CHECK(std::abs(psk_point(0, 4) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("M-PSK symbols lie on the unit circle")
{
    testkit::Gen g(1);
    for (int M : {2, 4, 8, 16, 32}) {
        const int k = static_cast<int>(std::log2(M));
        const auto s = map_symbols(g.bits(static_cast<std::size_t>(k) * 200), {Modulation::MPSK, M}, kT);
        CHECK(s.symbols.size() == 200);
        for (const auto& x : s.symbols)
            CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
    }
}

TEST_CASE("16-QAM has unit average power over the full constellation")
{
    double p = 0.0;
    for (unsigned v = 0; v < 16; ++v) {
        const auto s = map_symbols(bits_of(v, 4), {Modulation::MQAM, 16}, kT);
        REQUIRE(s.symbols.size() == 1);
        p += std::norm(s.symbols[0]) / 16.0;
    }
    CHECK(std::abs(p - 1.0) < 1e-12);
}

TEST_CASE("mapping errors")
{
    CHECK_THROWS(map_symbols({1, 0, 1}, {Modulation::MPSK, 4}, kT));
    CHECK_THROWS(map_symbols({1, 0}, {Modulation::MPSK, 6}, kT));
    CHECK_THROWS(map_symbols({}, {Modulation::MPSK, 4}, kT));
    CHECK_THROWS(map_symbols({1, 0, 1, 0, 1, 0, 1, 0}, {Modulation::MQAM, 8}, kT));
}

TEST_CASE("OQPSK interleaves I and Q chips at half the symbol period")
{
    const auto s = map_symbols({1, 0, 0, 1}, {Modulation::OQPSK, 4}, 1e-6);
    CHECK(s.symbol_period_s == doctest::Approx(0.5e-6));
    CHECK(s.symbols[0] == cplx(1.0, 0.0));
    CHECK(s.symbols[1] == cplx(0.0, -1.0));
    CHECK(s.symbols[2] == cplx(-1.0, 0.0));
    CHECK(s.symbols[3] == cplx(0.0, 1.0));
}

TEST_CASE("single half-sine symbol traces A sin(pi t / 2T) and peaks at T")
{
    const double Tg = kT / 16.0;
    SymbolStream st;
    st.symbols = {psk_point(1, 4)};
    st.symbol_period_s = kT;
    auto dac = fine_dac(Tg);
    dac.amplitude = 0.7;
    const auto u = shape_and_jitter(st, {}, {}, dac);
    REQUIRE(u.samples.size() == 32);
    std::size_t peak = 0;
    for (std::size_t n = 0; n < u.samples.size(); ++n) {
        const double t = static_cast<double>(n) * Tg;
        CHECK(std::abs(u.samples[n] - 0.7 * psk_point(1, 4) * std::sin(kPi * t / (2.0 * kT))) < 1e-14);
        if (std::abs(u.samples[n]) > std::abs(u.samples[peak]))
            peak = n;
    }
    CHECK(peak == 16);
}

TEST_CASE("second identical symbol is a T-shifted copy")
{
    const double Tg = kT / 16.0;
    SymbolStream one;
    one.symbols = {cplx(1.0, 0.0)};
    one.symbol_period_s = kT;
    SymbolStream two = one;
    two.symbols.push_back(cplx(1.0, 0.0));
    const auto u1 = shape_and_jitter(one, {}, {}, fine_dac(Tg));
    const auto u2 = shape_and_jitter(two, {}, {}, fine_dac(Tg));
    REQUIRE(u2.samples.size() == u1.samples.size() + 16);
    for (std::size_t n = 0; n < u2.samples.size(); ++n) {
        const cplx first = n < u1.samples.size() ? u1.samples[n] : cplx(0.0, 0.0);
        const cplx second = n >= 16 ? u1.samples[n - 16] : cplx(0.0, 0.0);
        CHECK(std::abs(u2.samples[n] - first - second) < 1e-15);
    }
}

TEST_CASE("RRC removable singularities return the analytic limit")
{
    for (double beta : {0.25, 0.5, 1.0}) {
        const double ts = kT / (4.0 * beta);
        const double v = rrc(ts, kT, beta);
        CHECK(std::isfinite(v));
        for (double eps : {1e-5, 1e-6}) {
            const double left = rrc(ts - eps * kT, kT, beta);
            const double right = rrc(ts + eps * kT, kT, beta);
            CHECK(std::abs(v - left) < 1e-4);
            CHECK(std::abs(v - right) < 1e-4);
        }
        CHECK(rrc(-ts, kT, beta) == doctest::Approx(v));
        const double z = rrc(0.0, kT, beta);
        CHECK(z == doctest::Approx(1.0 - beta + 4.0 * beta / kPi));
        CHECK(std::abs(z - rrc(1e-7 * kT, kT, beta)) < 1e-6);
    }
}

TEST_CASE("generation period must be at most T/8")
{
    SymbolStream st;
    st.symbols = {cplx(1.0, 0.0)};
    st.symbol_period_s = kT;
    CHECK_THROWS(shape_and_jitter(st, {}, {}, fine_dac(kT / 4.0)));
    CHECK_NOTHROW(shape_and_jitter(st, {}, {}, fine_dac(kT / 8.0)));
}

TEST_CASE("non-positive realized periods are rejected")
{
    CHECK_THROWS_AS(realize_periods(1000, kT, {kT, 3}), NumericalError);
    CHECK_THROWS(realize_periods(4, kT, {-1.0, 3}));
}

TEST_CASE("jittered shaping is deterministic per seed")
{
    testkit::Gen g(8);
    const auto st = map_symbols(g.bits(256), {Modulation::OQPSK, 4}, kT);
    const auto a = shape_and_jitter(st, {}, {5e-9, 42}, fine_dac(kT / 32.0));
    const auto b = shape_and_jitter(st, {}, {5e-9, 42}, fine_dac(kT / 32.0));
    const auto c = shape_and_jitter(st, {}, {5e-9, 43}, fine_dac(kT / 32.0));
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("quantizer error bound and brute-force table")
{
    CHECK(std::abs(quantize(0.3, 4, 1.0) - 0.3) <= 0.0625);
    testkit::Gen g(17);
    for (int t = 0; t < 500; ++t) {
        const int bits = g.integer(1, 16);
        const double U = g.uniform(0.1, 5.0);
        const double v = g.uniform(-U, U * (1.0 - 1e-12));
        const double q = quantize(v, bits, U);
        CHECK(std::abs(q - v) <= std::ldexp(U, -bits) * (1.0 + 1e-12));
        if (bits <= 10) {
            const int levels = 1 << bits;
            const double step = 2.0 * U / levels;
            double best = 0.0;
            double best_err = 1e300;
            for (int k = -levels / 2; k < levels / 2; ++k) {
                const double lv = (k + 0.5) * step;
                if (std::abs(lv - v) < best_err) {
                    best_err = std::abs(lv - v);
                    best = lv;
                }
            }
            CHECK(q == doctest::Approx(best).epsilon(1e-12));
        }
    }
}

TEST_CASE("24-bit DAC reproduces the held input")
{
    testkit::Gen g(3);
    ShapedSequence u;
    u.period_s = 1e-8;
    for (int n = 0; n < 200; ++n)
        u.samples.emplace_back(g.uniform(-0.9, 0.9), g.uniform(-0.9, 0.9));
    DacModel d;
    d.bits = 24;
    d.full_scale = 1.0;
    d.hold_factor = 4;
    const auto out = dac_convert(u, d);
    REQUIRE(out.samples.size() == 800);
    CHECK(out.sample_rate_hz == doctest::Approx(4e8));
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        CHECK(std::abs(out.samples[n].real() - u.samples[n / 4].real()) <= std::ldexp(1.0, -24));
        CHECK(std::abs(out.samples[n].imag() - u.samples[n / 4].imag()) <= std::ldexp(1.0, -24));
    }
}

TEST_CASE("constant DAC input gives a constant staircase")
{
    ShapedSequence u;
    u.period_s = 1e-8;
    u.samples.assign(50, cplx(0.3, -0.41));
    DacModel d;
    d.bits = 6;
    d.full_scale = 1.0;
    const auto out = dac_convert(u, d);
    for (const auto& s : out.samples) {
        CHECK(s == out.samples.front());
        CHECK(std::abs(s.real() - 0.3) <= std::ldexp(1.0, -6));
        CHECK(std::abs(s.imag() + 0.41) <= std::ldexp(1.0, -6));
    }
}

TEST_CASE("DAC clipping and INL table length are errors")
{
    ShapedSequence u;
    u.period_s = 1e-8;
    u.samples = {cplx(0.5, 0.0), cplx(1.2, 0.0)};
    DacModel d;
    d.bits = 4;
    CHECK_THROWS_AS(dac_convert(u, d), DataError);
    u.samples = {cplx(0.5, 0.0)};
    d.inl.assign(15, 0.0);
    CHECK_THROWS(dac_convert(u, d));
    d.inl.assign(16, 0.0);
    d.inl[static_cast<std::size_t>(12)] = 0.01;
    int code = 0;
    quantize(0.5, 4, 1.0, &code);
    CHECK(code == 12);
    CHECK(dac_convert(u, d).samples[0].real() == doctest::Approx(quantize(0.5, 4, 1.0) + 0.01));
}

TEST_CASE("half-sine PSD matches the analytic pulse spectrum over the main lobe")
{
    double fs = 0.0;
    const std::size_t seg = 512;
    const auto psd = shaped_psd({}, seg, fs);
    const auto freqs = dsp::fft_frequencies(seg, fs);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < seg; ++k) {
        const double f = freqs[k];
        if (std::abs(f) >= 0.75 / kT)
            continue;
        // |P(f)| = (4T/pi) |cos(2 pi f T)| / |1 - 16 f^2 T^2|, removable at |f| = 1/(4T)
        const double x = 4.0 * f * kT;
        const double shape = std::abs(1.0 - x * x) < 1e-9 ? kPi / 4.0 : std::cos(kPi * x / 2.0) / (1.0 - x * x);
        const double P = 4.0 * kT / kPi * shape;
        const double analytic = P * P / kT;
        num += (psd[k] - analytic) * (psd[k] - analytic);
        den += analytic * analytic;
    }
    CHECK(std::sqrt(num / den) < 0.01);
}

TEST_CASE("half-sine leaks more power outside the symbol rate than RRC")
{
    double fs = 0.0;
    const std::size_t seg = 512;
    ShapingFilter rrc_f;
    rrc_f.kind = PulseShape::RootRaisedCosine;
    rrc_f.rolloff = 0.5;
    rrc_f.span_symbols = 16;
    const auto hs = shaped_psd({}, seg, fs);
    const auto rc = shaped_psd(rrc_f, seg, fs);
    const auto freqs = dsp::fft_frequencies(seg, fs);
    auto outside = [&](const std::vector<double>& p) {
        double in = 0.0, out = 0.0;
        for (std::size_t k = 0; k < seg; ++k)
            (std::abs(freqs[k]) > 1.0 / kT ? out : in) += p[k];
        return out / (in + out);
    };
    CHECK(outside(hs) > outside(rc));
}

TEST_CASE("preamble and PRBS helpers")
{
    CHECK(default_preamble_bits().size() == 256);
    CHECK(zero_symbol_chips().size() == 32);
    const auto p = prbs_bits(2 * 32767);
    for (std::size_t i = 0; i < 32767; ++i)
        REQUIRE(p[i] == p[i + 32767]);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < 32767; ++i)
        ones += p[i];
    CHECK(ones == 16384);
}

TEST_CASE("scheme and pulse names round trip")
{
    for (const auto& n : {"oqpsk", "mpsk8", "mqam16"})
        CHECK(scheme_name(parse_scheme(n)) == n);
    CHECK_THROWS(parse_scheme("mpskx"));
    CHECK(pulse_name(parse_pulse("rrc")) == "rrc");
    CHECK_THROWS(parse_pulse("gauss"));
}
