// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "wpli/dsp.hpp"
#include "wpli/rfchain.hpp"
#include "wpli/waveform.hpp"

#include <doctest.h>

#include <cmath>

using namespace wpli;
using namespace wpli::rfchain;

namespace {

ComplexSignal baseband(std::vector<cplx> x, double fs)
{
    ComplexSignal s;
    s.samples = std::move(x);
    s.sample_rate_hz = fs;
    return s;
}

ComplexSignal passband(std::vector<cplx> x, double fs)
{
    auto s = baseband(std::move(x), fs);
    s.domain = SignalDomain::Passband;
    s.carrier_hz = 2.4e9;
    return s;
}

// Half-sine shaped random QPSK at 16 samples per symbol, peak amplitude `amp`.
ComplexSignal qpsk(std::uint64_t seed, std::size_t symbols, double amp)
{
    testkit::Gen g(seed);
    const double T = 1e-6;
    const auto st = waveform::map_symbols(g.bits(2 * symbols), {waveform::Modulation::MPSK, 4}, T);
    waveform::DacModel d;
    d.bits = 24;
    d.full_scale = 4.0;
    d.generation_period_s = T / 16.0;
    d.amplitude = amp;
    const auto u = waveform::shape_and_jitter(st, {}, {}, d);
    return passband(u.samples, 16.0 / T);
}

// OQPSK half-sine chips at 2 Mchip/s sampled at 32 MHz.
ComplexSignal oqpsk(std::uint64_t seed, std::size_t bits, double amp)
{
    testkit::Gen g(seed);
    const auto st = waveform::map_symbols(g.bits(bits), {waveform::Modulation::OQPSK, 4}, 1e-6);
    waveform::DacModel d;
    d.bits = 24;
    d.full_scale = 4.0;
    d.generation_period_s = 1.0 / 32e6;
    d.amplitude = amp;
    return passband(waveform::shape_and_jitter(st, {}, {}, d).samples, 32e6);
}

// Direct odd-order expansion: sum_k a_k C(k, (k+1)/2) / 2^(k-1) |z|^(k-1) z.
std::vector<cplx> expand(const std::vector<cplx>& z, const std::vector<cplx>& odd)
{
    std::vector<cplx> w(z.size());
    for (std::size_t n = 0; n < z.size(); ++n) {
        const double r = std::abs(z[n]);
        for (std::size_t p = 0; p < odd.size(); ++p) {
            const int k = static_cast<int>(2 * p + 1);
            const double binom = std::tgamma(k + 1.0) / (std::tgamma((k + 1) / 2 + 1.0) * std::tgamma((k - 1) / 2 + 1.0));
            w[n] += odd[p] * binom / std::pow(2.0, k - 1) * std::pow(r, k - 1) * z[n];
        }
    }
    return w;
}

// Hann Welch PSD, ascending frequency order.
std::vector<double> welch_oracle(const std::vector<cplx>& x, double fs, std::size_t seg)
{
    std::vector<double> w(seg), acc(seg, 0.0);
    double u = 0.0;
    for (std::size_t i = 0; i < seg; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(seg));
        u += w[i] * w[i];
    }
    std::size_t count = 0;
    for (std::size_t s = 0; s + seg <= x.size(); s += seg / 2, ++count) {
        std::vector<cplx> b(seg);
        for (std::size_t i = 0; i < seg; ++i)
            b[i] = x[s + i] * w[i];
        const auto X = dsp::fft(b);
        for (std::size_t k = 0; k < seg; ++k)
            acc[k] += std::norm(X[k]);
    }
    for (auto& v : acc)
        v /= static_cast<double>(count) * fs * u;
    return dsp::fftshift(acc);
}

double db(double v) { return 10.0 * std::log10(v); }

} // namespace

TEST_CASE("envelope factors")
{
    CHECK(envelope_factor(0) == 1.0);
    CHECK(envelope_factor(1) == doctest::Approx(0.75));
    CHECK(envelope_factor(2) == doctest::Approx(10.0 / 16.0));
    CHECK(envelope_factor(3) == doctest::Approx(35.0 / 64.0));
}

TEST_CASE("ideal mixer matches the textbook real passband")
{
    testkit::Gen g(2);
    const auto y = g.gaussian(256);
    MixerModel m;
    m.carrier_hz = 3e6;
    const auto pb = mix_up(baseband(y, 16e6), m);
    CHECK(pb.samples == y);
    const auto r = real_passband(pb);
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double wt = 2.0 * kPi * 3e6 * static_cast<double>(n) / 16e6;
        CHECK(r[n] == doctest::Approx(y[n].real() * std::cos(wt) - y[n].imag() * std::sin(wt)));
    }
}

TEST_CASE("DC input gives a pure carrier tone")
{
    MixerModel m;
    m.carrier_hz = 4e6;
    const auto r = real_passband(mix_up(baseband(std::vector<cplx>(64, cplx(1.0, 0.0)), 16e6), m));
    std::vector<cplx> rc(r.begin(), r.end());
    const auto X = dsp::fft(rc);
    for (std::size_t k = 0; k < X.size(); ++k) {
        if (k == 16 || k == 48)
            CHECK(std::abs(X[k]) == doctest::Approx(32.0));
        else
            CHECK(std::abs(X[k]) < 1e-9);
    }
}

TEST_CASE("quadrature error image ratio is tan^2(zeta/2)")
{
    const double zeta = 0.2;
    MixerModel m;
    m.quadrature_error = zeta;
    const auto c = mix_up(baseband(std::vector<cplx>(8, cplx(0.0, 1.0)), 1e6), m);
    for (const auto& v : c.samples)
        CHECK(std::abs(v - cplx(0.0, 1.0) * std::polar(1.0, -zeta / 2.0)) < 1e-15);

    const std::size_t N = 128;
    std::vector<cplx> tone(N);
    for (std::size_t n = 0; n < N; ++n)
        tone[n] = std::polar(1.0, 2.0 * kPi * 5.0 * static_cast<double>(n) / N);
    const auto X = dsp::fft(mix_up(baseband(tone, 1e6), m).samples);
    const double ratio = std::norm(X[N - 5]) / std::norm(X[5]);
    CHECK(ratio == doctest::Approx(std::pow(std::tan(zeta / 2.0), 2)).epsilon(1e-10));
}

TEST_CASE("mixer and PA parameter validation")
{
    MixerModel m;
    m.quadrature_error = kPi / 2.0;
    CHECK_THROWS(m.validate());
    PaPowerSeries pa;
    pa.odd = {cplx(0.0, 0.0)};
    CHECK_THROWS(pa.validate());
    pa.odd.assign(6, cplx(1.0, 0.0));
    CHECK_THROWS(pa.validate());
}

TEST_CASE("linear PA is the bandpass of its input")
{
    testkit::Gen g(4);
    const auto x = passband(g.gaussian(512), 16e6);
    const auto out = pa_apply(x, {}, {0.0, 3e6});
    const auto ref = dsp::brickwall(x.samples, 16e6, 0.0, 3e6);
    for (std::size_t n = 0; n < ref.size(); ++n)
        CHECK(std::abs(out.signal.samples[n] - ref[n]) < 1e-12);
    CHECK_FALSE(out.divergence_warning);
}

TEST_CASE("PA envelope matches the direct odd-order expansion")
{
    testkit::Gen g(6);
    for (int t = 0; t < 20; ++t) {
        const auto z = g.gaussian(64, 0.5);
        PaPowerSeries pa;
        pa.odd.resize(static_cast<std::size_t>(g.integer(1, 5)));
        for (auto& a : pa.odd)
            a = cplx(g.uniform(-0.2, 0.2), g.uniform(-0.2, 0.2));
        pa.odd[0] = cplx(1.0, g.uniform(-0.1, 0.1));
        const auto w = pa_envelope(z, pa);
        const auto ref = expand(z, pa.odd);
        for (std::size_t n = 0; n < z.size(); ++n)
            CHECK(std::abs(w[n] - ref[n]) < 1e-12);
    }
}

TEST_CASE("single tone fundamental is A + (3/4) a3 A^3")
{
    const std::size_t N = 256;
    for (double A : {0.2, 0.5, 1.0}) {
        const cplx a3(0.05, -0.02);
        std::vector<cplx> z(N);
        for (std::size_t n = 0; n < N; ++n)
            z[n] = A * std::polar(1.0, 2.0 * kPi * 9.0 * static_cast<double>(n) / N);
        PaPowerSeries pa;
        pa.odd = {cplx(1.0, 0.0), a3};
        const auto X = dsp::fft(pa_apply(passband(z, 1e6), pa, {}).signal.samples);
        CHECK(std::abs(X[9] / static_cast<double>(N) - (A + 0.75 * a3 * A * A * A)) < 1e-12);
    }
}

TEST_CASE("two-tone IM3 amplitude is (3/4) a3 at unit amplitude")
{
    const std::size_t N = 1024;
    std::vector<cplx> z(N);
    for (std::size_t n = 0; n < N; ++n)
        z[n] = std::polar(1.0, 2.0 * kPi * 50.0 * static_cast<double>(n) / N) +
               std::polar(1.0, 2.0 * kPi * 60.0 * static_cast<double>(n) / N);
    const cplx a3(0.03, 0.01);
    PaPowerSeries pa;
    pa.odd = {cplx(1.0, 0.0), a3};
    const auto X = dsp::fft(pa_apply(passband(z, 1e6), pa, {}).signal.samples);
    CHECK(std::abs(X[40] / static_cast<double>(N) - 0.75 * a3) < 1e-12);
    CHECK(std::abs(X[70] / static_cast<double>(N) - 0.75 * a3) < 1e-12);
}

TEST_CASE("divergence warning when higher orders dominate")
{
    PaPowerSeries pa;
    pa.odd = {cplx(1.0, 0.0), cplx(-2.0, 0.0)};
    const auto r = pa_apply(passband(std::vector<cplx>(16, cplx(1.0, 0.0)), 1e6), pa, {});
    CHECK(r.divergence_warning);
    CHECK(r.higher_to_linear_power > 1.0);
}

TEST_CASE("linear series reproduces the input PSD and scales by |a1|^2")
{
    const auto x = qpsk(1, 512, 0.8);
    const auto lin = regrowth_spectrum(x, {}, 256);
    const auto ref = welch_oracle(x.samples, x.sample_rate_hz, 256);
    double peak = 0.0;
    for (double v : ref)
        peak = std::max(peak, v);
    for (std::size_t k = 0; k < ref.size(); ++k)
        CHECK(std::abs(lin.psd[k] - ref[k]) <= 1e-9 * peak);

    PaPowerSeries g;
    g.odd = {cplx(0.6, -0.8) * 1.7};
    const auto scaled = regrowth_spectrum(x, g, 256);
    for (std::size_t k = 0; k < ref.size(); ++k)
        CHECK(scaled.psd[k] == doctest::Approx(lin.psd[k] * 1.7 * 1.7).epsilon(1e-12));

    for (std::size_t k = 1; k < lin.frequencies_hz.size(); ++k)
        REQUIRE(lin.frequencies_hz[k] > lin.frequencies_hz[k - 1]);
}

TEST_CASE("regrowth spectrum is real and non-negative and has all cross terms")
{
    PaPowerSeries pa;
    pa.odd = {cplx(1.0, 0.0), cplx(-0.1, 0.03), cplx(0.02, 0.0)};
    const auto r = regrowth_spectrum(qpsk(9, 256, 0.8), pa, 256);
    CHECK(r.component_terms.size() == 9);
    for (double v : r.psd) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("side lobes gain more from the cubic term than the main lobe")
{
    // the OQPSK envelope is constant until the mixer's quadrature error modulates it
    auto bb = oqpsk(3, 4096, 0.8);
    bb.domain = SignalDomain::Baseband;
    MixerModel mixer;
    mixer.quadrature_error = 0.15;
    const auto x = mix_up(bb, mixer);
    PaPowerSeries pa;
    pa.odd = {cplx(1.0, 0.0), cplx(0.05, -0.02)};
    const auto lin = regrowth_spectrum(x, {}, 512);
    const auto nl = regrowth_spectrum(x, pa, 512);
    double main_l = 0.0, main_n = 0.0, side_l = 0.0, side_n = 0.0;
    for (std::size_t k = 0; k < lin.psd.size(); ++k) {
        const double f = std::abs(lin.frequencies_hz[k]);
        if (f < 0.5e6) {
            main_l += lin.psd[k];
            main_n += nl.psd[k];
        } else if (f > 2.0e6 && f < 6.0e6) {
            side_l += lin.psd[k];
            side_n += nl.psd[k];
        }
    }
    CHECK(db(side_n / side_l) > db(main_n / main_l));
}

TEST_CASE("closed form matches the time-domain PA within 1 dB over the occupied band")
{
    for (int order : {3, 5}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            testkit::Gen g(1000 + seed);
            PaPowerSeries pa;
            pa.odd = {cplx(1.0, 0.0), cplx(g.uniform(-0.15, 0.15), g.uniform(-0.05, 0.05))};
            if (order == 5)
                pa.odd.emplace_back(g.uniform(-0.04, 0.04), g.uniform(-0.02, 0.02));
            const auto x = qpsk(seed, 1024, 0.8);
            const auto cf = regrowth_spectrum(x, pa, 256);
            const auto td = welch_oracle(expand(x.samples, pa.odd), x.sample_rate_hz, 256);
            double peak = 0.0;
            for (double v : td)
                peak = std::max(peak, v);
            for (std::size_t k = 0; k < td.size(); ++k)
                if (td[k] > peak * 1e-4)
                    CHECK(std::abs(db(cf.psd[k]) - db(td[k])) < 1.0);
        }
    }
}

TEST_CASE("real passband spectrum is conjugate symmetric")
{
    const auto x = qpsk(5, 64, 0.8);
    auto pb = x;
    pb.carrier_hz = 3e6;
    const auto r = real_passband(pb);
    const auto X = dsp::fft(std::vector<cplx>(r.begin(), r.end()));
    const std::size_t N = X.size();
    for (std::size_t k = 1; k < N; ++k)
        CHECK(std::abs(std::norm(X[k]) - std::norm(X[N - k])) <= 1e-9 * std::max(1.0, std::norm(X[k])));
}

TEST_CASE("fit recovers a3 from its own regrowth spectrum")
{
    const auto x = qpsk(11, 1024, 0.8);
    PaPowerSeries pa;
    pa.odd = {cplx(1.0, 0.0), cplx(0.05, -0.02)};
    const auto measured = regrowth_spectrum(x, pa, 256).psd;
    const auto fit = fit_pa_coefficients(measured, x, 3);
    REQUIRE(fit.pa.odd.size() == 2);
    CHECK(std::abs(fit.pa.odd[1] - pa.odd[1]) / std::abs(pa.odd[1]) < 0.05);
    CHECK(fit.pa.odd[0].imag() == 0.0);
    CHECK(fit.pa.odd[0].real() > 0.0);
}

TEST_CASE("fit of a linear PSD finds a negligible cubic term")
{
    const auto x = qpsk(12, 1024, 0.8);
    const auto fit = fit_pa_coefficients(regrowth_spectrum(x, {}, 256).psd, x, 3);
    CHECK(std::abs(fit.pa.odd[1]) < 1e-3 * std::abs(fit.pa.odd[0]));
}

TEST_CASE("two device fits differ and reproduce their PSD gap")
{
    const auto x = qpsk(13, 1024, 0.8);
    PaPowerSeries p1, p2;
    p1.odd = {cplx(1.0, 0.0), cplx(-0.10, 0.02)};
    p2.odd = {cplx(1.0, 0.0), cplx(-0.16, -0.04)};
    const auto m1 = regrowth_spectrum(x, p1, 256).psd;
    const auto m2 = regrowth_spectrum(x, p2, 256).psd;
    const auto f1 = fit_pa_coefficients(m1, x, 3);
    const auto f2 = fit_pa_coefficients(m2, x, 3);
    CHECK(std::abs(f1.pa.odd[1] - f2.pa.odd[1]) > 0.01);
    const auto r1 = regrowth_spectrum(x, f1.pa, 256).psd;
    const auto r2 = regrowth_spectrum(x, f2.pa, 256).psd;
    double peak = 0.0;
    for (double v : m1)
        peak = std::max(peak, v);
    for (std::size_t k = 0; k < m1.size(); ++k)
        if (m1[k] > 1e-4 * peak && m2[k] > 1e-4 * peak)
            CHECK(std::abs((db(r1[k]) - db(r2[k])) - (db(m1[k]) - db(m2[k]))) < 1.0);
}

TEST_CASE("fit rejects bad inputs")
{
    const auto x = qpsk(14, 64, 0.8);
    CHECK_THROWS(fit_pa_coefficients(std::vector<double>(256, 1.0), x, 4));
    std::vector<double> bad(256, 1.0);
    bad[3] = -1.0;
    CHECK_THROWS_AS(fit_pa_coefficients(bad, x, 3), DataError);
}
