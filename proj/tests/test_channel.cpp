// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"
#include "wpli/channel.hpp"
#include "wpli/dsp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace wpli;
using namespace wpli::channel;

namespace {

FadingModel make(FadingKind k, double omega = 1.0, double m = 1.0, double K = 0.0)
{
    FadingModel f;
    f.kind = k;
    f.omega = omega;
    f.m = m;
    f.K = K;
    return f;
}

double rayleigh_ref(double a, double omega) { return 2.0 * a / omega * std::exp(-a * a / omega); }

double nakagami_ref(double a, double omega, double m)
{
    return 2.0 * std::exp(m * std::log(m / omega) + (2.0 * m - 1.0) * std::log(a) - m * a * a / omega -
                          std::lgamma(m));
}

double rician_ref(double a, double omega, double K)
{
    return 2.0 * (K + 1.0) * a / omega * std::exp(-K - (K + 1.0) * a * a / omega) *
           testkit::bessel_i0_ref(2.0 * a * std::sqrt(K * (K + 1.0) / omega));
}

ComplexSignal signal_of(std::vector<cplx> x, double fs)
{
    ComplexSignal s;
    s.samples = std::move(x);
    s.sample_rate_hz = fs;
    return s;
}

std::vector<double> draws(const FadingModel& f, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v)
        x = fading_sample(f, rng);
    return v;
}

double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

} // namespace

TEST_CASE("path loss values")
{
    PathLossModel m;
    m.ref_loss_db = -40.0;
    m.ref_distance_m = 1.0;
    m.exponent = 2.0;
    CHECK(path_loss_db(1.0, m) == doctest::Approx(-40.0));
    CHECK(path_loss_db(10.0, m) == doctest::Approx(-60.0));
    m.exponent = 3.5;
    m.ref_distance_m = 0.5;
    CHECK(path_loss_db(1.0, m) == doctest::Approx(-40.0 - 35.0 * std::log10(2.0)));
    CHECK(path_loss_db(1.0, m) - m.ref_loss_db == doctest::Approx(-10.536).epsilon(1e-4));
    CHECK_THROWS(path_loss_db(0.0, m));
    CHECK_THROWS(path_loss_db(-1.0, m));
}

TEST_CASE("path loss shadowing")
{
    PathLossModel m;
    Rng rng(1);
    CHECK(path_loss_db(3.0, m, rng) == path_loss_db(3.0, m));
    m.shadowing_sigma_db = 4.0;
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = path_loss_db(3.0, m, rng) - path_loss_db(3.0, m);
        s += v;
        s2 += v * v;
    }
    CHECK(std::abs(s / n) < 0.1);
    CHECK(std::sqrt(s2 / n) == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("fading densities against independent formulas")
{
    CHECK(*fading_pdf(1.0, make(FadingKind::Rayleigh)) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(*fading_pdf(1.0, make(FadingKind::Rayleigh)) == doctest::Approx(0.735759).epsilon(1e-6));
    CHECK_FALSE(fading_pdf(1.0, make(FadingKind::AWGN)).has_value());
    testkit::Gen g(7);
    for (int t = 0; t < 200; ++t) {
        const double a = g.uniform(0.0, 3.0);
        const double omega = g.uniform(0.2, 3.0);
        const double m = g.uniform(0.5, 10.0);
        const double K = g.uniform(0.0, 15.0);
        CHECK(*fading_pdf(a, make(FadingKind::Rayleigh, omega)) == doctest::Approx(rayleigh_ref(a, omega)).epsilon(1e-12));
        if (a > 0.0)
            CHECK(*fading_pdf(a, make(FadingKind::Nakagami, omega, m)) ==
                  doctest::Approx(nakagami_ref(a, omega, m)).epsilon(1e-11));
        CHECK(*fading_pdf(a, make(FadingKind::Rician, omega, 1.0, K)) ==
              doctest::Approx(rician_ref(a, omega, K)).epsilon(1e-10));
    }
}

TEST_CASE("Rician K=0 and Nakagami m=1 collapse to Rayleigh")
{
    for (double a : testkit::linspace(0.0, 4.0, 41)) {
        const double r = *fading_pdf(a, make(FadingKind::Rayleigh, 1.3));
        CHECK(std::abs(*fading_pdf(a, make(FadingKind::Rician, 1.3, 1.0, 0.0)) - r) < 1e-12);
        CHECK(std::abs(*fading_pdf(a, make(FadingKind::Nakagami, 1.3, 1.0)) - r) < 1e-12);
    }
}

TEST_CASE("densities integrate to one")
{
    for (double omega : {0.5, 1.0, 2.5})
        for (const auto& f : {make(FadingKind::Rayleigh, omega), make(FadingKind::Nakagami, omega, 0.7),
                              make(FadingKind::Nakagami, omega, 4.0), make(FadingKind::Rician, omega, 1.0, 6.0)}) {
            const double I = testkit::integrate([&](double a) { return *fading_pdf(a, f); }, 0.0,
                                                12.0 * std::sqrt(omega));
            CHECK(std::abs(I - 1.0) < 1e-6);
        }
}

TEST_CASE("sampler moments")
{
    const auto r = draws(make(FadingKind::Rayleigh, 2.0), 1000000, 1);
    double ms = 0.0;
    for (double v : r)
        ms += v * v / static_cast<double>(r.size());
    CHECK(std::abs(ms - 2.0) < 0.02);

    const auto n = draws(make(FadingKind::Nakagami, 1.0, 50.0), 100000, 2);
    double mean = 0.0, sq = 0.0;
    for (double v : n) {
        mean += v / static_cast<double>(n.size());
        sq += v * v / static_cast<double>(n.size());
    }
    CHECK(std::sqrt(sq - mean * mean) / mean < 0.08);

    for (std::uint64_t s = 0; s < 10; ++s)
        CHECK(fading_sample(make(FadingKind::AWGN), s) == 1.0);
    CHECK(fading_sample(make(FadingKind::Rician, 1.0, 1.0, 3.0), 99) ==
          fading_sample(make(FadingKind::Rician, 1.0, 1.0, 3.0), 99));
}

TEST_CASE("Rician K=0 and Nakagami m=1 samplers are distribution-equal to Rayleigh")
{
    const std::size_t n = 100000;
    const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n)); // two-sample KS, alpha = 0.01
    const auto ray = draws(make(FadingKind::Rayleigh), n, 10);
    CHECK(ks_statistic(ray, draws(make(FadingKind::Rician, 1.0, 1.0, 0.0), n, 11)) < crit);
    CHECK(ks_statistic(ray, draws(make(FadingKind::Nakagami, 1.0, 1.0), n, 12)) < crit);
    CHECK(ks_statistic(ray, draws(make(FadingKind::Nakagami, 1.0, 2.0), n, 13)) > crit);
}

TEST_CASE("fading model validation")
{
    CHECK_THROWS(make(FadingKind::Rayleigh, 0.0).validate());
    CHECK_THROWS(make(FadingKind::Nakagami, 1.0, 0.4).validate());
    CHECK_THROWS(make(FadingKind::Rician, 1.0, 1.0, -1.0).validate());
    for (const auto& n : {"awgn", "rayleigh", "rician", "nakagami"})
        CHECK(fading_name(parse_fading(n)) == n);
}

TEST_CASE("single zero-delay unit path is the identity")
{
    testkit::Gen g(5);
    const auto w = signal_of(g.gaussian(300), 8e6);
    const auto out = polarize_and_raytrace(w, {}, {}, {RayPath{}}, {});
    CHECK(out.samples == w.samples);

    NoiseModel nm;
    nm.psd_dbm_per_hz = -100.0;
    nm.seed = 3;
    const auto noisy = polarize_and_raytrace(w, {}, {}, {RayPath{}}, nm);
    double p = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n)
        p += std::norm(noisy.samples[n] - w.samples[n]) / static_cast<double>(w.size());
    CHECK(p == doctest::Approx(nm.variance(8e6)).epsilon(0.2));
}

TEST_CASE("cross-polarized antennas see no signal")
{
    AntennaModel h;
    h.h_gain = 1.0;
    h.v_gain = 0.0;
    const auto w = signal_of(std::vector<cplx>(16, cplx(1.0, 0.0)), 1e6);
    const auto out = polarize_and_raytrace(w, h, {}, {RayPath{}}, {});
    for (const auto& s : out.samples)
        CHECK(std::abs(s) == 0.0);
}

TEST_CASE("delayed path peaks the cross-correlation at its lag")
{
    testkit::Gen g(6);
    const auto w = signal_of(g.gaussian(512), 1e6);
    for (double d : {7.0, 7.4, 19.0}) {
        RayPath p;
        p.delay_s = d / 1e6;
        const auto out = polarize_and_raytrace(w, {}, {}, {p}, {});
        std::size_t best = 0;
        double best_v = -1.0;
        for (std::size_t lag = 0; lag < 40; ++lag) {
            cplx acc(0.0, 0.0);
            for (std::size_t n = 0; n < w.size(); ++n)
                acc += out.samples[n + lag] * std::conj(w.samples[n]);
            if (std::abs(acc) > best_v) {
                best_v = std::abs(acc);
                best = lag;
            }
        }
        CHECK(best == static_cast<std::size_t>(std::llround(d)));
    }
}

TEST_CASE("two equal rays give the analytic comb response")
{
    const std::size_t N = 256;
    const double fs = 1e6;
    const double tau_samples = 4.0;
    std::vector<cplx> impulse(N - 4, cplx(0.0, 0.0));
    impulse[0] = 1.0;
    RayPath p0, p1;
    p1.delay_s = tau_samples / fs;
    const auto out = polarize_and_raytrace(signal_of(impulse, fs), {}, {}, {p0, p1}, {});
    REQUIRE(out.size() == N);
    const auto H = dsp::fft(out.samples);
    const auto freqs = dsp::fft_frequencies(N, fs);
    for (std::size_t k = 0; k < N; ++k) {
        const double expect = std::abs(cplx(1.0, 0.0) + std::polar(1.0, -2.0 * kPi * freqs[k] * tau_samples / fs));
        CHECK(std::abs(std::abs(H[k]) - expect) < 1e-12);
    }
    // nulls at (2k+1) / (2 tau): bins 32, 96, ...
    CHECK(std::abs(H[32]) < 1e-12);
    CHECK(std::abs(H[96]) < 1e-12);
}

TEST_CASE("fractional delay of a band-limited tone")
{
    const std::size_t N = 400;
    std::vector<cplx> x(N);
    const double f = 0.05;
    for (std::size_t n = 0; n < N; ++n)
        x[n] = std::polar(1.0, 2.0 * kPi * f * static_cast<double>(n));
    const auto y = fractional_delay(x, 3.3, N);
    for (std::size_t n = 60; n < N - 60; ++n)
        CHECK(std::abs(y[n] - std::polar(1.0, 2.0 * kPi * f * (static_cast<double>(n) - 3.3))) < 1e-3);
    CHECK_THROWS(fractional_delay(x, -1.0, N));
}

TEST_CASE("statistical channel without noise")
{
    testkit::Gen g(9);
    const auto w = signal_of(g.gaussian(128), 8e6);
    PathLossModel pl;
    const auto same = apply_statistical_channel(w, 1.0, pl, make(FadingKind::AWGN), {}, 4);
    CHECK(same.samples == w.samples);

    double alpha = 0.0;
    const auto faded = apply_statistical_channel(w, 1.0, pl, make(FadingKind::Rayleigh), {}, 4, &alpha);
    CHECK(alpha > 0.0);
    for (std::size_t n = 0; n < w.size(); ++n)
        CHECK(std::abs(faded.samples[n] - alpha * w.samples[n]) < 1e-14);

    pl.exponent = 2.0;
    const auto far = apply_statistical_channel(w, 10.0, pl, make(FadingKind::AWGN), {}, 4);
    CHECK(far.mean_power() == doctest::Approx(w.mean_power() * 0.01).epsilon(1e-12));
}

TEST_CASE("side-lobe to noise margin shrinks with distance")
{
    // broadband test waveform with a known roll-off
    testkit::Gen g(12);
    std::vector<cplx> x(8192);
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = g.gaussian(1)[0];
    const auto shaped = dsp::brickwall(x, 8e6, 0.0, 1.5e6);
    std::vector<cplx> w(shaped.size());
    for (std::size_t n = 0; n < w.size(); ++n)
        w[n] = shaped[n] + 0.01 * x[n];
    PathLossModel pl;
    pl.exponent = 1.2850972089384953;
    NoiseModel nm;
    nm.psd_dbm_per_hz = -110.0;
    auto margin = [&](double d) {
        double acc = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) {
            nm.seed = s;
            const auto r = apply_statistical_channel(signal_of(w, 8e6), d, pl, make(FadingKind::Rayleigh), nm, s);
            const auto psd = dsp::welch_psd(r.samples, 8e6, 256);
            const auto f = dsp::fft_frequencies(256, 8e6);
            double side = 0.0;
            int cnt = 0;
            for (std::size_t k = 0; k < psd.size(); ++k)
                if (std::abs(f[k]) > 2.5e6) {
                    side += psd[k];
                    ++cnt;
                }
            acc += 10.0 * std::log10(side / cnt / (nm.variance(8e6) / 8e6));
        }
        return acc / 20.0;
    };
    CHECK(margin(6.0) < margin(0.1));
}

TEST_CASE("noise variance follows the density")
{
    NoiseModel nm;
    CHECK_FALSE(nm.enabled());
    CHECK(nm.variance(1e6) == 0.0);
    nm.psd_dbm_per_hz = -174.0;
    CHECK(nm.variance(2e6) == doctest::Approx(std::pow(10.0, -20.4) * 2e6));
}
