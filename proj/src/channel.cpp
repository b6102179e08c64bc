// SPDX-License-Identifier: Apache-2.0

#include "wpli/channel.hpp"

#include "wpli/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wpli::channel {

void AntennaModel::validate() const
{
    if (!(h_gain * h_gain + v_gain * v_gain > 0.0))
        throw std::invalid_argument("antenna must have nonzero gain in at least one polarization");
}

void RayPath::validate() const
{
    if (!(delay_s >= 0.0))
        throw std::invalid_argument("ray delay must be non-negative");
    if (std::abs(h_loss) > 1.0 + 1e-12 || std::abs(v_loss) > 1.0 + 1e-12)
        throw std::invalid_argument("ray gain magnitude must not exceed 1");
}

void FadingModel::validate() const
{
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("fading mean-square power must be positive");
    if (kind == FadingKind::Nakagami && !(m >= 0.5))
        throw std::invalid_argument("Nakagami m must be >= 1/2");
    if (kind == FadingKind::Rician && !(K >= 0.0))
        throw std::invalid_argument("Rician K must be >= 0");
}

void PathLossModel::validate() const
{
    if (!(ref_distance_m > 0.0))
        throw std::invalid_argument("reference distance must be positive");
    if (!(exponent >= 0.0))
        throw std::invalid_argument("path-loss exponent must be non-negative");
    if (!(shadowing_sigma_db >= 0.0))
        throw std::invalid_argument("shadowing sigma must be non-negative");
}

double NoiseModel::variance(double sample_rate_hz) const
{
    if (!enabled())
        return 0.0;
    const double n0 = std::pow(10.0, (psd_dbm_per_hz - 30.0) / 10.0);
    return n0 * sample_rate_hz;
}

std::vector<cplx> fractional_delay(const std::vector<cplx>& x, double delay_samples, std::size_t out_len, int taps)
{
    if (delay_samples < 0.0)
        throw std::invalid_argument("delay must be non-negative");
    if (taps < 2 || taps % 2 != 0)
        throw std::invalid_argument("interpolator length must be even");
    std::vector<cplx> y(out_len, cplx(0.0, 0.0));
    const double whole = std::floor(delay_samples);
    const double frac = delay_samples - whole;
    const auto D = static_cast<long>(whole);
    const auto len = static_cast<long>(x.size());

    if (frac < 1e-12) {
        for (long n = D; n < static_cast<long>(out_len) && n - D < len; ++n)
            y[static_cast<std::size_t>(n)] = x[static_cast<std::size_t>(n - D)];
        return y;
    }

    const int half = taps / 2;
    std::vector<double> h(static_cast<std::size_t>(taps));
    for (int i = 0; i < taps; ++i) {
        const double k = static_cast<double>(i - half + 1); // -half+1 .. half
        const double t = k - frac;
        const double sinc = std::sin(kPi * t) / (kPi * t);
        const double w = 0.42 + 0.5 * std::cos(kPi * t / half) + 0.08 * std::cos(2.0 * kPi * t / half);
        h[static_cast<std::size_t>(i)] = sinc * w;
    }
    for (long n = 0; n < static_cast<long>(out_len); ++n) {
        cplx acc(0.0, 0.0);
        for (int i = 0; i < taps; ++i) {
            const long m = n - D - (i - half + 1);
            if (m >= 0 && m < len)
                acc += x[static_cast<std::size_t>(m)] * h[static_cast<std::size_t>(i)];
        }
        y[static_cast<std::size_t>(n)] = acc;
    }
    return y;
}

ComplexSignal polarize_and_raytrace(const ComplexSignal& w, const AntennaModel& tx, const AntennaModel& rx,
                                    const std::vector<RayPath>& paths, const NoiseModel& noise)
{
    w.validate();
    tx.validate();
    rx.validate();
    if (paths.empty())
        throw std::invalid_argument("ray trace requires at least one path");
    double max_delay = 0.0;
    for (const auto& p : paths) {
        p.validate();
        max_delay = std::max(max_delay, p.delay_s);
    }
    const double fs = w.sample_rate_hz;
    const auto extra = static_cast<std::size_t>(std::ceil(max_delay * fs - 1e-9));

    ComplexSignal out = w;
    out.samples.assign(w.size() + extra, cplx(0.0, 0.0));

    const cplx ph = tx.h_gain * std::polar(1.0, -tx.h_phase) * rx.h_gain * std::polar(1.0, rx.h_phase);
    const cplx pv = tx.v_gain * std::polar(1.0, -tx.v_phase) * rx.v_gain * std::polar(1.0, rx.v_phase);
    for (const auto& p : paths) {
        const cplx carrier = std::polar(1.0, -2.0 * kPi * w.carrier_hz * p.delay_s);
        const cplx g = carrier * (ph * p.h_loss + pv * p.v_loss);
        const auto delayed = fractional_delay(w.samples, p.delay_s * fs, out.size());
        for (std::size_t n = 0; n < out.size(); ++n)
            out.samples[n] += g * delayed[n];
    }
    if (noise.enabled()) {
        Rng rng(noise.seed);
        add_complex_noise(out.samples, noise.variance(fs), rng);
    }
    return out;
}

double path_loss_db(double d, const PathLossModel& model)
{
    model.validate();
    if (!(d > 0.0))
        throw std::invalid_argument("distance must be positive");
    return model.ref_loss_db - 10.0 * model.exponent * std::log10(d / model.ref_distance_m);
}

double path_loss_db(double d, const PathLossModel& model, Rng& rng)
{
    double pl = path_loss_db(d, model);
    if (model.shadowing_sigma_db > 0.0)
        pl += std::normal_distribution<double>(0.0, model.shadowing_sigma_db)(rng);
    return pl;
}

std::optional<double> fading_pdf(double alpha, const FadingModel& model)
{
    model.validate();
    if (!(alpha >= 0.0))
        throw std::invalid_argument("fading amplitude must be non-negative");
    const double W = model.omega;
    switch (model.kind) {
    case FadingKind::AWGN:
        return std::nullopt;
    case FadingKind::Rayleigh:
        return 2.0 * alpha / W * std::exp(-alpha * alpha / W);
    case FadingKind::Nakagami: {
        if (alpha == 0.0)
            return model.m == 0.5 ? std::sqrt(2.0 / (kPi * W)) : 0.0;
        const double m = model.m;
        const double l = std::log(2.0) + m * std::log(m) + (2.0 * m - 1.0) * std::log(alpha) - std::lgamma(m) -
                         m * std::log(W) - m * alpha * alpha / W;
        return std::exp(l);
    }
    case FadingKind::Rician: {
        const double K = model.K;
        const double x = 2.0 * alpha * std::sqrt(K * (K + 1.0) / W);
        return 2.0 * (K + 1.0) * alpha / W * std::exp(-K - (K + 1.0) * alpha * alpha / W + x) *
               analytics::bessel_i0e(x);
    }
    }
    throw std::invalid_argument("unsupported fading kind");
}

double fading_sample(const FadingModel& model, Rng& rng)
{
    model.validate();
    switch (model.kind) {
    case FadingKind::AWGN:
        return 1.0;
    case FadingKind::Rayleigh:
        return std::sqrt(model.omega * std::exponential_distribution<double>(1.0)(rng));
    case FadingKind::Nakagami:
        return std::sqrt(std::gamma_distribution<double>(model.m, model.omega / model.m)(rng));
    case FadingKind::Rician: {
        const double s = std::sqrt(model.K * model.omega / (model.K + 1.0));
        const double sigma = std::sqrt(model.omega / (2.0 * (model.K + 1.0)));
        std::normal_distribution<double> g(0.0, sigma);
        const double re = s + g(rng);
        const double im = g(rng);
        return std::hypot(re, im);
    }
    }
    throw std::invalid_argument("unsupported fading kind");
}

double fading_sample(const FadingModel& model, std::uint64_t seed)
{
    Rng rng(seed);
    return fading_sample(model, rng);
}

ComplexSignal apply_statistical_channel(const ComplexSignal& w, double d, const PathLossModel& pl,
                                        const FadingModel& fm, const NoiseModel& noise, std::uint64_t seed,
                                        double* alpha_out)
{
    w.validate();
    Rng fade_rng(derive_seed(seed, 0));
    Rng shadow_rng(derive_seed(seed, 1));
    const double alpha = fading_sample(fm, fade_rng);
    const double gain = std::pow(10.0, path_loss_db(d, pl, shadow_rng) / 20.0) * alpha;
    if (alpha_out)
        *alpha_out = alpha;
    ComplexSignal out = w;
    for (auto& s : out.samples)
        s *= gain;
    if (noise.enabled()) {
        Rng noise_rng(derive_seed(seed, 2, noise.seed));
        add_complex_noise(out.samples, noise.variance(w.sample_rate_hz), noise_rng);
    }
    return out;
}

FadingKind parse_fading(const std::string& name)
{
    if (name == "awgn")
        return FadingKind::AWGN;
    if (name == "rayleigh")
        return FadingKind::Rayleigh;
    if (name == "rician")
        return FadingKind::Rician;
    if (name == "nakagami")
        return FadingKind::Nakagami;
    throw std::invalid_argument("unknown channel kind '" + name + "'");
}

std::string fading_name(FadingKind k)
{
    switch (k) {
    case FadingKind::AWGN:
        return "awgn";
    case FadingKind::Rayleigh:
        return "rayleigh";
    case FadingKind::Rician:
        return "rician";
    case FadingKind::Nakagami:
        return "nakagami";
    }
    return "unknown";
}

} // namespace wpli::channel
