// SPDX-License-Identifier: Apache-2.0

#include "wpli/receiver.hpp"

#include "wpli/dsp.hpp"
#include "wpli/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace wpli::receiver {

void ReceiverProfile::validate() const
{
    pa_rx.validate();
    if (!(std::abs(mixer.quadrature_error) < kPi / 2.0))
        throw std::invalid_argument("RX quadrature error must satisfy |zeta| < pi/2");
    if (!(lpf.passband_gain > lpf.stopband_gain) || lpf.stopband_gain < 0.0)
        throw std::invalid_argument("lowpass gains must satisfy A_p > A_s >= 0");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("receiver sample rate must be positive");
    const double W = cutoff_hz();
    if (!(W > 0.0) || W > sample_rate_hz / 2.0 * (1.0 + 1e-12))
        throw std::invalid_argument("lowpass cutoff must satisfy 0 < W <= f_s/2");
    if (!(lpf.transition_fraction > 0.0) || lpf.transition_fraction >= 1.0)
        throw std::invalid_argument("lowpass transition fraction must be in (0, 1)");
    if (adc_bits < 1 || adc_bits > 30)
        throw std::invalid_argument("ADC resolution must be 1..30 bits");
    if (!(adc_full_scale > 0.0))
        throw std::invalid_argument("ADC full scale must be positive");
}

void FingerprintVector::validate() const
{
    if (psd.size() != n_fft || n_fft == 0)
        throw std::invalid_argument("fingerprint length must equal N_FFT");
    for (double v : psd)
        if (!std::isfinite(v))
            throw std::invalid_argument("fingerprint contains non-finite values");
}

const std::vector<double>& lowpass_taps(double input_rate_hz, const LowPassSpec& spec, double cutoff_hz)
{
    using Key = std::tuple<double, double, double, double, double, double>;
    static std::mutex mutex;
    static std::map<Key, std::vector<double>> designs;
    const Key key{input_rate_hz, spec.passband_gain, spec.stopband_gain, cutoff_hz, spec.transition_fraction,
                  spec.attenuation_db};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = designs.find(key);
    if (it != designs.end())
        return it->second;
    if (cutoff_hz >= input_rate_hz / 2.0)
        throw std::invalid_argument("lowpass cutoff must be below the input Nyquist frequency");
    auto h = dsp::kaiser_lowpass(input_rate_hz, cutoff_hz, spec.transition_fraction * cutoff_hz, spec.attenuation_db);
    for (auto& v : h)
        v *= spec.passband_gain - spec.stopband_gain;
    h[(h.size() - 1) / 2] += spec.stopband_gain;
    return designs.emplace(key, std::move(h)).first->second;
}

std::vector<cplx> quadrature_downconvert(const std::vector<cplx>& v, double zeta)
{
    const cplx a = std::polar(1.0, -zeta / 2.0);
    const cplx b = std::conj(a);
    std::vector<cplx> out(v.size());
    for (std::size_t n = 0; n < v.size(); ++n)
        out[n] = cplx((v[n] * a).real(), (v[n] * b).imag());
    return out;
}

std::size_t adc_quantize(std::vector<cplx>& x, int bits, double full_scale)
{
    std::size_t clipped = 0;
    for (auto& s : x) {
        if (std::abs(s.real()) > full_scale || std::abs(s.imag()) > full_scale)
            ++clipped;
        const double i = waveform::quantize(std::clamp(s.real(), -full_scale, full_scale), bits, full_scale);
        const double q = waveform::quantize(std::clamp(s.imag(), -full_scale, full_scale), bits, full_scale);
        s = cplx(i, q);
    }
    return clipped;
}

Capture rx_capture(const ComplexSignal& r, const ReceiverProfile& profile)
{
    r.validate();
    profile.validate();
    if (r.domain != SignalDomain::Passband)
        throw std::invalid_argument("rx_capture expects a passband envelope with a recorded carrier");
    const double fin = r.sample_rate_hz;
    const double ratio = fin / profile.sample_rate_hz;
    const double D = std::round(ratio);
    if (D < 1.0 || std::abs(ratio - D) > 1e-6 * ratio)
        throw std::invalid_argument("input rate must be an integer multiple of the ADC rate");

    std::vector<cplx> v = r.samples;
    const double offset = r.carrier_hz - profile.mixer.carrier_hz;
    if (offset != 0.0) {
        const double w = 2.0 * kPi * offset / fin;
        for (std::size_t n = 0; n < v.size(); ++n)
            v[n] *= std::polar(1.0, w * static_cast<double>(n));
    }
    v = rfchain::pa_envelope(v, profile.pa_rx);
    v = quadrature_downconvert(v, profile.mixer.quadrature_error);

    const auto& h = lowpass_taps(fin, profile.lpf, profile.cutoff_hz());
    const auto y = dsp::convolve(v, h);
    const std::size_t delay = (h.size() - 1) / 2;

    Capture cap;
    cap.sample_rate_hz = profile.sample_rate_hz;
    const auto step = static_cast<std::size_t>(D);
    for (std::size_t n = 0; n < v.size(); n += step)
        cap.samples.push_back(y[n + delay]);
    cap.clipped = adc_quantize(cap.samples, profile.adc_bits, profile.adc_full_scale);
    cap.clip_fraction = cap.samples.empty() ? 0.0 : static_cast<double>(cap.clipped) / static_cast<double>(cap.samples.size());
    return cap;
}

std::size_t detect_preamble(const std::vector<cplx>& x, std::size_t window, double threshold_factor)
{
    if (window < 2)
        throw std::invalid_argument("detection window must be >= 2 samples");
    if (!(threshold_factor > 1.0))
        throw std::invalid_argument("threshold factor must exceed 1");
    if (x.size() < 2 * window)
        throw DataError("capture shorter than two detection windows");

    const std::size_t n = x.size();
    std::vector<cplx> cs(n + 1, cplx(0.0, 0.0));
    std::vector<double> cp(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cs[i + 1] = cs[i] + x[i];
        cp[i + 1] = cp[i] + std::norm(x[i]);
    }
    const double inv = 1.0 / static_cast<double>(window);
    auto variance = [&](std::size_t i) {
        const cplx m = (cs[i + window] - cs[i]) * inv;
        return std::max(0.0, (cp[i + window] - cp[i]) * inv - std::norm(m));
    };
    const std::size_t count = n - window + 1;
    double floor = variance(0);
    for (std::size_t i = 1; i < count; ++i)
        floor = std::min(floor, variance(i));
    const double level = threshold_factor * floor;

    for (std::size_t i = 0; i < count; ++i) {
        if (variance(i) > level) {
            const std::size_t sub = std::max<std::size_t>(1, window / 4);
            for (std::size_t j = i; j <= i + window && j + sub <= n; ++j)
                if ((cp[j + sub] - cp[j]) / static_cast<double>(sub) > level)
                    return j;
            return i;
        }
    }
    throw DataError("no preamble found: window variance never exceeds " + std::to_string(threshold_factor) +
                    " x noise floor");
}

namespace {

void apply_normalization(FingerprintVector& fv)
{
    if (fv.normalization != PsdNormalization::UnitPower)
        return;
    double total = 0.0;
    for (double v : fv.psd)
        total += v;
    if (!(total > 0.0))
        throw DataError("cannot normalize an all-zero fingerprint");
    for (auto& v : fv.psd)
        v /= total;
}

} // namespace

FingerprintVector psd_fingerprint(const std::vector<cplx>& x, double sample_rate_hz, std::size_t n_fft,
                                  PsdNormalization norm)
{
    if (x.empty())
        throw std::invalid_argument("fingerprint input is empty");
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("sample rate must be positive");
    if (n_fft < x.size())
        throw std::invalid_argument("N_FFT (" + std::to_string(n_fft) + ") must be >= L (" + std::to_string(x.size()) +
                                    ")");
    std::vector<cplx> buf(n_fft, cplx(0.0, 0.0));
    std::copy(x.begin(), x.end(), buf.begin());
    const auto X = dsp::fft(std::move(buf));
    FingerprintVector fv;
    fv.n_fft = n_fft;
    fv.sample_rate_hz = sample_rate_hz;
    fv.bandwidth_hz = sample_rate_hz / 2.0;
    fv.length = x.size();
    fv.normalization = norm;
    fv.psd.resize(n_fft);
    const double scale = 1.0 / (static_cast<double>(x.size()) * sample_rate_hz);
    for (std::size_t k = 0; k < n_fft; ++k)
        fv.psd[k] = std::norm(X[k]) * scale;
    apply_normalization(fv);
    return fv;
}

FingerprintVector psd_fingerprint_welch(const std::vector<cplx>& x, double sample_rate_hz, std::size_t n_fft,
                                        PsdNormalization norm)
{
    if (x.size() < n_fft)
        throw std::invalid_argument("Welch fingerprint needs at least N_FFT samples");
    FingerprintVector fv;
    fv.psd = dsp::welch_psd(x, sample_rate_hz, n_fft);
    fv.n_fft = n_fft;
    fv.sample_rate_hz = sample_rate_hz;
    fv.bandwidth_hz = sample_rate_hz / 2.0;
    fv.length = x.size();
    fv.normalization = norm;
    fv.estimator = PsdEstimator::Welch;
    apply_normalization(fv);
    return fv;
}

std::string normalization_name(PsdNormalization n)
{
    return n == PsdNormalization::UnitPower ? "unit_power" : "none";
}

PsdNormalization parse_normalization(const std::string& s)
{
    if (s == "none")
        return PsdNormalization::None;
    if (s == "unit_power")
        return PsdNormalization::UnitPower;
    throw std::invalid_argument("unknown normalization '" + s + "'");
}

} // namespace wpli::receiver
