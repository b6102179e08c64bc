// SPDX-License-Identifier: Apache-2.0

#include "wpli/harness.hpp"

#include "wpli/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef WPLI_VERSION
#define WPLI_VERSION "0.0.0"
#endif

namespace wpli::harness {

namespace {

// Seed streams. Trial seeds do not depend on the sweep point, so every point
// sees the same jitter, fade and noise draws (common random numbers).
constexpr std::uint64_t kCalibrationStream = 7;
constexpr std::uint64_t kEnrollStream = 11;
constexpr std::uint64_t kEnrollCalStream = 12;
constexpr std::uint64_t kUpdateStream = 21;
constexpr std::uint64_t kUpdateCalStream = 22;
constexpr std::uint64_t kTrialStream = 31;
constexpr std::uint64_t kModelStream = 41;

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

} // namespace

void DeviceProfile::validate() const
{
    if (id.empty())
        throw std::invalid_argument("device id must be nonempty");
    pa.validate();
    if (!(std::abs(quadrature_error) < kPi / 2.0))
        throw std::invalid_argument("device '" + id + "': quadrature error must satisfy |zeta| < pi/2");
    if (!(tie_sigma_s >= 0.0))
        throw std::invalid_argument("device '" + id + "': TIE sigma must be >= 0");
    if (dac_bits < 1 || dac_bits > 24)
        throw std::invalid_argument("device '" + id + "': DAC bits must be 1..24");
    if (!(dac_full_scale > 0.0) || !(amplitude > 0.0))
        throw std::invalid_argument("device '" + id + "': DAC full scale and amplitude must be positive");
    if (!inl.empty() && inl.size() != (std::size_t{1} << dac_bits))
        throw std::invalid_argument("device '" + id + "': INL table must have 2^bits entries");
    if (!(inl_sigma_lsb >= 0.0))
        throw std::invalid_argument("device '" + id + "': INL sigma must be >= 0");
}

waveform::DacModel DeviceProfile::dac(double generation_period_s) const
{
    waveform::DacModel d;
    d.bits = dac_bits;
    d.full_scale = dac_full_scale;
    d.generation_period_s = generation_period_s;
    d.amplitude = amplitude;
    d.inl = inl;
    if (d.inl.empty() && inl_sigma_lsb > 0.0) {
        const std::size_t codes = std::size_t{1} << dac_bits;
        const double lsb = 2.0 * dac_full_scale / static_cast<double>(codes);
        Rng rng(inl_seed);
        std::normal_distribution<double> g(0.0, inl_sigma_lsb * lsb);
        d.inl.resize(codes);
        for (auto& v : d.inl)
            v = g(rng);
    }
    return d;
}

void ProtocolSpec::validate() const
{
    if (!(symbol_rate_hz > 0.0) || !(simulation_rate_hz > 0.0))
        throw std::invalid_argument("symbol and simulation rates must be positive");
    if (preamble_bits.empty())
        throw std::invalid_argument("preamble must contain at least one bit");
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("carrier frequency must be positive");
}

double ProtocolSpec::preamble_duration_s() const
{
    const auto s = waveform::map_symbols(preamble_bits, scheme, 1.0 / symbol_rate_hz);
    return static_cast<double>(s.symbols.size()) * s.symbol_period_s;
}

void ChannelSpec::validate() const
{
    fading.validate();
    path_loss().validate();
    if (!(distance_m > 0.0))
        throw std::invalid_argument("distance must be positive");
    if (!(snr_bandwidth_hz > 0.0) || !std::isfinite(snr_db_at_reference))
        throw std::invalid_argument("SNR calibration needs a finite SNR and a positive bandwidth");
}

channel::PathLossModel ChannelSpec::path_loss() const
{
    channel::PathLossModel p;
    p.ref_loss_db = 0.0;
    p.ref_distance_m = reference_distance_m;
    p.exponent = path_loss_exponent;
    p.shadowing_sigma_db = shadowing_sigma_db;
    return p;
}

void FingerprintSpec::validate() const
{
    if (n_fft < 2)
        throw std::invalid_argument("N_FFT must be >= 2");
    if (kappa < 1)
        throw std::invalid_argument("LDA dimension must be >= 1");
    if (!(lda_ridge > 0.0))
        throw std::invalid_argument("LDA ridge must be positive");
}

void CampaignSpec::validate() const
{
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
    if (values.empty())
        throw std::invalid_argument("sweep grid must be nonempty");
    if (model == CampaignModel::Waveform) {
        if (references_per_device < 2)
            throw std::invalid_argument("at least two references per device are needed");
        if (calibration_per_device < 1)
            throw std::invalid_argument("at least one calibration capture per device is needed");
    }
    if (!(enrollment.distance_m > 0.0))
        throw std::invalid_argument("enrollment distance must be positive");
    enrollment.fading.validate();
    for (const auto& v : values) {
        if (sweep == SweepVariable::Channel) {
            v.fading.validate();
        } else if (sweep == SweepVariable::Snr) {
            if (!std::isfinite(v.number))
                throw std::invalid_argument("SNR sweep values must be finite");
        } else if (!(v.number > 0.0)) {
            throw std::invalid_argument("sweep values must be positive");
        }
    }
    if (mu && *mu < 1)
        throw std::invalid_argument("mu must be >= 1");
    if (lambda && !(*lambda >= 0.0))
        throw std::invalid_argument("lambda must be >= 0");
    if (!(detect_threshold > 1.0))
        throw std::invalid_argument("detection threshold factor must exceed 1");
}

void Scenario::validate() const
{
    if (devices.empty())
        throw std::invalid_argument("scenario needs at least one device");
    for (std::size_t i = 0; i < devices.size(); ++i) {
        devices[i].validate();
        for (std::size_t j = 0; j < i; ++j)
            if (devices[j].id == devices[i].id)
                throw std::invalid_argument("duplicate device id '" + devices[i].id + "'");
    }
    receiver.validate();
    channel.validate();
    protocol.validate();
    fingerprint.validate();
    campaign.validate();
    if (campaign.model == CampaignModel::Waveform && devices.size() < 2)
        throw std::invalid_argument("waveform campaigns need at least two devices");
    if (campaign.sweep == SweepVariable::Snr && campaign.model != CampaignModel::EnergyDetector)
        throw std::invalid_argument("SNR sweeps are only defined for the energy detector model");
}

Scenario default_scenario(std::size_t devices)
{
    if (devices < 1 || devices > 6)
        throw std::invalid_argument("default scenario supports 1..6 devices");
    Scenario s;
    s.name = "default";
    struct Preset {
        cplx a3;
        cplx a5;
        double zeta;
        double tie;
    };
    const Preset presets[] = {
        {{-0.10, 0.02}, {0.0, 0.0}, 0.10, 2e-9},   {{-0.16, -0.04}, {0.02, 0.0}, 0.16, 3e-9},
        {{-0.06, 0.05}, {0.0, 0.0}, 0.06, 1e-9},   {{-0.13, 0.0}, {0.01, 0.01}, 0.12, 2.5e-9},
        {{-0.08, -0.06}, {0.0, 0.0}, 0.20, 1.5e-9}, {{-0.20, 0.03}, {0.03, -0.01}, 0.08, 3.5e-9},
    };
    for (std::size_t i = 0; i < devices; ++i) {
        DeviceProfile d;
        d.id = "node" + std::to_string(i + 1);
        d.pa.odd = {cplx(1.0, 0.0), presets[i].a3};
        if (presets[i].a5 != cplx(0.0, 0.0))
            d.pa.odd.push_back(presets[i].a5);
        d.quadrature_error = presets[i].zeta;
        d.tie_sigma_s = presets[i].tie;
        d.amplitude = 0.8;
        d.inl_sigma_lsb = 0.5;
        d.inl_seed = 1000 + i;
        s.devices.push_back(d);
    }
    s.receiver.adc_full_scale = 4.0;
    s.receiver.sample_rate_hz = 8e6;
    s.campaign.seed = 1;
    s.campaign.values = {SweepValue{1.0, {}}};
    return s;
}

constexpr std::size_t kTailSamples = 256;

ComplexSignal transmit(const DeviceProfile& device, const ProtocolSpec& protocol, std::uint64_t seed,
                       std::size_t guard_samples)
{
    const double Tg = 1.0 / protocol.simulation_rate_hz;
    const auto stream = waveform::map_symbols(protocol.preamble_bits, protocol.scheme, 1.0 / protocol.symbol_rate_hz);
    waveform::ClockModel clock{device.tie_sigma_s, seed};
    const auto dac = device.dac(Tg);
    const auto seq = waveform::shape_and_jitter(stream, protocol.shaping, clock, dac);
    ComplexSignal bb = waveform::dac_convert(seq, dac);
    if (guard_samples > 0) {
        std::vector<cplx> padded(guard_samples, cplx(0.0, 0.0));
        padded.insert(padded.end(), bb.samples.begin(), bb.samples.end());
        padded.resize(padded.size() + guard_samples, cplx(0.0, 0.0));
        bb.samples = std::move(padded);
    }
    rfchain::MixerModel mixer;
    mixer.carrier_hz = protocol.carrier_hz;
    mixer.quadrature_error = device.quadrature_error;
    const auto pb = rfchain::mix_up(bb, mixer);
    return rfchain::pa_apply(pb, device.pa, rfchain::BandpassFilter{}).signal;
}

double calibrate_noise_psd(const Scenario& s)
{
    const auto tx = transmit(s.devices.front(), s.protocol, derive_seed(s.campaign.seed, kCalibrationStream));
    const double gain = db_to_linear(channel::path_loss_db(s.channel.reference_distance_m, s.channel.path_loss()));
    const double p = tx.mean_power() * gain;
    if (!(p > 0.0))
        throw NumericalError("reference device produces no signal power");
    return p / (s.channel.snr_bandwidth_hz * db_to_linear(s.channel.snr_db_at_reference));
}

namespace {

bool receiver_is_linear(const receiver::ReceiverProfile& rx)
{
    for (std::size_t i = 1; i < rx.pa_rx.odd.size(); ++i)
        if (rx.pa_rx.odd[i] != cplx(0.0, 0.0))
            return false;
    return true;
}

struct Context {
    const Scenario* s = nullptr;
    receiver::ReceiverProfile rx;
    std::optional<fingerprint::RxResponse> response;
};

Context make_context(const Scenario& s, const CaptureCondition& cond)
{
    Context ctx;
    ctx.s = &s;
    ctx.rx = s.receiver;
    ctx.rx.sample_rate_hz = cond.sample_rate_hz;
    if (s.fingerprint.cancel_rx && !receiver_is_linear(ctx.rx)) {
        DeviceProfile ideal;
        ideal.id = "reference";
        ideal.amplitude = s.devices.front().amplitude;
        ideal.dac_bits = 16;
        const auto tx = transmit(ideal, s.protocol, 0);
        receiver::ReceiverProfile lin = ctx.rx;
        lin.pa_rx = rfchain::PaPowerSeries{};
        lin.mixer.quadrature_error = 0.0;
        lin.adc_bits = 24;
        const double g = std::sqrt(db_to_linear(channel::path_loss_db(cond.distance_m, s.channel.path_loss())));
        ComplexSignal scaled = tx;
        for (auto& v : scaled.samples)
            v *= g;
        auto ref = receiver::rx_capture(scaled, lin).samples;
        const auto L = std::min<std::size_t>(
            {ref.size(), cond.n_fft,
             static_cast<std::size_t>(std::llround(s.protocol.preamble_duration_s() * cond.sample_rate_hz))});
        ref.resize(L);
        ctx.response = fingerprint::estimate_rx_response(ctx.rx, ref, cond.sample_rate_hz, cond.n_fft);
    }
    return ctx;
}

receiver::FingerprintVector capture_with(const Context& ctx, std::size_t device, const CaptureCondition& cond,
                                         std::uint64_t seed)
{
    const Scenario& s = *ctx.s;
    const std::size_t guard = s.campaign.detect_preamble ? std::max<std::size_t>(s.campaign.guard_samples, 1024)
                                                         : s.campaign.guard_samples;
    auto tx = transmit(s.devices.at(device), s.protocol, derive_seed(seed, 0), guard);
    // jittered clocks can end the burst a few samples early
    tx.samples.resize(tx.samples.size() + kTailSamples, cplx(0.0, 0.0));
    channel::NoiseModel noise;
    if (cond.noise_psd_w_per_hz > 0.0)
        noise.psd_dbm_per_hz = 10.0 * std::log10(cond.noise_psd_w_per_hz) + 30.0;
    const auto rx_in = channel::apply_statistical_channel(tx, cond.distance_m, s.channel.path_loss(), cond.fading,
                                                          noise, derive_seed(seed, 1));
    const auto cap = receiver::rx_capture(rx_in, ctx.rx);
    const double D = s.protocol.simulation_rate_hz / cond.sample_rate_hz;
    std::size_t start = 0;
    if (s.campaign.detect_preamble) {
        const std::size_t window = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(guard / D / 4.0)));
        start = receiver::detect_preamble(cap.samples, window, s.campaign.detect_threshold);
    } else {
        start = static_cast<std::size_t>(std::llround(static_cast<double>(guard) / D));
    }
    const auto full = static_cast<std::size_t>(std::llround(s.protocol.preamble_duration_s() * cond.sample_rate_hz));
    const bool welch = s.fingerprint.estimator == receiver::PsdEstimator::Welch;
    // the periodogram needs N_FFT >= L; Welch segments the whole preamble
    const std::size_t L = welch ? full : std::min(full, cond.n_fft);
    if (start + L > cap.samples.size())
        throw DataError("capture too short for the fingerprint window");
    const std::vector<cplx> x(cap.samples.begin() + static_cast<std::ptrdiff_t>(start),
                              cap.samples.begin() + static_cast<std::ptrdiff_t>(start + L));
    auto fv = welch ? receiver::psd_fingerprint_welch(x, cond.sample_rate_hz, cond.n_fft)
                  : receiver::psd_fingerprint(x, cond.sample_rate_hz, cond.n_fft);
    if (ctx.response)
        fv = fingerprint::cancel_rx(fv, *ctx.response);
    if (s.fingerprint.normalization == receiver::PsdNormalization::UnitPower)
        fv = fingerprint::normalize_power(fv);
    return fv;
}

struct PointSetup {
    CaptureCondition test;
    CaptureCondition enroll;
    std::string label;
    double snr_db = 0.0;
};

PointSetup setup_point(const Scenario& s, const SweepValue& v, double n0)
{
    PointSetup p;
    p.test.distance_m = s.channel.distance_m;
    p.test.fading = s.channel.fading;
    p.test.sample_rate_hz = s.receiver.sample_rate_hz;
    p.test.n_fft = s.fingerprint.n_fft;
    p.test.noise_psd_w_per_hz = n0;
    std::ostringstream label;
    switch (s.campaign.sweep) {
    case SweepVariable::Distance:
        p.test.distance_m = v.number;
        label << v.number << " m";
        break;
    case SweepVariable::SampleRate:
        p.test.sample_rate_hz = v.number;
        if (s.fingerprint.fixed_resolution)
            p.test.n_fft = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::llround(static_cast<double>(s.fingerprint.n_fft) * v.number /
                                                         s.receiver.sample_rate_hz)));
        label << v.number / 1e6 << " MHz";
        break;
    case SweepVariable::NFft:
        p.test.n_fft = static_cast<std::size_t>(std::llround(v.number));
        if (std::abs(v.number - static_cast<double>(p.test.n_fft)) > 0.0 || p.test.n_fft < 2)
            throw std::invalid_argument("N_FFT sweep values must be integers >= 2");
        label << p.test.n_fft << " bins";
        break;
    case SweepVariable::Channel:
        p.test.fading = v.fading;
        label << channel::fading_name(v.fading.kind);
        if (v.fading.kind == channel::FadingKind::Rician)
            label << "(K=" << v.fading.K << ")";
        if (v.fading.kind == channel::FadingKind::Nakagami)
            label << "(m=" << v.fading.m << ")";
        break;
    case SweepVariable::Snr:
        label << v.number << " dB";
        break;
    }
    p.label = label.str();
    p.snr_db = s.channel.snr_db_at_reference +
               channel::path_loss_db(p.test.distance_m, s.channel.path_loss()) -
               channel::path_loss_db(s.channel.reference_distance_m, s.channel.path_loss());
    if (s.campaign.sweep == SweepVariable::Snr)
        p.snr_db = v.number;

    p.enroll = p.test;
    p.enroll.distance_m = s.campaign.enrollment.distance_m;
    p.enroll.fading = s.campaign.enrollment.fading;
    // enrollment SNR is set directly, independent of the path-loss mapping
    const double g_enroll = db_to_linear(channel::path_loss_db(p.enroll.distance_m, s.channel.path_loss()));
    const double g_ref = db_to_linear(channel::path_loss_db(s.channel.reference_distance_m, s.channel.path_loss()));
    const double snr_map = s.channel.snr_db_at_reference + 10.0 * std::log10(g_enroll / g_ref);
    p.enroll.noise_psd_w_per_hz = n0 * db_to_linear(snr_map - s.campaign.enrollment.snr_db);
    return p;
}

std::vector<fingerprint::FingerprintRecord> capture_set(const Context& ctx, const CaptureCondition& cond,
                                                        std::size_t per_device, std::uint64_t stream)
{
    const Scenario& s = *ctx.s;
    const std::size_t D = s.devices.size();
    std::vector<fingerprint::FingerprintRecord> recs(D * per_device);
    parallel_for(recs.size(), s.campaign.threads, [&](std::size_t i) {
        const std::size_t dev = i / per_device;
        const std::size_t k = i % per_device;
        auto& r = recs[i];
        r.device_id = s.devices[dev].id;
        r.vector = capture_with(ctx, dev, cond, derive_seed(s.campaign.seed, stream, dev, k));
        r.meta.distance_m = cond.distance_m;
        r.meta.channel = channel::fading_name(cond.fading.kind);
        r.meta.sample_rate_hz = cond.sample_rate_hz;
        r.meta.n_fft = cond.n_fft;
    });
    return recs;
}

std::size_t device_index(const Scenario& s, const std::string& id)
{
    for (std::size_t i = 0; i < s.devices.size(); ++i)
        if (s.devices[i].id == id)
            return i;
    throw std::invalid_argument("unknown device '" + id + "'");
}

// Genuine score: smallest class distance over the whole database. Imposter
// score: smallest distance once the capture's own class is left out.
std::pair<double, double> leave_one_out(const fingerprint::FingerprintVector& v, std::size_t truth,
                                        const fingerprint::FingerprintDatabase& ident_db, const Scenario& s)
{
    const auto dist = fingerprint::class_distances(v, ident_db);
    double gen = std::numeric_limits<double>::infinity();
    double imp = std::numeric_limits<double>::infinity();
    for (const auto& d : dist) {
        gen = std::min(gen, d.distance);
        if (device_index(s, d.device_id) != truth)
            imp = std::min(imp, d.distance);
    }
    return {gen, imp};
}

double threshold_from(const std::vector<fingerprint::FingerprintRecord>& cal,
                      const fingerprint::FingerprintDatabase& ident_db, const Scenario& s)
{
    std::vector<double> gen, imp;
    for (const auto& r : cal) {
        const auto [g, i] = leave_one_out(r.vector, device_index(s, r.device_id), ident_db, s);
        gen.push_back(g);
        imp.push_back(i);
    }
    return fingerprint::roc_eer(gen, imp).lambda_eer;
}

Predictions waveform_predictions(const fingerprint::FingerprintDatabase& db, const CaptureCondition& cond,
                                 double path_gain, std::uint64_t seed)
{
    Predictions pr;
    const auto ids = db.devices();
    const auto r1 = db.references(ids[0]);
    const auto r2 = db.references(ids[1]);
    const std::size_t d = r1.front()->vector.psd.size();
    std::vector<double> q1(d, 0.0), q2(d, 0.0);
    for (const auto* r : r1)
        for (std::size_t k = 0; k < d; ++k)
            q1[k] += r->vector.psd[k] / static_cast<double>(r1.size());
    for (const auto* r : r2)
        for (std::size_t k = 0; k < d; ++k)
            q2[k] += r->vector.psd[k] / static_cast<double>(r2.size());
    double var = 0.0;
    std::size_t dof = 0;
    for (const auto* r : r1) {
        for (std::size_t k = 0; k < d; ++k)
            var += (r->vector.psd[k] - q1[k]) * (r->vector.psd[k] - q1[k]);
        dof += d;
    }
    for (const auto* r : r2) {
        for (std::size_t k = 0; k < d; ++k)
            var += (r->vector.psd[k] - q2[k]) * (r->vector.psd[k] - q2[k]);
        dof += d;
    }
    dof -= 2 * d;
    if (dof == 0 || !(var > 0.0))
        return pr;
    const double sigma = std::sqrt(var / static_cast<double>(dof));
    auto cp = analytics::class_params_from_devices(q1, q2, path_gain, sigma, cond.fading);
    const auto method = cond.fading.kind == channel::FadingKind::AWGN ? analytics::ClassMethod::GaussianClosedForm
                                                                      : analytics::ClassMethod::MonteCarlo;
    pr.class_pe = analytics::classification_error(cp, method, 20000, seed).pe;

    double diff = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        diff += (q1[k] - q2[k]) * (q1[k] - q2[k]);
    pr.gamma = diff / (2.0 * sigma * sigma);
    pr.mu = analytics::default_mu(d);
    try {
        const auto roc = analytics::theoretical_roc(pr.gamma, pr.mu, cond.fading, {});
        pr.ident_eer = roc.eer;
    } catch (const std::exception&) {
        // gamma or mu outside the evaluable range; the prediction is simply absent
    }
    return pr;
}

PointResult run_waveform_point(const Scenario& s, std::size_t index, double n0)
{
    const auto setup = setup_point(s, s.campaign.values[index], n0);
    PointResult pt;
    pt.index = index;
    pt.label = setup.label;
    pt.value = s.campaign.values[index].number;
    pt.snr_db = setup.snr_db;
    pt.sample_rate_hz = setup.test.sample_rate_hz;
    pt.n_fft = setup.test.n_fft;
    pt.channel = channel::fading_name(setup.test.fading.kind);

    const auto& fs = s.fingerprint;
    fingerprint::LdaOptions lda_opt;
    lda_opt.ridge_relative = fs.lda_ridge;

    const Context enroll_ctx = make_context(s, setup.enroll);
    const Context test_ctx = make_context(s, setup.test);

    fingerprint::FingerprintDatabase db;
    db.kappa = fs.kappa;
    db.sigma_mode = fs.sigma_mode;
    db.records = capture_set(enroll_ctx, setup.enroll, s.campaign.references_per_device, kEnrollStream);
    db.lda = fingerprint::train_lda(db, fs.kappa, lda_opt);
    auto ident = db;
    ident.lda = fingerprint::identity_projection();
    db.threshold =
        threshold_from(capture_set(enroll_ctx, setup.enroll, s.campaign.calibration_per_device, kEnrollCalStream),
                       ident, s);

    double path_gain = 1.0;
    if (s.campaign.database == fingerprint::DatabaseMode::Updated) {
        const auto fresh = capture_set(test_ctx, setup.test, s.campaign.references_per_device, kUpdateStream);
        db = fingerprint::database_strategy(db, fresh, fingerprint::DatabaseMode::Updated, nullptr, lda_opt);
        ident = db;
        ident.lda = fingerprint::identity_projection();
        db.threshold = threshold_from(
            capture_set(test_ctx, setup.test, s.campaign.calibration_per_device, kUpdateCalStream), ident, s);
    } else {
        path_gain = db_to_linear(channel::path_loss_db(setup.test.distance_m, s.channel.path_loss()) -
                                 channel::path_loss_db(setup.enroll.distance_m, s.channel.path_loss()));
    }

    const std::size_t T = s.campaign.trials;
    const std::size_t D = s.devices.size();
    struct Outcome {
        bool ok = false;
        std::size_t decision = 0;
        double distance = 0.0;
        double genuine = 0.0;
        double imposter = 0.0;
    };
    std::vector<Outcome> out(T);
    parallel_for(T, s.campaign.threads, [&](std::size_t t) {
        const std::size_t dev = t % D;
        try {
            const auto v = capture_with(test_ctx, dev, setup.test, derive_seed(s.campaign.seed, kTrialStream, t));
            const auto c = fingerprint::classify(v, db);
            const auto [g, i] = leave_one_out(v, dev, ident, s);
            out[t] = {true, c.device_index, c.distances[c.device_index].distance, g, i};
        } catch (const DataError&) {
            out[t].ok = false;
        } catch (const NumericalError&) {
            out[t].ok = false;
        }
    });

    auto& rep = pt.report;
    rep.trials = T;
    rep.threshold = *db.threshold;
    for (std::size_t t = 0; t < T; ++t) {
        if (!out[t].ok) {
            ++rep.failures;
            continue;
        }
        rep.truth.push_back(t % D);
        rep.decisions.push_back(out[t].decision);
        rep.distances.push_back(out[t].distance);
        rep.genuine_scores.push_back(out[t].genuine);
        rep.imposter_scores.push_back(out[t].imposter);
    }
    fingerprint::summarize(rep);
    pt.predictions = waveform_predictions(db, setup.test, path_gain, derive_seed(s.campaign.seed, kModelStream, index));
    return pt;
}

PointResult run_energy_point(const Scenario& s, std::size_t index)
{
    const auto setup = setup_point(s, s.campaign.values[index], 0.0);
    PointResult pt;
    pt.index = index;
    pt.label = setup.label;
    pt.value = s.campaign.values[index].number;
    pt.snr_db = setup.snr_db;
    pt.sample_rate_hz = setup.test.sample_rate_hz;
    pt.n_fft = setup.test.n_fft;
    pt.channel = channel::fading_name(setup.test.fading.kind);

    const auto full =
        static_cast<std::size_t>(std::llround(s.protocol.preamble_duration_s() * setup.test.sample_rate_hz));
    analytics::IdentAnalyticsParams p;
    p.gamma = db_to_linear(setup.snr_db);
    p.mu = s.campaign.mu ? *s.campaign.mu : analytics::default_mu(std::min(full, setup.test.n_fft));
    p.channel = setup.test.fading;
    const auto roc = analytics::theoretical_roc(p.gamma, p.mu, p.channel, {});
    p.lambda = s.campaign.lambda ? *s.campaign.lambda : roc.lambda_eer;

    auto& pr = pt.predictions;
    pr.gamma = p.gamma;
    pr.mu = p.mu;
    pr.ident_eer = roc.eer;
    pr.ident_grr = analytics::grr(p);
    pr.ident_frr = analytics::frr(p.lambda, p.mu);

    const auto sim = analytics::simulate_identification(p, s.campaign.trials,
                                                        derive_seed(s.campaign.seed, kTrialStream, index), true);
    auto& rep = pt.report;
    rep.trials = 0;
    rep.threshold = p.lambda;
    rep.genuine_scores = sim.genuine_scores;
    rep.imposter_scores = sim.imposter_scores;
    fingerprint::summarize(rep);
    return pt;
}

} // namespace

receiver::FingerprintVector capture_fingerprint(const Scenario& s, std::size_t device, const CaptureCondition& cond,
                                                std::uint64_t seed)
{
    return capture_with(make_context(s, cond), device, cond, seed);
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

CampaignResult run_campaign(const Scenario& s, const ProgressFn& progress)
{
    s.validate();
    CampaignResult res;
    res.provenance.config_hash = config_hash(s);
    res.provenance.seed = s.campaign.seed;
    res.provenance.code_version = WPLI_VERSION;
    res.provenance.scenario_name = s.name;
    res.model = model_name(s.campaign.model);
    res.sweep_variable = sweep_name(s.campaign.sweep);
    res.database_mode = fingerprint::mode_name(s.campaign.database);

    double n0 = 0.0;
    if (s.campaign.model == CampaignModel::Waveform) {
        n0 = calibrate_noise_psd(s);
        res.provenance.noise_psd_w_per_hz = n0;
    }
    const std::size_t P = s.campaign.values.size();
    for (std::size_t i = 0; i < P; ++i) {
        res.points.push_back(s.campaign.model == CampaignModel::Waveform ? run_waveform_point(s, i, n0)
                                                                         : run_energy_point(s, i));
        if (!s.campaign.store_samples) {
            auto& r = res.points.back().report;
            r.truth.clear();
            r.decisions.clear();
            r.distances.clear();
            r.genuine_scores.clear();
            r.imposter_scores.clear();
            r.roc.clear();
        }
        if (progress)
            progress(i + 1, P);
    }
    return res;
}

} // namespace wpli::harness
