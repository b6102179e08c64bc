// SPDX-License-Identifier: Apache-2.0

#include "wpli/harness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wpli::harness {

using ojson = nlohmann::ordered_json;

namespace {

// Reads one JSON object, remembers which keys were consumed and rejects the rest.
class ObjectReader {
public:
    ObjectReader(const ojson& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw DataError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const ojson& raw(const std::string& key)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            throw DataError(where() + ": missing required key '" + key + "'");
        return j_.at(key);
    }

    template <typename T>
    T req(const std::string& key)
    {
        return convert<T>(raw(key), key);
    }

    template <typename T>
    T opt(const std::string& key, const T& fallback)
    {
        seen_.insert(key);
        if (!has(key))
            return fallback;
        return convert<T>(j_.at(key), key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw DataError("unknown key '" + child(it.key()) + "'");
    }

private:
    std::string where() const { return path_.empty() ? "document root" : "'" + path_ + "'"; }

    template <typename T>
    T convert(const ojson& v, const std::string& key) const
    {
        try {
            return v.get<T>();
        } catch (const ojson::exception&) {
            throw DataError("key '" + child(key) + "' has the wrong type");
        }
    }

    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

cplx complex_from(const ojson& v, const std::string& path)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw DataError("'" + path + "' must be a number or a [re, im] pair");
}

ojson complex_json(cplx c)
{
    return ojson::array({c.real(), c.imag()});
}

rfchain::PaPowerSeries pa_from(const ojson& v, const std::string& path)
{
    if (!v.is_array() || v.empty())
        throw DataError("'" + path + "' must be a nonempty list of odd-order coefficients");
    rfchain::PaPowerSeries pa;
    pa.odd.clear();
    for (std::size_t i = 0; i < v.size(); ++i)
        pa.odd.push_back(complex_from(v[i], path + "[" + std::to_string(i) + "]"));
    return pa;
}

ojson pa_json(const rfchain::PaPowerSeries& pa)
{
    ojson a = ojson::array();
    for (auto c : pa.odd)
        a.push_back(complex_json(c));
    return a;
}

channel::FadingModel fading_from(const ojson& v, const std::string& path)
{
    channel::FadingModel f;
    if (v.is_string()) {
        f.kind = channel::parse_fading(v.get<std::string>());
        return f;
    }
    ObjectReader r(v, path);
    f.kind = channel::parse_fading(r.req<std::string>("kind"));
    f.omega = r.opt<double>("omega", 1.0);
    f.m = r.opt<double>("m", f.kind == channel::FadingKind::Nakagami ? 3.0 : 1.0);
    f.K = r.opt<double>("k", f.kind == channel::FadingKind::Rician ? 4.0 : 0.0);
    r.finish();
    return f;
}

ojson fading_json(const channel::FadingModel& f)
{
    ojson j;
    j["kind"] = channel::fading_name(f.kind);
    j["omega"] = f.omega;
    j["m"] = f.m;
    j["k"] = f.K;
    return j;
}

DeviceProfile device_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    DeviceProfile d;
    d.id = r.req<std::string>("id");
    if (r.has("pa"))
        d.pa = pa_from(r.raw("pa"), r.child("pa"));
    else
        r.opt<int>("pa", 0);
    d.quadrature_error = r.opt<double>("quadrature_error_rad", 0.0);
    d.tie_sigma_s = r.opt<double>("tie_sigma_s", 0.0);
    d.amplitude = r.opt<double>("amplitude", d.amplitude);
    if (r.has("dac")) {
        ObjectReader q(r.raw("dac"), r.child("dac"));
        d.dac_bits = q.opt<int>("bits", d.dac_bits);
        d.dac_full_scale = q.opt<double>("full_scale", d.dac_full_scale);
        d.inl = q.opt<std::vector<double>>("inl", {});
        d.inl_sigma_lsb = q.opt<double>("inl_sigma_lsb", 0.0);
        d.inl_seed = q.opt<std::uint64_t>("inl_seed", 0);
        q.finish();
    } else {
        r.opt<int>("dac", 0);
    }
    r.finish();
    return d;
}

ojson device_json(const DeviceProfile& d)
{
    ojson j;
    j["id"] = d.id;
    j["pa"] = pa_json(d.pa);
    j["quadrature_error_rad"] = d.quadrature_error;
    j["tie_sigma_s"] = d.tie_sigma_s;
    j["amplitude"] = d.amplitude;
    j["dac"] = {{"bits", d.dac_bits},
                {"full_scale", d.dac_full_scale},
                {"inl", d.inl},
                {"inl_sigma_lsb", d.inl_sigma_lsb},
                {"inl_seed", d.inl_seed}};
    return j;
}

receiver::ReceiverProfile receiver_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    receiver::ReceiverProfile p;
    if (r.has("pa"))
        p.pa_rx = pa_from(r.raw("pa"), r.child("pa"));
    else
        r.opt<int>("pa", 0);
    p.mixer.quadrature_error = r.opt<double>("quadrature_error_rad", 0.0);
    p.mixer.carrier_hz = r.opt<double>("carrier_hz", p.mixer.carrier_hz);
    p.adc_bits = r.opt<int>("adc_bits", p.adc_bits);
    p.adc_full_scale = r.opt<double>("adc_full_scale", 4.0);
    p.sample_rate_hz = r.opt<double>("sample_rate_hz", p.sample_rate_hz);
    if (r.has("lowpass")) {
        ObjectReader q(r.raw("lowpass"), r.child("lowpass"));
        p.lpf.passband_gain = q.opt<double>("passband_gain", 1.0);
        p.lpf.stopband_gain = q.opt<double>("stopband_gain", 0.0);
        p.lpf.cutoff_hz = q.opt<double>("cutoff_hz", 0.0);
        p.lpf.transition_fraction = q.opt<double>("transition_fraction", p.lpf.transition_fraction);
        p.lpf.attenuation_db = q.opt<double>("attenuation_db", p.lpf.attenuation_db);
        q.finish();
    } else {
        r.opt<int>("lowpass", 0);
    }
    r.finish();
    return p;
}

ojson receiver_json(const receiver::ReceiverProfile& p)
{
    ojson j;
    j["pa"] = pa_json(p.pa_rx);
    j["quadrature_error_rad"] = p.mixer.quadrature_error;
    j["carrier_hz"] = p.mixer.carrier_hz;
    j["adc_bits"] = p.adc_bits;
    j["adc_full_scale"] = p.adc_full_scale;
    j["sample_rate_hz"] = p.sample_rate_hz;
    j["lowpass"] = {{"passband_gain", p.lpf.passband_gain},
                    {"stopband_gain", p.lpf.stopband_gain},
                    {"cutoff_hz", p.lpf.cutoff_hz},
                    {"transition_fraction", p.lpf.transition_fraction},
                    {"attenuation_db", p.lpf.attenuation_db}};
    return j;
}

ChannelSpec channel_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    ChannelSpec c;
    if (r.has("fading"))
        c.fading = fading_from(r.raw("fading"), r.child("fading"));
    else
        r.opt<int>("fading", 0);
    c.distance_m = r.opt<double>("distance_m", c.distance_m);
    c.reference_distance_m = r.opt<double>("reference_distance_m", c.reference_distance_m);
    c.path_loss_exponent = r.opt<double>("path_loss_exponent", c.path_loss_exponent);
    c.shadowing_sigma_db = r.opt<double>("shadowing_sigma_db", c.shadowing_sigma_db);
    c.snr_db_at_reference = r.opt<double>("snr_db_at_reference", c.snr_db_at_reference);
    c.snr_bandwidth_hz = r.opt<double>("snr_bandwidth_hz", c.snr_bandwidth_hz);
    r.finish();
    return c;
}

ojson channel_json(const ChannelSpec& c)
{
    ojson j;
    j["fading"] = fading_json(c.fading);
    j["distance_m"] = c.distance_m;
    j["reference_distance_m"] = c.reference_distance_m;
    j["path_loss_exponent"] = c.path_loss_exponent;
    j["shadowing_sigma_db"] = c.shadowing_sigma_db;
    j["snr_db_at_reference"] = c.snr_db_at_reference;
    j["snr_bandwidth_hz"] = c.snr_bandwidth_hz;
    return j;
}

ProtocolSpec protocol_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    ProtocolSpec p;
    p.scheme = waveform::parse_scheme(r.opt<std::string>("modulation", "oqpsk"));
    if (r.has("shaping")) {
        ObjectReader q(r.raw("shaping"), r.child("shaping"));
        p.shaping.kind = waveform::parse_pulse(q.opt<std::string>("pulse", "half_sine"));
        p.shaping.rolloff = q.opt<double>("rolloff", p.shaping.rolloff);
        p.shaping.span_symbols = q.opt<int>("span_symbols", p.shaping.span_symbols);
        q.finish();
    } else {
        r.opt<int>("shaping", 0);
    }
    p.symbol_rate_hz = r.opt<double>("symbol_rate_hz", p.symbol_rate_hz);
    p.carrier_hz = r.opt<double>("carrier_hz", p.carrier_hz);
    p.simulation_rate_hz = r.opt<double>("simulation_rate_hz", p.simulation_rate_hz);
    if (r.has("preamble_bits")) {
        const auto bits = r.req<std::vector<int>>("preamble_bits");
        p.preamble_bits.clear();
        for (int b : bits) {
            if (b != 0 && b != 1)
                throw DataError("'" + r.child("preamble_bits") + "' entries must be 0 or 1");
            p.preamble_bits.push_back(static_cast<std::uint8_t>(b));
        }
        r.opt<int>("preamble_repeats", 0);
    } else {
        r.opt<int>("preamble_bits", 0);
        p.preamble_bits = waveform::default_preamble_bits(r.opt<int>("preamble_repeats", 8));
    }
    r.finish();
    return p;
}

ojson protocol_json(const ProtocolSpec& p)
{
    ojson j;
    j["modulation"] = waveform::scheme_name(p.scheme);
    j["shaping"] = {{"pulse", waveform::pulse_name(p.shaping.kind)},
                    {"rolloff", p.shaping.rolloff},
                    {"span_symbols", p.shaping.span_symbols}};
    j["symbol_rate_hz"] = p.symbol_rate_hz;
    j["carrier_hz"] = p.carrier_hz;
    j["simulation_rate_hz"] = p.simulation_rate_hz;
    std::vector<int> bits(p.preamble_bits.begin(), p.preamble_bits.end());
    j["preamble_bits"] = bits;
    return j;
}

FingerprintSpec fingerprint_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    FingerprintSpec f;
    f.n_fft = r.opt<std::size_t>("n_fft", f.n_fft);
    f.fixed_resolution = r.opt<bool>("fixed_resolution", f.fixed_resolution);
    f.normalization = receiver::parse_normalization(r.opt<std::string>("normalization", "none"));
    const auto est = r.opt<std::string>("estimator", "periodogram");
    if (est == "welch")
        f.estimator = receiver::PsdEstimator::Welch;
    else if (est == "periodogram")
        f.estimator = receiver::PsdEstimator::Periodogram;
    else
        throw DataError("unknown estimator '" + est + "' at '" + r.child("estimator") + "'");
    f.cancel_rx = r.opt<bool>("cancel_rx", f.cancel_rx);
    f.kappa = r.opt<int>("kappa", f.kappa);
    f.lda_ridge = r.opt<double>("lda_ridge", f.lda_ridge);
    f.sigma_mode = fingerprint::parse_sigma_mode(r.opt<std::string>("sigma_mode", "across_references"));
    r.finish();
    return f;
}

ojson fingerprint_json(const FingerprintSpec& f)
{
    ojson j;
    j["n_fft"] = f.n_fft;
    j["fixed_resolution"] = f.fixed_resolution;
    j["normalization"] = receiver::normalization_name(f.normalization);
    j["estimator"] = f.estimator == receiver::PsdEstimator::Welch ? "welch" : "periodogram";
    j["cancel_rx"] = f.cancel_rx;
    j["kappa"] = f.kappa;
    j["lda_ridge"] = f.lda_ridge;
    j["sigma_mode"] = fingerprint::sigma_mode_name(f.sigma_mode);
    return j;
}

CampaignSpec campaign_from(const ojson& v, const std::string& path)
{
    ObjectReader r(v, path);
    CampaignSpec c;
    c.model = parse_model(r.opt<std::string>("model", "waveform"));
    c.trials = r.opt<std::size_t>("trials", c.trials);
    if (!r.has("seed"))
        throw DataError("'" + r.child("seed") + "' is mandatory");
    c.seed = r.req<std::uint64_t>("seed");
    c.database = fingerprint::parse_mode(r.opt<std::string>("database", "updated"));
    c.references_per_device = r.opt<std::size_t>("references_per_device", c.references_per_device);
    c.calibration_per_device = r.opt<std::size_t>("calibration_per_device", c.calibration_per_device);
    if (r.has("enrollment")) {
        ObjectReader q(r.raw("enrollment"), r.child("enrollment"));
        c.enrollment.distance_m = q.opt<double>("distance_m", c.enrollment.distance_m);
        c.enrollment.snr_db = q.opt<double>("snr_db", c.enrollment.snr_db);
        if (q.has("fading"))
            c.enrollment.fading = fading_from(q.raw("fading"), q.child("fading"));
        else
            q.opt<int>("fading", 0);
        q.finish();
    } else {
        r.opt<int>("enrollment", 0);
    }
    {
        ObjectReader q(r.raw("sweep"), r.child("sweep"));
        c.sweep = parse_sweep(q.req<std::string>("variable"));
        const auto& vals = q.raw("values");
        if (!vals.is_array())
            throw DataError("'" + q.child("values") + "' must be a list");
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const std::string p = q.child("values") + "[" + std::to_string(i) + "]";
            SweepValue sv;
            if (c.sweep == SweepVariable::Channel) {
                sv.fading = fading_from(vals[i], p);
            } else {
                if (!vals[i].is_number())
                    throw DataError("'" + p + "' must be a number");
                sv.number = vals[i].get<double>();
            }
            c.values.push_back(sv);
        }
        q.finish();
    }
    c.threads = r.opt<std::size_t>("threads", 0);
    c.detect_preamble = r.opt<bool>("detect_preamble", c.detect_preamble);
    c.detect_threshold = r.opt<double>("detect_threshold", c.detect_threshold);
    c.guard_samples = r.opt<std::size_t>("guard_samples", c.guard_samples);
    c.store_samples = r.opt<bool>("store_samples", c.store_samples);
    if (r.has("mu"))
        c.mu = r.req<int>("mu");
    else
        r.opt<int>("mu", 0);
    if (r.has("lambda"))
        c.lambda = r.req<double>("lambda");
    else
        r.opt<int>("lambda", 0);
    r.finish();
    return c;
}

ojson campaign_json(const CampaignSpec& c)
{
    ojson j;
    j["model"] = model_name(c.model);
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["database"] = fingerprint::mode_name(c.database);
    j["references_per_device"] = c.references_per_device;
    j["calibration_per_device"] = c.calibration_per_device;
    j["enrollment"] = {{"distance_m", c.enrollment.distance_m},
                       {"snr_db", c.enrollment.snr_db},
                       {"fading", fading_json(c.enrollment.fading)}};
    ojson vals = ojson::array();
    for (const auto& v : c.values)
        vals.push_back(c.sweep == SweepVariable::Channel ? fading_json(v.fading) : ojson(v.number));
    j["sweep"] = {{"variable", sweep_name(c.sweep)}, {"values", vals}};
    j["threads"] = c.threads;
    j["detect_preamble"] = c.detect_preamble;
    j["detect_threshold"] = c.detect_threshold;
    j["guard_samples"] = c.guard_samples;
    j["store_samples"] = c.store_samples;
    j["mu"] = c.mu ? ojson(*c.mu) : ojson(nullptr);
    j["lambda"] = c.lambda ? ojson(*c.lambda) : ojson(nullptr);
    return j;
}

ojson scenario_document(const Scenario& s, bool include_runtime)
{
    ojson j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["name"] = s.name;
    ojson devs = ojson::array();
    for (const auto& d : s.devices)
        devs.push_back(device_json(d));
    j["devices"] = devs;
    j["receiver"] = receiver_json(s.receiver);
    j["channel"] = channel_json(s.channel);
    j["protocol"] = protocol_json(s.protocol);
    j["fingerprint"] = fingerprint_json(s.fingerprint);
    j["campaign"] = campaign_json(s.campaign);
    if (!include_runtime)
        j["campaign"].erase("threads");
    return j;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

Scenario scenario_from_json(const std::string& text)
{
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string what = e.what();
        const auto pos = what.find("syntax error");
        throw DataError("scenario parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                        ": " + (pos == std::string::npos ? what : what.substr(pos)));
    }
    ObjectReader r(j, "");
    const int version = r.req<int>("schema_version");
    if (version != kScenarioSchemaVersion)
        throw DataError("scenario schema version " + std::to_string(version) + " unsupported (expected " +
                        std::to_string(kScenarioSchemaVersion) + ")");
    Scenario s;
    try {
        s.name = r.opt<std::string>("name", s.name);
        const auto& devs = r.raw("devices");
        if (!devs.is_array())
            throw DataError("'devices' must be a list");
        for (std::size_t i = 0; i < devs.size(); ++i)
            s.devices.push_back(device_from(devs[i], "devices[" + std::to_string(i) + "]"));
        if (r.has("receiver"))
            s.receiver = receiver_from(r.raw("receiver"), "receiver");
        else {
            r.opt<int>("receiver", 0);
            s.receiver.adc_full_scale = 4.0;
        }
        if (r.has("channel"))
            s.channel = channel_from(r.raw("channel"), "channel");
        else
            r.opt<int>("channel", 0);
        if (r.has("protocol"))
            s.protocol = protocol_from(r.raw("protocol"), "protocol");
        else
            r.opt<int>("protocol", 0);
        if (r.has("fingerprint"))
            s.fingerprint = fingerprint_from(r.raw("fingerprint"), "fingerprint");
        else
            r.opt<int>("fingerprint", 0);
        s.campaign = campaign_from(r.raw("campaign"), "campaign");
        r.finish();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid scenario: ") + e.what());
    }
    s.validate();
    return s;
}

std::string scenario_to_json(const Scenario& s)
{
    return scenario_document(s, true).dump(2);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write scenario file '" + path + "'");
    out << scenario_to_json(s) << '\n';
}

std::string config_hash(const Scenario& s)
{
    // thread count does not change results, so it stays out of the hash
    const std::string doc = scenario_document(s, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : doc) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string sweep_name(SweepVariable v)
{
    switch (v) {
    case SweepVariable::Distance:
        return "distance";
    case SweepVariable::SampleRate:
        return "sample_rate";
    case SweepVariable::NFft:
        return "n_fft";
    case SweepVariable::Channel:
        return "channel";
    case SweepVariable::Snr:
        return "snr";
    }
    return "unknown";
}

SweepVariable parse_sweep(const std::string& s)
{
    if (s == "distance")
        return SweepVariable::Distance;
    if (s == "sample_rate")
        return SweepVariable::SampleRate;
    if (s == "n_fft")
        return SweepVariable::NFft;
    if (s == "channel")
        return SweepVariable::Channel;
    if (s == "snr")
        return SweepVariable::Snr;
    throw std::invalid_argument("unknown sweep variable '" + s + "'");
}

std::string model_name(CampaignModel m)
{
    return m == CampaignModel::Waveform ? "waveform" : "energy_detector";
}

CampaignModel parse_model(const std::string& s)
{
    if (s == "waveform")
        return CampaignModel::Waveform;
    if (s == "energy_detector")
        return CampaignModel::EnergyDetector;
    throw std::invalid_argument("unknown campaign model '" + s + "'");
}

} // namespace wpli::harness
