// SPDX-License-Identifier: Apache-2.0
//
// Scenario configuration, Monte Carlo campaigns, result files and IQ capture IO.
//
// A campaign runs the full chain per trial: preamble -> device impairments ->
// statistical channel -> receiver capture -> PSD fingerprint -> classify and
// identify. Two decision databases are supported: `fixed` enrolls once at the
// enrollment condition, `updated` re-enrolls at every sweep point. The
// `energy_detector` model instead simulates the identification statistic
// directly and sits next to the closed forms in `analytics`.

#ifndef WPLI_HARNESS_HPP
#define WPLI_HARNESS_HPP

#include "wpli/analytics.hpp"
#include "wpli/channel.hpp"
#include "wpli/common.hpp"
#include "wpli/fingerprint.hpp"
#include "wpli/receiver.hpp"
#include "wpli/rfchain.hpp"
#include "wpli/waveform.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wpli::harness {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kResultSchemaVersion = 1;
inline constexpr int kIqSchemaVersion = 1;

/// Every hardware imperfection of one transmitter.
struct DeviceProfile {
    std::string id;
    rfchain::PaPowerSeries pa;
    double quadrature_error = 0.0;
    double tie_sigma_s = 0.0;
    int dac_bits = 12;
    double dac_full_scale = 1.0;
    std::vector<double> inl;   // explicit table, volts per code
    double inl_sigma_lsb = 0.0; // random table when `inl` is empty
    std::uint64_t inl_seed = 0;
    double amplitude = 0.5;

    void validate() const;
    /// DAC settings with the INL table materialized.
    waveform::DacModel dac(double generation_period_s) const;
};

struct ProtocolSpec {
    waveform::Scheme scheme;
    waveform::ShapingFilter shaping;
    double symbol_rate_hz = 1e6;   // QPSK symbols; OQPSK chips run at twice this
    std::vector<std::uint8_t> preamble_bits = waveform::default_preamble_bits();
    double carrier_hz = 2.405e9;
    double simulation_rate_hz = 32e6;

    void validate() const;
    double preamble_duration_s() const;
};

struct ChannelSpec {
    channel::FadingModel fading;
    double distance_m = 1.0;
    double reference_distance_m = 1.0;
    double path_loss_exponent = 1.2850972089384953; // 10 dB between 1 m and 6 m
    double shadowing_sigma_db = 0.0;
    double snr_db_at_reference = 25.0;
    double snr_bandwidth_hz = 2e6;

    void validate() const;
    channel::PathLossModel path_loss() const;
};

struct FingerprintSpec {
    std::size_t n_fft = 1024; // at the receiver's nominal sample rate
    // keep bin spacing fixed when the sample rate is swept
    bool fixed_resolution = true;
    receiver::PsdNormalization normalization = receiver::PsdNormalization::None;
    receiver::PsdEstimator estimator = receiver::PsdEstimator::Periodogram;
    bool cancel_rx = true; // only acts when the receiver is nonlinear
    int kappa = 5;
    double lda_ridge = 1e-3;
    fingerprint::SigmaMode sigma_mode = fingerprint::SigmaMode::AcrossReferences;

    void validate() const;
};

enum class CampaignModel { Waveform, EnergyDetector };
enum class SweepVariable { Distance, SampleRate, NFft, Channel, Snr };

struct SweepValue {
    double number = 0.0;
    channel::FadingModel fading; // Channel sweeps only
};

struct EnrollmentSpec {
    double distance_m = 0.1;
    double snr_db = 30.0;
    channel::FadingModel fading; // AWGN by default
};

struct CampaignSpec {
    CampaignModel model = CampaignModel::Waveform;
    std::size_t trials = 2000;
    std::uint64_t seed = 0;
    fingerprint::DatabaseMode database = fingerprint::DatabaseMode::Updated;
    std::size_t references_per_device = 30;
    std::size_t calibration_per_device = 10;
    EnrollmentSpec enrollment;
    SweepVariable sweep = SweepVariable::Distance;
    std::vector<SweepValue> values;
    std::size_t threads = 0; // 0 = hardware concurrency
    bool detect_preamble = false;
    double detect_threshold = 4.0;
    std::size_t guard_samples = 0; // silence around the burst at the simulation rate
    bool store_samples = true;
    // energy detector model
    std::optional<int> mu;
    std::optional<double> lambda;

    void validate() const;
};

struct Scenario {
    std::string name = "scenario";
    std::vector<DeviceProfile> devices;
    receiver::ReceiverProfile receiver;
    ChannelSpec channel;
    ProtocolSpec protocol;
    FingerprintSpec fingerprint;
    CampaignSpec campaign;

    void validate() const;
};

/// Closed-form companions of one sweep point.
struct Predictions {
    std::optional<double> class_pe;  // two-device Gaussian model
    std::optional<double> ident_eer; // energy detector at matched gamma
    std::optional<double> ident_grr;
    std::optional<double> ident_frr;
    double gamma = 0.0;
    int mu = 0;
};

struct PointResult {
    std::size_t index = 0;
    std::string label;
    double value = 0.0;
    double snr_db = 0.0;
    double sample_rate_hz = 0.0;
    std::size_t n_fft = 0;
    std::string channel;
    fingerprint::DecisionReport report;
    Predictions predictions;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version;
    std::string scenario_name;
    double noise_psd_w_per_hz = 0.0;
};

struct CampaignResult {
    Provenance provenance;
    std::string model;
    std::string sweep_variable;
    std::string database_mode;
    std::vector<PointResult> points;
};

// Scenario files ------------------------------------------------------------

/// Parses a scenario document. Syntax errors carry line and column; unknown keys
/// and schema mismatches name the offending path. Both throw DataError.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// FNV-1a over the canonical scenario document, as 16 hex digits.
std::string config_hash(const Scenario& s);

/// Two- or more-device default used by the CLI and tests.
Scenario default_scenario(std::size_t devices = 3);

// Campaign ------------------------------------------------------------------

/// Baseband PA output of one burst at the simulation rate, tagged with its carrier.
ComplexSignal transmit(const DeviceProfile& device, const ProtocolSpec& protocol, std::uint64_t seed,
                       std::size_t guard_samples = 0);

/// Noise density that yields `snr_db_at_reference` for the first device at the reference distance.
double calibrate_noise_psd(const Scenario& s);

struct CaptureCondition {
    double distance_m = 1.0;
    channel::FadingModel fading;
    double noise_psd_w_per_hz = 0.0;
    double sample_rate_hz = 8e6;
    std::size_t n_fft = 1024;
};

/// One capture of `device` under `cond`, reduced to its fingerprint.
receiver::FingerprintVector capture_fingerprint(const Scenario& s, std::size_t device, const CaptureCondition& cond,
                                                std::uint64_t seed);

using ProgressFn = std::function<void(std::size_t point, std::size_t total)>;

CampaignResult run_campaign(const Scenario& s, const ProgressFn& progress = {});

/// Runs `fn(i)` for i in [0, n) on `threads` workers (0 = hardware concurrency).
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// Result files --------------------------------------------------------------

std::string result_to_json(const CampaignResult& r);
CampaignResult result_from_json(const std::string& text);
void save_result(const CampaignResult& r, const std::string& path);
CampaignResult load_result(const std::string& path);

/// Long-format table: point, sweep variable, value, metric, value, trials.
std::string result_to_csv(const CampaignResult& r);

// IQ captures ---------------------------------------------------------------

struct IqMeta {
    double sample_rate_hz = 0.0;
    std::optional<double> carrier_hz;
};

/// Interleaved little-endian float32 I/Q pairs. Throws DataError on a truncated
/// file or missing sample rate.
ComplexSignal ingest_iq(const std::string& path, const IqMeta& meta);

/// Sidecar metadata document next to an IQ file (`<path>.json`).
IqMeta load_iq_meta(const std::string& path);
std::string iq_meta_path(const std::string& iq_path);

/// Writes the samples as float32 pairs plus the sidecar.
void write_iq(const std::string& path, const ComplexSignal& signal);

// Names ----------------------------------------------------------------------

std::string sweep_name(SweepVariable v);
SweepVariable parse_sweep(const std::string& s);
std::string model_name(CampaignModel m);
CampaignModel parse_model(const std::string& s);

} // namespace wpli::harness

#endif
