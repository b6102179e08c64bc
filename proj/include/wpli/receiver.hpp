// SPDX-License-Identifier: Apache-2.0
//
// Capture chain (RX nonlinearity, quadrature down-conversion, two-level lowpass,
// decimating ADC), preamble detection and PSD fingerprints.

#ifndef WPLI_RECEIVER_HPP
#define WPLI_RECEIVER_HPP

#include "wpli/common.hpp"
#include "wpli/rfchain.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wpli::receiver {

struct LowPassSpec {
    double passband_gain = 1.0;      // A_p
    double stopband_gain = 0.0;      // A_s
    double cutoff_hz = 0.0;          // W; 0 selects f_s / 2
    double transition_fraction = 0.05;
    double attenuation_db = 90.0;    // Kaiser design target for the unit lowpass
};

struct ReceiverProfile {
    rfchain::PaPowerSeries pa_rx;
    rfchain::MixerModel mixer;
    LowPassSpec lpf;
    int adc_bits = 12;
    double adc_full_scale = 1.0;
    double sample_rate_hz = 8e6;

    double cutoff_hz() const { return lpf.cutoff_hz > 0.0 ? lpf.cutoff_hz : sample_rate_hz / 2.0; }
    void validate() const;
};

struct Capture {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;
    std::size_t clipped = 0;
    double clip_fraction = 0.0;
};

enum class PsdNormalization { None, UnitPower };
enum class PsdEstimator { Periodogram, Welch };

struct FingerprintVector {
    std::vector<double> psd;   // natural DFT order, W/Hz
    std::size_t n_fft = 0;
    double sample_rate_hz = 0.0;
    double bandwidth_hz = 0.0; // f_s / 2
    std::size_t length = 0;    // L, samples used
    PsdNormalization normalization = PsdNormalization::None;
    PsdEstimator estimator = PsdEstimator::Periodogram;

    void validate() const;
};

/// Lowpass taps for the given input rate: A_s * delta + (A_p - A_s) * h_lp, linear phase.
/// Designs are cached per parameter set.
const std::vector<double>& lowpass_taps(double input_rate_hz, const LowPassSpec& spec, double cutoff_hz);

/// Demodulated envelope: Re{v e^{-j zeta/2}} + j Im{v e^{j zeta/2}}.
std::vector<cplx> quadrature_downconvert(const std::vector<cplx>& v, double zeta);

/// Mid-rise ADC quantizer that saturates; returns the number of clipped samples.
std::size_t adc_quantize(std::vector<cplx>& x, int bits, double full_scale);

Capture rx_capture(const ComplexSignal& r, const ReceiverProfile& profile);

/// First sample of the packet: find the first sliding window whose variance exceeds
/// k times the noise floor, then the first sample in it whose power exceeds the
/// same level. The noise floor is the smallest window variance in the capture.
std::size_t detect_preamble(const std::vector<cplx>& x, std::size_t window, double threshold_factor);

FingerprintVector psd_fingerprint(const std::vector<cplx>& x, double sample_rate_hz, std::size_t n_fft,
                                  PsdNormalization norm = PsdNormalization::None);

/// Welch-averaged variant (Hann, 50% overlap, segment = n_fft).
FingerprintVector psd_fingerprint_welch(const std::vector<cplx>& x, double sample_rate_hz, std::size_t n_fft,
                                        PsdNormalization norm = PsdNormalization::None);

std::string normalization_name(PsdNormalization n);
PsdNormalization parse_normalization(const std::string& s);

} // namespace wpli::receiver

#endif
