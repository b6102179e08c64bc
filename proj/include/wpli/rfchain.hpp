// SPDX-License-Identifier: Apache-2.0
//
// Up-conversion with quadrature error, odd-order power-amplifier model,
// spectral-regrowth prediction and power-series fitting.
//
// Everything operates on complex envelopes. A passband envelope z relates to the
// physical waveform by Re{z exp(j w_c t)}.

#ifndef WPLI_RFCHAIN_HPP
#define WPLI_RFCHAIN_HPP

#include "wpli/common.hpp"

#include <map>
#include <utility>
#include <vector>

namespace wpli::rfchain {

struct MixerModel {
    double carrier_hz = 2.405e9;
    double quadrature_error = 0.0; // zeta, radians
    void validate() const;
};

/// Odd-order coefficients a_1, a_3, ..., a_N.
struct PaPowerSeries {
    std::vector<cplx> odd{cplx(1.0, 0.0)};

    int order() const { return 2 * static_cast<int>(odd.size()) - 1; }
    void validate() const;
};

/// Ideal brick wall around the carrier; offsets are relative to the carrier.
struct BandpassFilter {
    double center_offset_hz = 0.0;
    double half_bandwidth_hz = 0.0;
};

struct RegrowthSpectrum {
    std::vector<double> frequencies_hz; // relative to carrier, ascending
    std::vector<double> psd;            // W/Hz on the same grid
    /// Cross spectra between envelope orders (2p+1, 2q+1), keyed by (p, q), same grid.
    std::map<std::pair<int, int>, std::vector<cplx>> component_terms;
};

struct PaResult {
    ComplexSignal signal;
    bool divergence_warning = false;
    double higher_to_linear_power = 0.0;
};

struct FitOptions {
    int max_iterations = 20000;
    double tolerance = 1e-10;
    double coefficient_bound = 10.0;
    double max_condition = 1e10;
};

struct FitResult {
    PaPowerSeries pa;
    double residual_db = 0.0;      // RMS dB error over fitted bins
    double condition = 0.0;        // condition number of the component-spectrum basis
    int iterations = 0;
};

/// Envelope factor C(2n+1, n+1) / 2^(2n) applied to |z|^(2n) z.
double envelope_factor(int n);

/// Baseband to passband envelope: Re{y} e^{j zeta/2} + j Im{y} e^{-j zeta/2}.
ComplexSignal mix_up(const ComplexSignal& baseband, const MixerModel& mixer);

/// Real RF samples Re{z exp(j 2 pi f_c t)} on the envelope's time grid.
std::vector<double> real_passband(const ComplexSignal& passband);

/// Memoryless odd-order envelope nonlinearity followed by an ideal bandpass.
PaResult pa_apply(const ComplexSignal& passband, const PaPowerSeries& pa, const BandpassFilter& bp);

/// Envelope nonlinearity only.
std::vector<cplx> pa_envelope(const std::vector<cplx>& z, const PaPowerSeries& pa);

/// Closed-form output PSD of the power series driven by `input`.
///
/// The estimator forms z_p = |z|^(2p) z for p = 0..(N-1)/2 and computes the
/// Hann-windowed averaged cross spectra S_pq = E[Z_p conj(Z_q)] over segments of
/// length `segment`. The output is sum_pq b_p conj(b_q) S_pq with
/// b_p = a_(2p+1) * envelope_factor(p).
RegrowthSpectrum regrowth_spectrum(const ComplexSignal& input, const PaPowerSeries& pa, std::size_t segment = 512);

/// Fit coefficients of the given odd order so that the regrowth prediction for
/// `reference_input` matches `measured_psd` (same grid as regrowth_spectrum with
/// segment = measured_psd.size()). a_1 is returned real and positive.
FitResult fit_pa_coefficients(const std::vector<double>& measured_psd, const ComplexSignal& reference_input,
                              int order, const FitOptions& options = {});

} // namespace wpli::rfchain

#endif
