// SPDX-License-Identifier: Apache-2.0
//
// Transmit baseband generation: symbol mapping, pulse shaping with clock jitter,
// and the DAC quantizer with zero-order hold.

#ifndef WPLI_WAVEFORM_HPP
#define WPLI_WAVEFORM_HPP

#include "wpli/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wpli::waveform {

enum class Modulation { MPSK, MQAM, OQPSK };

struct Scheme {
    Modulation kind = Modulation::OQPSK;
    int order = 4;
};

/// Mapped symbols at a nominal period. For OQPSK the stream is the interleaved
/// chip sequence: even entries are +-1 (I branch), odd entries +-j (Q branch),
/// and `symbol_period_s` is the chip spacing, half the QPSK symbol period.
struct SymbolStream {
    std::vector<cplx> symbols;
    double symbol_period_s = 0.0;
    int order = 4;
    Modulation modulation = Modulation::OQPSK;
};

enum class PulseShape { HalfSine, RootRaisedCosine };

struct ShapingFilter {
    PulseShape kind = PulseShape::HalfSine;
    double rolloff = 0.5;     // RRC only, in (0, 1]
    int span_symbols = 8;     // RRC only, truncation span (centered)
};

struct ClockModel {
    double tie_sigma_s = 0.0;
    std::uint64_t seed = 0;
};

struct DacModel {
    int bits = 12;
    double full_scale = 1.0;          // U
    double generation_period_s = 0.0; // T_g
    std::vector<double> inl;          // per-code deviation in volts, empty or 2^bits long
    double amplitude = 1.0;           // A
    int hold_factor = 1;              // output samples per T_g
};

/// Discrete sequence u[n] on the T_g grid.
struct ShapedSequence {
    std::vector<cplx> samples;
    double period_s = 0.0;
};

/// exp(j pi x / M).
cplx psk_point(int x, int M);

SymbolStream map_symbols(const std::vector<std::uint8_t>& bits, const Scheme& scheme,
                         double symbol_period_s);

/// Dimensionless pulse value at time t (seconds) after the pulse start.
/// Half-sine occupies [0, 2T); RRC is centered at span*T/2.
double pulse(const ShapingFilter& filter, double t, double T);

/// Pulse support in seconds for nominal period T.
double pulse_support(const ShapingFilter& filter, double T);

/// Centered root-raised-cosine h(t) with sqrt(T) normalization removed, so h(0) = 1 - beta + 4 beta / pi.
double rrc(double t, double T, double beta);

/// Realized per-symbol periods T_m = T + e_m, e_m ~ N(0, sigma^2).
std::vector<double> realize_periods(std::size_t count, double T, const ClockModel& clock);

ShapedSequence shape_and_jitter(const SymbolStream& stream, const ShapingFilter& filter,
                                const ClockModel& clock, const DacModel& dac);

/// Mid-rise quantizer reconstruction level for one real component.
double quantize(double v, int bits, double full_scale, int* code = nullptr);

ComplexSignal dac_convert(const ShapedSequence& u, const DacModel& dac);

/// 802.15.4 chip sequence for data symbol zero.
const std::vector<std::uint8_t>& zero_symbol_chips();

/// `repeats` copies of the zero-symbol chip sequence (default 8 -> 128 chips per branch).
std::vector<std::uint8_t> default_preamble_bits(int repeats = 8);

/// Pseudo-random bits from a 15-bit maximal LFSR (x^15 + x^14 + 1).
std::vector<std::uint8_t> prbs_bits(std::size_t count, std::uint16_t state = 0x7fff);

Scheme parse_scheme(const std::string& name);
std::string scheme_name(const Scheme& s);
PulseShape parse_pulse(const std::string& name);
std::string pulse_name(PulseShape p);

} // namespace wpli::waveform

#endif
