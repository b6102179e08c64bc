// SPDX-License-Identifier: Apache-2.0

#include "wpli/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wpli::waveform {

namespace {

bool is_pow2(int m)
{
    return m >= 2 && (m & (m - 1)) == 0;
}

int log2i(int m)
{
    int k = 0;
    while ((1 << k) < m)
        ++k;
    return k;
}

unsigned gray_decode(unsigned g)
{
    unsigned i = g;
    for (unsigned s = g >> 1; s != 0; s >>= 1)
        i ^= s;
    return i;
}

unsigned read_bits(const std::vector<std::uint8_t>& bits, std::size_t pos, int count)
{
    unsigned v = 0;
    for (int i = 0; i < count; ++i) {
        if (bits[pos + static_cast<std::size_t>(i)] > 1)
            throw std::invalid_argument("bit sequence must contain only 0 and 1");
        v = (v << 1) | bits[pos + static_cast<std::size_t>(i)];
    }
    return v;
}

} // namespace

cplx psk_point(int x, int M)
{
    return std::polar(1.0, kPi * static_cast<double>(x) / static_cast<double>(M));
}

SymbolStream map_symbols(const std::vector<std::uint8_t>& bits, const Scheme& scheme, double symbol_period_s)
{
    if (!(symbol_period_s > 0.0))
        throw std::invalid_argument("symbol period must be positive");
    if (bits.empty())
        throw std::invalid_argument("bit sequence is empty");

    SymbolStream out;
    out.modulation = scheme.kind;
    out.order = scheme.order;
    out.symbol_period_s = symbol_period_s;

    switch (scheme.kind) {
    case Modulation::MPSK: {
        if (!is_pow2(scheme.order))
            throw std::invalid_argument("PSK order must be a power of two");
        const int k = log2i(scheme.order);
        if (bits.size() % static_cast<std::size_t>(k) != 0)
            throw std::invalid_argument("bit count not divisible by log2(M)");
        for (std::size_t p = 0; p < bits.size(); p += static_cast<std::size_t>(k)) {
            const unsigned i = gray_decode(read_bits(bits, p, k));
            out.symbols.push_back(psk_point(2 * static_cast<int>(i) + 1, scheme.order));
        }
        break;
    }
    case Modulation::MQAM: {
        if (!is_pow2(scheme.order) || log2i(scheme.order) % 2 != 0)
            throw std::invalid_argument("QAM order must be an even power of two (square constellation)");
        const int k = log2i(scheme.order);
        const int half = k / 2;
        if (bits.size() % static_cast<std::size_t>(k) != 0)
            throw std::invalid_argument("bit count not divisible by log2(M)");
        const double side = std::sqrt(static_cast<double>(scheme.order));
        const double scale = 1.0 / std::sqrt(2.0 * (scheme.order - 1) / 3.0);
        for (std::size_t p = 0; p < bits.size(); p += static_cast<std::size_t>(k)) {
            const double li = 2.0 * gray_decode(read_bits(bits, p, half)) - (side - 1.0);
            const double lq = 2.0 * gray_decode(read_bits(bits, p + static_cast<std::size_t>(half), half)) - (side - 1.0);
            out.symbols.emplace_back(li * scale, lq * scale);
        }
        break;
    }
    case Modulation::OQPSK: {
        if (scheme.order != 4)
            throw std::invalid_argument("OQPSK order must be 4");
        if (bits.size() % 2 != 0)
            throw std::invalid_argument("bit count not divisible by log2(M)");
        out.symbol_period_s = symbol_period_s / 2.0;
        for (std::size_t n = 0; n < bits.size(); ++n) {
            const double v = 2.0 * read_bits(bits, n, 1) - 1.0;
            out.symbols.push_back(n % 2 == 0 ? cplx(v, 0.0) : cplx(0.0, v));
        }
        break;
    }
    }
    return out;
}

double rrc(double t, double T, double beta)
{
    if (!(beta > 0.0) || beta > 1.0)
        throw std::invalid_argument("RRC rolloff must be in (0, 1]");
    const double x = t / T;
    if (std::abs(x) < 1e-12)
        return 1.0 - beta + 4.0 * beta / kPi;
    const double xs = 1.0 / (4.0 * beta);
    if (std::abs(std::abs(x) - xs) < 1e-10) {
        const double a = kPi / (4.0 * beta);
        return beta / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
    const double den = kPi * x * (1.0 - 16.0 * beta * beta * x * x);
    return num / den;
}

double pulse_support(const ShapingFilter& filter, double T)
{
    if (filter.kind == PulseShape::HalfSine)
        return 2.0 * T;
    return static_cast<double>(filter.span_symbols) * T;
}

double pulse(const ShapingFilter& filter, double t, double T)
{
    const double support = pulse_support(filter, T);
    if (t < 0.0 || t >= support)
        return 0.0;
    if (filter.kind == PulseShape::HalfSine)
        return std::sin(kPi * t / (2.0 * T));
    return rrc(t - support / 2.0, T, filter.rolloff);
}

std::vector<double> realize_periods(std::size_t count, double T, const ClockModel& clock)
{
    if (clock.tie_sigma_s < 0.0)
        throw std::invalid_argument("TIE sigma must be non-negative");
    std::vector<double> periods(count, T);
    if (clock.tie_sigma_s == 0.0)
        return periods;
    Rng rng(clock.seed);
    std::normal_distribution<double> tie(0.0, clock.tie_sigma_s);
    for (std::size_t m = 0; m < count; ++m) {
        periods[m] = T + tie(rng);
        if (!(periods[m] > 0.0))
            throw NumericalError("realized symbol period is non-positive at symbol " + std::to_string(m));
    }
    return periods;
}

ShapedSequence shape_and_jitter(const SymbolStream& stream, const ShapingFilter& filter, const ClockModel& clock,
                                const DacModel& dac)
{
    if (stream.symbols.empty())
        throw std::invalid_argument("symbol stream is empty");
    const double T = stream.symbol_period_s;
    const double Tg = dac.generation_period_s;
    if (!(T > 0.0) || !(Tg > 0.0))
        throw std::invalid_argument("symbol and generation periods must be positive");
    if (Tg > T / 8.0 * (1.0 + 1e-12))
        throw std::invalid_argument("generation period must satisfy T_g <= T/8");
    if (filter.kind == PulseShape::RootRaisedCosine && (filter.span_symbols < 2 || filter.span_symbols % 2 != 0))
        throw std::invalid_argument("RRC span must be an even number of symbols >= 2");

    const auto periods = realize_periods(stream.symbols.size(), T, clock);
    std::vector<double> starts(periods.size());
    double t = 0.0;
    for (std::size_t m = 0; m < periods.size(); ++m) {
        starts[m] = t;
        t += periods[m];
    }
    const double end = starts.back() + pulse_support(filter, periods.back());
    double last_end = end;
    for (std::size_t m = 0; m < periods.size(); ++m)
        last_end = std::max(last_end, starts[m] + pulse_support(filter, periods[m]));

    const auto n_samples = static_cast<std::size_t>(std::ceil(last_end / Tg - 1e-9));
    ShapedSequence out;
    out.period_s = Tg;
    out.samples.assign(n_samples, cplx(0.0, 0.0));

    for (std::size_t m = 0; m < periods.size(); ++m) {
        const double Tm = periods[m];
        const double s0 = starts[m];
        const double sup = pulse_support(filter, Tm);
        auto n0 = static_cast<std::size_t>(std::max(0.0, std::ceil(s0 / Tg - 1e-9)));
        for (std::size_t n = n0; n < n_samples; ++n) {
            const double tau = static_cast<double>(n) * Tg - s0;
            if (tau >= sup)
                break;
            out.samples[n] += dac.amplitude * stream.symbols[m] * pulse(filter, tau, Tm);
        }
    }
    return out;
}

double quantize(double v, int bits, double full_scale, int* code)
{
    const double levels = std::ldexp(1.0, bits);
    const double step = 2.0 * full_scale / levels;
    double k = std::floor(v / step);
    const double kmax = levels / 2.0 - 1.0;
    k = std::clamp(k, -levels / 2.0, kmax);
    if (code)
        *code = static_cast<int>(k + levels / 2.0);
    return (k + 0.5) * step;
}

ComplexSignal dac_convert(const ShapedSequence& u, const DacModel& dac)
{
    if (dac.bits < 1 || dac.bits > 30)
        throw std::invalid_argument("DAC resolution must be 1..30 bits");
    if (!(dac.full_scale > 0.0))
        throw std::invalid_argument("DAC full scale must be positive");
    if (dac.hold_factor < 1)
        throw std::invalid_argument("DAC hold factor must be >= 1");
    if (!dac.inl.empty() && dac.inl.size() != (std::size_t{1} << dac.bits))
        throw std::invalid_argument("INL table length must equal 2^bits");
    if (!(u.period_s > 0.0) || u.samples.empty())
        throw std::invalid_argument("DAC input sequence is empty or has no period");

    std::size_t clipped = 0;
    for (const auto& s : u.samples)
        if (std::abs(s.real()) > dac.full_scale || std::abs(s.imag()) > dac.full_scale)
            ++clipped;
    if (clipped > 0)
        throw DataError("DAC clipping: " + std::to_string(clipped) + " of " + std::to_string(u.samples.size()) +
                        " samples exceed full scale");

    ComplexSignal out;
    out.sample_rate_hz = static_cast<double>(dac.hold_factor) / u.period_s;
    out.samples.reserve(u.samples.size() * static_cast<std::size_t>(dac.hold_factor));
    for (const auto& s : u.samples) {
        int ci = 0;
        int cq = 0;
        double i = quantize(s.real(), dac.bits, dac.full_scale, &ci);
        double q = quantize(s.imag(), dac.bits, dac.full_scale, &cq);
        if (!dac.inl.empty()) {
            i += dac.inl[static_cast<std::size_t>(ci)];
            q += dac.inl[static_cast<std::size_t>(cq)];
        }
        for (int h = 0; h < dac.hold_factor; ++h)
            out.samples.emplace_back(i, q);
    }
    return out;
}

const std::vector<std::uint8_t>& zero_symbol_chips()
{
    static const std::vector<std::uint8_t> chips = {1, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1,
                                                    0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0};
    return chips;
}

std::vector<std::uint8_t> default_preamble_bits(int repeats)
{
    if (repeats < 1)
        throw std::invalid_argument("preamble repeat count must be >= 1");
    std::vector<std::uint8_t> bits;
    for (int r = 0; r < repeats; ++r)
        bits.insert(bits.end(), zero_symbol_chips().begin(), zero_symbol_chips().end());
    return bits;
}

std::vector<std::uint8_t> prbs_bits(std::size_t count, std::uint16_t state)
{
    if ((state & 0x7fff) == 0)
        throw std::invalid_argument("PRBS state must be nonzero");
    unsigned s = state & 0x7fffu;
    std::vector<std::uint8_t> out(count);
    for (auto& b : out) {
        const unsigned nb = ((s >> 14) ^ (s >> 13)) & 1u;
        s = ((s << 1) | nb) & 0x7fffu;
        b = static_cast<std::uint8_t>(nb);
    }
    return out;
}

Scheme parse_scheme(const std::string& name)
{
    if (name == "oqpsk")
        return {Modulation::OQPSK, 4};
    auto order_of = [&](std::size_t prefix) {
        try {
            std::size_t used = 0;
            const int m = std::stoi(name.substr(prefix), &used);
            if (used != name.size() - prefix)
                throw std::invalid_argument("trailing characters");
            return m;
        } catch (const std::exception&) {
            throw std::invalid_argument("unknown modulation scheme '" + name + "'");
        }
    };
    if (name.rfind("mpsk", 0) == 0)
        return {Modulation::MPSK, order_of(4)};
    if (name.rfind("mqam", 0) == 0)
        return {Modulation::MQAM, order_of(4)};
    throw std::invalid_argument("unknown modulation scheme '" + name + "'");
}

std::string scheme_name(const Scheme& s)
{
    switch (s.kind) {
    case Modulation::OQPSK:
        return "oqpsk";
    case Modulation::MPSK:
        return "mpsk" + std::to_string(s.order);
    case Modulation::MQAM:
        return "mqam" + std::to_string(s.order);
    }
    return "unknown";
}

PulseShape parse_pulse(const std::string& name)
{
    if (name == "half_sine")
        return PulseShape::HalfSine;
    if (name == "rrc")
        return PulseShape::RootRaisedCosine;
    throw std::invalid_argument("unknown pulse shape '" + name + "'");
}

std::string pulse_name(PulseShape p)
{
    return p == PulseShape::HalfSine ? "half_sine" : "rrc";
}

} // namespace wpli::waveform
