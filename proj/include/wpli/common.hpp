// SPDX-License-Identifier: Apache-2.0
//
// Shared value types, error classes and seeding helpers.

#ifndef WPLI_COMMON_HPP
#define WPLI_COMMON_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpli {

using cplx = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Malformed input data, files or configuration (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: non-convergence, singularity, range overflow (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SignalDomain { Baseband, Passband };

/// Uniformly sampled complex waveform.
///
/// Passband signals are held as their complex envelope relative to `carrier_hz`;
/// the real RF waveform is Re{samples[n] * exp(j 2 pi carrier_hz n / sample_rate_hz)}.
struct ComplexSignal {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;
    SignalDomain domain = SignalDomain::Baseband;
    double carrier_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
    double mean_power() const;

    /// Throws std::invalid_argument if the invariants do not hold.
    void validate() const;
};

/// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for stream `stream` under base seed `base`; stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Circular complex Gaussian with E|n|^2 = variance.
void add_complex_noise(std::vector<cplx>& x, double variance, Rng& rng);

} // namespace wpli

#endif
