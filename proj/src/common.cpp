// SPDX-License-Identifier: Apache-2.0

#include "wpli/common.hpp"

#include <cmath>

namespace wpli {

double ComplexSignal::mean_power() const
{
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (const auto& s : samples)
        acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

void ComplexSignal::validate() const
{
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
        throw std::invalid_argument("signal sample rate must be positive");
    if (samples.empty())
        throw std::invalid_argument("signal must contain at least one sample");
    if (domain == SignalDomain::Passband && !(carrier_hz > 0.0))
        throw std::invalid_argument("passband signal must record a positive carrier frequency");
}

std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x51ed270b27b1f3a5ULL));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(base, a), b);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return derive_seed(derive_seed(base, a, b), c);
}

void add_complex_noise(std::vector<cplx>& x, double variance, Rng& rng)
{
    if (variance <= 0.0)
        return;
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    for (auto& s : x)
        s += cplx(gauss(rng), gauss(rng));
}

} // namespace wpli
