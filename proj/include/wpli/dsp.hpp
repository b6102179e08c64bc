// SPDX-License-Identifier: Apache-2.0
//
// FFT and spectral-estimation helpers shared by the signal-chain modules.

#ifndef WPLI_DSP_HPP
#define WPLI_DSP_HPP

#include "wpli/common.hpp"

#include <cstddef>
#include <vector>

namespace wpli::dsp {

/// Forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N). Unnormalized.
std::vector<cplx> fft(std::vector<cplx> x);

/// Inverse DFT including the 1/N factor.
std::vector<cplx> ifft(std::vector<cplx> X);

std::size_t next_pow2(std::size_t n);

/// Frequencies of DFT bins in natural order (0, df, ..., -df).
std::vector<double> fft_frequencies(std::size_t n, double fs);

/// Reorder a natural-order spectrum so that frequencies run from -fs/2 upward.
template <typename T>
std::vector<T> fftshift(const std::vector<T>& x)
{
    const std::size_t n = x.size();
    const std::size_t h = n / 2;
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[(i + n - h) % n];
    return out;
}

/// Full linear convolution via FFT, length x.size() + h.size() - 1.
std::vector<cplx> convolve(const std::vector<cplx>& x, const std::vector<double>& h);

std::vector<double> hann(std::size_t n);

/// Kaiser-window lowpass, cutoff and transition in Hz. Odd length, unit DC gain.
std::vector<double> kaiser_lowpass(double fs, double cutoff_hz, double transition_hz,
                                   double attenuation_db);

/// Averaged Hann-window cross-spectral densities.
///
/// Segments of length `segment` hop by segment/2. For every pair (p, q) of input
/// streams the estimate S_pq[k] = mean_s X_p[k] conj(X_q[k]) / (fs * sum w^2) is
/// returned in natural DFT order. Streams must share length.
std::vector<std::vector<std::vector<cplx>>> welch_cross(const std::vector<std::vector<cplx>>& streams,
                                                        double fs, std::size_t segment);

/// Single-stream Welch PSD in W/Hz (two-sided, natural order).
std::vector<double> welch_psd(const std::vector<cplx>& x, double fs, std::size_t segment);

/// Ideal filter: keep DFT bins with |f - center_hz| < half_width_hz, zero the rest.
std::vector<cplx> brickwall(const std::vector<cplx>& x, double fs, double center_hz, double half_width_hz);

} // namespace wpli::dsp

#endif
