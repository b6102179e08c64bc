// SPDX-License-Identifier: Apache-2.0

#include "wpli/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace wpli::dsp {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new arrays is.
class PlanCache {
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end())
            return it->second;
        std::vector<cplx> a(n), b(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p)
            throw std::runtime_error("fftw planning failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

std::vector<cplx> run(const std::vector<cplx>& in, int sign)
{
    std::vector<cplx> out(in.size());
    if (in.empty())
        return out;
    fftw_plan p = cache().get(in.size(), sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

} // namespace

std::vector<cplx> fft(std::vector<cplx> x)
{
    return run(x, FFTW_FORWARD);
}

std::vector<cplx> ifft(std::vector<cplx> X)
{
    auto out = run(X, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(out.size());
    for (auto& v : out)
        v *= s;
    return out;
}

std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

std::vector<double> fft_frequencies(std::size_t n, double fs)
{
    std::vector<double> f(n);
    const double df = fs / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<long long>(k);
        const auto nn = static_cast<long long>(n);
        f[k] = df * static_cast<double>(2 * kk < nn ? kk : kk - nn);
    }
    return f;
}

std::vector<cplx> convolve(const std::vector<cplx>& x, const std::vector<double>& h)
{
    if (x.empty() || h.empty())
        return {};
    const std::size_t len = x.size() + h.size() - 1;
    const std::size_t n = next_pow2(len);
    std::vector<cplx> a(n), b(n);
    std::copy(x.begin(), x.end(), a.begin());
    for (std::size_t i = 0; i < h.size(); ++i)
        b[i] = h[i];
    auto A = fft(std::move(a));
    auto B = fft(std::move(b));
    for (std::size_t k = 0; k < n; ++k)
        A[k] *= B[k];
    auto y = ifft(std::move(A));
    y.resize(len);
    return y;
}

std::vector<double> hann(std::size_t n)
{
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    // Periodic form, the usual choice for spectral averaging.
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

std::vector<double> kaiser_lowpass(double fs, double cutoff_hz, double transition_hz, double attenuation_db)
{
    if (!(fs > 0.0) || !(cutoff_hz > 0.0) || !(transition_hz > 0.0))
        throw std::invalid_argument("kaiser_lowpass: frequencies must be positive");
    const double dw = 2.0 * kPi * transition_hz / fs;
    const double A = attenuation_db;
    double beta = 0.0;
    if (A > 50.0)
        beta = 0.1102 * (A - 8.7);
    else if (A >= 21.0)
        beta = 0.5842 * std::pow(A - 21.0, 0.4) + 0.07886 * (A - 21.0);
    auto taps = static_cast<std::size_t>(std::ceil((A - 8.0) / (2.285 * dw))) + 1;
    if (taps % 2 == 0)
        ++taps;
    const double fc = cutoff_hz / fs;
    const double mid = static_cast<double>(taps - 1) / 2.0;
    const double i0b = std::cyl_bessel_i(0.0, beta);
    std::vector<double> h(taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps; ++i) {
        const double t = static_cast<double>(i) - mid;
        const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
        const double r = t / mid;
        const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = sinc * w;
        sum += h[i];
    }
    for (auto& v : h)
        v /= sum;
    return h;
}

std::vector<std::vector<std::vector<cplx>>> welch_cross(const std::vector<std::vector<cplx>>& streams,
                                                        double fs, std::size_t segment)
{
    if (streams.empty())
        throw std::invalid_argument("welch_cross: no input streams");
    const std::size_t len = streams.front().size();
    for (const auto& s : streams)
        if (s.size() != len)
            throw std::invalid_argument("welch_cross: stream lengths differ");
    if (segment < 2 || segment > len)
        throw std::invalid_argument("welch_cross: segment length must be in [2, signal length]");

    const auto w = hann(segment);
    double wpow = 0.0;
    for (double v : w)
        wpow += v * v;
    const std::size_t hop = segment / 2;
    const std::size_t P = streams.size();

    std::vector<std::vector<std::vector<cplx>>> S(P, std::vector<std::vector<cplx>>(P, std::vector<cplx>(segment)));
    std::size_t count = 0;
    std::vector<std::vector<cplx>> X(P);
    for (std::size_t start = 0; start + segment <= len; start += hop) {
        for (std::size_t p = 0; p < P; ++p) {
            std::vector<cplx> seg(segment);
            for (std::size_t i = 0; i < segment; ++i)
                seg[i] = streams[p][start + i] * w[i];
            X[p] = fft(std::move(seg));
        }
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t q = 0; q < P; ++q)
                for (std::size_t k = 0; k < segment; ++k)
                    S[p][q][k] += X[p][k] * std::conj(X[q][k]);
        ++count;
        if (hop == 0)
            break;
    }
    const double scale = 1.0 / (static_cast<double>(count) * fs * wpow);
    for (auto& row : S)
        for (auto& v : row)
            for (auto& c : v)
                c *= scale;
    return S;
}

std::vector<double> welch_psd(const std::vector<cplx>& x, double fs, std::size_t segment)
{
    auto S = welch_cross({x}, fs, segment);
    std::vector<double> out(segment);
    for (std::size_t k = 0; k < segment; ++k)
        out[k] = S[0][0][k].real();
    return out;
}

std::vector<cplx> brickwall(const std::vector<cplx>& x, double fs, double center_hz, double half_width_hz)
{
    auto X = fft(x);
    const auto f = fft_frequencies(X.size(), fs);
    for (std::size_t k = 0; k < X.size(); ++k)
        if (!(std::abs(f[k] - center_hz) < half_width_hz))
            X[k] = 0.0;
    return ifft(std::move(X));
}

} // namespace wpli::dsp
