// SPDX-License-Identifier: Apache-2.0
//
// Test-only helpers: seeded generators for property tests and independent
// reference implementations (extended-precision series, Boost, quadrature).
#ifndef WPLI_TESTS_SUPPORT_HPP
#define WPLI_TESTS_SUPPORT_HPP

#include "wpli/common.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace testkit {

using wpli::cplx;
using big = boost::multiprecision::cpp_bin_float_50;

/// Small deterministic generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<double> reals(std::size_t n, double lo, double hi)
    {
        std::vector<double> v(n);
        for (auto& x : v)
            x = uniform(lo, hi);
        return v;
    }
    std::vector<cplx> gaussian(std::size_t n, double sigma = 1.0)
    {
        std::vector<cplx> v(n);
        for (auto& x : v)
            x = cplx(sigma * normal(), sigma * normal());
        return v;
    }
    std::vector<std::uint8_t> bits(std::size_t n)
    {
        std::vector<std::uint8_t> v(n);
        for (auto& b : v)
            b = static_cast<std::uint8_t>(integer(0, 1));
        return v;
    }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Evenly spaced grid including both ends.
inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

/// 50-digit Taylor series of 1F1(a; b; x); no cancellation control needed at this precision.
inline double hyp1f1_series(double a, double b, double x)
{
    big term = 1;
    big sum = 1;
    const big A = a, B = b, X = x;
    const big eps = big(1e-40);
    for (int n = 0; n < 20000; ++n) {
        term *= (A + n) * X / ((B + n) * (n + 1));
        sum += term;
        if (n > 5 && abs(term) < eps * abs(sum))
            break;
    }
    return static_cast<double>(sum);
}

/// Q(s, x) for integer s: exp(-x) sum_{k<s} x^k / k!, at 50 digits.
inline big gamma_q_integer(int s, const big& x)
{
    big term = 1;
    big sum = 1;
    for (int k = 1; k < s; ++k) {
        term *= x / k;
        sum += term;
    }
    return exp(-x) * sum;
}

/// Marcum Q for integer order as a Poisson mixture of finite Erlang tails, 50 digits.
inline double marcum_q_series(int u, double a, double b)
{
    const big m = big(a) * a / 2;
    const big x = big(b) * b / 2;
    big q = gamma_q_integer(u, x); // Q(u + j, x), advanced by Q(s+1) = Q(s) + x^s e^-x / s!
    big step = exp(-x);
    for (int k = 1; k <= u; ++k)
        step *= x / k;
    big pois = exp(-m);
    big total = pois * q;
    big mass = pois;
    const int jmax = static_cast<int>(static_cast<double>(m)) + 2000;
    for (int j = 1; j <= jmax && mass < 1 - big(1e-30); ++j) {
        q += step;
        step *= x / (u + j);
        pois *= m / j;
        total += pois * q;
        mass += pois;
    }
    return static_cast<double>(total);
}

inline double bessel_i0_ref(double x)
{
    return static_cast<double>(boost::math::cyl_bessel_i(0, static_cast<long double>(x)));
}

inline double gamma_q_ref(double s, double x)
{
    return static_cast<double>(boost::math::gamma_q(static_cast<long double>(s), static_cast<long double>(x)));
}

/// Standard normal tail.
inline double q_ref(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Adaptive Gauss-Kronrod over [a, b].
template <typename F>
double integrate(F f, double a, double b)
{
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13, &err);
}

/// exp-sinh over [a, inf).
template <typename F>
double integrate_to_inf(F f, double a)
{
    auto g = [&](double t) { return f(a + t); };
    double err = 0.0;
    return boost::math::quadrature::exp_sinh<double>().integrate(g, 1e-12, &err);
}

/// Binomial standard error of a proportion estimate.
inline double binomial_se(double p, std::size_t n)
{
    const double q = std::clamp(p, 1.0 / static_cast<double>(n), 1.0 - 1.0 / static_cast<double>(n));
    return std::sqrt(q * (1.0 - q) / static_cast<double>(n));
}

/// Naive O(N^2) DFT, the reference for FFT-based code.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& x)
{
    const std::size_t n = x.size();
    std::vector<cplx> X(n);
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = -2.0L * 3.14159265358979323846264338327950288L * static_cast<long double>(k * t % n) /
                                    static_cast<long double>(n);
            re += x[t].real() * std::cos(ang) - x[t].imag() * std::sin(ang);
            im += x[t].real() * std::sin(ang) + x[t].imag() * std::cos(ang);
        }
        X[k] = cplx(static_cast<double>(re), static_cast<double>(im));
    }
    return X;
}

} // namespace testkit

#endif
