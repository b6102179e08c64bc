// SPDX-License-Identifier: Apache-2.0

#include "wpli/special.hpp"

#include "wpli/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wpli::analytics {

namespace {

constexpr int kMaxTerms = 200000;
constexpr double kEps = 1e-17;

std::string fmt(double v)
{
    return std::to_string(v);
}

} // namespace

double bessel_i0e(double x)
{
    x = std::abs(x);
    if (!std::isfinite(x))
        throw std::invalid_argument("bessel_i0e: argument must be finite");
    if (x <= 30.0) {
        const double q = x * x / 4.0;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < kEps * sum)
                break;
        }
        return sum * std::exp(-x);
    }
    // Hankel asymptotic expansion; terms shrink until k ~ 2x, far beyond what is needed here.
    const double r = 1.0 / (8.0 * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd * r / k;
        sum += term;
        if (term < kEps * sum)
            break;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

double bessel_i0(double x)
{
    x = std::abs(x);
    if (x > 700.0)
        throw std::range_error("bessel_i0: argument " + fmt(x) + " overflows double (max 700)");
    return bessel_i0e(x) * std::exp(x);
}

namespace {

// Series for P(s, x), valid for x < s + 1.
double gamma_p_series(double s, double x)
{
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int n = 0; n < kMaxTerms; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps)
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
    }
    throw NumericalError("gamma_p series did not converge for s=" + fmt(s) + ", x=" + fmt(x));
}

// Modified Lentz continued fraction for Q(s, x), valid for x >= s + 1.
double gamma_q_cf(double s, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxTerms; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
    }
    throw NumericalError("gamma_q continued fraction did not converge for s=" + fmt(s) + ", x=" + fmt(x));
}

void check_gamma_args(double s, double x)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw std::invalid_argument("incomplete gamma: s must be positive, got " + fmt(s));
    if (!(x >= 0.0) || std::isnan(x))
        throw std::invalid_argument("incomplete gamma: x must be non-negative, got " + fmt(x));
}

} // namespace

double gamma_p(double s, double x)
{
    check_gamma_args(s, x);
    if (x == 0.0)
        return 0.0;
    if (std::isinf(x))
        return 1.0;
    if (x < s + 1.0)
        return gamma_p_series(s, x);
    return 1.0 - gamma_q_cf(s, x);
}

double incomplete_gamma_upper(double s, double x)
{
    check_gamma_args(s, x);
    if (x == 0.0)
        return 1.0;
    if (std::isinf(x))
        return 0.0;
    if (x < s + 1.0)
        return 1.0 - gamma_p_series(s, x);
    return gamma_q_cf(s, x);
}

double log_hyp1f1(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("log_hyp1f1 requires a > 0, b > 0, finite x >= 0");
    if (x == 0.0)
        return 0.0;
    // log-sum-exp over the all-positive Kummer series
    double lt = 0.0;
    double lmax = 0.0;
    double acc = 1.0; // sum of exp(lt - lmax)
    const double lx = std::log(x);
    for (int k = 1; k < kMaxTerms; ++k) {
        lt += std::log(a + k - 1.0) + lx - std::log(b + k - 1.0) - std::log(static_cast<double>(k));
        if (lt > lmax) {
            acc = acc * std::exp(lmax - lt) + 1.0;
            lmax = lt;
        } else {
            acc += std::exp(lt - lmax);
        }
        // terms are decreasing once (a+k)x < (b+k)(k+1)
        if ((a + k) * x < (b + k) * (k + 1.0) && lt - lmax < std::log(kEps * acc))
            return lmax + std::log(acc);
    }
    throw NumericalError("log_hyp1f1 did not converge for x=" + fmt(x));
}

double hyp1f1(double a, double b, double x)
{
    if (!(b > 0.0))
        throw std::invalid_argument("hyp1f1: b must be positive, got " + fmt(b));
    if (!std::isfinite(a) || !std::isfinite(x))
        throw std::invalid_argument("hyp1f1: arguments must be finite");
    if (std::abs(x) > 700.0)
        throw std::range_error("hyp1f1: |x| = " + fmt(std::abs(x)) + " outside supported range (700)");
    if (x == 0.0 || a == 0.0)
        return 1.0;
    if (a > 0.0 && x > 0.0) {
        const double l = log_hyp1f1(a, b, x);
        if (l > 709.0)
            throw std::range_error("hyp1f1 overflows double");
        return std::exp(l);
    }
    if (x < 0.0 && b - a > 0.0) {
        // Kummer transformation keeps every term positive.
        return std::exp(x + log_hyp1f1(b - a, b, -x));
    }
    if (x < 0.0 && b - a == 0.0)
        return std::exp(x);
    // Signed series, on the Kummer-transformed arguments when x < 0 so the
    // alternation is limited to the first |b - a| terms.
    const double scale = x < 0.0 ? std::exp(x) : 1.0;
    const double sa = x < 0.0 ? b - a : a;
    const double sx = std::abs(x);
    double term = 1.0;
    double sum = 1.0;
    double tmax = 1.0;
    for (int k = 1; k < kMaxTerms; ++k) {
        term *= (sa + k - 1.0) * sx / ((b + k - 1.0) * k);
        sum += term;
        tmax = std::max(tmax, std::abs(term));
        if (term == 0.0 || (std::abs(term) < kEps * std::abs(sum) && std::abs(sa + k) * sx < (b + k) * (k + 1.0)))
            break;
    }
    const double result = scale * sum;
    if (scale * tmax * 1e-16 > 1e-12 * std::max(1.0, std::abs(result)))
        throw NumericalError("hyp1f1: cancellation in alternating series for a=" + fmt(a) + ", b=" + fmt(b) +
                             ", x=" + fmt(x));
    return result;
}

double marcum_q(double u, double a, double b)
{
    if (!(u > 0.0) || !std::isfinite(u))
        throw std::invalid_argument("marcum_q: order must be positive, got " + fmt(u));
    if (!(a >= 0.0) || !(b >= 0.0) || std::isnan(a) || std::isnan(b))
        throw std::invalid_argument("marcum_q: arguments must be non-negative");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::range_error("marcum_q: infinite argument");
    if (b == 0.0)
        return 1.0;
    const double mu = a * a / 2.0;
    const double x = b * b / 2.0;
    if (mu > 1e7 || x > 1e7)
        throw std::range_error("marcum_q: arguments beyond supported range (a^2/2, b^2/2 <= 1e7)");
    if (mu == 0.0)
        return incomplete_gamma_upper(u, x);

    const double lmu = std::log(mu);
    const double lx = std::log(x);
    const auto j0 = static_cast<long>(std::floor(mu));
    const double lw0 = j0 * lmu - mu - std::lgamma(static_cast<double>(j0) + 1.0);
    const double q0 = incomplete_gamma_upper(u + static_cast<double>(j0), x);

    // Chernoff bound on the Poisson tail beyond j: exp(-mu) (e mu / j)^j
    auto log_tail = [&](double j) { return -mu + j * (1.0 + lmu - std::log(j)); };
    const double log_cut = std::log(kEps);

    double sum = std::exp(lw0) * q0;

    // upward
    double lw = lw0;
    double q = q0;
    for (long j = j0 + 1; j < j0 + kMaxTerms; ++j) {
        const double s = u + static_cast<double>(j) - 1.0; // Q(s+1) from Q(s)
        q += std::exp(s * lx - x - std::lgamma(s + 1.0));
        q = std::min(q, 1.0);
        lw += lmu - std::log(static_cast<double>(j));
        sum += std::exp(lw) * q;
        if (static_cast<double>(j) > mu && log_tail(static_cast<double>(j)) < log_cut)
            break;
    }

    // downward
    lw = lw0;
    q = q0;
    for (long j = j0 - 1; j >= 0; --j) {
        const double s = u + static_cast<double>(j); // Q(s) from Q(s+1)
        q -= std::exp(s * lx - x - std::lgamma(s + 1.0));
        q = std::max(q, 0.0);
        lw -= lmu - std::log(static_cast<double>(j + 1));
        sum += std::exp(lw) * q;
        if (j > 0 && static_cast<double>(j) < mu && log_tail(static_cast<double>(j)) < log_cut)
            break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

} // namespace wpli::analytics
