// SPDX-License-Identifier: Apache-2.0

#include "wpli/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace wpli::analytics {

namespace {

constexpr double kTail = 1e-17;
constexpr long kMaxMixture = 10000000;

// sum_j w_j Q(mu + j, x) where log w_j is produced by `logw(j)` and the weights
// form a unimodal pmf with mode near `mode`. Q(s, x) is advanced with the exact
// recurrence in both directions.
template <typename LogWeight>
double mixture_of_q(int mu, double x, double mode, LogWeight logw)
{
    const long j0 = std::max(0L, static_cast<long>(std::floor(mode)));
    const double lx = std::log(x);
    const double q0 = incomplete_gamma_upper(mu + static_cast<double>(j0), x);
    double sum = std::exp(logw(j0)) * q0;
    double mass = std::exp(logw(j0));

    double q = q0;
    for (long j = j0 + 1; j < j0 + kMaxMixture; ++j) {
        const double s = mu + static_cast<double>(j) - 1.0;
        q = std::min(1.0, q + std::exp(s * lx - x - std::lgamma(s + 1.0)));
        const double w = std::exp(logw(j));
        sum += w * q;
        mass += w;
        // remaining mass is bounded by 1 - accumulated mass once both sides are summed,
        // so stop on the pmf itself: it decays geometrically past the mode
        if (w < kTail * mass && static_cast<double>(j) > mode + 1.0)
            break;
    }
    q = q0;
    for (long j = j0 - 1; j >= 0; --j) {
        const double s = mu + static_cast<double>(j);
        q = std::max(0.0, q - std::exp(s * lx - x - std::lgamma(s + 1.0)));
        const double w = std::exp(logw(j));
        sum += w * q;
        mass += w;
        if (w < kTail * mass)
            break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double log_nb(long j, double r, double p)
{
    // Gamma(r + j) / (Gamma(r) j!) p^r (1 - p)^j
    const double jd = static_cast<double>(j);
    return std::lgamma(r + jd) - std::lgamma(r) - std::lgamma(jd + 1.0) + r * std::log(p) + jd * std::log1p(-p);
}

double nb_mode(double r, double p)
{
    return r > 1.0 ? std::floor((r - 1.0) * (1.0 - p) / p) : 0.0;
}

double grr_awgn(double gamma, double lambda, int mu)
{
    return marcum_q(mu, std::sqrt(2.0 * gamma), std::sqrt(lambda));
}

double grr_rayleigh(double gamma, double lambda, int mu)
{
    const double x = lambda / 2.0;
    if (gamma == 0.0)
        return incomplete_gamma_upper(mu, x);
    const double log_pref = (mu - 1) * std::log((1.0 + gamma) / gamma);
    if (log_pref < std::log(1e8)) {
        double s1 = 0.0;
        double s2 = 0.0;
        const double y = x * gamma / (1.0 + gamma);
        double t1 = 1.0;
        double t2 = 1.0;
        for (int n = 0; n <= mu - 2; ++n) {
            if (n > 0) {
                t1 *= x / n;
                t2 *= y / n;
            }
            s1 += t1;
            s2 += t2;
        }
        const double ex = std::exp(-x);
        const double v = ex * s1 + std::exp(log_pref) * (std::exp(-x / (1.0 + gamma)) - ex * s2);
        return std::clamp(v, 0.0, 1.0);
    }
    // geometric mixture: NB with r = 1, p = 1/(1+gamma)
    const double p = 1.0 / (1.0 + gamma);
    return mixture_of_q(mu, x, 0.0, [&](long j) { return log_nb(j, 1.0, p); });
}

double grr_rician(double gamma, double lambda, int mu, double K)
{
    const double x = lambda / 2.0;
    if (gamma == 0.0)
        return incomplete_gamma_upper(mu, x);
    if (mu == 1)
        return marcum_q(1.0, std::sqrt(2.0 * K * gamma / (K + 1.0 + gamma)),
                        std::sqrt(lambda * (K + 1.0) / (K + 1.0 + gamma)));
    if (K == 0.0)
        return grr_rayleigh(gamma, lambda, mu);
    const double nu = K * gamma / (K + 1.0 + gamma);
    const double p = (K + 1.0) / (K + 1.0 + gamma);
    const double lnu = std::log(nu);
    const long J0 = static_cast<long>(std::floor(nu));
    auto inner = [&](long J) {
        const double r = 1.0 + static_cast<double>(J);
        return mixture_of_q(mu + static_cast<int>(J), x, nb_mode(r, p), [&](long i) { return log_nb(i, r, p); });
    };
    auto logpois = [&](long J) { return static_cast<double>(J) * lnu - nu - std::lgamma(static_cast<double>(J) + 1.0); };
    double sum = std::exp(logpois(J0)) * inner(J0);
    double mass = std::exp(logpois(J0));
    for (long J = J0 + 1; J < J0 + kMaxMixture; ++J) {
        const double w = std::exp(logpois(J));
        sum += w * inner(J);
        mass += w;
        if (w < kTail * mass && static_cast<double>(J) > nu)
            break;
    }
    for (long J = J0 - 1; J >= 0; --J) {
        const double w = std::exp(logpois(J));
        sum += w * inner(J);
        mass += w;
        if (w < kTail * mass)
            break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

} // namespace

void IdentAnalyticsParams::validate() const
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must be finite and >= 0");
    if (!(lambda >= 0.0) || std::isnan(lambda))
        throw std::invalid_argument("lambda must be >= 0");
    if (mu < 1)
        throw std::invalid_argument("time-bandwidth product must be >= 1");
    channel.validate();
}

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double frr(double lambda, int mu)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be >= 0");
    if (mu < 1)
        throw std::invalid_argument("time-bandwidth product must be >= 1");
    return incomplete_gamma_upper(mu, lambda / 2.0);
}

double grr_nakagami_mixture(double gamma, double lambda, int mu, double m)
{
    const double x = lambda / 2.0;
    if (x == 0.0)
        return 1.0;
    if (gamma == 0.0)
        return incomplete_gamma_upper(mu, x);
    const double p = m / (m + gamma);
    return mixture_of_q(mu, x, nb_mode(m, p), [&](long j) { return log_nb(j, m, p); });
}

double grr_nakagami_closed(double gamma, double lambda, int mu, double m)
{
    const double x = lambda / 2.0;
    if (x == 0.0)
        return 1.0;
    if (gamma == 0.0)
        return incomplete_gamma_upper(mu, x);
    double v = grr_nakagami_mixture(gamma, lambda, 1, m);
    const double z = x * gamma / (m + gamma);
    const double lpre = m * std::log(m / (m + gamma)) - x;
    for (int n = 1; n <= mu - 1; ++n)
        v += std::exp(lpre + n * std::log(x) - std::lgamma(n + 1.0) + log_hyp1f1(m, n + 1.0, z));
    return std::clamp(v, 0.0, 1.0);
}

double grr(const IdentAnalyticsParams& p)
{
    p.validate();
    if (p.lambda == 0.0)
        return 1.0;
    switch (p.channel.kind) {
    case channel::FadingKind::AWGN:
        return grr_awgn(p.gamma, p.lambda, p.mu);
    case channel::FadingKind::Rayleigh:
        return grr_rayleigh(p.gamma, p.lambda, p.mu);
    case channel::FadingKind::Nakagami:
        return grr_nakagami_mixture(p.gamma, p.lambda, p.mu, p.channel.m);
    case channel::FadingKind::Rician:
        return grr_rician(p.gamma, p.lambda, p.mu, p.channel.K);
    }
    throw std::invalid_argument("unsupported channel kind");
}

std::vector<double> default_lambda_grid(double gamma, int mu, std::size_t points)
{
    if (points < 2)
        throw std::invalid_argument("lambda grid needs at least two points");
    const double mean_hi = 2.0 * mu + 2.0 * gamma;
    const double hi = mean_hi + 8.0 * std::sqrt(4.0 * mu + 8.0 * gamma) + 20.0;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

TheoreticalRoc theoretical_roc(double gamma, int mu, const channel::FadingModel& ch, const std::vector<double>& lambdas)
{
    IdentAnalyticsParams p;
    p.gamma = gamma;
    p.mu = mu;
    p.channel = ch;
    TheoreticalRoc roc;
    for (double lam : lambdas) {
        p.lambda = lam;
        TheoreticalRocPoint pt;
        pt.lambda = lam;
        pt.grr = grr(p);
        pt.frr = frr(lam, mu);
        pt.far = 1.0 - pt.grr;
        pt.gar = 1.0 - pt.frr;
        roc.points.push_back(pt);
    }
    auto gap = [&](double lam) {
        p.lambda = lam;
        return (1.0 - grr(p)) - frr(lam, mu);
    };
    double lo = 0.0;
    double hi = default_lambda_grid(gamma, mu, 2).back();
    while (gap(hi) < 0.0)
        hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    roc.lambda_eer = 0.5 * (lo + hi);
    p.lambda = roc.lambda_eer;
    roc.eer = frr(roc.lambda_eer, mu);
    return roc;
}

int default_mu(std::size_t capture_length)
{
    return std::max(1, static_cast<int>(capture_length / 2));
}

IdentSimResult simulate_identification(const IdentAnalyticsParams& p, std::size_t trials, std::uint64_t seed,
                                       bool keep_scores)
{
    p.validate();
    if (trials == 0)
        throw std::invalid_argument("trials must be >= 1");
    channel::FadingModel fm = p.channel;
    fm.omega = 1.0;
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::chi_squared_distribution<double> rest(2.0 * p.mu - 1.0);
    std::chi_squared_distribution<double> full(2.0 * p.mu);

    IdentSimResult res;
    res.trials = trials;
    if (keep_scores) {
        res.genuine_scores.reserve(trials);
        res.imposter_scores.reserve(trials);
    }
    for (std::size_t t = 0; t < trials; ++t) {
        const double yg = full(rng);
        const double alpha = channel::fading_sample(fm, rng);
        const double g = gauss(rng) + std::sqrt(2.0 * p.gamma) * alpha;
        const double yi = g * g + (p.mu > 0 ? rest(rng) : 0.0);
        if (yg > p.lambda)
            ++res.genuine_rejects;
        if (yi > p.lambda)
            ++res.imposter_rejects;
        if (keep_scores) {
            res.genuine_scores.push_back(yg);
            res.imposter_scores.push_back(yi);
        }
    }
    res.frr = static_cast<double>(res.genuine_rejects) / static_cast<double>(trials);
    res.grr = static_cast<double>(res.imposter_rejects) / static_cast<double>(trials);
    return res;
}

void ClassAnalyticsParams::validate() const
{
    if (q1.empty() || q1.size() != q2.size())
        throw std::invalid_argument("device feature vectors must be nonempty and equal length");
    if (!(noise_sigma > 0.0))
        throw std::invalid_argument("noise variance must be positive");
    if (prior1 < 0.0 || prior2 < 0.0 || std::abs(prior1 + prior2 - 1.0) > 1e-9)
        throw std::invalid_argument("priors must be non-negative and sum to 1");
    channel.validate();
}

ClassErrorResult classification_error(const ClassAnalyticsParams& p, ClassMethod method, std::size_t trials,
                                      std::uint64_t seed)
{
    p.validate();
    const std::size_t d = p.q1.size();
    std::vector<double> r1(d), r2(d), rdiff(d);
    double n1 = 0.0, n2 = 0.0, rn = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        r1[k] = p.reference_gain * p.q1[k];
        r2[k] = p.reference_gain * p.q2[k];
        rdiff[k] = r2[k] - r1[k];
        n1 += r1[k] * r1[k];
        n2 += r2[k] * r2[k];
        rn += rdiff[k] * rdiff[k];
    }
    ClassErrorResult res;

    if (method == ClassMethod::GaussianClosedForm) {
        if (p.channel.kind != channel::FadingKind::AWGN)
            throw std::invalid_argument("Gaussian closed form is only valid for the AWGN channel");
        if (rn == 0.0) {
            // Every capture ties; ties go to device 1.
            res.pe_given_1 = 0.0;
            res.pe_given_2 = 1.0;
        } else {
            const double c = 0.5 * (n2 - n1);
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                m1 += p.path_gain * p.q1[k] * rdiff[k];
                m2 += p.path_gain * p.q2[k] * rdiff[k];
            }
            const double sd = p.noise_sigma * std::sqrt(rn);
            // decide device 2 when S^T r > c
            res.pe_given_1 = q_function((c - m1) / sd);
            res.pe_given_2 = 1.0 - q_function((c - m2) / sd);
        }
        res.pe = p.prior1 * res.pe_given_1 + p.prior2 * res.pe_given_2;
        return res;
    }

    if (trials < 2)
        throw std::invalid_argument("Monte Carlo classification needs at least two trials");
    auto n_first = static_cast<std::size_t>(std::llround(static_cast<double>(trials) * p.prior1));
    n_first = std::clamp<std::size_t>(n_first, p.prior1 > 0.0 ? 1 : 0, p.prior2 > 0.0 ? trials - 1 : trials);
    const std::size_t n_second = trials - n_first;

    channel::FadingModel fm = p.channel;
    fm.omega = 1.0;
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, p.noise_sigma);
    std::vector<double> S(d);
    auto run = [&](const std::vector<double>& q, std::size_t n, bool truth_first) {
        std::size_t errors = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double a = p.path_gain * channel::fading_sample(fm, rng);
            double d1 = 0.0, d2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                S[k] = a * q[k] + gauss(rng);
                d1 += (S[k] - r1[k]) * (S[k] - r1[k]);
                d2 += (S[k] - r2[k]) * (S[k] - r2[k]);
            }
            const double delta = std::sqrt(d1) - std::sqrt(d2);
            const bool pick_first = !(delta > 0.0);
            if (pick_first != truth_first)
                ++errors;
        }
        return errors;
    };
    const std::size_t e1 = run(p.q1, n_first, true);
    const std::size_t e2 = run(p.q2, n_second, false);
    res.trials = trials;
    res.pe_given_1 = n_first ? static_cast<double>(e1) / static_cast<double>(n_first) : 0.0;
    res.pe_given_2 = n_second ? static_cast<double>(e2) / static_cast<double>(n_second) : 0.0;
    res.pe = p.prior1 * res.pe_given_1 + p.prior2 * res.pe_given_2;
    return res;
}

ClassAnalyticsParams class_params_from_devices(const std::vector<double>& psd1, const std::vector<double>& psd2,
                                               double path_gain, double noise_sigma, const channel::FadingModel& ch)
{
    ClassAnalyticsParams p;
    p.q1 = psd1;
    p.q2 = psd2;
    p.path_gain = path_gain;
    p.noise_sigma = noise_sigma;
    p.channel = ch;
    p.validate();
    return p;
}

} // namespace wpli::analytics
