// SPDX-License-Identifier: Apache-2.0
//
// Closed-form identification and classification error rates, with Monte Carlo
// counterparts built on the same statistical models.
//
// Identification uses the energy-detector model: the test statistic Y is the
// squared norm of the (noise-normalized) fingerprint difference with 2*mu real
// degrees of freedom. For a genuine device Y ~ chi2(2 mu); for an imposter the
// difference carries energy and Y ~ chi2'(2 mu, 2 gamma alpha^2) with alpha the
// fading amplitude (E[alpha^2] = 1). An imposter is rejected when Y > lambda.
//
//   GRR = P(Y > lambda | imposter), FRR = P(Y > lambda | genuine) = Q(mu, lambda/2).
//
// Per channel, with Q(s, x) the regularized upper incomplete gamma:
//   AWGN      Q_mu(sqrt(2 gamma), sqrt(lambda))
//   Rayleigh  e^{-l/2} sum_{n<mu-1} (l/2)^n/n!
//             + ((1+g)/g)^{mu-1} [e^{-l/(2(1+g))} - e^{-l/2} sum_{n<mu-1} (l g/(2(1+g)))^n/n!],
//             or, when the prefactor is large, the equivalent geometric mixture
//             sum_j (1/(1+g)) (g/(1+g))^j Q(mu+j, l/2)
//   Nakagami  E[Q_1] + e^{-l/2} (m/(m+g))^m sum_{n=1}^{mu-1} (l/2)^n/n! 1F1(m; n+1; (l/2) g/(m+g)),
//             or the full mixture sum_j NB(j; m, m/(m+g)) Q(mu+j, l/2)
//   Rician    mu = 1: Q_1(sqrt(2Kg/(K+1+g)), sqrt(l(K+1)/(K+1+g)))
//             general: sum_J Pois(J; Kg/(K+1+g)) sum_i NB(i; 1+J, (K+1)/(K+1+g)) Q(mu+J+i, l/2)

#ifndef WPLI_ANALYTICS_HPP
#define WPLI_ANALYTICS_HPP

#include "wpli/channel.hpp"
#include "wpli/special.hpp"

#include <cstdint>
#include <vector>

namespace wpli::analytics {

struct IdentAnalyticsParams {
    double gamma = 0.0;  // linear SNR of the difference vector
    double lambda = 0.0; // threshold on the energy statistic
    int mu = 1;          // time-bandwidth product
    channel::FadingModel channel;

    void validate() const;
};

/// Standard normal tail probability.
double q_function(double x);

double grr(const IdentAnalyticsParams& p);
double frr(double lambda, int mu);

/// Nakagami GRR through the finite confluent-hypergeometric sum on top of the
/// averaged first-order Marcum term.
double grr_nakagami_closed(double gamma, double lambda, int mu, double m);

/// Nakagami GRR through the negative-binomial mixture of Marcum terms.
double grr_nakagami_mixture(double gamma, double lambda, int mu, double m);

struct TheoreticalRocPoint {
    double lambda = 0.0;
    double far = 0.0;
    double frr = 0.0;
    double gar = 0.0;
    double grr = 0.0;
};

struct TheoreticalRoc {
    std::vector<TheoreticalRocPoint> points;
    double eer = 0.0;
    double lambda_eer = 0.0;
};

/// ROC over `lambdas` plus the EER located by bisection on FAR - FRR.
TheoreticalRoc theoretical_roc(double gamma, int mu, const channel::FadingModel& ch,
                               const std::vector<double>& lambdas);

/// Default lambda grid covering both hypotheses' bulk for the given gamma and mu.
std::vector<double> default_lambda_grid(double gamma, int mu, std::size_t points = 200);

/// Time-bandwidth product of an L-sample capture at f_s with bandwidth f_s/2.
int default_mu(std::size_t capture_length);

struct IdentSimResult {
    std::size_t trials = 0;
    std::size_t genuine_rejects = 0;  // FRR numerator
    std::size_t imposter_rejects = 0; // GRR numerator
    double grr = 0.0;
    double frr = 0.0;
    std::vector<double> genuine_scores;
    std::vector<double> imposter_scores;
};

/// Monte Carlo of the energy detector under both hypotheses.
IdentSimResult simulate_identification(const IdentAnalyticsParams& p, std::size_t trials, std::uint64_t seed,
                                       bool keep_scores = false);

enum class ClassMethod { MonteCarlo, GaussianClosedForm };

/// Two-device classification model. Device i produces the clean feature vector
/// q_i; references are r_i = reference_gain * q_i. A test capture is
/// S = path_gain * alpha * q_i + N with N ~ N(0, noise_sigma^2 I) and alpha
/// drawn from `channel`. The rule picks device 1 when ||S - r_1|| < ||S - r_2||.
struct ClassAnalyticsParams {
    std::vector<double> q1;
    std::vector<double> q2;
    double path_gain = 1.0;
    double reference_gain = 1.0;
    double noise_sigma = 1.0;
    channel::FadingModel channel;
    double prior1 = 0.5;
    double prior2 = 0.5;

    void validate() const;
};

struct ClassErrorResult {
    double pe = 0.0;
    double pe_given_1 = 0.0;
    double pe_given_2 = 0.0;
    std::size_t trials = 0; // 0 for the closed form
};

ClassErrorResult classification_error(const ClassAnalyticsParams& p, ClassMethod method, std::size_t trials = 100000,
                                      std::uint64_t seed = 1);

/// Two clean device feature vectors (for example regrowth spectra of two PA
/// profiles on a shared input) with references taken at unit gain.
ClassAnalyticsParams class_params_from_devices(const std::vector<double>& psd1, const std::vector<double>& psd2,
                                               double path_gain, double noise_sigma,
                                               const channel::FadingModel& ch);

} // namespace wpli::analytics

#endif
