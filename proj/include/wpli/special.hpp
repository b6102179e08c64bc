// SPDX-License-Identifier: Apache-2.0
//
// Special functions used by the fading densities and the error-rate formulas.
//
// Accuracy targets (absolute): 1e-10 on
//   bessel_i0   x in [0, 5]         bessel_i0e  x in [0, 700]
//   gamma_q     s in [0.5, 200], x in [0, 400]
//   hyp1f1      a in (0, 10], b in (0, 20], x in [-30, 30]
//   marcum_q    u in {1..64}, a in [0, 30], b in [0, 40]
// Outside these ranges the routines still run but are only checked for sanity.

#ifndef WPLI_SPECIAL_HPP
#define WPLI_SPECIAL_HPP

namespace wpli::analytics {

/// Modified Bessel function I_0.
double bessel_i0(double x);

/// exp(-|x|) I_0(x).
double bessel_i0e(double x);

/// Regularized lower incomplete gamma P(s, x).
double gamma_p(double s, double x);

/// Regularized upper incomplete gamma Gamma(s, x) / Gamma(s).
double incomplete_gamma_upper(double s, double x);

/// Kummer confluent hypergeometric 1F1(a; b; x).
double hyp1f1(double a, double b, double x);

/// log 1F1(a; b; x) for a, b > 0 and x >= 0.
double log_hyp1f1(double a, double b, double x);

/// Generalized Marcum Q function Q_u(a, b), u > 0.
///
/// Evaluated as the Poisson mixture sum_j e^{-a^2/2} (a^2/2)^j / j! * Q(u + j, b^2/2),
/// summed outward from the Poisson mode with the exact recurrence
/// Q(s+1, x) = Q(s, x) + x^s e^{-x} / Gamma(s+1) carried in log domain. Both tails
/// are cut when the Chernoff bound on the remaining Poisson mass drops below 1e-17.
double marcum_q(double u, double a, double b);

} // namespace wpli::analytics

#endif
