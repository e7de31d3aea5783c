/**
 * @file special.hpp
 * @brief Special functions for detection statistics.
 */
#pragma once

namespace isac::special {

/// Exponentially scaled modified Bessel function I0(x) exp(-|x|).
double i0e(double x);

/// First-order Marcum Q function Q1(a, b), absolute tolerance `tol`.
/// Series evaluation with a quadrature fallback for arguments large enough
/// to underflow the series terms. Q1(0, b) = exp(-b^2/2), Q1(a, 0) = 1.
double marcum_q1(double a, double b, double tol = 1e-10);

/// Regularized lower incomplete gamma P(s, x).
double gammainc_p(double s, double x);

/// Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x).
double gammainc_q(double s, double x);

/// Threshold t solving Q(n_chan, t) = p, i.e. the per-cell level of a
/// noncoherent sum of n_chan unit-mean exponential cells at tail p.
double detection_threshold(int n_chan, double p);

} // namespace isac::special
