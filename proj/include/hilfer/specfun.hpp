#pragma once

#include "hilfer/errors.hpp"

namespace hilfer::specfun {

/// Result of a series/quadrature evaluation. `est_abs_error` is an upper
/// bound on truncation plus accumulated roundoff for the chosen method;
/// callers that need a hard accuracy contract must check it.
struct EvalResult {
    double value = 0.0;
    double est_abs_error = 0.0;
    int terms = 0;
};

/// Gamma function with explicit failure modes.
///
/// Throws PoleError at nonpositive integers and OverflowError when the
/// result leaves double range (x > gamma_max_arg(), or too close to a pole).
/// Relative accuracy on [0.1, 50] is a few ulp (well under 1e-12).
double gamma_fn(double x);

/// Largest argument for which gamma_fn stays inside double range.
double gamma_max_arg();

/// 1/Gamma(x), finite for every real x; exactly 0 at the poles of Gamma.
double reciprocal_gamma(double x);

struct MlOptions {
    double z_max = 50.0;    // validated |z| range for the series
    int max_terms = 200000; // hard cap before the series is declared unreliable
};

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z), alpha in (0,2],
/// beta > 0, via the defining power series.
///
/// z >= 0 sums in double with compensated (Kahan-Neumaier) accumulation; all
/// terms are positive so no cancellation occurs. z < 0 alternates, and once
/// |z| > 1 the partial sums can exceed the result by many orders, so that
/// branch accumulates in binary128 and tracks the running peak; if the
/// tracked roundoff would exceed 1e-12*max(1,|value|) the evaluation refuses
/// with DomainError rather than return digits it cannot back.
///
/// Throws DomainError for bad (alpha, beta), |z| > z_max, or an unreliable
/// series; OverflowError when the value itself leaves double range.
EvalResult mittag_leffler(double alpha, double beta, double z,
                          const MlOptions& opts = {});

struct WrightOptions {
    double theta_max = 30.0; // validated argument range
    int max_terms = 4000;
};

/// Exponent E(theta) of the super-exponential decay envelope
/// exp(-(1-alpha) alpha^{alpha/(1-alpha)} theta^{1/(1-alpha)}).
double wright_decay_exponent(double alpha, double theta);

/// Wright M-function M_alpha(theta), alpha in (0,1), theta >= 0, by the
/// alternating series sum_{n>=1} (-theta)^{n-1} / ((n-1)! Gamma(1-alpha n)).
///
/// Terms hitting a Gamma pole (alpha n a positive integer) vanish through the
/// reflection formula 1/Gamma(1-alpha n) = sin(pi alpha n) Gamma(alpha n)/pi
/// and are skipped. The alternating partial sums peak near
/// exp(wright_decay_exponent(alpha,theta)), so the series is summed in
/// binary128 and is reliable while that exponent stays below ~30; beyond it
/// the function returns 0 with the decay envelope as est_abs_error, which is
/// what integral consumers need (the value there is below ~1e-13).
///
/// Throws DomainError for alpha outside (0,1), theta < 0 or theta > theta_max.
EvalResult wright_m(double alpha, double theta, const WrightOptions& opts = {});

/// Moment integral int_0^inf theta^dbar M_alpha(theta) dtheta.
///
/// Closed form Gamma(1+dbar)/Gamma(1+alpha dbar) by default; with
/// by_quadrature the integral is evaluated numerically (composite
/// Gauss-Legendre up to the reliability cutoff, tail bounded by the decay
/// envelope) as an independent route for cross-checks.
EvalResult wright_moment(double alpha, double dbar, bool by_quadrature = false);

} // namespace hilfer::specfun
