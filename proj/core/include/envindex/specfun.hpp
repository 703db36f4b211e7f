#pragma once

namespace envindex::specfun {

// ln Gamma(a) for a > 0 via a fixed-coefficient Lanczos approximation
// (g = 7, 9 terms; coefficients in specfun.cpp). Relative error below
// 1e-13 on [1e-3, 1e3]. Throws std::domain_error for a <= 0.
double ln_gamma(double a);

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
// Series for x < a + 1, continued fraction otherwise.
// Preconditions: a > 0, x >= 0.
double reg_lower_incomplete_gamma(double a, double x);

// Inverse of P(a, .) in its second argument: returns x with
// |P(a, x) - q| <= 1e-12 (floored at rounding noise, always <= 1e-10).
// Bracketed safeguarded Newton from a moment-based initial guess with
// bisection fallback, at most 200 iterations.
// Preconditions: a > 0, 0 < q < 1.
double inv_reg_lower_incomplete_gamma(double a, double q);

// Gamma(a, 1) density at x; used as the Newton derivative above.
double gamma_pdf(double a, double x);

// Standard normal quantile (rational approximation, ~1e-9 absolute);
// only used to seed the incomplete-gamma inverse.
double normal_quantile(double q);

} // namespace envindex::specfun
