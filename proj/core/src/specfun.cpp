#include "envindex/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace envindex::specfun {

namespace {

// Lanczos g = 7, n = 9 (Godfrey coefficients).
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

constexpr double kHalfLog2Pi = 0.91893853320467274178; // ln(2*pi)/2

double ln_gamma_lanczos(double x) {
    // valid for x >= 0.5
    const double z = x - 1.0;
    double s = kLanczos[0];
    for (int k = 1; k < 9; ++k) s += kLanczos[k] / (z + k);
    const double t = z + 7.5;
    return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(s);
}

} // namespace

double ln_gamma(double a) {
    if (!(a > 0.0)) throw std::domain_error("ln_gamma: a must be positive");
    if (a < 0.5) return ln_gamma_lanczos(a + 1.0) - std::log(a);
    return ln_gamma_lanczos(a);
}

double gamma_pdf(double a, double x) {
    if (x <= 0.0) {
        if (x < 0.0) return 0.0;
        if (a < 1.0) return std::numeric_limits<double>::infinity();
        return a == 1.0 ? 1.0 : 0.0;
    }
    return std::exp((a - 1.0) * std::log(x) - x - ln_gamma(a));
}

namespace {

// Lower-tail series: P(a,x) = x^a e^{-x} / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int k = 0; k < 800; ++k) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    const double lg = a * std::log(x) - x - ln_gamma(a);
    return sum * std::exp(lg);
}

// Upper-tail continued fraction (modified Lentz): returns Q(a,x).
double gamma_q_contfrac(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 2000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    const double lg = a * std::log(x) - x - ln_gamma(a);
    return std::exp(lg) * h;
}

} // namespace

double reg_lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0))
        throw std::domain_error("reg_lower_incomplete_gamma: need a > 0 and x >= 0");
    if (x == 0.0) return 0.0;
    double p;
    if (x < a + 1.0)
        p = gamma_p_series(a, x);
    else
        p = 1.0 - gamma_q_contfrac(a, x);
    return std::clamp(p, 0.0, 1.0);
}

double normal_quantile(double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("normal_quantile: q must lie in (0,1)");
    // Acklam's rational approximation.
    static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double pl = 0.02425;
    if (q < pl) {
        const double u = std::sqrt(-2.0 * std::log(q));
        return (((((C[0] * u + C[1]) * u + C[2]) * u + C[3]) * u + C[4]) * u + C[5]) /
               ((((D[0] * u + D[1]) * u + D[2]) * u + D[3]) * u + 1.0);
    }
    if (q > 1.0 - pl) {
        const double u = std::sqrt(-2.0 * std::log(1.0 - q));
        return -(((((C[0] * u + C[1]) * u + C[2]) * u + C[3]) * u + C[4]) * u + C[5]) /
               ((((D[0] * u + D[1]) * u + D[2]) * u + D[3]) * u + 1.0);
    }
    const double u = q - 0.5;
    const double t = u * u;
    return (((((A[0] * t + A[1]) * t + A[2]) * t + A[3]) * t + A[4]) * t + A[5]) * u /
           (((((B[0] * t + B[1]) * t + B[2]) * t + B[3]) * t + B[4]) * t + 1.0);
}

double inv_reg_lower_incomplete_gamma(double a, double q) {
    if (!(a > 0.0)) throw std::domain_error("inv_reg_lower_incomplete_gamma: a must be positive");
    if (!(q > 0.0) || !(q < 1.0))
        throw std::domain_error("inv_reg_lower_incomplete_gamma: q must lie in (0,1)");

    // Initial guess: exact small-x expansion for the lower tail, else
    // Wilson-Hilferty.
    double x;
    const double lgq = (std::log(q) + ln_gamma(a + 1.0)) / a;
    if (a <= 1.0 && lgq < 0.0) {
        x = std::exp(lgq);
    } else {
        const double z = normal_quantile(q);
        const double w = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
        x = a * w * w * w;
        if (!(x > 0.0)) x = std::exp(lgq);
    }
    if (!std::isfinite(x) || x <= 0.0) x = a;

    // Grow an upper bracket; the lower bracket starts at 0.
    double lo = 0.0;
    double hi = std::max(2.0 * x, a + 8.0);
    for (int k = 0; k < 200 && reg_lower_incomplete_gamma(a, hi) < q; ++k) hi *= 2.0;
    if (!std::isfinite(x) || x <= 0.0) x = std::numeric_limits<double>::min();
    if (x >= hi) x = 0.5 * hi;

    constexpr double kTol = 1e-13;
    double best_x = x;
    double best_err = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double f = reg_lower_incomplete_gamma(a, x) - q;
        const double af = std::abs(f);
        if (af < best_err) {
            best_err = af;
            best_x = x;
        }
        if (af <= kTol) return x;
        if (f < 0.0)
            lo = x;
        else
            hi = x;
        const double dpdf = gamma_pdf(a, x);
        double next = x - f / dpdf;
        if (!std::isfinite(next) || next <= lo || next >= hi)
            next = 0.5 * (lo + hi);
        if (next == x) break;
        x = next;
    }
    if (best_err > 1e-10)
        throw std::runtime_error("inv_reg_lower_incomplete_gamma: no convergence");
    return best_x;
}

} // namespace envindex::specfun
