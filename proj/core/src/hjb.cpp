#include "envindex/hjb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "envindex/errors.hpp"
#include "envindex/numeric.hpp"
#include "envindex/specfun.hpp"

namespace envindex {

UncertaintySpec UncertaintySpec::proportional(double c) {
    UncertaintySpec u;
    u.c = c;
    u.cbar = c;
    u.validate();
    return u;
}

void UncertaintySpec::validate() const {
    if (!(c > 0.0) || !(c < 1.0))
        throw std::domain_error("UncertaintySpec: c must lie in (0,1)");
    if (!(cbar >= c) || !(cbar < 1.0))
        throw std::domain_error("UncertaintySpec: need c <= cbar < 1");
}

double upper_bound_A(double r, double eta) {
    if (!(r > 0.0) || !(eta > 0.0) || !(eta < r))
        throw std::domain_error("upper_bound_A: need 0 < eta < r");
    return -std::log1p(-eta / r) / eta;
}

namespace {

// Fixed 4-lane Neumaier sum of w_j / (delta_j + shift). The lane pattern is
// fixed, so the rounding is reproducible for a given measure size.
double discount_resolvent(const DiscreteMeasure& mu, double shift) {
    const double* d = mu.points.data();
    const double* w = mu.weights.data();
    const std::size_t m = mu.size();
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    auto acc = [](double& s, double& c, double term) {
        const double t = s + term;
        if (std::abs(s) >= std::abs(term))
            c += (s - t) + term;
        else
            c += (term - t) + s;
        s = t;
    };
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        acc(s0, c0, w[j] / (d[j] + shift));
        acc(s1, c1, w[j + 1] / (d[j + 1] + shift));
        acc(s2, c2, w[j + 2] / (d[j + 2] + shift));
        acc(s3, c3, w[j + 3] / (d[j + 3] + shift));
    }
    for (; j < m; ++j) acc(s0, c0, w[j] / (d[j] + shift));
    return ((s0 + c0) + (s1 + c1)) + ((s2 + c2) + (s3 + c3));
}

// Same pattern for w_j / (delta_j (delta_j + shift)).
double discount_inverse_resolvent(const DiscreteMeasure& mu, double shift) {
    const double* d = mu.points.data();
    const double* w = mu.weights.data();
    const std::size_t m = mu.size();
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0;
    auto acc = [](double& s, double& c, double term) {
        const double t = s + term;
        if (std::abs(s) >= std::abs(term))
            c += (s - t) + term;
        else
            c += (term - t) + s;
        s = t;
    };
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        acc(s0, c0, w[j] / (d[j] * (d[j] + shift)));
        acc(s1, c1, w[j + 1] / (d[j + 1] * (d[j + 1] + shift)));
        acc(s2, c2, w[j + 2] / (d[j + 2] * (d[j + 2] + shift)));
        acc(s3, c3, w[j + 3] / (d[j + 3] * (d[j + 3] + shift)));
    }
    for (; j < m; ++j) acc(s0, c0, w[j] / (d[j] * (d[j] + shift)));
    return ((s0 + c0) + (s1 + c1)) + ((s2 + c2) + (s3 + c3));
}

struct AtomEquation {
    double r, eta, R;
    const DiscreteMeasure& mu;

    double growth_factor(double A) const {
        // H(A) = 1 - r/eta * (1 - (1 + eta A) e^{-eta A})
        return 1.0 - (r / eta) * entropy_at_exp(eta * A);
    }
    double operator()(double A) const {
        const double z = r * std::exp(-eta * A);
        return discount_resolvent(mu, z + R) * growth_factor(A);
    }
};

double noise_floor(double tol, double a) {
    return std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a)));
}

FixedPointResult bisect_root(const AtomEquation& F, double lo, double hi, double tol,
                             int budget) {
    // g(A) = A - F(A) is increasing with g(lo) < 0 < g(hi).
    FixedPointResult out;
    out.used_bisection = true;
    double best = lo;
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < budget; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval exhausted in doubles
        const double fv = F(mid);
        const double res = std::abs(mid - fv);
        ++out.iterations;
        if (res < best_res) {
            best_res = res;
            best = mid;
        }
        if (res <= noise_floor(tol, mid)) {
            out.value = mid;
            out.residual = res;
            return out;
        }
        if (mid - fv > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    out.value = best;
    out.residual = best_res;
    if (best_res > noise_floor(tol, best) * 4.0)
        throw SolverError("solve_A: bisection stalled, residual " + std::to_string(best_res),
                          best_res);
    return out;
}

} // namespace

FixedPointResult solve_A_detail(double r, double eta, double R, const DiscreteMeasure& mu,
                                const SolverOptions& opts) {
    if (!(r > 0.0) || !(eta > 0.0) || !(eta < r))
        throw std::domain_error("solve_A: need 0 < eta < r");
    if (!(R >= 0.0)) throw std::domain_error("solve_A: R must be nonnegative");
    if (!(opts.tol > 0.0)) throw std::domain_error("solve_A: tol must be positive");

    const AtomEquation F{r, eta, R, mu};
    const double abar = upper_bound_A(r, eta);

    // Direct iteration from 0; it converges monotonically where the slope of
    // F stays well below 1. When the residual stops at least halving over 5
    // consecutive steps, or an iterate leaves [0, Abar], fall back to
    // bisection on A - F(A).
    FixedPointResult out;
    double a = 0.0;
    double window[5] = {0, 0, 0, 0, 0};
    const int direct_budget = std::clamp(opts.max_iter / 2, 1, opts.max_iter);
    for (int it = 0; it < direct_budget; ++it) {
        const double fv = F(a);
        const double res = std::abs(fv - a);
        ++out.iterations;
        if (res <= noise_floor(opts.tol, a)) {
            out.value = a;
            out.residual = res;
            return out;
        }
        if (!(fv > 0.0) || !(fv < abar)) break;
        if (it >= 5 && res > 0.5 * window[it % 5]) break;
        window[it % 5] = res;
        a = fv;
    }

    double lo = 0.0, hi = abar;
    const double ga = a - F.operator()(a);
    if (ga < 0.0)
        lo = a;
    else if (a < abar)
        hi = a;
    FixedPointResult bis = bisect_root(F, lo, hi, opts.tol, opts.max_iter - out.iterations);
    bis.iterations += out.iterations;
    return bis;
}

double solve_A(double r, double eta, double R, const DiscreteMeasure& mu, double tol) {
    SolverOptions opts;
    opts.tol = tol;
    return solve_A_detail(r, eta, R, mu, opts).value;
}

double solve_A_bisection(double r, double eta, double R, const DiscreteMeasure& mu, double tol,
                         int max_iter) {
    if (!(r > 0.0) || !(eta > 0.0) || !(eta < r))
        throw std::domain_error("solve_A_bisection: need 0 < eta < r");
    const AtomEquation F{r, eta, R, mu};
    return bisect_root(F, 0.0, upper_bound_A(r, eta), tol, max_iter).value;
}

HJBCoefficients compute_coefficients(const DiscreteMeasure& p, const DiscreteMeasure& mu,
                                     double R, const UncertaintySpec& u,
                                     const SolverOptions& opts) {
    p.validate();
    mu.validate();
    u.validate();
    if (!(R >= 0.0)) throw std::domain_error("compute_coefficients: R must be nonnegative");

    const std::size_t n = p.size();
    HJBCoefficients coeffs;
    coeffs.R = R;
    coeffs.A.resize(n);
    coeffs.A_upper.resize(n);
    coeffs.H.resize(n);
    coeffs.phi_star.resize(n);
    coeffs.penalty.resize(n);
    coeffs.distorted_rate.resize(n);
    coeffs.residual.resize(n);

    std::vector<double> occupancy(n); // sum_j w_j / (delta_j (delta_j + R + z_i))
    std::atomic<bool> failed{false};
    std::string failure;

#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        if (failed.load(std::memory_order_relaxed)) continue;
        const double r = p.points[i];
        const double eta = u.eta(r);
        try {
            const FixedPointResult fp = solve_A_detail(r, eta, R, mu, opts);
            const double a = fp.value;
            const double y = eta * a;
            coeffs.A[i] = a;
            coeffs.A_upper[i] = upper_bound_A(r, eta);
            coeffs.residual[i] = fp.residual;
            coeffs.penalty[i] = entropy_at_exp(y);
            coeffs.H[i] = 1.0 - (r / eta) * coeffs.penalty[i];
            coeffs.phi_star[i] = std::exp(-y);
            coeffs.distorted_rate[i] = r * coeffs.phi_star[i];
            if (R > 0.0) occupancy[i] = discount_inverse_resolvent(mu, R + coeffs.distorted_rate[i]);
        } catch (const std::exception& e) {
#pragma omp critical
            {
                if (!failed.exchange(true))
                    failure = "atom " + std::to_string(i) + " (r=" + std::to_string(r) +
                              "): " + e.what();
            }
        }
    }
    if (failed.load()) throw SolverError("compute_coefficients: " + failure, 0.0);

    coeffs.D.assign(mu.size(), 0.0);
    if (R > 0.0) {
        KahanSum b;
        for (std::size_t i = 0; i < n; ++i) b.add(p.weights[i] * coeffs.H[i] * occupancy[i]);
        coeffs.B = R * b.value();
        for (std::size_t j = 0; j < mu.size(); ++j) {
            const double dj = mu.points[j];
            KahanSum cj;
            for (std::size_t i = 0; i < n; ++i) cj.add(p.weights[i] * coeffs.C_at(i, dj));
            coeffs.D[j] = (R / dj) * cj.value();
        }
    }
    return coeffs;
}

double value_function(const HJBCoefficients& coeffs, const PopulationState& x0,
                      const DiscreteMeasure& p) {
    if (x0.size() != p.size() || coeffs.A.size() != p.size())
        throw std::invalid_argument("value_function: length mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s.add(p.weights[i] * coeffs.A[i] * x0.values[i]);
    return s.value() + coeffs.B;
}

double eval_auxiliary(const HJBCoefficients& coeffs, double t, const PopulationState& x,
                      const DiscreteMeasure& p, const DiscreteMeasure& mu) {
    if (!(t >= 0.0)) throw std::invalid_argument("eval_auxiliary: t must be nonnegative");
    if (x.size() != p.size() || coeffs.D.size() != mu.size())
        throw std::invalid_argument("eval_auxiliary: length mismatch");
    KahanSum outer;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        const double dj = mu.points[j];
        KahanSum inner;
        for (std::size_t i = 0; i < p.size(); ++i)
            inner.add(p.weights[i] * coeffs.C_at(i, dj) * x.values[i]);
        outer.add(mu.weights[j] * (inner.value() + coeffs.D[j]) * std::exp(-dj * t));
    }
    return outer.value();
}

bool AdmissibilityReport::all_pass() const {
    for (const auto& c : conditions)
        if (c.applicable && !c.pass) return false;
    return true;
}

AdmissibilityReport check_admissibility(const GammaSpec& p_spec, const GammaSpec& mu_spec,
                                        double R, const UncertaintySpec& u) {
    u.validate();
    AdmissibilityReport rep;

    AdmissibilityCondition aversion;
    aversion.id = "aversion-ratio-bound";
    aversion.pass = u.cbar < 1.0 && u.c <= u.cbar;
    aversion.detail = "proportional aversion: eta(r)/r = " + std::to_string(u.c) + " < 1";
    rep.conditions.push_back(aversion);

    AdmissibilityCondition zero_growth;
    zero_growth.id = "zero-growth-integrability";
    zero_growth.applicable = R == 0.0;
    zero_growth.pass = !zero_growth.applicable || p_spec.shape + mu_spec.shape > 1.0;
    zero_growth.detail = "needs alpha_p + alpha_delta > 1 when R = 0; got " +
                         std::to_string(p_spec.shape + mu_spec.shape);
    rep.conditions.push_back(zero_growth);

    AdmissibilityCondition discount_mean;
    discount_mean.id = "discount-inverse-moment";
    discount_mean.applicable = R > 0.0;
    discount_mean.pass = !discount_mean.applicable || mu_spec.shape > 1.0;
    discount_mean.detail = "needs alpha_delta > 1 when R > 0; got " +
                           std::to_string(mu_spec.shape);
    rep.conditions.push_back(discount_mean);

    AdmissibilityCondition aversion_moment;
    aversion_moment.id = "aversion-inverse-moment";
    aversion_moment.pass = p_spec.shape > 1.0;
    aversion_moment.detail = "proportional eta: needs alpha_p > 1 for the 1/eta moment; got " +
                             std::to_string(p_spec.shape);
    rep.conditions.push_back(aversion_moment);

    return rep;
}

void write_a_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& p,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_a_csv: cannot open " + path);
    out << "r,A,Abar,phi_star\n";
    char buf[160];
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.points[i], coeffs.A[i],
                      coeffs.A_upper[i], coeffs.phi_star[i]);
        out << buf;
    }
}

void write_c_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& p,
                 const DiscreteMeasure& mu, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_c_csv: cannot open " + path);
    out << "r,delta,C\n";
    char buf[160];
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.points[i], mu.points[j],
                          coeffs.C_at(i, mu.points[j]));
            out << buf;
        }
}

void write_d_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& mu,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_d_csv: cannot open " + path);
    out << "delta,D\n";
    char buf[80];
    for (std::size_t j = 0; j < mu.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mu.points[j], coeffs.D[j]);
        out << buf;
    }
}

} // namespace envindex
