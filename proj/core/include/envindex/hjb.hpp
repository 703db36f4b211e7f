#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "envindex/dynamics.hpp"
#include "envindex/measures.hpp"

namespace envindex {

// Proportional uncertainty aversion eta(r) = c * r with c in (0, 1); cbar is
// the admissibility bound of the aversion ratio, equal to c in the
// proportional case.
struct UncertaintySpec {
    double c = 0.5;
    double cbar = 0.5;

    static UncertaintySpec proportional(double c);
    void validate() const;
    double eta(double r) const { return c * r; }
};

struct SolverOptions {
    double tol = 1e-12;
    int max_iter = 10000;
};

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool used_bisection = false;
};

// Upper bound Abar(r) = -(1/eta) ln(1 - eta/r); requires 0 < eta < r.
double upper_bound_A(double r, double eta);

// Unique positive root of A = F(A) with
//   F(A) = [sum_j w_j / (delta_j + r e^{-eta A} + R)] * H(A),
//   H(A) = 1 - r (1 - (1 + eta A) e^{-eta A}) / eta,
// solved by direct iteration from A = 0 with a bisection safeguard on the
// increasing map A - F(A) over [0, Abar]. The reported residual is
// |A - F(A)|; the stopping tolerance is floored at the summation noise
// level ~64 eps (1 + |A|). Throws SolverError on non-convergence.
FixedPointResult solve_A_detail(double r, double eta, double R, const DiscreteMeasure& mu,
                                const SolverOptions& opts = {});
double solve_A(double r, double eta, double R, const DiscreteMeasure& mu, double tol);

// Pure bisection reference for the same root; used for cross-checks.
double solve_A_bisection(double r, double eta, double R, const DiscreteMeasure& mu,
                         double tol, int max_iter = 10000);

// Closed-form coefficients of the quantized extended HJB system.
class HJBCoefficients {
public:
    std::vector<double> A;          // per p-atom
    std::vector<double> A_upper;    // Abar(r_i)
    std::vector<double> H;          // H(r_i) in [0, 1]
    std::vector<double> phi_star;   // e^{-eta_i A_i} in (0, 1)
    std::vector<double> penalty;    // 1 - (1 + eta_i A_i) e^{-eta_i A_i}
    std::vector<double> distorted_rate; // z_i = r_i phi_star_i
    std::vector<double> residual;   // per-atom |A - F(A)|
    double B = 0.0;
    std::vector<double> D;          // per mu-atom
    double R = 0.0;

    // C(r_i, delta_j) = -delta_j H_i / (delta_j + z_i + R), evaluated lazily.
    double C_at(std::size_t i, double delta_j) const {
        return -delta_j * H[i] / (delta_j + distorted_rate[i] + R);
    }

    Distortion phi() const { return Distortion{phi_star}; }
};

// Solves every atom (atoms are independent and run in parallel; assembly is
// index-ordered, so the result does not depend on the worker count), then
// evaluates B, D and the worst-case distortion. R = 0 sets B = 0 and D = 0
// exactly. Throws SolverError annotated with the offending atom.
HJBCoefficients compute_coefficients(const DiscreteMeasure& p, const DiscreteMeasure& mu,
                                     double R, const UncertaintySpec& u,
                                     const SolverOptions& opts = {});

// Phi(x0) = sum_i w_i A_i x0_i + B; for x0 = 1 this is the environmental
// index V(1).
double value_function(const HJBCoefficients& coeffs, const PopulationState& x0,
                      const DiscreteMeasure& p);

// Psi_t(x) = sum_j w_j (sum_i w_i C(r_i, delta_j) x_i + D_j) e^{-delta_j t}.
double eval_auxiliary(const HJBCoefficients& coeffs, double t, const PopulationState& x,
                      const DiscreteMeasure& p, const DiscreteMeasure& mu);

// One verdict per well-posedness condition of the continuum problem. The
// quantized system is well-defined regardless, so failures are warnings.
struct AdmissibilityCondition {
    std::string id;
    bool applicable = true;
    bool pass = true;
    std::string detail;
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCondition> conditions;
    bool all_pass() const;
};

AdmissibilityReport check_admissibility(const GammaSpec& p_spec, const GammaSpec& mu_spec,
                                        double R, const UncertaintySpec& u);

// Coefficient dumps: A.csv (r,A,Abar,phi_star), C.csv (r,delta,C),
// D.csv (delta,D).
void write_a_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& p, const std::string& path);
void write_c_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& p,
                 const DiscreteMeasure& mu, const std::string& path);
void write_d_csv(const HJBCoefficients& coeffs, const DiscreteMeasure& mu, const std::string& path);

} // namespace envindex
