#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "envindex/dynamics.hpp"
#include "envindex/hjb.hpp"
#include "envindex/measures.hpp"

namespace envindex {

// Configuration of the exact event-driven Monte Carlo of the finite jump
// system.
struct SimulationConfig {
    std::size_t n_sites = 0;
    double horizon = 0.0;          // days
    std::vector<double> sample_times;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-replicate paths of the aggregate X^(N) at the sample times; row k is
// replicate k. Sites flip 1 -> 0 at their distorted rate and 0 -> 1 at R,
// with competing exponential clocks (no discretization bias). Reproducible
// bit-for-bit from the seed for any worker count.
std::vector<std::vector<double>> simulate_jump_system(const SimulationConfig& cfg,
                                                      const std::vector<double>& rates,
                                                      double R,
                                                      const std::vector<int>& x0);

// Classical fourth-order one-step integration of
//   dx/dt = -r phi_t(r) x + R (1 - x)
// per atom. Returns the state at every grid time (grid increasing, from 0).
std::vector<PopulationState> ode_integrate(const PopulationState& x0,
                                           const std::function<Distortion(double)>& phi_of_t,
                                           double R, const DiscreteMeasure& p,
                                           const std::vector<double>& grid, double step);

// Brute-force value of the objective for a time-independent distortion:
// composite Simpson on a geometric time grid of Delta_s * H(x_s, phi) up to a
// horizon T, plus the analytic stationary tail. T is chosen so that the
// exact discrete transient tail bound
//   sum_{ij} w_i w_j |g_i| |x0_i - xinf_i| e^{-(delta_j + lambda_i) T} / (delta_j + lambda_i)
// falls below tail_tol / 2, and the quadrature is refined by doubling until
// two successive refinements differ by less than tail_tol / 2.
double quadrature_objective(const PopulationState& x0, const Distortion& phi,
                            const DiscreteMeasure& p, const DiscreteMeasure& mu,
                            const UncertaintySpec& u, double R, double tail_tol);

// Same machinery for an arbitrary per-atom weight g:
//   integral of Delta_s * sum_i w_i g_i x_s(r_i) ds over all time.
// g = 1 gives the discounted population (Env at phi = phi*); g = entropy
// gives Ren.
double quadrature_discounted_population(const PopulationState& x0, const Distortion& phi,
                                        const DiscreteMeasure& p, const DiscreteMeasure& mu,
                                        double R, const std::vector<double>& g,
                                        double tail_tol);

// Monte Carlo summary row per sample time.
struct McSummaryRow {
    double t = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
    double closed_form = 0.0;
    double z_score = 0.0;
};

std::vector<McSummaryRow> summarize_simulation(const std::vector<std::vector<double>>& paths,
                                               const SimulationConfig& cfg,
                                               const std::vector<double>& closed_form);

// CSV with header "t,mean,std,stderr,closed_form,z_score".
void write_mc_summary_csv(const std::vector<McSummaryRow>& rows, std::ostream& out);
void write_mc_summary_csv(const std::vector<McSummaryRow>& rows, const std::string& path);

} // namespace envindex
