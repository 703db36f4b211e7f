#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "envindex/hjb.hpp"
#include "envindex/model.hpp"

namespace envindex {

// One point of the efficient frontier; satisfies V = Env - Ren / c in the
// proportional-aversion case.
struct FrontierPoint {
    double c = 0.0;
    double ren = 0.0;
    double env = 0.0;
    double value = 0.0;
};

// Discounted occupation kernel for one (r, delta) pair under a
// time-independent distortion:
//   K = R / (delta (R + r phi)) + (x0r - R/(R + r phi)) / (delta + R + r phi),
// equal to the integral of e^{-delta s} x_s(r) over all time.
double discounted_occupation(double r, double delta, double phi, double R, double x0r);

// Worst-case environmental impact sum_{ij} w_i w_j K(r_i, delta_j) at phi*.
double env_index(const HJBCoefficients& coeffs, const PopulationState& x0,
                 const DiscreteMeasure& p, const DiscreteMeasure& mu, double R);

// Worst-case discount-weighted relative entropy
// sum_{ij} w_i w_j (phi* ln phi* - phi* + 1)_i K(r_i, delta_j).
double ren_index(const HJBCoefficients& coeffs, const PopulationState& x0,
                 const DiscreteMeasure& p, const DiscreteMeasure& mu, double R);

// Re-solves the coefficients for every c (strictly increasing, each in
// (0,1)) and returns one frontier point per c, in input order. Solver errors
// are annotated with the offending c.
std::vector<FrontierPoint> sweep_frontier(const ModelConfig& config,
                                          std::span<const double> c_values);

// CSV with header "c,Ren,Env,V".
void write_frontier_csv(const std::vector<FrontierPoint>& points, std::ostream& out);
void write_frontier_csv(const std::vector<FrontierPoint>& points, const std::string& path);

} // namespace envindex
