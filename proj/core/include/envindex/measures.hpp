#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace envindex {

// Shape/scale parameters of a gamma probability measure; rates carry 1/day.
struct GammaSpec {
    double shape = 1.0;
    double scale = 1.0;
};

// Finite atomic approximation of a probability measure on (0, inf).
// Points are strictly increasing and positive; weights sum to 1.
struct DiscreteMeasure {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }

    // Throws std::invalid_argument if an invariant is broken.
    void validate() const;
};

// Mid-quantile quantization: atom i (1-based) sits at the (2i-1)/(2n)
// quantile of the gamma law, every weight is 1/n.
DiscreteMeasure quantize_gamma(const GammaSpec& spec, std::size_t n);

// Importance-tilted quantile quantization for measures that enter through
// 1/x kernels (the discount measure under a positive growth rate). The
// partition comes from the quantile cells of the proposal Gamma(shape-1,
// scale); atoms sit at the proposal's cell conditional means and weights
// are proportional to the atom value (the density ratio), normalized.
// By construction sum_j w_j / x_j reproduces E[1/X] = 1/(scale*(shape-1))
// to machine precision. Requires shape > 1.
DiscreteMeasure quantize_gamma_tilted(const GammaSpec& spec, std::size_t n);

// Laplace transform sum_i w_i exp(-point_i * t); equals 1 at t = 0 and is
// strictly decreasing and convex in t.
double laplace(const DiscreteMeasure& measure, double t);

// d/dt of the above: -sum_i w_i point_i exp(-point_i * t); at t = 0 this is
// minus the measure's mean.
double laplace_derivative(const DiscreteMeasure& measure, double t);

// CSV with a "point,weight" header, 17 significant digits.
void write_csv(const DiscreteMeasure& measure, std::ostream& out);
void write_csv(const DiscreteMeasure& measure, const std::string& path);
DiscreteMeasure read_measure_csv(const std::string& path);

} // namespace envindex
