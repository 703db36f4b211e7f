#include "envindex/frontier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "envindex/errors.hpp"
#include "envindex/numeric.hpp"

namespace envindex {

double discounted_occupation(double r, double delta, double phi, double R, double x0r) {
    if (!(r > 0.0) || !(delta > 0.0) || !(phi > 0.0) || !(R >= 0.0))
        throw std::invalid_argument("discounted_occupation: bad arguments");
    const double z = R + r * phi;
    const double stationary = R == 0.0 ? 0.0 : R / z;
    return (R == 0.0 ? 0.0 : R / (delta * z)) + (x0r - stationary) / (delta + z);
}

namespace {

// Shared pass over the (i, j) grid; per-atom partial sums are combined in
// index order afterwards, so the result is identical for any worker count.
void occupation_sums(const HJBCoefficients& coeffs, const PopulationState& x0,
                     const DiscreteMeasure& p, const DiscreteMeasure& mu, double R,
                     double& env_out, double& ren_out) {
    const std::size_t n = p.size();
    if (x0.size() != n || coeffs.A.size() != n)
        throw std::invalid_argument("env/ren index: length mismatch");
    std::vector<double> env_partial(n), ren_partial(n);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double phi = coeffs.phi_star[i];
        const double z = R + p.points[i] * phi;
        const double stationary = R == 0.0 ? 0.0 : R / z;
        const double transient = x0.values[i] - stationary;
        KahanSum ki;
        for (std::size_t j = 0; j < mu.size(); ++j) {
            const double dj = mu.points[j];
            const double k = (R == 0.0 ? 0.0 : R / (dj * z)) + transient / (dj + z);
            ki.add(mu.weights[j] * k);
        }
        env_partial[i] = p.weights[i] * ki.value();
        ren_partial[i] = env_partial[i] * coeffs.penalty[i];
    }

    KahanSum env, ren;
    for (std::size_t i = 0; i < n; ++i) {
        env.add(env_partial[i]);
        ren.add(ren_partial[i]);
    }
    env_out = env.value();
    ren_out = ren.value();
}

} // namespace

double env_index(const HJBCoefficients& coeffs, const PopulationState& x0,
                 const DiscreteMeasure& p, const DiscreteMeasure& mu, double R) {
    double env = 0.0, ren = 0.0;
    occupation_sums(coeffs, x0, p, mu, R, env, ren);
    return env;
}

double ren_index(const HJBCoefficients& coeffs, const PopulationState& x0,
                 const DiscreteMeasure& p, const DiscreteMeasure& mu, double R) {
    double env = 0.0, ren = 0.0;
    occupation_sums(coeffs, x0, p, mu, R, env, ren);
    return ren;
}

std::vector<FrontierPoint> sweep_frontier(const ModelConfig& config,
                                          std::span<const double> c_values) {
    config.validate();
    if (c_values.empty()) throw ConfigError("sweep_frontier: empty c grid");
    for (std::size_t k = 0; k < c_values.size(); ++k) {
        if (!(c_values[k] > 0.0) || !(c_values[k] < 1.0))
            throw ConfigError("sweep_frontier: every c must lie in (0,1)");
        if (k > 0 && !(c_values[k] > c_values[k - 1]))
            throw ConfigError("sweep_frontier: c values must be strictly increasing");
    }

    const DiscreteMeasure p = make_p_measure(config);
    const DiscreteMeasure mu = make_mu_measure(config);
    const PopulationState x0 = make_x0(config, p.size());

    std::vector<FrontierPoint> points;
    points.reserve(c_values.size());
    for (double c : c_values) {
        try {
            const auto u = UncertaintySpec::proportional(c);
            const HJBCoefficients coeffs =
                compute_coefficients(p, mu, config.growth_R, u, config.solver);
            FrontierPoint pt;
            pt.c = c;
            pt.value = value_function(coeffs, x0, p);
            occupation_sums(coeffs, x0, p, mu, config.growth_R, pt.env, pt.ren);
            points.push_back(pt);
        } catch (const SolverError& e) {
            throw SolverError("sweep_frontier at c=" + std::to_string(c) + ": " + e.what(),
                              e.residual());
        }
    }
    return points;
}

void write_frontier_csv(const std::vector<FrontierPoint>& points, std::ostream& out) {
    out << "c,Ren,Env,V\n";
    char buf[160];
    for (const auto& pt : points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", pt.c, pt.ren, pt.env,
                      pt.value);
        out << buf;
    }
}

void write_frontier_csv(const std::vector<FrontierPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_frontier_csv: cannot open " + path);
    write_frontier_csv(points, out);
}

} // namespace envindex
