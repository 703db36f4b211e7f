#include "envindex/measures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "envindex/numeric.hpp"
#include "envindex/specfun.hpp"

namespace envindex {

namespace {

void require_spec(const GammaSpec& spec) {
    if (!(spec.shape > 0.0) || !(spec.scale > 0.0))
        throw std::domain_error("GammaSpec: shape and scale must be positive");
}

} // namespace

void DiscreteMeasure::validate() const {
    if (points.size() != weights.size() || points.empty())
        throw std::invalid_argument("DiscreteMeasure: empty or mismatched atom lists");
    KahanSum total;
    double prev = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i] > prev))
            throw std::invalid_argument("DiscreteMeasure: points must be positive and strictly increasing");
        if (!(weights[i] > 0.0))
            throw std::invalid_argument("DiscreteMeasure: weights must be positive");
        prev = points[i];
        total.add(weights[i]);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
}

DiscreteMeasure quantize_gamma(const GammaSpec& spec, std::size_t n) {
    require_spec(spec);
    if (n == 0) throw std::domain_error("quantize_gamma: n must be at least 1");
    DiscreteMeasure m;
    m.points.resize(n);
    m.weights.assign(n, 1.0 / static_cast<double>(n));
    // Points in units of the scale parameter first, then scaled.
    for (std::size_t i = 0; i < n; ++i) {
        const double q = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
        m.points[i] = spec.scale * specfun::inv_reg_lower_incomplete_gamma(spec.shape, q);
    }
    m.validate();
    return m;
}

DiscreteMeasure quantize_gamma_tilted(const GammaSpec& spec, std::size_t n) {
    require_spec(spec);
    if (n == 0) throw std::domain_error("quantize_gamma_tilted: n must be at least 1");
    if (!(spec.shape > 1.0))
        throw std::domain_error("quantize_gamma_tilted: requires shape > 1");
    const double prop = spec.shape - 1.0;
    const double nd = static_cast<double>(n);

    // Proposal quantile-cell edges in scale units; edge 0 is 0, edge n is +inf
    // (handled through P(shape, inf) = 1).
    std::vector<double> cdf_at_edges(n + 1);
    cdf_at_edges[0] = 0.0;
    cdf_at_edges[n] = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double edge =
            specfun::inv_reg_lower_incomplete_gamma(prop, static_cast<double>(k) / nd);
        cdf_at_edges[k] = specfun::reg_lower_incomplete_gamma(spec.shape, edge);
    }

    DiscreteMeasure m;
    m.points.resize(n);
    m.weights.resize(n);
    KahanSum total;
    for (std::size_t k = 0; k < n; ++k) {
        // Conditional mean of the proposal over its k-th quantile cell.
        const double mean_unit = prop * nd * (cdf_at_edges[k + 1] - cdf_at_edges[k]);
        m.points[k] = spec.scale * mean_unit;
        m.weights[k] = mean_unit;
        total.add(mean_unit);
    }
    const double norm = total.value();
    for (std::size_t k = 0; k < n; ++k) m.weights[k] /= norm;
    m.validate();
    return m;
}

double laplace(const DiscreteMeasure& measure, double t) {
    if (!(t >= 0.0)) throw std::domain_error("laplace: t must be nonnegative");
    KahanSum s;
    for (std::size_t i = 0; i < measure.size(); ++i)
        s.add(measure.weights[i] * std::exp(-measure.points[i] * t));
    return s.value();
}

double laplace_derivative(const DiscreteMeasure& measure, double t) {
    if (!(t >= 0.0)) throw std::domain_error("laplace_derivative: t must be nonnegative");
    KahanSum s;
    for (std::size_t i = 0; i < measure.size(); ++i)
        s.add(measure.weights[i] * measure.points[i] * std::exp(-measure.points[i] * t));
    return -s.value();
}

void write_csv(const DiscreteMeasure& measure, std::ostream& out) {
    out << "point,weight\n";
    char buf[80];
    for (std::size_t i = 0; i < measure.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", measure.points[i], measure.weights[i]);
        out << buf;
    }
}

void write_csv(const DiscreteMeasure& measure, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    write_csv(measure, out);
}

DiscreteMeasure read_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_measure_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("point,weight", 0) != 0)
        throw std::runtime_error("read_measure_csv: bad header in " + path);
    DiscreteMeasure m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw std::runtime_error("read_measure_csv: bad row in " + path);
        m.points.push_back(std::stod(a));
        m.weights.push_back(std::stod(b));
    }
    m.validate();
    return m;
}

} // namespace envindex
