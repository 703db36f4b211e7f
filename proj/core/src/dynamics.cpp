#include "envindex/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "envindex/numeric.hpp"

namespace envindex {

PopulationState constant_state(std::size_t n, double value) {
    if (!(value >= 0.0) || !(value <= 1.0))
        throw std::invalid_argument("constant_state: value must lie in [0,1]");
    return PopulationState{std::vector<double>(n, value)};
}

Distortion constant_distortion(std::size_t n, double value) {
    if (!(value > 0.0))
        throw std::invalid_argument("constant_distortion: value must be positive");
    return Distortion{std::vector<double>(n, value)};
}

PopulationState evolve(const PopulationState& x0, const Distortion& phi, double R,
                       const DiscreteMeasure& p, double t) {
    const std::size_t n = p.size();
    if (x0.size() != n || phi.size() != n)
        throw std::invalid_argument("evolve: state/distortion length must match the p-measure");
    if (!(t >= 0.0)) throw std::invalid_argument("evolve: t must be nonnegative");
    if (!(R >= 0.0)) throw std::invalid_argument("evolve: R must be nonnegative");
    if (t == 0.0) return x0;

    PopulationState out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rate = R + p.points[i] * phi.values[i];
        const double stationary = R == 0.0 ? 0.0 : R / rate;
        const double x = stationary + (x0.values[i] - stationary) * std::exp(-rate * t);
        out.values[i] = std::clamp(x, 0.0, 1.0);
    }
    return out;
}

double aggregate(const PopulationState& x, const DiscreteMeasure& p) {
    if (x.size() != p.size())
        throw std::invalid_argument("aggregate: state length must match the p-measure");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s.add(p.weights[i] * x.values[i]);
    return std::clamp(s.value(), 0.0, 1.0);
}

void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<PopulationState>& states,
                          const DiscreteMeasure& p, bool per_atom_columns) {
    if (times.size() != states.size())
        throw std::invalid_argument("write_trajectory_csv: times/states length mismatch");
    out << "t,X";
    if (per_atom_columns)
        for (std::size_t i = 0; i < p.size(); ++i) out << ",x" << i;
    out << '\n';
    char buf[40];
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        out << buf;
        std::snprintf(buf, sizeof buf, ",%.17g", aggregate(states[k], p));
        out << buf;
        if (per_atom_columns)
            for (double v : states[k].values) {
                std::snprintf(buf, sizeof buf, ",%.17g", v);
                out << buf;
            }
        out << '\n';
    }
}

} // namespace envindex
