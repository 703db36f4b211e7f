#pragma once

#include <iosfwd>
#include <vector>

#include "envindex/measures.hpp"

namespace envindex {

// Per-rate population density, aligned with the atoms of the p-measure;
// every entry lies in [0, 1].
struct PopulationState {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

// Multiplicative misspecification of the decay rates, aligned with the
// p-atoms; every entry is positive.
struct Distortion {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

PopulationState constant_state(std::size_t n, double value);
Distortion constant_distortion(std::size_t n, double value);

// Closed-form evolution under a time-independent distortion: per atom,
//   x_t = s + (x0 - s) e^{-(R + r phi) t},  s = R / (R + r phi),
// with s = 0 when R = 0. Entries stay in [0, 1]; t = 0 returns x0 exactly.
PopulationState evolve(const PopulationState& x0, const Distortion& phi, double R,
                       const DiscreteMeasure& p, double t);

// Weighted aggregate sum_i w_i x_i in [0, 1].
double aggregate(const PopulationState& x, const DiscreteMeasure& p);

// Trajectory CSV: header "t,X" plus one column per atom when requested.
void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const std::vector<PopulationState>& states,
                          const DiscreteMeasure& p, bool per_atom_columns);

} // namespace envindex
