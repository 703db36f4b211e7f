#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "envindex/dynamics.hpp"
#include "envindex/hjb.hpp"
#include "envindex/measures.hpp"

namespace envindex {

// How the discount measure is quantized. Auto picks the tilted rule when the
// discount shape exceeds 1 (where the 1/delta kernels are integrable and the
// tilt makes them exact), the plain mid-quantile rule otherwise.
enum class MuScheme { Auto, Plain, Tilted };

MuScheme mu_scheme_from_string(const std::string& s);
std::string to_string(MuScheme s);

// Full run configuration. Rates carry 1/day, times days.
struct ModelConfig {
    GammaSpec p_spec{0.295, 34.4};
    GammaSpec mu_spec{1.25, 0.01};
    double growth_R = 0.02;
    std::vector<double> c_values{0.5};
    std::size_t atoms_N = 1024;
    std::size_t atoms_M = 1024;
    double x0_constant = 1.0;
    std::optional<std::string> x0_file;
    std::uint64_t seed = 20250811;
    MuScheme mu_scheme = MuScheme::Auto;
    SolverOptions solver;

    // Throws ConfigError on invalid values.
    void validate() const;
};

// c-grid (k - 1/2) / count, k = 1..count.
std::vector<double> default_c_grid(std::size_t count = 100);

DiscreteMeasure make_p_measure(const ModelConfig& cfg);
DiscreteMeasure make_mu_measure(const ModelConfig& cfg);

// Resolves x0 from the constant or the per-atom file (one value per line).
PopulationState make_x0(const ModelConfig& cfg, std::size_t n);

} // namespace envindex
