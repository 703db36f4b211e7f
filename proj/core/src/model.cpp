#include "envindex/model.hpp"

#include <fstream>

#include "envindex/errors.hpp"

namespace envindex {

MuScheme mu_scheme_from_string(const std::string& s) {
    if (s == "auto") return MuScheme::Auto;
    if (s == "plain") return MuScheme::Plain;
    if (s == "tilted") return MuScheme::Tilted;
    throw ConfigError("unknown mu quantization scheme: " + s);
}

std::string to_string(MuScheme s) {
    switch (s) {
        case MuScheme::Auto: return "auto";
        case MuScheme::Plain: return "plain";
        case MuScheme::Tilted: return "tilted";
    }
    return "auto";
}

void ModelConfig::validate() const {
    if (!(p_spec.shape > 0.0) || !(p_spec.scale > 0.0))
        throw ConfigError("p measure: shape and scale must be positive");
    if (!(mu_spec.shape > 0.0) || !(mu_spec.scale > 0.0))
        throw ConfigError("mu measure: shape and scale must be positive");
    if (!(growth_R >= 0.0)) throw ConfigError("growth_R must be nonnegative");
    if (atoms_N == 0 || atoms_M == 0) throw ConfigError("atoms_N and atoms_M must be at least 1");
    if (c_values.empty()) throw ConfigError("at least one aversion value c is required");
    for (double c : c_values)
        if (!(c > 0.0) || !(c < 1.0)) throw ConfigError("every aversion value c must lie in (0,1)");
    for (std::size_t k = 1; k < c_values.size(); ++k)
        if (!(c_values[k] > c_values[k - 1]))
            throw ConfigError("aversion values must be strictly increasing");
    if (!x0_file && (!(x0_constant >= 0.0) || !(x0_constant <= 1.0)))
        throw ConfigError("x0 must lie in [0,1]");
    if (!(solver.tol > 0.0) || solver.max_iter < 1)
        throw ConfigError("solver tolerance/iteration budget invalid");
    if (mu_scheme == MuScheme::Tilted && !(mu_spec.shape > 1.0))
        throw ConfigError("tilted mu quantization requires alpha_delta > 1");
}

std::vector<double> default_c_grid(std::size_t count) {
    std::vector<double> grid(count);
    for (std::size_t k = 1; k <= count; ++k)
        grid[k - 1] = (static_cast<double>(k) - 0.5) / static_cast<double>(count);
    return grid;
}

DiscreteMeasure make_p_measure(const ModelConfig& cfg) {
    return quantize_gamma(cfg.p_spec, cfg.atoms_N);
}

DiscreteMeasure make_mu_measure(const ModelConfig& cfg) {
    const bool tilted = cfg.mu_scheme == MuScheme::Tilted ||
                        (cfg.mu_scheme == MuScheme::Auto && cfg.mu_spec.shape > 1.0);
    return tilted ? quantize_gamma_tilted(cfg.mu_spec, cfg.atoms_M)
                  : quantize_gamma(cfg.mu_spec, cfg.atoms_M);
}

PopulationState make_x0(const ModelConfig& cfg, std::size_t n) {
    if (!cfg.x0_file) return constant_state(n, cfg.x0_constant);
    std::ifstream in(*cfg.x0_file);
    if (!in) throw ConfigError("cannot open x0 file: " + *cfg.x0_file);
    PopulationState x0;
    double v;
    while (in >> v) {
        if (!(v >= 0.0) || !(v <= 1.0))
            throw ConfigError("x0 file entries must lie in [0,1]");
        x0.values.push_back(v);
    }
    if (x0.size() != n)
        throw ConfigError("x0 file must hold exactly one value per p-atom (" +
                          std::to_string(n) + " expected, " + std::to_string(x0.size()) +
                          " found)");
    return x0;
}

} // namespace envindex
