// Command-line front end: quantize, solve, frontier, converge, simulate,
// verify. Rates are 1/day and times are days throughout. Exit codes:
// 0 success, 2 invalid configuration, 3 solver failure, 4 verification
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "envindex/errors.hpp"
#include "envindex/frontier.hpp"
#include "envindex/hjb.hpp"
#include "envindex/model.hpp"
#include "envindex/numeric.hpp"
#include "envindex/oracle.hpp"
#include "envindex/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace envindex;

namespace {

struct VerificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliOptions {
    std::string config_path;
    std::string out_dir = "envindex_run";

    std::optional<double> alpha_p, beta_p, alpha_delta, beta_delta;
    std::vector<double> growth_R;   // frontier accepts a batch
    std::vector<double> aversion_c;
    std::optional<std::size_t> atoms_N, atoms_M;
    std::optional<double> x0_constant;
    std::optional<std::string> x0_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mu_scheme;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

ModelConfig load_config(const CliOptions& opt) {
    ModelConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot open config file: " + opt.config_path);
        json doc;
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        try {
            if (doc.contains("p")) {
                cfg.p_spec.shape = doc["p"].value("shape", cfg.p_spec.shape);
                cfg.p_spec.scale = doc["p"].value("scale", cfg.p_spec.scale);
            }
            if (doc.contains("mu")) {
                cfg.mu_spec.shape = doc["mu"].value("shape", cfg.mu_spec.shape);
                cfg.mu_spec.scale = doc["mu"].value("scale", cfg.mu_spec.scale);
            }
            cfg.growth_R = doc.value("growth_R", cfg.growth_R);
            if (doc.contains("aversion_c")) {
                if (doc["aversion_c"].is_array())
                    cfg.c_values = doc["aversion_c"].get<std::vector<double>>();
                else
                    cfg.c_values = {doc["aversion_c"].get<double>()};
            }
            cfg.atoms_N = doc.value("atoms_N", cfg.atoms_N);
            cfg.atoms_M = doc.value("atoms_M", cfg.atoms_M);
            if (doc.contains("x0")) {
                if (doc["x0"].is_object())
                    cfg.x0_file = doc["x0"].at("file").get<std::string>();
                else
                    cfg.x0_constant = doc["x0"].get<double>();
            }
            cfg.seed = doc.value("seed", cfg.seed);
            if (doc.contains("mu_scheme"))
                cfg.mu_scheme = mu_scheme_from_string(doc["mu_scheme"].get<std::string>());
            if (doc.contains("solver")) {
                cfg.solver.tol = doc["solver"].value("tol", cfg.solver.tol);
                cfg.solver.max_iter = doc["solver"].value("max_iter", cfg.solver.max_iter);
            }
        } catch (const json::exception& e) {
            throw ConfigError("config file schema error: " + std::string(e.what()));
        }
    }

    // Flags override file values.
    if (opt.alpha_p) cfg.p_spec.shape = *opt.alpha_p;
    if (opt.beta_p) cfg.p_spec.scale = *opt.beta_p;
    if (opt.alpha_delta) cfg.mu_spec.shape = *opt.alpha_delta;
    if (opt.beta_delta) cfg.mu_spec.scale = *opt.beta_delta;
    if (opt.growth_R.size() == 1) cfg.growth_R = opt.growth_R.front();
    if (!opt.aversion_c.empty()) cfg.c_values = opt.aversion_c;
    if (opt.atoms_N) cfg.atoms_N = *opt.atoms_N;
    if (opt.atoms_M) cfg.atoms_M = *opt.atoms_M;
    if (opt.x0_constant) {
        cfg.x0_constant = *opt.x0_constant;
        cfg.x0_file.reset();
    }
    if (opt.x0_file) cfg.x0_file = *opt.x0_file;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.mu_scheme) cfg.mu_scheme = mu_scheme_from_string(*opt.mu_scheme);
    if (opt.tol) cfg.solver.tol = *opt.tol;
    if (opt.max_iter) cfg.solver.max_iter = *opt.max_iter;

    cfg.validate();
    return cfg;
}

json config_to_json(const ModelConfig& cfg) {
    json j;
    j["p"] = {{"shape", cfg.p_spec.shape}, {"scale", cfg.p_spec.scale}};
    j["mu"] = {{"shape", cfg.mu_spec.shape}, {"scale", cfg.mu_spec.scale}};
    j["growth_R"] = cfg.growth_R;
    j["aversion_c"] = cfg.c_values;
    j["atoms_N"] = cfg.atoms_N;
    j["atoms_M"] = cfg.atoms_M;
    if (cfg.x0_file)
        j["x0"] = {{"file", *cfg.x0_file}};
    else
        j["x0"] = cfg.x0_constant;
    j["seed"] = cfg.seed;
    j["mu_scheme"] = to_string(cfg.mu_scheme);
    j["mu_scheme_resolved"] =
        (cfg.mu_scheme == MuScheme::Tilted ||
         (cfg.mu_scheme == MuScheme::Auto && cfg.mu_spec.shape > 1.0))
            ? "tilted"
            : "plain";
    j["solver"] = {{"tol", cfg.solver.tol}, {"max_iter", cfg.solver.max_iter}};
    return j;
}

json admissibility_to_json(const AdmissibilityReport& rep) {
    json arr = json::array();
    for (const auto& cond : rep.conditions) {
        arr.push_back({{"id", cond.id},
                       {"applicable", cond.applicable},
                       {"verdict", !cond.applicable ? "SKIP" : (cond.pass ? "PASS" : "WARN")},
                       {"detail", cond.detail}});
    }
    return arr;
}

void write_summary(const fs::path& dir, const std::string& command, const ModelConfig& cfg,
                   const json& results) {
    json j;
    j["tool"] = {{"name", "envindex"}, {"version", kVersion}};
    j["command"] = command;
    j["config"] = config_to_json(cfg);
    j["results"] = results;
    std::ofstream out(dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << j.dump(2) << '\n';
}

fs::path ensure_out_dir(const CliOptions& opt) {
    fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    return dir;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt, bool multi_R) {
    cmd->add_option("--config", opt.config_path, "JSON configuration file");
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--alpha-p", opt.alpha_p, "shape of the decay-rate measure p");
    cmd->add_option("--beta-p", opt.beta_p, "scale of p (1/day)");
    cmd->add_option("--alpha-delta", opt.alpha_delta, "shape of the discount measure mu");
    cmd->add_option("--beta-delta", opt.beta_delta, "scale of mu (1/day)");
    auto* r = cmd->add_option("--growth-R", opt.growth_R, "growth rate R (1/day)");
    if (!multi_R) r->expected(0, 1);
    cmd->add_option("--aversion-c", opt.aversion_c,
                    "uncertainty-aversion constant(s) c in (0,1)");
    cmd->add_option("--atoms-N", opt.atoms_N, "number of p atoms");
    cmd->add_option("--atoms-M", opt.atoms_M, "number of mu atoms");
    cmd->add_option("--x0", opt.x0_constant, "constant initial density in [0,1]");
    cmd->add_option("--x0-file", opt.x0_file, "per-atom initial density file (one value per line)");
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--mu-scheme", opt.mu_scheme,
                    "discount quantization: auto | plain | tilted");
    cmd->add_option("--tol", opt.tol, "fixed-point residual tolerance");
    cmd->add_option("--max-iter", opt.max_iter, "fixed-point iteration budget");
}

struct SolveArtifacts {
    DiscreteMeasure p, mu;
    HJBCoefficients coeffs;
    PopulationState x0;
    double v1 = 0.0;
};

SolveArtifacts run_solve(const ModelConfig& cfg, double c) {
    SolveArtifacts art{make_p_measure(cfg), make_mu_measure(cfg), {}, {}, 0.0};
    art.coeffs = compute_coefficients(art.p, art.mu, cfg.growth_R,
                                      UncertaintySpec::proportional(c), cfg.solver);
    art.x0 = make_x0(cfg, art.p.size());
    art.v1 = value_function(art.coeffs, art.x0, art.p);
    return art;
}

int cmd_solve(const CliOptions& opt) {
    const ModelConfig cfg = load_config(opt);
    const fs::path dir = ensure_out_dir(opt);
    const double c = cfg.c_values.front();

    const SolveArtifacts art = run_solve(cfg, c);
    write_a_csv(art.coeffs, art.p, (dir / "A.csv").string());
    write_c_csv(art.coeffs, art.p, art.mu, (dir / "C.csv").string());
    write_d_csv(art.coeffs, art.mu, (dir / "D.csv").string());

    const auto rep = check_admissibility(cfg.p_spec, cfg.mu_spec, cfg.growth_R,
                                         UncertaintySpec::proportional(c));
    double residual_max = 0.0;
    for (double rres : art.coeffs.residual) residual_max = std::max(residual_max, rres);

    json results;
    results["B"] = art.coeffs.B;
    results["V1"] = art.v1;
    results["c"] = c;
    results["residual_max"] = residual_max;
    results["admissibility"] = admissibility_to_json(rep);
    write_summary(dir, "solve", cfg, results);

    std::printf("solve: N=%zu M=%zu R=%g c=%g\n", cfg.atoms_N, cfg.atoms_M, cfg.growth_R, c);
    std::printf("  B              = %.10g\n", art.coeffs.B);
    std::printf("  V(x0)          = %.10g\n", art.v1);
    std::printf("  max |A - F(A)| = %.3g\n", residual_max);
    for (const auto& cond : rep.conditions)
        std::printf("  admissibility %-28s %s\n", cond.id.c_str(),
                    !cond.applicable ? "SKIP" : (cond.pass ? "PASS" : "WARN"));
    std::printf("  wrote %s\n", (dir / "summary.json").string().c_str());
    return 0;
}

int cmd_quantize(const CliOptions& opt, double alpha, double beta, std::size_t n,
                 const std::string& scheme, const std::string& out_file) {
    (void)opt;
    const GammaSpec spec{alpha, beta};
    const DiscreteMeasure m =
        scheme == "tilted" ? quantize_gamma_tilted(spec, n) : quantize_gamma(spec, n);
    write_csv(m, out_file);
    std::printf("quantize: %zu atoms of Gamma(shape=%g, scale=%g) [%s] -> %s\n", n, alpha, beta,
                scheme.c_str(), out_file.c_str());
    return 0;
}

int cmd_frontier(const CliOptions& opt, std::size_t c_count) {
    ModelConfig cfg = load_config(opt);
    const fs::path dir = ensure_out_dir(opt);

    std::vector<double> grid = cfg.c_values;
    if (opt.aversion_c.empty() && grid.size() <= 1) grid = default_c_grid(c_count);
    cfg.c_values = grid;
    cfg.validate();

    std::vector<double> r_batch = opt.growth_R.empty()
                                      ? std::vector<double>{cfg.growth_R}
                                      : opt.growth_R;
    json results;
    for (double R : r_batch) {
        ModelConfig run = cfg;
        run.growth_R = R;
        const auto points = sweep_frontier(run, grid);
        char name[64];
        if (r_batch.size() == 1)
            std::snprintf(name, sizeof name, "frontier.csv");
        else
            std::snprintf(name, sizeof name, "frontier_R%g.csv", R);
        write_frontier_csv(points, (dir / name).string());
        results["files"].push_back(name);
        std::printf("frontier: R=%g, %zu points -> %s\n", R, points.size(),
                    (dir / name).string().c_str());
    }
    results["c_count"] = grid.size();
    write_summary(dir, "frontier", cfg, results);
    return 0;
}

int cmd_converge(const CliOptions& opt, std::vector<std::size_t> resolutions,
                 std::size_t reference, std::size_t c_count) {
    ModelConfig cfg = load_config(opt);
    const fs::path dir = ensure_out_dir(opt);
    if (resolutions.empty()) throw ConfigError("converge: need at least one resolution");
    for (std::size_t r : resolutions)
        if (r >= reference)
            throw ConfigError("converge: every resolution must be below the reference");

    const std::vector<double> grid =
        cfg.c_values.size() > 1 ? cfg.c_values : default_c_grid(c_count);

    auto b_curve = [&](std::size_t nm) {
        ModelConfig run = cfg;
        run.atoms_N = nm;
        run.atoms_M = nm;
        const auto p = make_p_measure(run);
        const auto mu = make_mu_measure(run);
        std::vector<double> b;
        b.reserve(grid.size());
        for (double c : grid)
            b.push_back(compute_coefficients(p, mu, run.growth_R,
                                             UncertaintySpec::proportional(c), run.solver)
                            .B);
        return b;
    };

    const std::vector<double> ref = b_curve(reference);
    std::ofstream out(dir / "converge.csv");
    if (!out) throw std::runtime_error("cannot write converge.csv");
    out << "resolution,max_error\n";
    json rows = json::array();
    for (std::size_t nm : resolutions) {
        const std::vector<double> b = b_curve(nm);
        double err = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            err = std::max(err, std::abs(b[k] - ref[k]));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", nm, err);
        out << buf;
        rows.push_back({{"resolution", nm}, {"max_error", err}});
        std::printf("converge: N=M=%-6zu max|B_ref - B| = %.6g\n", nm, err);
    }
    json results;
    results["reference"] = reference;
    results["B_ref_first"] = ref.front();
    results["B_ref_last"] = ref.back();
    results["rows"] = rows;
    write_summary(dir, "converge", cfg, results);
    return 0;
}

int cmd_simulate(const CliOptions& opt, std::size_t sites, std::size_t replicates,
                 std::vector<double> times, double horizon, bool per_atom) {
    ModelConfig cfg = load_config(opt);
    const fs::path dir = ensure_out_dir(opt);
    if (times.empty()) times = {0.05, 0.2, 1.0, 3.0};
    if (horizon <= 0.0) horizon = times.back();

    // Sites are the p-quantization at the requested count; rates carry the
    // worst-case distortion solved at the configured c.
    ModelConfig site_cfg = cfg;
    site_cfg.atoms_N = sites;
    const auto p = make_p_measure(site_cfg);
    const auto mu = make_mu_measure(site_cfg);
    const auto coeffs = compute_coefficients(p, mu, cfg.growth_R,
                                             UncertaintySpec::proportional(cfg.c_values.front()),
                                             cfg.solver);

    if (cfg.x0_constant != 0.0 && cfg.x0_constant != 1.0 && !cfg.x0_file)
        throw ConfigError("simulate: x0 must be binary (0 or 1)");
    std::vector<int> x0(sites, cfg.x0_constant == 1.0 ? 1 : 0);
    if (cfg.x0_file) {
        const auto xs = make_x0(site_cfg, sites);
        for (std::size_t i = 0; i < sites; ++i) {
            if (xs.values[i] != 0.0 && xs.values[i] != 1.0)
                throw ConfigError("simulate: x0 file must be binary");
            x0[i] = xs.values[i] == 1.0 ? 1 : 0;
        }
    }

    SimulationConfig sim;
    sim.n_sites = sites;
    sim.horizon = horizon;
    sim.sample_times = times;
    sim.replicates = replicates;
    sim.seed = cfg.seed;

    const auto paths = simulate_jump_system(sim, coeffs.distorted_rate, cfg.growth_R, x0);

    DiscreteMeasure equal{p.points,
                          std::vector<double>(sites, 1.0 / static_cast<double>(sites))};
    PopulationState x0s;
    for (int v : x0) x0s.values.push_back(v);
    std::vector<double> closed;
    for (double t : times)
        closed.push_back(aggregate(evolve(x0s, coeffs.phi(), cfg.growth_R, equal, t), equal));

    const auto rows = summarize_simulation(paths, sim, closed);
    write_mc_summary_csv(rows, (dir / "mc.csv").string());

    // deterministic mean path alongside the Monte Carlo summary
    std::vector<PopulationState> states;
    for (double t : times)
        states.push_back(evolve(x0s, coeffs.phi(), cfg.growth_R, equal, t));
    {
        std::ofstream traj(dir / "trajectory.csv");
        if (!traj) throw std::runtime_error("cannot write trajectory.csv");
        write_trajectory_csv(traj, times, states, equal, per_atom);
    }

    json results;
    results["sites"] = sites;
    results["replicates"] = replicates;
    double worst_z = 0.0;
    for (const auto& row : rows) worst_z = std::max(worst_z, std::abs(row.z_score));
    results["worst_abs_z"] = worst_z;
    write_summary(dir, "simulate", cfg, results);

    std::printf("simulate: %zu sites x %zu replicates, worst |z| = %.3f -> %s\n", sites,
                replicates, worst_z, (dir / "mc.csv").string().c_str());
    return 0;
}

int cmd_verify(const CliOptions& opt, bool corrupt_a, double quad_tol) {
    ModelConfig cfg = load_config(opt);
    const double c = cfg.c_values.front();

    SolveArtifacts art = run_solve(cfg, c);
    if (corrupt_a) {
        // negative control: pin every A to its upper bound
        art.coeffs.A = art.coeffs.A_upper;
        for (std::size_t i = 0; i < art.p.size(); ++i) {
            const double y = c * art.p.points[i] * art.coeffs.A[i];
            art.coeffs.phi_star[i] = std::exp(-y);
            art.coeffs.penalty[i] = entropy_at_exp(y);
            art.coeffs.H[i] = 1.0 - art.coeffs.penalty[i] / c;
            art.coeffs.distorted_rate[i] = art.p.points[i] * art.coeffs.phi_star[i];
        }
        art.v1 = value_function(art.coeffs, art.x0, art.p);
    }

    int failures = 0;
    auto report = [&](const char* name, bool pass, double measure) {
        std::printf("  %-34s %s  (%.3g)\n", name, pass ? "PASS" : "FAIL", measure);
        if (!pass) ++failures;
    };
    std::printf("verify: N=%zu M=%zu R=%g c=%g%s\n", cfg.atoms_N, cfg.atoms_M, cfg.growth_R, c,
                corrupt_a ? " [corrupted A]" : "");

    // fixed-point certificate and bounds
    double worst_res = 0.0, worst_margin = 1.0;
    bool bounds_ok = true;
    for (std::size_t i = 0; i < art.p.size(); ++i) {
        worst_res = std::max(worst_res, art.coeffs.residual[i]);
        if (corrupt_a) {
            KahanSum s;
            for (std::size_t j = 0; j < art.mu.size(); ++j)
                s.add(art.mu.weights[j] /
                      (art.mu.points[j] + art.coeffs.distorted_rate[i] + cfg.growth_R));
            worst_res = std::max(
                worst_res, std::abs(art.coeffs.A[i] - s.value() * art.coeffs.H[i]));
        }
        if (!(art.coeffs.A[i] > 0.0) || !(art.coeffs.A[i] < art.coeffs.A_upper[i]))
            bounds_ok = false;
        worst_margin = std::min(worst_margin, art.coeffs.A_upper[i] - art.coeffs.A[i]);
    }
    report("fixed-point residual <= 1e-10", worst_res <= 1e-10, worst_res);
    report("0 < A < Abar", bounds_ok, worst_margin);

    // bisection agreement on a sample of atoms
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < art.p.size(); i += std::max<std::size_t>(1, art.p.size() / 16)) {
        const double bis = solve_A_bisection(art.p.points[i], c * art.p.points[i], cfg.growth_R,
                                             art.mu, cfg.solver.tol);
        worst_gap = std::max(worst_gap, std::abs(bis - art.coeffs.A[i]));
    }
    report("bisection agreement <= 1e-9", worst_gap <= 1e-9, worst_gap);

    // H bound
    bool h_ok = true;
    for (double h : art.coeffs.H)
        if (!(h >= 0.0 && h <= 1.0)) h_ok = false;
    report("0 <= H <= 1", h_ok, 0.0);

    // redundancy identity
    KahanSum mean_a, mean_d;
    for (std::size_t i = 0; i < art.p.size(); ++i)
        mean_a.add(art.p.weights[i] * art.coeffs.A[i]);
    for (std::size_t j = 0; j < art.mu.size(); ++j)
        mean_d.add(art.mu.weights[j] * art.coeffs.D[j]);
    const double redundancy = std::abs(cfg.growth_R * mean_a.value() + mean_d.value());
    const double red_tol = 1e-10 * std::max(1.0, cfg.growth_R * mean_a.value());
    report("redundancy identity", redundancy <= red_tol, redundancy);

    // V-identity
    const double env = env_index(art.coeffs, art.x0, art.p, art.mu, cfg.growth_R);
    const double ren = ren_index(art.coeffs, art.x0, art.p, art.mu, cfg.growth_R);
    const double v_gap = std::abs(art.v1 - (env - ren / c));
    report("V = Env - Ren/c", v_gap <= 1e-10 * std::max(1.0, std::abs(art.v1)), v_gap);

    // closed form vs time quadrature
    const double theta = quadrature_objective(art.x0, art.coeffs.phi(), art.p, art.mu,
                                              UncertaintySpec::proportional(c), cfg.growth_R,
                                              quad_tol);
    const double quad_gap = std::abs(theta - art.v1) / std::max(1.0, std::abs(art.v1));
    report("closed form vs quadrature (1e-4)", quad_gap <= 1e-4, quad_gap);

    // Hamiltonian grid argmax at sampled atoms
    bool argmax_ok = true;
    const double dv = 1e-3;
    for (std::size_t i = 0; i < art.p.size(); i += std::max<std::size_t>(1, art.p.size() / 8)) {
        const double r = art.p.points[i];
        double best_v = dv, best_val = -1e300;
        for (double v = dv; v <= 3.0; v += dv) {
            const double val = -r * v * art.coeffs.A[i] - (1.0 / c) * relative_entropy_unit(v);
            if (val > best_val) {
                best_val = val;
                best_v = v;
            }
        }
        if (std::abs(best_v - art.coeffs.phi_star[i]) > dv + 1e-12) argmax_ok = false;
    }
    report("Hamiltonian argmax at phi*", argmax_ok, 0.0);

    if (failures > 0) {
        std::printf("verify: %d check(s) FAILED\n", failures);
        throw VerificationFailure("verification failed");
    }
    std::printf("verify: all checks passed\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Worst-case environmental index for long-memory superposition processes"};
    app.require_subcommand(1);

    CliOptions opt;

    // quantize
    double q_alpha = 1.0, q_beta = 1.0;
    std::size_t q_n = 16;
    std::string q_scheme = "plain", q_out = "measure.csv";
    auto* quantize = app.add_subcommand("quantize", "write a quantized gamma measure as CSV");
    quantize->add_option("--alpha", q_alpha, "gamma shape")->required();
    quantize->add_option("--beta", q_beta, "gamma scale (1/day)")->required();
    quantize->add_option("--atoms,-n", q_n, "number of atoms")->required();
    quantize->add_option("--scheme", q_scheme, "plain | tilted");
    quantize->add_option("--out", q_out, "output CSV path");

    auto* solve = app.add_subcommand("solve", "solve the quantized system at one c");
    add_common_flags(solve, opt, false);

    std::size_t f_c_count = 100;
    auto* frontier = app.add_subcommand("frontier", "sweep the (Ren, Env) frontier over c");
    add_common_flags(frontier, opt, true);
    frontier->add_option("--c-count", f_c_count, "size of the default mid-grid (k-1/2)/count");

    std::vector<std::size_t> k_res{256, 512, 1024, 2048};
    std::size_t k_ref = 4096, k_c_count = 100;
    auto* converge = app.add_subcommand("converge", "B-error convergence study");
    add_common_flags(converge, opt, false);
    converge->add_option("--resolutions", k_res, "coarse resolutions");
    converge->add_option("--reference", k_ref, "reference resolution");
    converge->add_option("--c-count", k_c_count, "c-grid size");

    std::size_t s_sites = 200, s_reps = 10000;
    std::vector<double> s_times;
    double s_horizon = 0.0;
    bool s_per_atom = false;
    auto* simulate = app.add_subcommand("simulate", "exact Monte Carlo of the jump system");
    add_common_flags(simulate, opt, false);
    simulate->add_option("--sites", s_sites, "number of sites");
    simulate->add_option("--replicates", s_reps, "number of replicates");
    simulate->add_option("--times", s_times, "sample times (days)");
    simulate->add_option("--horizon", s_horizon, "simulation horizon (days)");
    simulate->add_flag("--per-atom", s_per_atom,
                       "add one column per site to trajectory.csv");

    bool v_corrupt = false;
    double v_quad_tol = 1e-6;
    auto* verify = app.add_subcommand("verify", "run the closed-form identity suite");
    add_common_flags(verify, opt, false);
    verify->add_flag("--inject-corrupt-a", v_corrupt,
                     "negative control: pin A to its upper bound before checking");
    verify->add_option("--quad-tol", v_quad_tol, "quadrature tail tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (quantize->parsed())
            return cmd_quantize(opt, q_alpha, q_beta, q_n, q_scheme, q_out);
        if (solve->parsed()) return cmd_solve(opt);
        if (frontier->parsed()) return cmd_frontier(opt, f_c_count);
        if (converge->parsed()) return cmd_converge(opt, k_res, k_ref, k_c_count);
        if (simulate->parsed())
            return cmd_simulate(opt, s_sites, s_reps, s_times, s_horizon, s_per_atom);
        if (verify->parsed()) return cmd_verify(opt, v_corrupt, v_quad_tol);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const VerificationFailure&) {
        return 4;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
