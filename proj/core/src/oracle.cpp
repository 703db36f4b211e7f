#include "envindex/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "envindex/errors.hpp"
#include "envindex/numeric.hpp"
#include "envindex/rng.hpp"

namespace envindex {

void SimulationConfig::validate() const {
    if (n_sites == 0) throw std::invalid_argument("SimulationConfig: n_sites must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("SimulationConfig: horizon must be positive");
    if (replicates == 0) throw std::invalid_argument("SimulationConfig: replicates must be >= 1");
    if (sample_times.empty())
        throw std::invalid_argument("SimulationConfig: sample_times must be nonempty");
    double prev = -1.0;
    for (double t : sample_times) {
        if (!(t > prev) || !(t >= 0.0) || !(t <= horizon))
            throw std::invalid_argument(
                "SimulationConfig: sample_times must be strictly increasing within [0, horizon]");
        prev = t;
    }
}

std::vector<std::vector<double>> simulate_jump_system(const SimulationConfig& cfg,
                                                      const std::vector<double>& rates,
                                                      double R,
                                                      const std::vector<int>& x0) {
    cfg.validate();
    if (rates.size() != cfg.n_sites || x0.size() != cfg.n_sites)
        throw std::invalid_argument("simulate_jump_system: rates/x0 length must equal n_sites");
    if (!(R >= 0.0)) throw std::invalid_argument("simulate_jump_system: R must be nonnegative");
    for (double a : rates)
        if (!(a > 0.0)) throw std::invalid_argument("simulate_jump_system: rates must be positive");
    for (int s : x0)
        if (s != 0 && s != 1)
            throw std::invalid_argument("simulate_jump_system: x0 must be binary");

    const std::size_t k_times = cfg.sample_times.size();
    const double site_weight = 1.0 / static_cast<double>(cfg.n_sites);
    std::vector<std::vector<double>> paths(cfg.replicates, std::vector<double>(k_times, 0.0));

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rep = 0; rep < static_cast<std::ptrdiff_t>(cfg.replicates); ++rep) {
        Xoshiro256pp rng(cfg.seed, static_cast<std::uint64_t>(rep));
        std::vector<double>& row = paths[static_cast<std::size_t>(rep)];
        for (std::size_t i = 0; i < cfg.n_sites; ++i) {
            int state = x0[i];
            double t = 0.0;
            std::size_t k = 0;
            while (k < k_times) {
                const double rate = state == 1 ? rates[i] : R;
                const double t_next =
                    rate > 0.0 ? t + rng.exponential(rate)
                               : std::numeric_limits<double>::infinity();
                while (k < k_times && cfg.sample_times[k] < t_next) {
                    if (state == 1) row[k] += site_weight;
                    ++k;
                }
                if (t_next > cfg.horizon) break;
                t = t_next;
                state ^= 1;
            }
        }
    }
    return paths;
}

std::vector<PopulationState> ode_integrate(const PopulationState& x0,
                                           const std::function<Distortion(double)>& phi_of_t,
                                           double R, const DiscreteMeasure& p,
                                           const std::vector<double>& grid, double step) {
    const std::size_t n = p.size();
    if (x0.size() != n) throw std::invalid_argument("ode_integrate: x0 length mismatch");
    if (!(step > 0.0)) throw std::invalid_argument("ode_integrate: step must be positive");
    double prev = 0.0;
    for (double t : grid) {
        if (!(t >= prev))
            throw std::invalid_argument("ode_integrate: grid must be nondecreasing from 0");
        prev = t;
    }

    auto deriv = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
        const Distortion phi = phi_of_t(t);
        if (phi.size() != n) throw std::invalid_argument("ode_integrate: distortion length mismatch");
        for (std::size_t i = 0; i < n; ++i)
            dx[i] = -p.points[i] * phi.values[i] * x[i] + R * (1.0 - x[i]);
    };

    std::vector<PopulationState> out;
    out.reserve(grid.size());
    std::vector<double> x = x0.values, k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = 0.0;
    for (double target : grid) {
        const double span = target - t;
        const long substeps = span > 0.0 ? std::lround(std::ceil(span / step)) : 0;
        const double h = substeps > 0 ? span / static_cast<double>(substeps) : 0.0;
        for (long s = 0; s < substeps; ++s) {
            deriv(t, x, k1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
            deriv(t + 0.5 * h, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
            deriv(t + 0.5 * h, tmp, k3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
            deriv(t + h, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            t += h;
        }
        t = target;
        out.push_back(PopulationState{x});
    }
    return out;
}

namespace {

struct DiscountedRun {
    const DiscreteMeasure& p;
    const DiscreteMeasure& mu;
    std::vector<double> g;          // per-atom weight in the running reward
    std::vector<double> lambda;     // R + r_i phi_i
    std::vector<double> xinf;       // stationary level per atom
    std::vector<double> transient;  // x0_i - xinf_i

    double reward(double t) const {
        KahanSum s;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double x = xinf[i] + transient[i] * std::exp(-lambda[i] * t);
            s.add(p.weights[i] * g[i] * x);
        }
        return s.value();
    }
    double discount(double t) const { return laplace(mu, t); }
    double integrand(double t) const { return discount(t) * reward(t); }

    double transient_tail_bound(double T) const {
        KahanSum s;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double a = p.weights[i] * std::abs(g[i]) * std::abs(transient[i]);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < mu.size(); ++j) {
                const double rate = mu.points[j] + lambda[i];
                s.add(a * mu.weights[j] * std::exp(-rate * T) / rate);
            }
        }
        return s.value();
    }

    double stationary_tail(double T) const {
        KahanSum hinf;
        for (std::size_t i = 0; i < p.size(); ++i) hinf.add(p.weights[i] * g[i] * xinf[i]);
        if (hinf.value() == 0.0) return 0.0;
        KahanSum disc;
        for (std::size_t j = 0; j < mu.size(); ++j)
            disc.add(mu.weights[j] * std::exp(-mu.points[j] * T) / mu.points[j]);
        return hinf.value() * disc.value();
    }
};

double simpson_panel(const DiscountedRun& run, double a, double b, std::size_t m) {
    // m subintervals (even)
    const double h = (b - a) / static_cast<double>(m);
    KahanSum s;
    s.add(run.integrand(a));
    s.add(run.integrand(b));
    for (std::size_t k = 1; k < m; ++k) {
        const double w = (k % 2 == 1) ? 4.0 : 2.0;
        s.add(w * run.integrand(a + h * static_cast<double>(k)));
    }
    return s.value() * h / 3.0;
}

double geometric_simpson(const DiscountedRun& run, double T, double tol) {
    // Panel boundaries 0, T 2^{-K}, ..., T/2, T; dense near 0 where the
    // integrand varies fastest.
    constexpr int kPanels = 48;
    std::vector<double> edges;
    edges.reserve(kPanels + 2);
    edges.push_back(0.0);
    for (int k = kPanels; k >= 0; --k) edges.push_back(T * std::ldexp(1.0, -k));

    double prev = 0.0;
    for (std::size_t m = 4; m <= 16384; m *= 2) {
        KahanSum total;
        for (std::size_t e = 0; e + 1 < edges.size(); ++e)
            total.add(simpson_panel(run, edges[e], edges[e + 1], m));
        const double cur = total.value();
        if (!std::isfinite(cur))
            throw NumericalError("quadrature_objective: non-finite panel integral");
        if (m > 4 && std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    throw NumericalError("quadrature_objective: refinement did not settle below tolerance");
}

double discounted_quadrature(const PopulationState& x0, const Distortion& phi,
                             const DiscreteMeasure& p, const DiscreteMeasure& mu, double R,
                             std::vector<double> g, double tail_tol) {
    const std::size_t n = p.size();
    if (x0.size() != n || phi.size() != n || g.size() != n)
        throw std::invalid_argument("quadrature: length mismatch");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("quadrature: tail_tol must be positive");
    for (double v : phi.values)
        if (!(v > 0.0)) throw std::invalid_argument("quadrature: distortion must be positive");

    DiscountedRun run{p, mu, std::move(g), {}, {}, {}};
    run.lambda.resize(n);
    run.xinf.resize(n);
    run.transient.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        run.lambda[i] = R + p.points[i] * phi.values[i];
        run.xinf[i] = R == 0.0 ? 0.0 : R / run.lambda[i];
        run.transient[i] = x0.values[i] - run.xinf[i];
    }

    double T = 1.0;
    int doublings = 0;
    while (run.transient_tail_bound(T) > 0.5 * tail_tol) {
        T *= 2.0;
        if (++doublings > 80)
            throw NumericalError("quadrature_objective: horizon search did not terminate");
    }

    const double body = geometric_simpson(run, T, 0.5 * tail_tol);
    return body + run.stationary_tail(T);
}

} // namespace

double quadrature_objective(const PopulationState& x0, const Distortion& phi,
                            const DiscreteMeasure& p, const DiscreteMeasure& mu,
                            const UncertaintySpec& u, double R, double tail_tol) {
    u.validate();
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = p.points[i];
        g[i] = 1.0 - (r / u.eta(r)) * relative_entropy_unit(phi.values[i]);
    }
    return discounted_quadrature(x0, phi, p, mu, R, std::move(g), tail_tol);
}

double quadrature_discounted_population(const PopulationState& x0, const Distortion& phi,
                                        const DiscreteMeasure& p, const DiscreteMeasure& mu,
                                        double R, const std::vector<double>& g,
                                        double tail_tol) {
    return discounted_quadrature(x0, phi, p, mu, R, g, tail_tol);
}

std::vector<McSummaryRow> summarize_simulation(const std::vector<std::vector<double>>& paths,
                                               const SimulationConfig& cfg,
                                               const std::vector<double>& closed_form) {
    if (closed_form.size() != cfg.sample_times.size())
        throw std::invalid_argument("summarize_simulation: closed-form length mismatch");
    if (paths.size() != cfg.replicates)
        throw std::invalid_argument("summarize_simulation: replicate count mismatch");
    const double nrep = static_cast<double>(cfg.replicates);

    std::vector<McSummaryRow> rows(cfg.sample_times.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        KahanSum sum;
        for (std::size_t rep = 0; rep < cfg.replicates; ++rep) sum.add(paths[rep][k]);
        const double mean = sum.value() / nrep;
        KahanSum sq;
        for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
            const double d = paths[rep][k] - mean;
            sq.add(d * d);
        }
        McSummaryRow& row = rows[k];
        row.t = cfg.sample_times[k];
        row.mean = mean;
        row.std_dev = cfg.replicates > 1 ? std::sqrt(sq.value() / (nrep - 1.0)) : 0.0;
        row.std_err = row.std_dev / std::sqrt(nrep);
        row.closed_form = closed_form[k];
        row.z_score = row.std_err > 0.0 ? (mean - closed_form[k]) / row.std_err : 0.0;
    }
    return rows;
}

void write_mc_summary_csv(const std::vector<McSummaryRow>& rows, std::ostream& out) {
    out << "t,mean,std,stderr,closed_form,z_score\n";
    char buf[240];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mean,
                      r.std_dev, r.std_err, r.closed_form, r.z_score);
        out << buf;
    }
}

void write_mc_summary_csv(const std::vector<McSummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_mc_summary_csv: cannot open " + path);
    write_mc_summary_csv(rows, out);
}

} // namespace envindex
