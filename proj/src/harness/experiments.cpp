#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"
#include "mfsc/vlasov.hpp"

namespace mfsc {

namespace {

void note(const RunContext& ctx, const std::string& line) {
    if (ctx.log) ctx.log(line);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FlowOptions final_only_flow() {
    FlowOptions o;
    o.record_stride = std::numeric_limits<long>::max();
    return o;
}

VariationalOptions final_only_variational(std::size_t cap) {
    VariationalOptions o;
    o.second_order_cap = cap;
    o.record_stride = std::numeric_limits<long>::max();
    return o;
}

CorrectionOptions spectral_options() {
    CorrectionOptions o;
    o.advection = Advection::Spectral;
    o.derivative = VelocityDerivative::Spectral;
    return o;
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto phi = cfg.potential.make(cfg.d);
    const GaussianMixture g = cfg.density();
    const TestBank bank = cfg.bank();
    const std::size_t nb = bank.size();

    ConvergenceResult res;
    note(ctx, "reference stack f^(0.." + std::to_string(cfg.k) + ") on " + std::to_string(cfg.grid.nx) + "x" +
                  std::to_string(cfg.grid.nv));
    const auto initial = coherent_initial_stack(g, cfg.k, cfg.grid, InitialPolicy::FullyExpanded);
    res.stack = solve_stack(initial, *phi, cfg.t_final, cfg.dt, spectral_options());
    const std::size_t last = res.stack.final_slice();
    for (std::size_t u = 0; u < nb; ++u) {
        res.reference0.push_back(integrate(bank[u], res.stack.at(0, last)));
        if (cfg.k >= 1) res.reference1.push_back(integrate(bank[u], res.stack.at(1, last)));
    }

    std::vector<std::size_t> ns;
    for (std::size_t n : cfg.n_list) {
        if (cfg.k >= 1 && n > cfg.second_order_cap)
            res.skipped_n.push_back(n);
        else
            ns.push_back(n);
    }
    for (std::size_t n : ns)
        for (std::uint64_t seed : cfg.seeds) res.cells.push_back({n, seed, {}, {}, 0.0, 0.0});

    const GaussianDerivation dg2 = gaussian_coefficients(2, cfg.d);
    parallel_for(res.cells.size(), ctx.threads, [&](std::size_t idx) {
        ConvergenceCell& cell = res.cells[idx];
        const auto t0 = std::chrono::steady_clock::now();
        const Configuration z0 = sample_typical(g, cell.n, cell.seed);
        if (cfg.k == 0) {
            const Configuration zt = integrate_flow(z0, *phi, cfg.t_final, cfg.dt, final_only_flow()).final_state().z;
            for (std::size_t u = 0; u < nb; ++u) cell.nu0.push_back(test_empirical(bank[u], zt));
        } else {
            const VariationalResult vr = integrate_variational(z0, *phi, cfg.t_final, cfg.dt, 2,
                                                               final_only_variational(cfg.second_order_cap));
            const Configuration& zt = vr.trajectory.final_state().z;
            std::vector<EmpiricalDerivatives> derivs;
            for (std::size_t u = 0; u < nb; ++u) {
                derivs.push_back(empirical_derivatives(bank[u], zt, vr.first, &*vr.second));
                cell.nu0.push_back(derivs.back().value);
                cell.nu1.push_back(contract_D2(derivs.back(), dg2));
            }
            for (std::size_t a = 0; a < nb; ++a)
                for (std::size_t b = a; b < nb; ++b) {
                    const double nu2 = tested_D2_product(derivs[a], derivs[b], dg2);
                    const TestedValues f[2] = {{cell.nu0[a], cell.nu1[a]}, {cell.nu0[b], cell.nu1[b]}};
                    cell.product_residual = std::max(cell.product_residual, std::abs(nu2 - tested_product(f, 1)));
                }
        }
        cell.seconds = seconds_since(t0);
        note(ctx, "cell N=" + std::to_string(cell.n) + " seed=" + std::to_string(cell.seed) + " done in " +
                      format_number(cell.seconds) + " s");
    });

    for (std::size_t n : ns)
        for (int kk = 0; kk <= cfg.k; ++kk) {
            ConvergenceSummary s;
            s.n = n;
            s.k = kk;
            s.prefactor = static_cast<double>(n - 1) / static_cast<double>(n);
            std::vector<double> mean_err(nb, 0.0);
            std::size_t count = 0;
            for (const auto& c : res.cells) {
                if (c.n != n) continue;
                const auto& vals = kk == 0 ? c.nu0 : c.nu1;
                const auto& ref = kk == 0 ? res.reference0 : res.reference1;
                double worst = 0.0;
                for (std::size_t u = 0; u < nb; ++u) {
                    const double e = std::abs(vals[u] - ref[u]);
                    worst = std::max(worst, e);
                    mean_err[u] += e;
                }
                s.mean_max_error += worst;
                s.mean_product_residual += c.product_residual;
                ++count;
            }
            s.mean_max_error /= count;
            s.mean_product_residual /= count;
            for (double& e : mean_err) e /= count;
            s.max_mean_error = *std::max_element(mean_err.begin(), mean_err.end());
            res.summary.push_back(s);
        }
    return res;
}

EstimatesResult run_estimates(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto phi = cfg.potential.make(cfg.d);
    const GaussianMixture g = cfg.density();
    const TestBank bank = cfg.bank();
    const std::uint64_t seed = cfg.seeds.front();
    const int nd = 2 * cfg.d;

    EstimatesResult res;
    res.rows.resize(cfg.n_list.size());
    parallel_for(cfg.n_list.size(), ctx.threads, [&](std::size_t idx) {
        const std::size_t n = cfg.n_list[idx];
        const auto t0 = std::chrono::steady_clock::now();
        const VariationalResult vr = integrate_variational(sample_typical(g, n, seed), *phi, cfg.t_final, cfg.dt, 2,
                                                           final_only_variational(cfg.second_order_cap));
        EstimatesRow& row = res.rows[idx];
        row.n = n;
        double first = 0.0, second = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                for (int gm = 0; gm < nd; ++gm) {
                    for (int a = 0; a < nd; ++a) first = std::max(first, std::abs(vr.first(i, gm, j, a)));
                    for (int a = 0; a < nd; ++a)
                        for (int b = a; b < nd; ++b)
                            second = std::max(second, std::abs((*vr.second)(i, gm, j, a, b)));
                }
            }
        row.first_offdiag = static_cast<double>(n) * first;
        row.second_offdiag = static_cast<double>(n) * second;
        for (std::size_t u = 0; u < bank.size(); ++u)
            row.tested_D2 = std::max(row.tested_D2, std::abs(nu_1(1, bank[u], vr)));
        note(ctx, "estimates N=" + std::to_string(n) + " done in " + format_number(seconds_since(t0)) + " s");
    });
    auto ratio = [&](auto field) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : res.rows) {
            lo = std::min(lo, r.*field);
            hi = std::max(hi, r.*field);
        }
        return hi / lo;
    };
    res.first_ratio = ratio(&EstimatesRow::first_offdiag);
    res.second_ratio = ratio(&EstimatesRow::second_offdiag);
    res.tested_ratio = ratio(&EstimatesRow::tested_D2);

    // Finite-difference cross-check of every first and same-index second
    // derivative at a small N. Second differences are Richardson-extrapolated
    // from steps h and h/2.
    const std::size_t nf = cfg.fd_check_n;
    const Configuration zf = sample_typical(g, nf, seed);
    const VariationalResult vf = integrate_variational(zf, *phi, cfg.t_final, cfg.dt, 2, final_only_variational(nf));
    auto rel = [](double v, double fd) { return std::abs(v - fd) / std::max(std::abs(fd), 1e-6); };
    std::vector<double> worst(nf, 0.0);
    parallel_for(nf, ctx.threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < nf; ++j)
            for (int gm = 0; gm < nd; ++gm)
                for (int a = 0; a < nd; ++a) {
                    const double fd1 = fd_flow_derivative(zf, *phi, cfg.t_final, cfg.dt, {i, gm, j, a, -1}, 1e-5);
                    worst[i] = std::max(worst[i], rel(vf.first(i, gm, j, a), fd1));
                    for (int b = a; b < nd; ++b) {
                        const double h = 2e-3;
                        const double d1 = fd_flow_derivative(zf, *phi, cfg.t_final, cfg.dt, {i, gm, j, a, b}, h);
                        const double d2 = fd_flow_derivative(zf, *phi, cfg.t_final, cfg.dt, {i, gm, j, a, b}, h / 2);
                        worst[i] = std::max(worst[i], rel((*vf.second)(i, gm, j, a, b), (4.0 * d2 - d1) / 3.0));
                    }
                }
    });
    res.fd_max_rel_error = *std::max_element(worst.begin(), worst.end());

    // phi = 0: dx_i(t)/dz_j = delta_ij (1, t), dv_i(t)/dz_j = delta_ij (0, 1) per axis.
    const ZeroPotential zero(cfg.d);
    const VariationalResult free = integrate_variational(zf, zero, cfg.t_final, cfg.dt, 1, final_only_variational(nf));
    for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nf; ++j)
            for (int gm = 0; gm < nd; ++gm)
                for (int a = 0; a < nd; ++a) {
                    double expect = 0.0;
                    if (i == j) {
                        const int ga = gm % cfg.d, aa = a % cfg.d;
                        const bool gx = gm < cfg.d, ax = a < cfg.d;
                        if (ga == aa) expect = (gx && !ax) ? cfg.t_final : (gx == ax ? 1.0 : 0.0);
                    }
                    res.free_flow_error = std::max(res.free_flow_error, std::abs(free.first(i, gm, j, a) - expect));
                }
    return res;
}

RemainderExperiment run_remainder(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto phi = cfg.potential.make(cfg.d);
    const GaussianMixture g = cfg.density();
    RemainderExperiment res;
    note(ctx, "correction stack K=" + std::to_string(cfg.K) + " (spectral transport and derivatives)");
    const auto initial = coherent_initial_stack(g, cfg.K, cfg.grid, InitialPolicy::FullyExpanded);
    res.stack = solve_stack(initial, *phi, cfg.t_final, cfg.dt, spectral_options());
    note(ctx, "Wigner sweep over " + std::to_string(cfg.epsilons.size()) + " values of epsilon");
    res.result = remainder_scaling(g, *phi, cfg.t_final, cfg.K, cfg.epsilons, res.stack, cfg.grid);
    return res;
}

DobrushinResult run_dobrushin(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto phi = cfg.potential.make(cfg.d);
    const GaussianMixture g = cfg.density();
    DobrushinResult res;
    res.times = cfg.record_times;
    const std::size_t ns = cfg.n_list.size(), nseeds = cfg.seeds.size();
    res.rows.resize(ns);
    for (std::size_t a = 0; a < ns; ++a) {
        res.rows[a].n = cfg.n_list[a];
        res.rows[a].distances.assign(nseeds, {});
    }
    WassersteinOptions wo;
    wo.clamp = cfg.clamp;
    wo.exact_cap = cfg.exact_cap;
    parallel_for(ns * nseeds, ctx.threads, [&](std::size_t idx) {
        const std::size_t a = idx / nseeds, s = idx % nseeds;
        const std::size_t n = cfg.n_list[a];
        // The pair: a typical sample and its image under z -> (1 + delta) z.
        Configuration z1 = sample_typical(g, n, cfg.seeds[s]);
        Configuration z2 = z1;
        for (double& c : z2.data()) c *= 1.0 + cfg.perturbation;
        auto& w = res.rows[a].distances[s];
        double t = 0.0;
        for (double tk : cfg.record_times) {
            if (tk > t) {
                z1 = integrate_flow(z1, *phi, tk - t, cfg.dt, final_only_flow()).final_state().z;
                z2 = integrate_flow(z2, *phi, tk - t, cfg.dt, final_only_flow()).final_state().z;
                t = tk;
            }
            const PointCloud p = PointCloud::from_configuration(z1), q = PointCloud::from_configuration(z2);
            w.push_back(n <= cfg.exact_cap ? wasserstein_bounded(p, q, wo)
                                           : sliced_wasserstein(p, q, 64, cfg.seeds[s], cfg.clamp));
        }
        note(ctx, "dobrushin N=" + std::to_string(n) + " seed=" + std::to_string(cfg.seeds[s]) + " done");
    });
    for (auto& row : res.rows) row.fit = dobrushin_fit(row.distances, res.times);
    for (std::size_t a = 1; a < ns; ++a) {
        const double c0 = res.rows[a - 1].fit.C, c1 = res.rows[a].fit.C;
        res.max_relative_change = std::max(res.max_relative_change, std::abs(c1 - c0) / std::abs(c0));
    }
    return res;
}

VlasovCheckResult run_vlasov_check(const ExperimentConfig& cfg, const RunContext& ctx) {
    const auto phi = cfg.potential.make(cfg.d);
    const GaussianMixture g = cfg.density();
    const TestBank bank = cfg.bank();
    VlasovCheckResult res;

    note(ctx, "grid Vlasov solve");
    const GridFunction f0 = g.sample(cfg.grid);
    const VlasovSolution sol = solve_vlasov(f0, *phi, cfg.t_final, cfg.dt);
    res.final_grid = sol.final_state().f;
    res.mass_drift = std::abs(res.final_grid.mass() - f0.mass());
    res.boundary_fraction = boundary_mass_fraction(res.final_grid);

    note(ctx, "particle ensemble M=" + std::to_string(cfg.ensemble_size));
    const Configuration z0 = sample_typical(g, cfg.ensemble_size, cfg.seeds.front());
    const Configuration zt = evolve_particle_ensemble(z0, *phi, cfg.grid, cfg.t_final, cfg.dt);
    const double m = static_cast<double>(zt.size());
    for (std::size_t k = 0; k < bank.size(); ++k) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < zt.size(); ++i) {
            const double u = bank[k].value(zt.point(i));
            s += u;
            s2 += u * u;
        }
        const double mean = s / m;
        VlasovCheckRow row;
        row.observable = bank[k].name();
        row.grid = integrate(bank[k], res.final_grid);
        row.ensemble = mean;
        row.standard_error = std::sqrt(std::max(0.0, s2 / m - mean * mean) / m);
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace mfsc
