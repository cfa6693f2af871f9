#include <cmath>
#include <limits>
#include <ostream>

#include "mfsc/errors.hpp"
#include "mfsc/nbody.hpp"

namespace mfsc {

StepPlan plan_steps(double t_final, double dt) {
    if (!(dt > 0.0)) throw PreconditionFailed("time step must be positive");
    if (!(t_final >= 0.0)) throw PreconditionFailed("final time must be non-negative");
    StepPlan p;
    if (t_final == 0.0) return p;
    p.steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    if (p.steps < 1) p.steps = 1;
    p.dt = t_final / static_cast<double>(p.steps);
    return p;
}

void mean_field_accelerations(const Configuration& z, const PairPotential& phi, std::vector<double>& acc) {
    const std::size_t n = z.size();
    const int d = z.dim();
    acc.assign(n * d, 0.0);
    if (phi.is_zero() || n < 2) return;
    // Devirtualized pair loop for the common d = 1 Gaussian case.
    if (const auto* gp = dynamic_cast<const GaussianPotential*>(&phi); gp != nullptr && d == 1) {
        const double c = gp->amplitude() / (gp->sigma() * gp->sigma());
        const double h = -0.5 / (gp->sigma() * gp->sigma());
        const double* x = z.data().data();
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = x[2 * i];
            double ai = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double r = xi - x[2 * j];
                // grad phi(r) = -c r exp(h r^2); acc_i -= grad, acc_j += grad.
                const double gr = -c * r * std::exp(h * r * r);
                ai -= gr;
                acc[j] += gr;
            }
            acc[i] += ai;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (double& a : acc) a *= inv_n;
        return;
    }
    double r[3], g[3];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (int a = 0; a < d; ++a) r[a] = z.x(i, a) - z.x(j, a);
            phi.pair_terms(r, g, nullptr, nullptr);
            for (int a = 0; a < d; ++a) {
                acc[i * d + a] -= g[a];
                acc[j * d + a] += g[a];
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& a : acc) a *= inv_n;
}

double mean_field_energy(const Configuration& z, const PairPotential& phi) {
    const std::size_t n = z.size();
    const int d = z.dim();
    double kin = 0.0, pot = 0.0;
    std::vector<int> zero(d, 0);
    std::vector<double> r(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < d; ++a) kin += 0.5 * z.v(i, a) * z.v(i, a);
        for (std::size_t j = i + 1; j < n; ++j) {
            for (int a = 0; a < d; ++a) r[a] = z.x(i, a) - z.x(j, a);
            pot += phi.derivative(zero, r);
        }
    }
    return kin + pot / static_cast<double>(n);
}

Trajectory integrate_flow(const Configuration& z0, const PairPotential& phi, double t_final, double dt,
                          const FlowOptions& options) {
    z0.validate();
    if (phi.dim() != z0.dim()) throw PreconditionFailed("potential/configuration dimension mismatch");
    if (options.record_stride < 1) throw PreconditionFailed("record stride must be >= 1");
    const StepPlan plan = plan_steps(t_final, dt);
    const std::size_t n = z0.size();
    const int d = z0.dim();

    Trajectory traj;
    traj.states.push_back({0.0, z0, plan.dt, "velocity-verlet"});
    Configuration z = z0;
    std::vector<double> acc;
    mean_field_accelerations(z, phi, acc);
    const double h = plan.dt;
    for (long s = 0; s < plan.steps; ++s) {
        for (std::size_t i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) {
                z.v(i, a) += 0.5 * h * acc[i * d + a];
                z.x(i, a) += h * z.v(i, a);
            }
        mean_field_accelerations(z, phi, acc);
        for (std::size_t i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) z.v(i, a) += 0.5 * h * acc[i * d + a];
        if (!z.all_finite()) throw Divergence("non-finite particle state", s + 1);
        const bool last = (s + 1 == plan.steps);
        if (last || (s + 1) % options.record_stride == 0)
            traj.states.push_back({(s + 1 == plan.steps) ? t_final : (s + 1) * h, z, h, "velocity-verlet"});
    }
    return traj;
}

double fd_flow_derivative(const Configuration& z0, const PairPotential& phi, double t, double dt,
                          const FlowDerivativeRequest& req, double h) {
    if (!(h > 0.0)) throw PreconditionFailed("finite-difference step must be positive");
    if (req.i >= z0.size() || req.j >= z0.size()) throw OutOfRange("particle index out of range");
    const int nd = z0.phase_dim();
    if (req.gamma < 0 || req.gamma >= nd || req.alpha < 0 || req.alpha >= nd || req.beta >= nd)
        throw OutOfRange("component index out of range");
    FlowOptions opts;
    opts.record_stride = std::numeric_limits<long>::max();
    auto run = [&](double da, double db) {
        Configuration z = z0;
        z.z(req.j, req.alpha) += da;
        if (req.beta >= 0) z.z(req.j, req.beta) += db;
        return integrate_flow(z, phi, t, dt, opts).final_state().z.z(req.i, req.gamma);
    };
    if (req.beta < 0) return (run(h, 0.0) - run(-h, 0.0)) / (2.0 * h);
    if (req.beta == req.alpha) {
        // Both perturbations land on the same coordinate: use the 3-point second difference.
        return (run(h, 0.0) - 2.0 * run(0.0, 0.0) + run(-h, 0.0)) / (h * h);
    }
    return (run(h, h) - run(h, -h) - run(-h, h) + run(-h, -h)) / (4.0 * h * h);
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
    if (trajectory.states.empty()) return;
    const int d = trajectory.states.front().z.dim();
    out << "t,particle";
    for (int a = 0; a < d; ++a) out << (d == 1 ? ",x" : ",x" + std::to_string(a));
    for (int a = 0; a < d; ++a) out << (d == 1 ? ",v" : ",v" + std::to_string(a));
    out << '\n';
    out.precision(17);
    for (const FlowState& s : trajectory.states)
        for (std::size_t i = 0; i < s.z.size(); ++i) {
            out << s.t << ',' << i;
            for (int a = 0; a < 2 * d; ++a) out << ',' << s.z.z(i, a);
            out << '\n';
        }
}

}  // namespace mfsc
