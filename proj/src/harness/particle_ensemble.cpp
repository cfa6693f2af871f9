#include <cmath>

#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"
#include "mfsc/vlasov.hpp"

namespace mfsc {

namespace {

// Periodic cloud-in-cell weights: node index of the left neighbour and the
// fraction going to the right one.
struct Cic {
    int left;
    double frac;
};

Cic cic(double x, const GridSpec& g) {
    const double s = (x - g.x_min) / g.dx();
    const double fl = std::floor(s);
    int i = static_cast<int>(fl) % g.nx;
    if (i < 0) i += g.nx;
    return {i, s - fl};
}

}  // namespace

Configuration evolve_particle_ensemble(const Configuration& z0, const PairPotential& phi, const GridSpec& grid,
                                       double t_final, double dt) {
    z0.validate();
    if (z0.dim() != 1) throw PreconditionFailed("the particle ensemble is implemented for d = 1");
    grid.validate();
    const StepPlan plan = plan_steps(t_final, dt);
    const std::size_t m = z0.size();
    const double w = 1.0 / (static_cast<double>(m) * grid.dx());
    VlasovStepper stepper(phi, grid);

    Configuration z = z0;
    std::vector<double> rho(grid.nx), acc(m);
    auto accelerations = [&] {
        std::fill(rho.begin(), rho.end(), 0.0);
        for (std::size_t p = 0; p < m; ++p) {
            const Cic c = cic(z.x(p, 0), grid);
            rho[c.left] += (1.0 - c.frac) * w;
            rho[(c.left + 1) % grid.nx] += c.frac * w;
        }
        const std::vector<double> force = stepper.force_from_density(rho);
        for (std::size_t p = 0; p < m; ++p) {
            const Cic c = cic(z.x(p, 0), grid);
            acc[p] = (1.0 - c.frac) * force[c.left] + c.frac * force[(c.left + 1) % grid.nx];
        }
    };
    accelerations();
    const double h = plan.dt;
    for (long s = 0; s < plan.steps; ++s) {
        for (std::size_t p = 0; p < m; ++p) {
            z.v(p, 0) += 0.5 * h * acc[p];
            z.x(p, 0) += h * z.v(p, 0);
        }
        accelerations();
        for (std::size_t p = 0; p < m; ++p) z.v(p, 0) += 0.5 * h * acc[p];
        if (!z.all_finite()) throw Divergence("non-finite particle ensemble", s + 1);
    }
    return z;
}

}  // namespace mfsc
