#include <algorithm>
#include <cmath>

#include "mfsc/errors.hpp"
#include "mfsc/nbody.hpp"
#include "mfsc/vlasov.hpp"

namespace mfsc {

ConvolutionKernel::ConvolutionKernel(const PairPotential& phi, const GridSpec& spec, int derivative_order)
    : order_(derivative_order), taps_(spec.nx) {
    if (phi.dim() != 1) throw PreconditionFailed("grid solvers need a d=1 potential");
    const int n = spec.nx;
    const double dx = spec.dx();
    for (int o = 0; o < n; ++o) {
        const int off = o <= n / 2 ? o : o - n;
        taps_[o] = phi.derivative_1d(derivative_order, off * dx) * dx;
    }
}

std::vector<double> ConvolutionKernel::apply(std::span<const double> rho) const {
    const int n = static_cast<int>(taps_.size());
    if (static_cast<int>(rho.size()) != n) throw PreconditionFailed("density length differs from the grid");
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k <= i; ++k) s += taps_[i - k] * rho[k];
        for (int k = i + 1; k < n; ++k) s += taps_[i - k + n] * rho[k];
        out[i] = s;
    }
    return out;
}

double boundary_mass_fraction(const GridFunction& f) {
    const auto& s = f.spec();
    const int band = 4;
    double edge = 0.0;
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.nv; ++j) {
            const bool outer = i < band || i >= s.nx - band || j < band || j >= s.nv - band;
            if (outer) edge += std::abs(f(i, j));
        }
    const double total = f.l1_norm() / s.cell_area();
    return total > 0.0 ? edge / total : 0.0;
}

std::vector<double> self_consistent_force(const GridFunction& f, const PairPotential& phi, double tail_tolerance) {
    if (boundary_mass_fraction(f) > tail_tolerance)
        throw DomainTooSmall("mass reaches the grid boundary; enlarge the phase-space window");
    ConvolutionKernel k(phi, f.spec(), 1);
    auto F = k.apply(f.density());
    for (double& v : F) v = -v;
    return F;
}

VlasovStepper::VlasovStepper(const PairPotential& phi, const GridSpec& spec, Advection advection,
                             double tail_tolerance)
    : spec_(spec),
      advection_(advection),
      tail_tolerance_(tail_tolerance),
      kernel_(phi, spec, 1),
      fft_x_(spec.nx),
      fft_v_(spec.nv) {
    spec.validate();
}

std::vector<double> VlasovStepper::force_from_density(std::span<const double> rho) const {
    auto F = kernel_.apply(rho);
    for (double& v : F) v = -v;
    return F;
}

std::vector<double> VlasovStepper::force(const GridFunction& f) const {
    if (boundary_mass_fraction(f) > tail_tolerance_)
        throw DomainTooSmall("mass reaches the grid boundary; enlarge the phase-space window");
    return force_from_density(f.density());
}

void VlasovStepper::check_shift(double max_velocity, double max_force, double dt) const {
    const double sx = std::abs(max_velocity) * std::abs(dt) / spec_.dx();
    const double sv = std::abs(max_force) * std::abs(dt) / spec_.dv();
    if (!(sx <= 4.0) || !(sv <= 4.0))
        throw PreconditionFailed("time step moves data by more than 4 cells per step; reduce dt");
}

void VlasovStepper::advect_x(GridFunction& f, double dt) {
    const std::size_t stride = spec_.nv;
    if (advection_ == Advection::CubicLagrange) {
        shifts_.resize(spec_.nv);
        for (int j = 0; j < spec_.nv; ++j) shifts_[j] = spec_.v(j) * dt / spec_.dx();
        shift_columns_cubic(f.values().data(), spec_.nx, spec_.nv, shifts_, work_);
        return;
    }
    for (int j = 0; j < spec_.nv; ++j)
        shift_line_spectral(fft_x_, f.values().data() + j, stride, spec_.v(j) * dt / spec_.dx(), cwork_);
}

void VlasovStepper::advect_v(GridFunction& f, std::span<const double> force, double dt) {
    for (int i = 0; i < spec_.nx; ++i) {
        const double shift = force[i] * dt / spec_.dv();
        if (shift == 0.0) continue;
        double* row = f.values().data() + static_cast<std::size_t>(i) * spec_.nv;
        if (advection_ == Advection::CubicLagrange)
            shift_line_cubic(row, spec_.nv, 1, shift, work_);
        else
            shift_line_spectral(fft_v_, row, 1, shift, cwork_);
    }
}

void VlasovStepper::transport(GridFunction& f, std::span<const double> midpoint_force, double dt) {
    advect_x(f, 0.5 * dt);
    advect_v(f, midpoint_force, dt);
    advect_x(f, 0.5 * dt);
}

std::vector<double> VlasovStepper::step(GridFunction& f, double dt) {
    const double vmax = std::max(std::abs(spec_.v_min), std::abs(spec_.v_max));
    check_shift(vmax, 0.0, dt);
    advect_x(f, 0.5 * dt);
    auto F = force(f);
    double fmax = 0.0;
    for (double v : F) fmax = std::max(fmax, std::abs(v));
    check_shift(vmax, fmax, dt);
    advect_v(f, F, dt);
    advect_x(f, 0.5 * dt);
    return F;
}

VlasovState step_vlasov(const VlasovState& state, const PairPotential& phi, double dt, Advection advection) {
    VlasovStepper stepper(phi, state.f.spec(), advection);
    VlasovState next = state;
    stepper.step(next.f, dt);
    if (!next.f.all_finite()) throw Divergence("non-finite Vlasov state", 1);
    next.t = state.t + dt;
    next.force = stepper.force(next.f);
    return next;
}

double VlasovSolution::force_at(double x, double t) const {
    if (step_times.empty()) throw PreconditionFailed("empty force history");
    const double tol = 1e-9 * std::max(1.0, std::abs(step_times.back()));
    if (t < step_times.front() - tol || t > step_times.back() + tol)
        throw OutOfRange("time outside the stored trajectory");
    const std::size_t steps = step_times.size() - 1;
    std::size_t n = 0;
    double w = 0.0;
    if (steps > 0) {
        const double u = std::clamp((t - step_times.front()) / dt, 0.0, static_cast<double>(steps));
        n = std::min(static_cast<std::size_t>(u), steps - 1);
        w = u - static_cast<double>(n);
    }
    auto interp = [&](const std::vector<double>& F) {
        const int nx = spec.nx;
        const double p = (x - spec.x_min) / spec.dx();
        const double fl = std::floor(p);
        const double th = p - fl;
        const long k = static_cast<long>(fl);
        auto at = [&](long m) { return F[((m % nx) + nx) % nx]; };
        return -th * (th - 1.0) * (th - 2.0) / 6.0 * at(k - 1) + (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0 * at(k) -
               (th + 1.0) * th * (th - 2.0) / 2.0 * at(k + 1) + (th + 1.0) * th * (th - 1.0) / 6.0 * at(k + 2);
    };
    const double a = interp(force_history[n]);
    if (steps == 0 || w == 0.0) return a;
    return (1.0 - w) * a + w * interp(force_history[n + 1]);
}

VlasovSolution solve_vlasov(const GridFunction& f0, const PairPotential& phi, double t_final, double dt,
                            const VlasovOptions& options) {
    if (!f0.all_finite()) throw PreconditionFailed("non-finite initial density");
    const auto plan = plan_steps(t_final, dt);
    VlasovStepper stepper(phi, f0.spec(), options.advection, options.tail_tolerance);
    VlasovSolution sol;
    sol.spec = f0.spec();
    sol.dt = plan.dt;
    GridFunction f = f0;
    auto F = stepper.force(f);
    sol.snapshots.push_back({f, 0.0, F});
    sol.step_times.push_back(0.0);
    sol.force_history.push_back(F);
    for (long n = 1; n <= plan.steps; ++n) {
        stepper.step(f, plan.dt);
        if (!f.all_finite()) throw Divergence("non-finite Vlasov state", n);
        const double t = n == plan.steps ? t_final : n * plan.dt;
        F = stepper.force(f);
        sol.step_times.push_back(t);
        sol.force_history.push_back(F);
        const bool record = n == plan.steps || (options.record_stride > 0 && n % options.record_stride == 0);
        if (record) sol.snapshots.push_back({f, t, F});
    }
    return sol;
}

}  // namespace mfsc
