#pragma once

#include <span>
#include <vector>

#include "mfsc/configuration.hpp"
#include "mfsc/grid.hpp"
#include "mfsc/grid_ops.hpp"
#include "mfsc/potential.hpp"

namespace mfsc {

enum class Advection { CubicLagrange, Spectral };

// Circulant direct-sum kernel on the periodic x-grid:
// apply(rho)_i = sum_k phi^(m)(x_i - x_k) rho_k dx with minimum-image offsets.
class ConvolutionKernel {
public:
    ConvolutionKernel(const PairPotential& phi, const GridSpec& spec, int derivative_order);
    std::vector<double> apply(std::span<const double> rho) const;
    int derivative_order() const { return order_; }

private:
    int order_;
    std::vector<double> taps_;  // taps_[(i - k) mod nx]
};

// Mass in the outermost band of cells (4 per side on each axis), relative
// to the L1 norm.
double boundary_mass_fraction(const GridFunction& f);

// F(x) = -(phi' * rho_f)(x). Throws DomainTooSmall when the boundary band
// carries more than tail_tolerance of the mass.
std::vector<double> self_consistent_force(const GridFunction& f, const PairPotential& phi,
                                          double tail_tolerance = 1e-6);

struct VlasovState {
    GridFunction f;
    double t = 0.0;
    std::vector<double> force;  // F(x) at t
};

// Strang splitting: half x-advection, full v-advection with the midpoint
// force, half x-advection. Shifts beyond 4 cells per step are rejected.
class VlasovStepper {
public:
    VlasovStepper(const PairPotential& phi, const GridSpec& spec, Advection advection = Advection::CubicLagrange,
                  double tail_tolerance = 1e-6);

    const GridSpec& spec() const { return spec_; }
    Advection advection() const { return advection_; }

    std::vector<double> force(const GridFunction& f) const;
    // F from a precomputed density.
    std::vector<double> force_from_density(std::span<const double> rho) const;
    void advect_x(GridFunction& f, double dt);
    void advect_v(GridFunction& f, std::span<const double> force, double dt);
    // Advances f by dt and returns the midpoint force used for the v-step.
    std::vector<double> step(GridFunction& f, double dt);
    // Transport with a given midpoint force (same splitting as step()).
    void transport(GridFunction& f, std::span<const double> midpoint_force, double dt);

    void check_shift(double max_velocity, double max_force, double dt) const;

private:
    GridSpec spec_;
    Advection advection_;
    double tail_tolerance_;
    ConvolutionKernel kernel_;
    RealFft fft_x_;
    RealFft fft_v_;
    std::vector<double> work_;
    std::vector<double> shifts_;
    std::vector<cplx> cwork_;
};

VlasovState step_vlasov(const VlasovState& state, const PairPotential& phi, double dt,
                        Advection advection = Advection::CubicLagrange);

struct VlasovOptions {
    Advection advection = Advection::CubicLagrange;
    int record_stride = 0;  // 0: only the initial and final states
    double tail_tolerance = 1e-6;
};

struct VlasovSolution {
    GridSpec spec;
    double dt = 0.0;
    std::vector<VlasovState> snapshots;
    // F(x, t_n) at every step time t_n = n*dt (including t = 0 and the end).
    std::vector<double> step_times;
    std::vector<std::vector<double>> force_history;

    const VlasovState& final_state() const { return snapshots.back(); }
    // Force at (x, t): cubic in x (periodic), linear in t.
    double force_at(double x, double t) const;
};

VlasovSolution solve_vlasov(const GridFunction& f0, const PairPotential& phi, double t_final, double dt,
                            const VlasovOptions& options = {});

// Characteristic x' = v, v' = F(x, t) of the stored solution, integrated by
// RK4 from t_from to t_to (either direction) with steps at most max_step.
PhasePoint characteristic_map(const VlasovSolution& h, const PhasePoint& z, double t_from, double t_to,
                              double max_step = 0.0);

}  // namespace mfsc
