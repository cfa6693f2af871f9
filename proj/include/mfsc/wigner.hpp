#pragma once

#include <span>
#include <vector>

#include "mfsc/corrections.hpp"
#include "mfsc/density.hpp"
#include "mfsc/grid.hpp"
#include "mfsc/grid_ops.hpp"
#include "mfsc/potential.hpp"

namespace mfsc {

// Coherent-state datum (1/pi) int e^{-|zeta|^2} g(z - sqrt(eps) zeta) dzeta.
// Closed form for Gaussian mixtures (variance + eps/2 per axis); other
// densities use a tensor Gauss-Hermite rule and need sqrt(eps) to span at
// least 6 cells, else ResolutionError.
GridFunction coherent_wigner_init(const SmoothDensity& g, double epsilon, const GridSpec& spec);

// Gauss-Hermite nodes and weights for the weight e^{-t^2} (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Split-step spectral solver on the torus [x_min, x_max) x [v_min, v_max).
// In Fourier-v (dual variable y) the interaction acts as multiplication by
// i D(x, y) with D = [Phi(x + eps y/2) - Phi(x - eps y/2)] / eps and
// Phi = phi * rho, so a v-step of length dt is the phase exp(i dt D).
class WignerSolver {
public:
    WignerSolver(const PairPotential& phi, const GridSpec& spec, double epsilon);

    const GridSpec& spec() const { return spec_; }
    double epsilon() const { return epsilon_; }

    // Phi(x_i) from the density by the sampled-kernel direct sum.
    std::vector<double> potential(std::span<const double> rho) const;
    // D(x_i, y_m) for m = 0..nv/2, laid out [i * (nv/2+1) + m].
    std::vector<double> symbol(std::span<const double> potential) const;

    void advect_x(GridFunction& f, double dt);
    // exp(dt * T) for the frozen potential.
    void v_step(GridFunction& f, std::span<const double> potential, double dt);
    // T f for the frozen potential (the generator of v_step).
    GridFunction generator(const GridFunction& f, std::span<const double> potential);
    // Strang step: half x, v-step with the midpoint potential, half x.
    void step(GridFunction& f, double dt);

    // Largest fraction of spectral energy in the top 1/8 of modes along x or v.
    double aliasing_fraction(const GridFunction& f);

private:
    void v_multiply(GridFunction& f, std::span<const double> potential, double dt, bool generator_only);

    GridSpec spec_;
    double epsilon_;
    ConvolutionKernel kernel_;
    RealFft fft_x_;
    RealFft fft_v_;
    std::vector<cplx> cwork_;
    std::vector<cplx> row_;
};

struct WignerState {
    GridFunction f;
    double t = 0.0;
    double epsilon = 0.0;
};

WignerState step_wigner(const WignerState& state, const PairPotential& phi, double dt);

struct WignerOptions {
    int monitor_stride = 50;        // steps between aliasing checks
    double aliasing_tolerance = 1e-6;
};

// Evolves to t_final; throws ResolutionError when the aliasing monitor trips.
WignerState solve_wigner(const GridFunction& f0, const PairPotential& phi, double epsilon, double t_final, double dt,
                         const WignerOptions& options = {});

struct RemainderRow {
    double epsilon = 0.0;
    std::vector<double> remainder;  // R_K for K = 0..K_max
    double mass_drift = 0.0;        // |mass(t) - mass(0)| of the Wigner run
};

struct RemainderResult {
    std::vector<RemainderRow> rows;
    std::vector<double> slopes;       // least-squares slope of log R_K vs log eps
    std::vector<double> intercepts;
    // max over the sweep of R_K / eps^{K+1}
    std::vector<double> constants;
};

// Least-squares slope and intercept of log y against log x.
std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y);

// R_K(eps) = || f^eps(t) - sum_{k<=K} eps^k f^(k)(t) ||_1 for each eps, with
// f^eps solved on wigner_grid, which must equal the stack grid.
RemainderResult remainder_scaling(const SmoothDensity& g, const PairPotential& phi, double t, int K,
                                  std::span<const double> epsilons, const CorrectionStack& stack,
                                  const GridSpec& wigner_grid, const WignerOptions& options = {});

}  // namespace mfsc
