#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfsc/density.hpp"
#include "mfsc/grid.hpp"
#include "mfsc/grid_ops.hpp"
#include "mfsc/potential.hpp"
#include "mfsc/vlasov.hpp"

namespace mfsc {

// FullyExpanded: f0^(0) = g and f0^(k) = D_G^{2k} g.
// SmoothedLeading: f0^(0) = the coherent (eps-smoothed) datum, f0^(k) = 0.
enum class InitialPolicy { FullyExpanded, SmoothedLeading };

std::vector<GridFunction> coherent_initial_stack(const SmoothDensity& g, int K, const GridSpec& spec,
                                                 InitialPolicy policy = InitialPolicy::FullyExpanded,
                                                 double epsilon = 0.0);

// c_n = 1/(2^n (n+1)!).
double tn_coefficient(int n);

// Convolution fields and v-derivatives shared by the T^(n) operators.
class CorrectionOperators {
public:
    CorrectionOperators(const PairPotential& phi, const GridSpec& spec,
                        VelocityDerivative method = VelocityDerivative::FiniteDifference);

    const GridSpec& spec() const { return spec_; }
    VelocityDerivative method() const { return method_; }

    // (phi^(n+1) * rho)(x) on the x-grid.
    std::vector<double> field(int n, std::span<const double> rho) const;
    // T^(n)_h gamma = (-1)^{n/2} c_n (phi^(n+1) * rho_h) d_v^{n+1} gamma; exact zero for odd n.
    GridFunction apply_Tn(int n, const GridFunction& h, const GridFunction& gamma) const;
    // Adds scale * field(x) * d_v^{n+1} gamma into out.
    void add_field_times_derivative(std::span<const double> field, const GridFunction& gamma, int n, double scale,
                                    GridFunction& out) const;

    struct SourceTerm {
        int s, r, l;  // T^(s)_{f^(r)} f^(l)
    };
    // {(s, r, l): s + r + l = k, r < k, l < k, s even}.
    static std::vector<SourceTerm> source_terms(int k);

    // Theta^(k) from stack[l] = f^(l) at one time; needs stack.size() >= k.
    GridFunction assemble_source(int k, std::span<const GridFunction> stack) const;

private:
    const PairPotential& phi_;
    GridSpec spec_;
    VelocityDerivative method_;
    std::vector<ConvolutionKernel> kernels_;  // index n: phi^(n+1)
};

GridFunction apply_Tn(int n, const GridFunction& h, const GridFunction& gamma, const PairPotential& phi,
                      VelocityDerivative method = VelocityDerivative::FiniteDifference);
GridFunction assemble_source(int k, std::span<const GridFunction> stack, const PairPotential& phi,
                             VelocityDerivative method = VelocityDerivative::FiniteDifference);

struct CorrectionOptions {
    Advection advection = Advection::CubicLagrange;
    VelocityDerivative derivative = VelocityDerivative::FiniteDifference;
    int record_stride = 0;  // 0: initial and final slices only
    double tail_tolerance = 1e-6;
    // Time-independent source added to Theta of one order (superposition checks).
    std::optional<GridFunction> extra_source;
    int extra_source_order = -1;
};

struct CorrectionStack {
    GridSpec spec;
    int k_max = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<GridFunction>> orders;  // orders[k][slice]

    const GridFunction& at(int k, std::size_t slice) const { return orders.at(k).at(slice); }
    std::size_t final_slice() const { return times.size() - 1; }
    // sum_{k <= K} eps^k f^(k) at a slice.
    GridFunction truncated_sum(double epsilon, int K, std::size_t slice) const;
};

// Solves f^(0) (Vlasov) and f^(1..K) in lockstep. Per step of length dt:
//   gamma* = gamma_n + dt/2 S_n, gamma** = U(gamma*), gamma_{n+1} = gamma** + dt/2 S_{n+1},
// with U the Strang transport of the f^(0) step and
// S = (phi' * rho_gamma) d_v f^(0) + Theta^(k). Sources have zero v-integral, so
// rho_gamma** = rho_gamma_{n+1} and the update is explicit.
CorrectionStack solve_stack(const std::vector<GridFunction>& initial, const PairPotential& phi, double t_final,
                            double dt, const CorrectionOptions& options = {});

struct CorrectionTrajectory {
    std::vector<double> times;
    std::vector<GridFunction> values;
};

// Order-k solution given the lower orders' initial data (lower.at(l, 0), l < k)
// and f0^(k); the lower orders are re-propagated in the same lockstep scheme.
CorrectionTrajectory solve_correction(int k, const CorrectionStack& lower, const GridFunction& f0k,
                                      const PairPotential& phi, double t_final, double dt,
                                      const CorrectionOptions& options = {});

// Writes one snapshot per (order, slice) into dir and a manifest.json listing them.
void write_stack(const std::string& dir, const CorrectionStack& stack);

}  // namespace mfsc
