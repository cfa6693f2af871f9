#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfsc/configuration.hpp"
#include "mfsc/potential.hpp"

namespace mfsc {

struct FlowState {
    double t = 0.0;
    Configuration z;
    double dt = 0.0;
    std::string integrator = "velocity-verlet";
};

struct Trajectory {
    std::vector<FlowState> states;
    const FlowState& final_state() const { return states.back(); }
};

struct FlowOptions {
    // Keep every record_stride-th step (the initial and final states are
    // always kept). 1 keeps every step.
    long record_stride = 1;
};

// Number of steps and the effective step used to reach t_final exactly.
struct StepPlan {
    long steps = 0;
    double dt = 0.0;
};
StepPlan plan_steps(double t_final, double dt);

// Accelerations -(1/N) sum_j grad phi(x_i - x_j), laid out as [i*d + a].
void mean_field_accelerations(const Configuration& z, const PairPotential& phi, std::vector<double>& acc);

// sum |v|^2/2 + (1/N) sum_{i<j} phi(x_i - x_j).
double mean_field_energy(const Configuration& z, const PairPotential& phi);

// Velocity-Verlet integration of xdot = v, vdot = -(1/N) sum grad phi.
// Throws Divergence on non-finite state.
Trajectory integrate_flow(const Configuration& z0, const PairPotential& phi, double t_final, double dt,
                          const FlowOptions& options = {});

// First-order flow derivatives dz_i^gamma(t)/dz_j^alpha. Rows are split
// into position rows (jx) and velocity rows (jv), each indexed a*N + i;
// columns are j*2d + alpha.
struct VariationalFirst {
    int d = 1;
    std::size_t n = 0;
    Eigen::MatrixXd jx, jv;
    double operator()(std::size_t i, int gamma, std::size_t j, int alpha) const;
};

// Same-index second derivatives d^2 z_i^gamma(t) / dz_j^alpha dz_j^beta,
// stored for alpha <= beta; columns are j*P + pair(alpha, beta).
struct VariationalSecondSame {
    int d = 1;
    std::size_t n = 0;
    Eigen::MatrixXd kx, kv;
    static int pair_count(int d) { return d * (2 * d + 1); }
    static int pair_index(int d, int alpha, int beta);
    double operator()(std::size_t i, int gamma, std::size_t j, int alpha, int beta) const;
};

struct VariationalOptions {
    std::size_t second_order_cap = 512;
    long record_stride = 1;
};

struct VariationalResult {
    Trajectory trajectory;
    VariationalFirst first;
    std::optional<VariationalSecondSame> second;
};

// Integrates the flow together with its variational equations (order 1 or
// 2) using the differentiated velocity-Verlet map, so J and K are the exact
// derivatives of the discrete flow. Throws CapacityExceeded for order 2
// above the particle cap.
VariationalResult integrate_variational(const Configuration& z0, const PairPotential& phi, double t_final, double dt,
                                        int order, const VariationalOptions& options = {});

struct FlowDerivativeRequest {
    std::size_t i = 0;
    int gamma = 0;
    std::size_t j = 0;
    int alpha = 0;
    int beta = -1;  // >= 0 requests the second derivative in (alpha, beta)
};

// Central-difference estimate of a flow derivative from perturbed runs.
double fd_flow_derivative(const Configuration& z0, const PairPotential& phi, double t, double dt,
                          const FlowDerivativeRequest& request, double h);

// CSV with columns t, particle, x..., v...
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace mfsc
