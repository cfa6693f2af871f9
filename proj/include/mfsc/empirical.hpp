#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mfsc/configuration.hpp"
#include "mfsc/nbody.hpp"
#include "mfsc/test_functions.hpp"

namespace mfsc {

// (1/N) sum_l u(z_l).
double test_empirical(const TestFunction& u, const Configuration& z);

// E[zeta^n] for zeta with density exp(-zeta^2)/sqrt(pi): (n-1)!!/2^{n/2}
// for even n, 0 for odd n.
double normalized_gaussian_moment(int n);

// Order-k Gaussian derivation sum_{alpha_1..alpha_k} C_G(alpha) d^alpha with
// C_G(alpha) = (1/k!) prod_a m(n_a), n_a the multiplicity of index a.
// Terms are stored once per multiplicity pattern with weight
// (number of orderings) * C_G, and only for all-even patterns.
struct GaussianDerivation {
    struct Term {
        std::array<int, 6> counts{};
        double weight = 0.0;
        // One representative ordered index list for the pattern.
        std::vector<int> alphas() const;
    };
    int order = 0;
    int phase_dim = 2;
    std::vector<Term> terms;

    // C_G for an ordered index sequence (exactly 0 for odd multiplicities).
    double coefficient(std::span<const int> sequence) const;
};

GaussianDerivation gaussian_coefficients(int order, int d);

// z -> (D_G^{2k} u)(z). k = 0 returns u itself.
TestFunctionPtr apply_DG_to_test(const TestFunctionPtr& u, int k);

// Same-index derivatives of U(Z(t)) = (1/N) sum_l u(z_l(t)) with respect
// to the initial data, via the chain rule through J and K.
struct EmpiricalDerivatives {
    double value = 0.0;
    Eigen::MatrixXd grad;  // N x 2d: dU/dz_j^alpha
    Eigen::MatrixXd hess;  // N x (2d)^2: d^2U/dz_j^alpha dz_j^beta, row-major in (alpha, beta)
};

EmpiricalDerivatives empirical_derivatives(const TestFunction& u, const Configuration& z_t,
                                           const VariationalFirst& first, const VariationalSecondSame* second);

// sum_j sum_{alpha,beta} C_G(alpha,beta) d^2U/dz_j^alpha dz_j^beta.
double contract_D2(const EmpiricalDerivatives& derivs, const GaussianDerivation& dg2);

// (u, D^2 mu_N(t)) from order-2 variational data; throws PreconditionFailed
// when the second-order tensor is missing.
double tested_D2_mu(const TestFunction& u, const Configuration& z_t, const VariationalFirst& first,
                    const VariationalSecondSame* second);

// D^2 applied to the product U_1 U_2 (the j=2, k=1 tested quantity).
double tested_D2_product(const EmpiricalDerivatives& d1, const EmpiricalDerivatives& d2, const GaussianDerivation& dg2);

// One-particle tested values of a single observable.
struct TestedValues {
    double nu0 = 0.0;
    std::optional<double> nu1;
};

// sum over compositions s_1 + ... + s_j = k (s_m in {0,1}) of prod nu^(s_m).
double tested_product(std::span<const TestedValues> factors, int k);

}  // namespace mfsc
