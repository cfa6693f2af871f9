#include <bit>
#include <cmath>

#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

EmpiricalDerivatives empirical_derivatives(const TestFunction& u, const Configuration& z_t,
                                           const VariationalFirst& first, const VariationalSecondSame* second) {
    const std::size_t n = z_t.size();
    const int d = z_t.dim();
    const int nd = 2 * d;
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    if (first.n != n || first.d != d) throw PreconditionFailed("variational data does not match the configuration");
    if (u.phase_dim() != nd) throw PreconditionFailed("test function dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(n);

    // Gradients and Hessians of u at the evolved points, split like the J rows.
    Eigen::VectorXd gx(d * N), gv(d * N);
    std::vector<double> hess_u(n * nd * nd);
    EmpiricalDerivatives out;
    double g[6];
    for (std::size_t l = 0; l < n; ++l) {
        const auto z = z_t.point(l);
        out.value += u.value(z);
        u.gradient(z, g);
        for (int a = 0; a < d; ++a) {
            gx(a * N + static_cast<Eigen::Index>(l)) = g[a];
            gv(a * N + static_cast<Eigen::Index>(l)) = g[d + a];
        }
        u.hessian(z, hess_u.data() + l * nd * nd);
    }
    out.value *= inv_n;

    const Eigen::RowVectorXd grad_flat = inv_n * (gx.transpose() * first.jx + gv.transpose() * first.jv);
    out.grad.resize(N, nd);
    for (Eigen::Index j = 0; j < N; ++j)
        for (int a = 0; a < nd; ++a) out.grad(j, a) = grad_flat(j * nd + a);

    out.hess.setZero(N, nd * nd);
    // Chain-rule term sum_l sum_{gamma,delta} u_{gamma delta}(z_l) J_{l gamma, j alpha} J_{l delta, j beta}.
    std::vector<double> col(nd);
    for (Eigen::Index j = 0; j < N; ++j) {
        for (std::size_t l = 0; l < n; ++l) {
            const Eigen::Index L = static_cast<Eigen::Index>(l);
            const double* h = hess_u.data() + l * nd * nd;
            double jl[6][6];  // jl[gamma][alpha] = J_{l gamma, j alpha}
            for (int gm = 0; gm < nd; ++gm)
                for (int a = 0; a < nd; ++a)
                    jl[gm][a] = gm < d ? first.jx(gm * N + L, j * nd + a) : first.jv((gm - d) * N + L, j * nd + a);
            for (int a = 0; a < nd; ++a) {
                for (int gm = 0; gm < nd; ++gm) {
                    double s = 0.0;
                    for (int dl = 0; dl < nd; ++dl) s += h[gm * nd + dl] * jl[dl][a];
                    col[gm] = s;  // (H J)_{gamma, alpha}
                }
                for (int b = 0; b < nd; ++b) {
                    double s = 0.0;
                    for (int gm = 0; gm < nd; ++gm) s += jl[gm][b] * col[gm];
                    out.hess(j, a * nd + b) += s;
                }
            }
        }
    }
    if (second) {
        if (second->n != n || second->d != d) throw PreconditionFailed("second-order data does not match");
        const int np = VariationalSecondSame::pair_count(d);
        const Eigen::RowVectorXd k_flat = gx.transpose() * second->kx + gv.transpose() * second->kv;
        for (Eigen::Index j = 0; j < N; ++j)
            for (int a = 0; a < nd; ++a)
                for (int b = 0; b < nd; ++b)
                    out.hess(j, a * nd + b) += k_flat(j * np + VariationalSecondSame::pair_index(d, a, b));
    }
    out.hess *= inv_n;
    return out;
}

double contract_D2(const EmpiricalDerivatives& derivs, const GaussianDerivation& dg2) {
    if (dg2.order != 2) throw PreconditionFailed("contract_D2 needs the order-2 derivation");
    const int nd = dg2.phase_dim;
    double s = 0.0;
    for (Eigen::Index j = 0; j < derivs.hess.rows(); ++j)
        for (int a = 0; a < nd; ++a)
            for (int b = 0; b < nd; ++b) {
                const int seq[2] = {a, b};
                const double c = dg2.coefficient(seq);
                if (c != 0.0) s += c * derivs.hess(j, a * nd + b);
            }
    return s;
}

double tested_D2_mu(const TestFunction& u, const Configuration& z_t, const VariationalFirst& first,
                    const VariationalSecondSame* second) {
    if (!second) throw PreconditionFailed("tested_D2_mu needs second-order variational data");
    const auto derivs = empirical_derivatives(u, z_t, first, second);
    return contract_D2(derivs, gaussian_coefficients(2, z_t.dim()));
}

double tested_D2_product(const EmpiricalDerivatives& d1, const EmpiricalDerivatives& d2,
                         const GaussianDerivation& dg2) {
    const int nd = dg2.phase_dim;
    double s = 0.0;
    for (Eigen::Index j = 0; j < d1.hess.rows(); ++j)
        for (int a = 0; a < nd; ++a)
            for (int b = 0; b < nd; ++b) {
                const int seq[2] = {a, b};
                const double c = dg2.coefficient(seq);
                if (c == 0.0) continue;
                s += c * (d1.hess(j, a * nd + b) * d2.value + d1.grad(j, a) * d2.grad(j, b) +
                          d1.grad(j, b) * d2.grad(j, a) + d1.value * d2.hess(j, a * nd + b));
            }
    return s;
}

double tested_product(std::span<const TestedValues> factors, int k) {
    const int j = static_cast<int>(factors.size());
    if (j < 1) throw PreconditionFailed("tested_product needs at least one factor");
    if (k < 0 || k > j)
        throw UnsupportedOrder("order " + std::to_string(k) + " needs factor orders above 1, which are not implemented");
    double total = 0.0;
    // Compositions with s_m in {0,1}: subsets of size k.
    for (unsigned mask = 0; mask < (1u << j); ++mask) {
        if (std::popcount(mask) != k) continue;
        double p = 1.0;
        for (int m = 0; m < j; ++m) {
            if (mask & (1u << m)) {
                if (!factors[m].nu1) throw PreconditionFailed("first-order tested value missing");
                p *= *factors[m].nu1;
            } else {
                p *= factors[m].nu0;
            }
        }
        total += p;
    }
    return total;
}

}  // namespace mfsc
