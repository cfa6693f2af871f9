#include <cmath>
#include <vector>

#include "mfsc/errors.hpp"
#include "mfsc/nbody.hpp"

namespace mfsc {

double VariationalFirst::operator()(std::size_t i, int gamma, std::size_t j, int alpha) const {
    const Eigen::Index col = static_cast<Eigen::Index>(j * 2 * d + alpha);
    if (gamma < d) return jx(static_cast<Eigen::Index>(gamma * n + i), col);
    return jv(static_cast<Eigen::Index>((gamma - d) * n + i), col);
}

int VariationalSecondSame::pair_index(int d, int alpha, int beta) {
    if (alpha > beta) std::swap(alpha, beta);
    const int nd = 2 * d;
    return alpha * nd - alpha * (alpha - 1) / 2 + (beta - alpha);
}

double VariationalSecondSame::operator()(std::size_t i, int gamma, std::size_t j, int alpha, int beta) const {
    const Eigen::Index col = static_cast<Eigen::Index>(j * pair_count(d) + pair_index(d, alpha, beta));
    if (gamma < d) return kx(static_cast<Eigen::Index>(gamma * n + i), col);
    return kv(static_cast<Eigen::Index>((gamma - d) * n + i), col);
}

namespace {

// Force, force Jacobian and (optionally) third-derivative matrices at X.
struct ForceTerms {
    std::vector<double> acc;            // [i*d + a]
    Eigen::MatrixXd hm;                 // (a,i) x (b,m), includes 1/N
    std::vector<Eigen::MatrixXd> third; // per (a,b,c): T_ik = phi_abc(x_i - x_k)/N, zero diagonal
};

void compute_terms(const Configuration& z, const PairPotential& phi, bool with_third, ForceTerms& t) {
    const std::size_t n = z.size();
    const int d = z.dim();
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    t.acc.assign(n * d, 0.0);
    t.hm.setZero(d * N, d * N);
    if (with_third) {
        t.third.resize(d * d * d);
        for (auto& m : t.third) m.setZero(N, N);
    }
    if (phi.is_zero()) return;
    double r[3], g[3], h[9], th[27];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            for (int a = 0; a < d; ++a) r[a] = z.x(i, a) - z.x(k, a);
            phi.pair_terms(r, g, h, with_third ? th : nullptr);
            const Eigen::Index I = static_cast<Eigen::Index>(i), K = static_cast<Eigen::Index>(k);
            for (int a = 0; a < d; ++a) {
                t.acc[i * d + a] -= g[a] * inv_n;
                t.acc[k * d + a] += g[a] * inv_n;
                for (int b = 0; b < d; ++b) {
                    // phi is even, so its Hessian is even in r: same value for (i,k) and (k,i).
                    const double hv = h[a * d + b] * inv_n;
                    t.hm(a * N + I, b * N + K) = hv;
                    t.hm(a * N + K, b * N + I) = hv;
                    t.hm(a * N + I, b * N + I) -= hv;
                    t.hm(a * N + K, b * N + K) -= hv;
                }
            }
            if (with_third) {
                // Third derivatives are odd in r.
                for (int c3 = 0; c3 < d * d * d; ++c3) {
                    t.third[c3](I, K) = th[c3] * inv_n;
                    t.third[c3](K, I) = -th[c3] * inv_n;
                }
            }
        }
    }
}

// Second-order source S[(a,i),(j,p)] = sum_{m,p'} d^2F_i^a/dx_m dx_p' A_m B_p'
// for the column pairs (alpha, beta) of each particle j.
void second_order_source(const ForceTerms& t, const Eigen::MatrixXd& jx, int d, std::size_t n, Eigen::MatrixXd& s) {
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    const int nd = 2 * d;
    const int np = VariationalSecondSame::pair_count(d);
    s.setZero(d * N, N * np);
    // Column bookkeeping for the (alpha, beta) pairs.
    std::vector<std::pair<int, int>> pairs;
    for (int al = 0; al < nd; ++al)
        for (int be = al; be < nd; ++be) pairs.emplace_back(al, be);

    Eigen::MatrixXd prod(N, N * np), tp, tb, tc;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                const Eigen::MatrixXd& T = t.third[(a * d + b) * d + c];
                const Eigen::VectorXd tsum = T.rowwise().sum();
                const auto jb = jx.middleRows(b * N, N);
                const auto jc = jx.middleRows(c * N, N);
                for (Eigen::Index j = 0; j < N; ++j)
                    for (int p = 0; p < np; ++p)
                        prod.col(j * np + p) =
                            jb.col(j * nd + pairs[p].first).cwiseProduct(jc.col(j * nd + pairs[p].second));
                tb.noalias() = T * jb;
                if (b == c) {
                    tc = tb;
                } else {
                    tc.noalias() = T * jc;
                }
                tp.noalias() = T * prod;
                auto sa = s.middleRows(a * N, N);
                for (Eigen::Index j = 0; j < N; ++j)
                    for (int p = 0; p < np; ++p) {
                        const Eigen::Index col = j * np + p;
                        const Eigen::Index ca = j * nd + pairs[p].first, cb = j * nd + pairs[p].second;
                        sa.col(col) -= tsum.cwiseProduct(prod.col(col)) - jb.col(ca).cwiseProduct(tc.col(cb)) -
                                       jc.col(cb).cwiseProduct(tb.col(ca)) + tp.col(col);
                    }
            }
}

}  // namespace

VariationalResult integrate_variational(const Configuration& z0, const PairPotential& phi, double t_final, double dt,
                                        int order, const VariationalOptions& options) {
    z0.validate();
    if (order != 1 && order != 2) throw UnsupportedOrder("variational order must be 1 or 2");
    if (phi.dim() != z0.dim()) throw PreconditionFailed("potential/configuration dimension mismatch");
    if (options.record_stride < 1) throw PreconditionFailed("record stride must be >= 1");
    const std::size_t n = z0.size();
    const int d = z0.dim();
    const int nd = 2 * d;
    const int np = VariationalSecondSame::pair_count(d);
    const Eigen::Index N = static_cast<Eigen::Index>(n);
    if (order == 2 && n > options.second_order_cap) {
        const std::size_t bytes =
            sizeof(double) * (2 * d * n * nd * n + 4 * d * n * n * np + d * d * d * n * n + n * n * np);
        throw CapacityExceeded("second-order variational tensor for N=" + std::to_string(n) +
                                   " exceeds the cap of " + std::to_string(options.second_order_cap),
                               bytes);
    }
    const bool second = order == 2;
    const StepPlan plan = plan_steps(t_final, dt);
    const double h = plan.dt;

    VariationalResult res;
    res.trajectory.states.push_back({0.0, z0, h, "velocity-verlet"});
    Configuration z = z0;

    VariationalFirst& J = res.first;
    J.d = d;
    J.n = n;
    J.jx.setZero(d * N, N * nd);
    J.jv.setZero(d * N, N * nd);
    for (Eigen::Index i = 0; i < N; ++i)
        for (int a = 0; a < d; ++a) {
            J.jx(a * N + i, i * nd + a) = 1.0;
            J.jv(a * N + i, i * nd + d + a) = 1.0;
        }
    VariationalSecondSame K;
    if (second) {
        K.d = d;
        K.n = n;
        K.kx.setZero(d * N, N * np);
        K.kv.setZero(d * N, N * np);
    }

    // Accelerations of the tangent variables at the current positions. Between
    // the closing half-kick of one step and the opening half-kick of the next
    // neither X nor Jx, Kx change, so each is evaluated once per step.
    ForceTerms terms;
    Eigen::MatrixXd acc_j, acc_k;
    auto evaluate = [&] {
        compute_terms(z, phi, second, terms);
        if (phi.is_zero()) return;
        acc_j.noalias() = terms.hm * J.jx;
        if (second) {
            second_order_source(terms, J.jx, d, n, acc_k);
            acc_k.noalias() += terms.hm * K.kx;
        }
    };
    auto kick = [&](double w) {
        for (std::size_t i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) z.v(i, a) += w * terms.acc[i * d + a];
        if (phi.is_zero()) return;
        J.jv.noalias() += w * acc_j;
        if (second) K.kv.noalias() += w * acc_k;
    };
    evaluate();
    for (long s = 0; s < plan.steps; ++s) {
        kick(0.5 * h);
        for (std::size_t i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) z.x(i, a) += h * z.v(i, a);
        J.jx.noalias() += h * J.jv;
        if (second) K.kx.noalias() += h * K.kv;
        evaluate();
        kick(0.5 * h);
        if (!z.all_finite()) throw Divergence("non-finite particle state in variational flow", s + 1);
        const bool last = (s + 1 == plan.steps);
        if (last && !(J.jx.allFinite() && J.jv.allFinite() && (!second || (K.kx.allFinite() && K.kv.allFinite()))))
            throw Divergence("non-finite variational tensor", s + 1);
        if (last || (s + 1) % options.record_stride == 0)
            res.trajectory.states.push_back({last ? t_final : (s + 1) * h, z, h, "velocity-verlet"});
    }
    if (second) res.second = std::move(K);
    return res;
}

}  // namespace mfsc
