#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "mfsc/errors.hpp"
#include "mfsc/wigner.hpp"

using namespace mfsc;

namespace {

GridSpec grid(int n, double half = 8.0) {
    GridSpec s;
    s.nx = s.nv = n;
    s.x_min = s.v_min = -half;
    s.x_max = s.v_max = half;
    return s;
}

double l1(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) s += std::abs(a.values()[k] - b.values()[k]);
    return s * a.spec().cell_area();
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) s = std::max(s, std::abs(a.values()[k] - b.values()[k]));
    return s;
}

// Wraps a mixture so that only the generic density interface is visible.
class Opaque final : public SmoothDensity {
public:
    explicit Opaque(GaussianMixture g) : SmoothDensity(2), g_(std::move(g)) {}
    int max_order() const override { return g_.max_order(); }
    double partial(std::span<const double> z, std::span<const int> c) const override { return g_.partial(z, c); }

private:
    GaussianMixture g_;
};

double gauss(double x, double m, double s) {
    return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
}

}  // namespace

TEST_CASE("Gauss-Hermite rule") {
    std::vector<double> t, w;
    gauss_hermite(12, t, w);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        m0 += w[k];
        m2 += w[k] * t[k] * t[k];
        m4 += w[k] * std::pow(t[k], 4);
    }
    const double sp = std::sqrt(std::numbers::pi);
    CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(sp / 2.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0 * sp / 4.0).epsilon(1e-13));
}

TEST_CASE("coherent Wigner data") {
    GridSpec s = grid(128);
    const auto g = GaussianMixture::standard(1, 0.7);
    auto f = coherent_wigner_init(g, 0.2, s);
    CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-12));
    const auto wider = GaussianMixture::standard(1, 0.8);
    for (int i = 0; i < s.nx; i += 9)
        for (int j = 0; j < s.nv; j += 7) {
            const double z[2] = {s.x(i), s.v(j)};
            CHECK(f(i, j) == doctest::Approx(wider.value(z)).epsilon(1e-13).scale(1e-14));
        }

    // Quadrature path against the closed form.
    const GaussianMixture mix({{0.6, {-0.5, 0.3}, {0.8, 1.1}}, {0.4, {0.9, -0.4}, {1.0, 0.7}}});
    const Opaque opaque(mix);
    auto q = coherent_wigner_init(opaque, 0.3, grid(128, 4.0));
    CHECK(max_diff(q, coherent_wigner_init(mix, 0.3, grid(128, 4.0))) < 1e-10);
    CHECK_THROWS_AS(coherent_wigner_init(opaque, 0.01, grid(128, 4.0)), ResolutionError);

    // The leading deviation from g is linear in eps.
    std::vector<double> eps{0.1, 0.05, 0.02, 0.01}, dev;
    const auto g0 = mix.sample(s);
    for (double e : eps) dev.push_back(l1(coherent_wigner_init(mix, e, s), g0));
    const auto [slope, icpt] = loglog_fit(eps, dev);
    CHECK(slope >= 0.98);
    CHECK(slope <= 1.05);
}

TEST_CASE("free Wigner step is exact transport") {
    ZeroPotential phi(1);
    GridSpec s = grid(128);
    const GaussianMixture g({{1.0, {0.4, -0.6}, {0.9, 1.2}}});
    WignerState st{g.sample(s), 0.0, 0.05};
    auto next = step_wigner(st, phi, 0.3);
    GridFunction exact(s);
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.nv; ++j) {
            const double z[2] = {s.x(i) - 0.3 * s.v(j), s.v(j)};
            exact(i, j) = g.value(z);
        }
    CHECK(max_diff(next.f, exact) < 1e-12);
}

TEST_CASE("difference symbol") {
    GaussianPotential phi(1);
    GridSpec s = grid(128);
    const double mu = 0.3, sd = 0.9, var = 1.0 + sd * sd;
    std::vector<double> rho(s.nx);
    for (int i = 0; i < s.nx; ++i) rho[i] = gauss(s.x(i), mu, sd);
    // Analytic Phi = phi * rho for Gaussian phi and rho, periodized over the torus.
    const double Lx = s.x_max - s.x_min;
    auto Phi = [&](double x) {
        double p = 0.0;
        for (int n = -3; n <= 3; ++n) p += std::exp(-0.5 * (x + n * Lx - mu) * (x + n * Lx - mu) / var);
        return p / std::sqrt(var);
    };
    auto dPhi = [&](double x) { return -(x - mu) / var * Phi(x); };
    const double Lv = s.v_max - s.v_min;
    const int ny = s.nv / 2 + 1;
    for (double eps : {0.5, 0.05}) {
        WignerSolver w(phi, s, eps);
        const auto D = w.symbol(w.potential(rho));
        double err = 0.0;
        for (int i = 0; i < s.nx; i += 3)
            for (int m = 0; m < ny; m += 5) {
                const double y = wavenumber(m, Lv), x = s.x(i);
                const double exact = (Phi(x + 0.5 * eps * y) - Phi(x - 0.5 * eps * y)) / eps;
                err = std::max(err, std::abs(D[i * ny + m] - exact));
            }
        CHECK(err < 1e-10);
    }
    // eps -> 0 recovers y Phi'(x) with an O(eps^2) defect.
    double prev = 0.0;
    for (double eps : {0.02, 0.01, 0.005}) {
        WignerSolver w(phi, s, eps);
        const auto D = w.symbol(w.potential(rho));
        double err = 0.0;
        for (int i = 0; i < s.nx; ++i)
            for (int m = 0; m < 20; ++m) err = std::max(err, std::abs(D[i * ny + m] - wavenumber(m, Lv) * dPhi(s.x(i))));
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.02));
        prev = err;
    }
}

TEST_CASE("v-step against direct quadrature of the interaction integral") {
    // Frozen density rho = N(mu, sd^2); f a product Gaussian; 32 x 32 grid.
    GaussianPotential phi(1);
    GridSpec s = grid(32);
    const double eps = 0.3, mu = 0.3, sd = 0.9;
    const double fx = -0.2, fsx = 1.0, fv = 0.4, fsv = 1.0;
    std::vector<double> rho(s.nx);
    for (int i = 0; i < s.nx; ++i) rho[i] = gauss(s.x(i), mu, sd);
    GridFunction f(s);
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.nv; ++j) f(i, j) = gauss(s.x(i), fx, fsx) * gauss(s.v(j), fv, fsv);

    // (1/2pi) i int_{-1/2}^{1/2} dlam int dk phihat(k) rhohat(k) e^{ikx} k d_v f(x, v + eps lam k).
    using cd = std::complex<double>;
    auto integrand_k = [&](double x, double v, double k) {
        const cd pr = std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * k * k) *
                      std::exp(cd(-0.5 * sd * sd * k * k, -k * mu));
        auto dv = [&](double lam) {
            const double u = v + eps * lam * k;
            return -(u - fv) / (fsv * fsv) * gauss(u, fv, fsv) * gauss(x, fx, fsx);
        };
        const double lam_int = boost::math::quadrature::gauss<double, 20>::integrate(dv, -0.5, 0.5);
        return pr * std::exp(cd(0.0, k * x)) * k * lam_int;
    };
    GridFunction quad(s);
    double imag = 0.0;
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.nv; ++j) {
            cd sum = 0.0;
            const int panels = 80;
            const double K = 12.0, hk = 2.0 * K / panels;
            for (int p = 0; p < panels; ++p) {
                const double a = -K + p * hk;
                sum += boost::math::quadrature::gauss<double, 15>::integrate(
                    [&](double k) { return integrand_k(s.x(i), s.v(j), k).real(); }, a, a + hk);
                sum += cd(0.0, 1.0) * boost::math::quadrature::gauss<double, 15>::integrate(
                                          [&](double k) { return integrand_k(s.x(i), s.v(j), k).imag(); }, a, a + hk);
            }
            const cd val = cd(0.0, 1.0) * sum / (2.0 * std::numbers::pi);
            quad(i, j) = val.real();
            imag = std::max(imag, std::abs(val.imag()));
        }
    CHECK(imag < 1e-10);

    WignerSolver w(phi, s, eps);
    const auto pot = w.potential(rho);
    const auto gen = w.generator(f, pot);
    CHECK(max_diff(gen, quad) < 1e-6);

    // One v-step against exp(dt T) with the first-order term from the quadrature.
    const double dt = 0.05;
    GridFunction oracle = f;
    oracle.axpy(dt, quad);
    GridFunction term = gen;
    double c = dt;
    for (int n = 2; n <= 10; ++n) {
        term = w.generator(term, pot);
        c *= dt / n;
        oracle.axpy(c, term);
    }
    GridFunction stepped = f;
    w.v_step(stepped, pot, dt);
    CHECK(max_diff(stepped, oracle) < 1e-6);
}

TEST_CASE("mass and zero mode are invariant") {
    GaussianPotential phi(1);
    GridSpec s = grid(128);
    auto f = coherent_wigner_init(GaussianMixture::standard(1), 0.1, s);
    WignerSolver w(phi, s, 0.1);
    const auto rho0 = f.density();
    GridFunction g = f;
    w.v_step(g, w.potential(rho0), 0.01);
    const auto rho1 = g.density();
    for (int i = 0; i < s.nx; ++i) CHECK(rho1[i] == doctest::Approx(rho0[i]).epsilon(1e-12).scale(1e-14));
    const double m0 = f.mass();
    for (int n = 0; n < 100; ++n) {
        const double before = f.mass();
        w.step(f, 1e-2);
        CHECK(std::abs(f.mass() - before) < 1e-10);
    }
    CHECK(std::abs(f.mass() - m0) < 1e-8);
}

TEST_CASE("aliasing monitor") {
    GaussianPotential phi(1);
    GridSpec s = grid(64);
    GridFunction noisy(s);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (double& v : noisy.values()) v = 1e-3 * nd(rng);
    noisy += GaussianMixture::standard(1).sample(s);
    WignerSolver w(phi, s, 0.1);
    CHECK(w.aliasing_fraction(noisy) > 1e-6);
    CHECK(w.aliasing_fraction(GaussianMixture::standard(1).sample(s)) < 1e-12);
    CHECK_THROWS_AS(solve_wigner(noisy, phi, 0.1, 0.1, 1e-2), ResolutionError);
}

TEST_CASE("remainder scaling without interaction is set by the initial data") {
    ZeroPotential phi(1);
    GridSpec s = grid(128);
    const auto g = GaussianMixture::standard(1);
    CorrectionOptions opt;
    opt.advection = Advection::Spectral;
    opt.derivative = VelocityDerivative::Spectral;
    auto stack = solve_stack(coherent_initial_stack(g, 1, s), phi, 0.5, 1e-2, opt);
    std::vector<double> eps{0.1, 0.05, 0.02};
    auto r = remainder_scaling(g, phi, 0.5, 1, eps, stack, s);
    for (const auto& row : r.rows) {
        // Closed forms transported along x - v t: g_eps, g and D_G^2 g = (g_xx + g_vv)/4.
        const auto ge = g.smoothed(0.5 * row.epsilon);
        double r0 = 0.0, r1 = 0.0;
        for (int i = 0; i < s.nx; ++i)
            for (int j = 0; j < s.nv; ++j) {
                const double z[2] = {s.x(i) - 0.5 * s.v(j), s.v(j)};
                const int cxx[2] = {2, 0}, cvv[2] = {0, 2};
                const double d = ge.value(z) - g.value(z);
                r0 += std::abs(d);
                r1 += std::abs(d - 0.25 * row.epsilon * (g.partial(z, cxx) + g.partial(z, cvv)));
            }
        CHECK(row.remainder[0] == doctest::Approx(r0 * s.cell_area()).epsilon(1e-9));
        CHECK(row.remainder[1] == doctest::Approx(r1 * s.cell_area()).epsilon(1e-7));
    }
    CHECK(r.slopes[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.slopes[1] == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS_AS(remainder_scaling(g, phi, 0.5, 1, eps, stack, grid(64)), ConfigError);
}

TEST_CASE("remainder scaling and eps-consistency with interaction") {
    GaussianPotential phi(1);
    GridSpec s = grid(128);
    const auto g = GaussianMixture::standard(1);
    CorrectionOptions opt;
    opt.advection = Advection::Spectral;
    opt.derivative = VelocityDerivative::Spectral;
    auto stack = solve_stack(coherent_initial_stack(g, 1, s), phi, 0.5, 2e-3, opt);
    std::vector<double> eps{0.1, 0.02, 0.01};
    auto r = remainder_scaling(g, phi, 0.5, 1, eps, stack, s);
    CHECK(r.slopes[0] == doctest::Approx(1.0).epsilon(0.2));
    CHECK(r.slopes[1] == doctest::Approx(2.0).epsilon(0.15));
    for (const auto& row : r.rows) CHECK(row.mass_drift < 1e-8);
    // A fresh eps = 0.05 run stays within C eps^2 with C from the sweep.
    const double e = 0.05;
    auto w = solve_wigner(coherent_initial_stack(g, 0, s, InitialPolicy::SmoothedLeading, e)[0], phi, e, 0.5, 2e-3);
    auto diff = w.f;
    diff -= stack.truncated_sum(e, 1, stack.final_slice());
    CHECK(diff.l1_norm() < r.constants[1] * e * e);
}
