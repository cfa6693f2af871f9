#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mfsc/errors.hpp"
#include "mfsc/nbody.hpp"
#include "mfsc/wigner.hpp"

namespace mfsc {

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw PreconditionFailed("Gauss-Hermite rule needs at least one node");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = std::sqrt(std::numbers::pi) * v0 * v0;
    }
}

GridFunction coherent_wigner_init(const SmoothDensity& g, double epsilon, const GridSpec& spec) {
    if (g.phase_dim() != 2) throw PreconditionFailed("Wigner data are implemented for d=1");
    if (!(epsilon > 0.0)) throw PreconditionFailed("epsilon must be positive");
    spec.validate();
    if (const auto* mix = dynamic_cast<const GaussianMixture*>(&g)) return mix->smoothed(0.5 * epsilon).sample(spec);

    const double width = std::sqrt(epsilon);
    if (width < 6.0 * std::max(spec.dx(), spec.dv()))
        throw ResolutionError("grid does not resolve the coherent-state width sqrt(eps) with 6 cells");
    std::vector<double> t, w;
    gauss_hermite(24, t, w);
    GridFunction f(spec);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.nv; ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < t.size(); ++a)
                for (std::size_t b = 0; b < t.size(); ++b) {
                    const double z[2] = {spec.x(i) - width * t[a], spec.v(j) - width * t[b]};
                    s += w[a] * w[b] * g.value(z);
                }
            f(i, j) = s / std::numbers::pi;
        }
    return f;
}

WignerSolver::WignerSolver(const PairPotential& phi, const GridSpec& spec, double epsilon)
    : spec_(spec), epsilon_(epsilon), kernel_(phi, spec, 0), fft_x_(spec.nx), fft_v_(spec.nv) {
    spec.validate();
    if (!(epsilon > 0.0)) throw PreconditionFailed("epsilon must be positive");
    if (spec.nx % 2 || spec.nv % 2) throw ConfigError("spectral grids need even node counts");
}

std::vector<double> WignerSolver::potential(std::span<const double> rho) const { return kernel_.apply(rho); }

std::vector<double> WignerSolver::symbol(std::span<const double> pot) const {
    const int nx = spec_.nx, ny = spec_.nv / 2 + 1;
    const double Lx = spec_.x_max - spec_.x_min, Lv = spec_.v_max - spec_.v_min;
    RealFft fft(nx);
    std::vector<cplx> phat(nx / 2 + 1), c(nx / 2 + 1);
    fft.forward(pot.data(), 1, phat.data());
    std::vector<double> D(static_cast<std::size_t>(nx) * ny), col(nx);
    for (int m = 0; m < ny; ++m) {
        const double y = wavenumber(m, Lv);
        for (int k = 0; k <= nx / 2; ++k) {
            if (2 * k == nx) {
                c[k] = 0.0;
                continue;
            }
            const double s = std::sin(0.5 * wavenumber(k, Lx) * epsilon_ * y);
            c[k] = phat[k] * cplx(0.0, 2.0 * s / epsilon_);
        }
        fft.inverse(c.data(), col.data(), 1);
        for (int i = 0; i < nx; ++i) D[static_cast<std::size_t>(i) * ny + m] = col[i];
    }
    return D;
}

void WignerSolver::advect_x(GridFunction& f, double dt) {
    for (int j = 0; j < spec_.nv; ++j)
        shift_line_spectral(fft_x_, f.values().data() + j, spec_.nv, spec_.v(j) * dt / spec_.dx(), cwork_);
}

void WignerSolver::v_multiply(GridFunction& f, std::span<const double> pot, double dt, bool generator_only) {
    const int ny = spec_.nv / 2 + 1;
    const auto D = symbol(pot);
    row_.resize(ny);
    for (int i = 0; i < spec_.nx; ++i) {
        double* line = f.values().data() + static_cast<std::size_t>(i) * spec_.nv;
        fft_v_.forward(line, 1, row_.data());
        for (int m = 0; m < ny; ++m) {
            const double d = D[static_cast<std::size_t>(i) * ny + m];
            if (generator_only)
                row_[m] *= cplx(0.0, d);
            else
                row_[m] *= cplx(std::cos(dt * d), std::sin(dt * d));
        }
        if (spec_.nv % 2 == 0) row_[ny - 1] = cplx(row_[ny - 1].real(), 0.0);
        fft_v_.inverse(row_.data(), line, 1);
    }
}

void WignerSolver::v_step(GridFunction& f, std::span<const double> pot, double dt) { v_multiply(f, pot, dt, false); }

GridFunction WignerSolver::generator(const GridFunction& f, std::span<const double> pot) {
    GridFunction out = f;
    v_multiply(out, pot, 0.0, true);
    return out;
}

void WignerSolver::step(GridFunction& f, double dt) {
    advect_x(f, 0.5 * dt);
    const auto pot = potential(f.density());
    v_step(f, pot, dt);
    advect_x(f, 0.5 * dt);
}

double WignerSolver::aliasing_fraction(const GridFunction& f) {
    double worst = 0.0;
    auto fraction = [&](RealFft& fft, const double* data, std::size_t stride, int lines, std::size_t line_step) {
        const int nm = fft.spectrum_size();
        const int cut = nm - std::max(1, nm / 8);
        std::vector<cplx> s(nm);
        double top = 0.0, total = 0.0;
        for (int l = 0; l < lines; ++l) {
            fft.forward(data + l * line_step, stride, s.data());
            for (int m = 0; m < nm; ++m) {
                const double e = std::norm(s[m]);
                total += e;
                if (m >= cut) top += e;
            }
        }
        return total > 0.0 ? top / total : 0.0;
    };
    worst = std::max(worst, fraction(fft_v_, f.values().data(), 1, spec_.nx, spec_.nv));
    worst = std::max(worst, fraction(fft_x_, f.values().data(), spec_.nv, spec_.nv, 1));
    return worst;
}

WignerState step_wigner(const WignerState& state, const PairPotential& phi, double dt) {
    WignerSolver solver(phi, state.f.spec(), state.epsilon);
    WignerState next = state;
    solver.step(next.f, dt);
    if (!next.f.all_finite()) throw Divergence("non-finite Wigner state", 1);
    next.t += dt;
    return next;
}

WignerState solve_wigner(const GridFunction& f0, const PairPotential& phi, double epsilon, double t_final, double dt,
                         const WignerOptions& options) {
    const auto plan = plan_steps(t_final, dt);
    WignerSolver solver(phi, f0.spec(), epsilon);
    WignerState st{f0, 0.0, epsilon};
    auto monitor = [&] {
        if (solver.aliasing_fraction(st.f) > options.aliasing_tolerance)
            throw ResolutionError("Wigner spectrum reaches the top 1/8 of resolved modes; refine the grid");
    };
    monitor();
    for (long n = 1; n <= plan.steps; ++n) {
        solver.step(st.f, plan.dt);
        if (!st.f.all_finite()) throw Divergence("non-finite Wigner state", n);
        if (options.monitor_stride > 0 && n % options.monitor_stride == 0) monitor();
    }
    monitor();
    st.t = t_final;
    return st;
}

}  // namespace mfsc
