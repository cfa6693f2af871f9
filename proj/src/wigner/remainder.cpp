#include <cmath>

#include "mfsc/errors.hpp"
#include "mfsc/wigner.hpp"

namespace mfsc {

std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionFailed("fit needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw PreconditionFailed("log-log fit needs positive data");
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

RemainderResult remainder_scaling(const SmoothDensity& g, const PairPotential& phi, double t, int K,
                                  std::span<const double> epsilons, const CorrectionStack& stack,
                                  const GridSpec& wigner_grid, const WignerOptions& options) {
    if (!(wigner_grid == stack.spec)) throw ConfigError("Wigner grid and correction-stack grid differ");
    if (stack.k_max < K) throw PreconditionFailed("correction stack holds fewer orders than requested");
    if (std::abs(stack.times.back() - t) > 1e-12 * std::max(1.0, t))
        throw PreconditionFailed("correction stack does not end at the requested time");
    RemainderResult out;
    const std::size_t last = stack.final_slice();
    for (double eps : epsilons) {
        const auto f0 = coherent_wigner_init(g, eps, wigner_grid);
        const auto w = solve_wigner(f0, phi, eps, t, stack.dt, options);
        RemainderRow row;
        row.epsilon = eps;
        row.mass_drift = std::abs(w.f.mass() - f0.mass());
        for (int k = 0; k <= K; ++k) {
            auto diff = w.f;
            diff -= stack.truncated_sum(eps, k, last);
            row.remainder.push_back(diff.l1_norm());
        }
        out.rows.push_back(std::move(row));
    }
    std::vector<double> xs;
    for (const auto& r : out.rows) xs.push_back(r.epsilon);
    for (int k = 0; k <= K; ++k) {
        std::vector<double> ys;
        double c = 0.0;
        for (const auto& r : out.rows) {
            ys.push_back(r.remainder[k]);
            c = std::max(c, r.remainder[k] / std::pow(r.epsilon, k + 1));
        }
        const auto [slope, icpt] = loglog_fit(xs, ys);
        out.slopes.push_back(slope);
        out.intercepts.push_back(icpt);
        out.constants.push_back(c);
    }
    return out;
}

}  // namespace mfsc
