#include <algorithm>
#include <cmath>

#include "mfsc/errors.hpp"
#include "mfsc/vlasov.hpp"

namespace mfsc {

PhasePoint characteristic_map(const VlasovSolution& h, const PhasePoint& z, double t_from, double t_to,
                              double max_step) {
    if (z.d != 1) throw PreconditionFailed("characteristics are implemented for d=1");
    const double tol = 1e-9 * std::max(1.0, std::abs(h.step_times.back()));
    for (double t : {t_from, t_to})
        if (t < h.step_times.front() - tol || t > h.step_times.back() + tol)
            throw OutOfRange("characteristic time outside the stored trajectory");
    if (max_step <= 0.0) max_step = h.dt > 0.0 ? h.dt : 1e-3;
    const double span = t_to - t_from;
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / max_step - 1e-9)));
    const double dt = span / static_cast<double>(steps);
    const double t_lo = h.step_times.front(), t_hi = h.step_times.back();
    auto F = [&](double x, double t) { return h.force_at(x, std::clamp(t, t_lo, t_hi)); };

    double x = z.z[0], v = z.z[1], t = t_from;
    for (long s = 0; s < steps; ++s) {
        const double k1x = v, k1v = F(x, t);
        const double k2x = v + 0.5 * dt * k1v, k2v = F(x + 0.5 * dt * k1x, t + 0.5 * dt);
        const double k3x = v + 0.5 * dt * k2v, k3v = F(x + 0.5 * dt * k2x, t + 0.5 * dt);
        const double k4x = v + dt * k3v, k4v = F(x + dt * k3x, t + dt);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t = t_from + (s + 1) * dt;
    }
    PhasePoint out = z;
    out.z[0] = x;
    out.z[1] = v;
    return out;
}

}  // namespace mfsc
