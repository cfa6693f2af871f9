#include <cmath>
#include <limits>
#include <numbers>

#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"

namespace mfsc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
    const std::uint64_t key = splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL);
    const std::uint64_t bits = splitmix64(key + k * 0x9e3779b97f4a7c15ULL);
    // Open interval (0, 1).
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
    // Box-Muller on the uniform pair (2m, 2m+1); even k takes the cosine branch.
    const std::uint64_t m = k / 2;
    const double u1 = counter_uniform(seed, stream, 2 * m);
    const double u2 = counter_uniform(seed, stream, 2 * m + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return (k % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
}

Configuration sample_typical(const GaussianMixture& g, std::size_t n, std::uint64_t seed) {
    const auto& comps = g.components();
    const int nd = g.phase_dim();
    Configuration z(g.dim(), n);
    for (std::size_t i = 0; i < n; ++i) {
        // Stream 2i+1 picks the component, stream 2i gives the coordinates.
        const double u = counter_uniform(seed, 2 * i + 1, 0);
        std::size_t c = 0;
        double acc = comps[0].weight;
        while (c + 1 < comps.size() && u >= acc) acc += comps[++c].weight;
        for (int a = 0; a < nd; ++a)
            z.z(i, a) = comps[c].mean[a] + comps[c].stddev[a] * counter_normal(seed, 2 * i, a);
    }
    return z;
}

double nu_1(int k, const TestFunction& u, const VariationalResult& flow) {
    if (k < 0) throw PreconditionFailed("order must be non-negative");
    if (k >= 2)
        throw UnsupportedOrder("nu_1 is implemented for k <= 1; higher orders need flow derivatives beyond order 2");
    const Configuration& zt = flow.trajectory.final_state().z;
    if (k == 0) return test_empirical(u, zt);
    return tested_D2_mu(u, zt, flow.first, flow.second ? &*flow.second : nullptr);
}

double nu_1(int k, const TestFunction& u, const Configuration& z0, const PairPotential& phi, double t, double dt) {
    if (k >= 2)
        throw UnsupportedOrder("nu_1 is implemented for k <= 1; higher orders need flow derivatives beyond order 2");
    if (k == 0) {
        FlowOptions opts;
        opts.record_stride = std::numeric_limits<long>::max();
        return test_empirical(u, integrate_flow(z0, phi, t, dt, opts).final_state().z);
    }
    VariationalOptions opts;
    opts.record_stride = std::numeric_limits<long>::max();
    return nu_1(k, u, integrate_variational(z0, phi, t, dt, 2, opts));
}

}  // namespace mfsc
