#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfsc/errors.hpp"
#include "mfsc/metrics.hpp"

namespace mfsc {

void PointCloud::validate() const {
    if (dim < 1) throw PreconditionFailed("point cloud dimension must be positive");
    if (weights.empty()) throw PreconditionFailed("empty point cloud");
    if (coords.size() != weights.size() * static_cast<std::size_t>(dim))
        throw PreconditionFailed("point cloud coordinates do not match its weights");
    double s = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw PreconditionFailed("point cloud weights must be positive");
        s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw PreconditionFailed("point cloud weights must sum to 1");
    for (double c : coords)
        if (!std::isfinite(c)) throw PreconditionFailed("non-finite point cloud coordinate");
}

bool PointCloud::uniform() const {
    if (weights.empty()) return false;
    const double w0 = 1.0 / static_cast<double>(weights.size());
    return std::all_of(weights.begin(), weights.end(), [&](double w) { return std::abs(w - w0) <= 1e-15; });
}

PointCloud PointCloud::from_configuration(const Configuration& z) {
    PointCloud p;
    p.dim = z.phase_dim();
    p.coords = z.data();
    p.weights.assign(z.size(), 1.0 / static_cast<double>(z.size()));
    return p;
}

double clamped_distance(const double* a, const double* b, int dim, double clamp) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::min(std::sqrt(s), clamp);
}

double wasserstein_bounded(const PointCloud& p, const PointCloud& q, const WassersteinOptions& options) {
    p.validate();
    q.validate();
    if (p.dim != q.dim) throw PreconditionFailed("point clouds live in different dimensions");
    const std::size_t n = p.size(), m = q.size();
    if (std::max(n, m) > options.exact_cap)
        throw CapacityExceeded("exact transport limited to " + std::to_string(options.exact_cap) + " points per side",
                               n * m * 3 * sizeof(double));
    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            cost[i * m + j] = clamped_distance(p.point(i), q.point(j), p.dim, options.clamp);

    // Uniform clouds are scaled to integer masses so every pivot is exact.
    double w;
    if (p.uniform() && q.uniform()) {
        std::vector<double> s(n, static_cast<double>(m)), t(m, static_cast<double>(n));
        w = transport_cost(s, t, cost) / (static_cast<double>(n) * static_cast<double>(m));
    } else {
        w = transport_cost(p.weights, q.weights, cost);
    }
    return std::clamp(w, 0.0, options.clamp);
}

namespace {

struct Projected {
    double s;
    double w;
};

double quantile_cost(std::vector<Projected>& a, std::vector<Projected>& b, double clamp) {
    auto by_s = [](const Projected& x, const Projected& y) { return x.s < y.s; };
    std::sort(a.begin(), a.end(), by_s);
    std::sort(b.begin(), b.end(), by_s);
    double total = 0.0;
    std::size_t i = 0, j = 0;
    double ra = a[0].w, rb = b[0].w;
    while (i < a.size() && j < b.size()) {
        const double t = std::min(ra, rb);
        total += t * std::min(std::abs(a[i].s - b[j].s), clamp);
        ra -= t;
        rb -= t;
        if (ra <= 1e-15 && ++i < a.size()) ra = a[i].w;
        if (rb <= 1e-15 && ++j < b.size()) rb = b[j].w;
    }
    return total;
}

}  // namespace

double sliced_wasserstein(const PointCloud& p, const PointCloud& q, int n_directions, std::uint64_t seed,
                          double clamp) {
    p.validate();
    q.validate();
    if (p.dim != q.dim) throw PreconditionFailed("point clouds live in different dimensions");
    if (n_directions < 1) throw PreconditionFailed("at least one direction is required");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> dir(p.dim);
    std::vector<Projected> a(p.size()), b(q.size());
    double sum = 0.0;
    for (int r = 0; r < n_directions; ++r) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& c : dir) {
                c = normal(rng);
                norm += c * c;
            }
        } while (norm < 1e-24);
        norm = std::sqrt(norm);
        for (double& c : dir) c /= norm;
        auto project = [&](const PointCloud& c, std::vector<Projected>& out) {
            for (std::size_t i = 0; i < c.size(); ++i) {
                const double* z = c.point(i);
                double s = 0.0;
                for (int k = 0; k < c.dim; ++k) s += dir[k] * z[k];
                out[i] = {s, c.weights[i]};
            }
        };
        project(p, a);
        project(q, b);
        sum += quantile_cost(a, b, clamp);
    }
    return sum / n_directions;
}

PointCloud quantize(const GridFunction& f, std::size_t cap) {
    const GridSpec& g = f.spec();
    int block = 1;
    auto blocks = [&](int b) {
        return static_cast<std::size_t>((g.nx + b - 1) / b) * static_cast<std::size_t>((g.nv + b - 1) / b);
    };
    while (blocks(block) > cap) ++block;
    PointCloud p;
    p.dim = 2;
    double total = 0.0;
    for (int bi = 0; bi < g.nx; bi += block)
        for (int bj = 0; bj < g.nv; bj += block) {
            const int ei = std::min(bi + block, g.nx), ej = std::min(bj + block, g.nv);
            double mass = 0.0;
            for (int i = bi; i < ei; ++i)
                for (int j = bj; j < ej; ++j) mass += std::max(0.0, f(i, j));
            if (!(mass > 0.0)) continue;
            p.coords.push_back(0.5 * (g.x(bi) + g.x(ei - 1)));
            p.coords.push_back(0.5 * (g.v(bj) + g.v(ej - 1)));
            p.weights.push_back(mass);
            total += mass;
        }
    if (!(total > 0.0)) throw PreconditionFailed("grid function has no positive mass to quantize");
    for (double& w : p.weights) w /= total;
    return p;
}

double grid_vs_cloud_distance(const GridFunction& f, const PointCloud& p, GridDistanceMode mode, const TestBank* bank,
                              const WassersteinOptions& options) {
    p.validate();
    if (mode == GridDistanceMode::TestBank) {
        if (bank == nullptr || bank->size() == 0) throw PreconditionFailed("test-bank distance needs a bank");
        double worst = 0.0;
        for (std::size_t k = 0; k < bank->size(); ++k) {
            const TestFunction& u = (*bank)[k];
            double tested = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                tested += p.weights[i] * u.value({p.point(i), static_cast<std::size_t>(p.dim)});
            worst = std::max(worst, std::abs(tested - integrate(u, f)));
        }
        return worst;
    }
    const PointCloud q = quantize(f, options.exact_cap);
    if (std::max(p.size(), q.size()) > options.exact_cap) return sliced_wasserstein(q, p, 64, 0, options.clamp);
    return wasserstein_bounded(q, p, options);
}

}  // namespace mfsc
