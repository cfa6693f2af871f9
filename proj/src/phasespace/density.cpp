#include "mfsc/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfsc/detail/hermite.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

double SmoothDensity::value(std::span<const double> z) const {
    int counts[6] = {0, 0, 0, 0, 0, 0};
    return partial(z, std::span<const int>(counts, phase_dim_));
}

GridFunction SmoothDensity::sample(const GridSpec& spec) const {
    if (phase_dim_ != 2) throw PreconditionFailed("grid sampling requires d=1");
    GridFunction f(spec);
    double z[2];
    for (int i = 0; i < spec.nx; ++i) {
        z[0] = spec.x(i);
        for (int j = 0; j < spec.nv; ++j) {
            z[1] = spec.v(j);
            f(i, j) = value(z);
        }
    }
    return f;
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : SmoothDensity(components.empty() ? 0 : static_cast<int>(components.front().mean.size())),
      components_(std::move(components)) {
    if (components_.empty()) throw ConfigError("gaussian mixture needs at least one component");
    const std::size_t n = components_.front().mean.size();
    if (n != 2 && n != 4 && n != 6) throw ConfigError("mixture component dimension must be 2d with d in {1,2,3}");
    double total = 0.0;
    for (const auto& c : components_) {
        if (c.mean.size() != n || c.stddev.size() != n) throw ConfigError("mixture component dimension mismatch");
        if (!(c.weight > 0.0)) throw ConfigError("mixture weights must be positive");
        for (double s : c.stddev)
            if (!(s > 0.0)) throw ConfigError("mixture standard deviations must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
}

GaussianMixture GaussianMixture::standard(int d, double variance) {
    MixtureComponent c;
    c.weight = 1.0;
    c.mean.assign(2 * d, 0.0);
    c.stddev.assign(2 * d, std::sqrt(variance));
    return GaussianMixture({c});
}

double GaussianMixture::partial(std::span<const double> z, std::span<const int> counts) const {
    const int n = phase_dim();
    double total = 0.0;
    for (const auto& c : components_) {
        double v = c.weight;
        for (int a = 0; a < n; ++a) {
            const double s = c.stddev[a];
            v *= detail::gaussian_factor_derivative(counts[a], z[a], c.mean[a], s) / (std::sqrt(2.0 * std::numbers::pi) * s);
        }
        total += v;
    }
    return total;
}

std::vector<double> GaussianMixture::mean() const {
    std::vector<double> m(phase_dim(), 0.0);
    for (const auto& c : components_)
        for (int a = 0; a < phase_dim(); ++a) m[a] += c.weight * c.mean[a];
    return m;
}

GaussianMixture GaussianMixture::smoothed(double added_variance) const {
    std::vector<MixtureComponent> out = components_;
    for (auto& c : out)
        for (double& s : c.stddev) s = std::sqrt(s * s + added_variance);
    return GaussianMixture(std::move(out));
}

double GaussianMixture::min_stddev() const {
    double m = INFINITY;
    for (const auto& c : components_)
        for (double s : c.stddev) m = std::min(m, s);
    return m;
}

}  // namespace mfsc
