#include "mfsc/configuration.hpp"

#include <cmath>

#include "mfsc/errors.hpp"

namespace mfsc {

Configuration::Configuration(int dim, std::size_t n) : d_(dim), n_(n), data_(n * 2 * dim, 0.0) {
    if (dim < 1 || dim > 3) throw ConfigError("dimension must be 1, 2 or 3");
}

Configuration::Configuration(int dim, std::vector<double> data) : d_(dim), data_(std::move(data)) {
    if (dim < 1 || dim > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (data_.size() % (2 * dim) != 0) throw PreconditionFailed("configuration data size not a multiple of 2d");
    n_ = data_.size() / (2 * dim);
}

PhasePoint Configuration::phase_point(std::size_t i) const {
    PhasePoint p(d_);
    for (int a = 0; a < 2 * d_; ++a) p.z[a] = z(i, a);
    return p;
}

void Configuration::set_point(std::size_t i, const PhasePoint& p) {
    if (p.d != d_) throw PreconditionFailed("phase point dimension mismatch");
    for (int a = 0; a < 2 * d_; ++a) z(i, a) = p.z[a];
}

bool Configuration::all_finite() const {
    for (double c : data_)
        if (!std::isfinite(c)) return false;
    return true;
}

void Configuration::validate() const {
    if (n_ < 1) throw PreconditionFailed("configuration must hold at least one particle");
    if (!all_finite()) throw PreconditionFailed("configuration has non-finite coordinates");
}

std::array<double, 3> mean_field_force(const Configuration& z, const PairPotential& phi, std::size_t i) {
    if (i >= z.size()) throw OutOfRange("particle index out of range");
    if (phi.dim() != z.dim()) throw PreconditionFailed("potential/configuration dimension mismatch");
    const int d = z.dim();
    std::array<double, 3> f{};
    double r[3], g[3];
    for (std::size_t j = 0; j < z.size(); ++j) {
        if (j == i) continue;
        for (int a = 0; a < d; ++a) r[a] = z.x(i, a) - z.x(j, a);
        phi.pair_terms(r, g, nullptr, nullptr);
        for (int a = 0; a < d; ++a) f[a] -= g[a];
    }
    const double inv_n = 1.0 / static_cast<double>(z.size());
    for (int a = 0; a < d; ++a) f[a] *= inv_n;
    return f;
}

}  // namespace mfsc
