#include "mfsc/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mfsc/errors.hpp"

namespace mfsc {

void GridSpec::validate() const {
    if (nx < 8 || nv < 8) throw ConfigError("grid node counts must be at least 8");
    if (!(x_max > x_min) || !(v_max > v_min)) throw ConfigError("grid extents must be non-empty");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(v_min) || !std::isfinite(v_max))
        throw ConfigError("grid extents must be finite");
}

GridFunction::GridFunction(const GridSpec& spec, double fill) : spec_(spec), values_(spec.size(), fill) {
    spec_.validate();
}

GridFunction::GridFunction(const GridSpec& spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.size()) throw PreconditionFailed("grid value array has the wrong size");
}

double GridFunction::mass() const {
    double s = 0.0;
    for (double f : values_) s += f;
    return s * spec_.cell_area();
}

double GridFunction::l1_norm() const {
    double s = 0.0;
    for (double f : values_) s += std::abs(f);
    return s * spec_.cell_area();
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double f : values_) m = std::max(m, std::abs(f));
    return m;
}

double GridFunction::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double f) { return std::isfinite(f); });
}

std::vector<double> GridFunction::density() const {
    std::vector<double> rho(spec_.nx, 0.0);
    const double dv = spec_.dv();
    for (int i = 0; i < spec_.nx; ++i) {
        double s = 0.0;
        const double* row = values_.data() + static_cast<std::size_t>(i) * spec_.nv;
        for (int j = 0; j < spec_.nv; ++j) s += row[j];
        rho[i] = s * dv;
    }
    return rho;
}

void GridFunction::validate_density(double declared_mass) const {
    if (!all_finite()) throw PreconditionFailed("grid function has non-finite values");
    if (std::abs(mass() - declared_mass) > 1e-6)
        throw PreconditionFailed("grid mass " + std::to_string(mass()) + " differs from declared mass " +
                                 std::to_string(declared_mass));
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
    axpy(1.0, o);
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
    axpy(-1.0, o);
    return *this;
}

GridFunction& GridFunction::operator*=(double s) {
    for (double& f : values_) f *= s;
    return *this;
}

void GridFunction::axpy(double s, const GridFunction& o) {
    if (!(o.spec_ == spec_)) throw PreconditionFailed("grid spec mismatch");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

namespace {

void cubic_weights(double t, double w[4]) {
    // Nodes at -1, 0, 1, 2; t in [0, 1).
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

double interpolate_bicubic(const GridFunction& f, double x, double v) {
    const GridSpec& g = f.spec();
    const double px = (x - g.x_min) / g.dx();
    const double pv = (v - g.v_min) / g.dv();
    const double fx = std::floor(px), fv = std::floor(pv);
    double wx[4], wv[4];
    cubic_weights(px - fx, wx);
    cubic_weights(pv - fv, wv);
    const int ix = static_cast<int>(fx), iv = static_cast<int>(fv);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        const int i = wrap(ix - 1 + a, g.nx);
        double row = 0.0;
        for (int b = 0; b < 4; ++b) row += wv[b] * f(i, wrap(iv - 1 + b, g.nv));
        s += wx[a] * row;
    }
    return s;
}

}  // namespace mfsc
