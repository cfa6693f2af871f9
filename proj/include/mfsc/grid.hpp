#pragma once

#include <cstddef>
#include <vector>

namespace mfsc {

// Uniform phase-space grid for d=1. Both axes use the periodic node
// convention: node i sits at min + i*h with h = (max - min)/n, and
// integrals are plain node sums times the cell area.
struct GridSpec {
    double x_min = -8.0, x_max = 8.0;
    double v_min = -8.0, v_max = 8.0;
    int nx = 256, nv = 256;

    double dx() const { return (x_max - x_min) / nx; }
    double dv() const { return (v_max - v_min) / nv; }
    double x(int i) const { return x_min + i * dx(); }
    double v(int j) const { return v_min + j * dv(); }
    double cell_area() const { return dx() * dv(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * nv; }

    // Throws ConfigError for node counts < 8 or empty extents.
    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

// Row-major over x: value(i, j) = values[i*nv + j], v is contiguous.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const GridSpec& spec, double fill = 0.0);
    GridFunction(const GridSpec& spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    double& operator()(int i, int j) { return values_[static_cast<std::size_t>(i) * spec_.nv + j]; }
    double operator()(int i, int j) const { return values_[static_cast<std::size_t>(i) * spec_.nv + j]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double mass() const;
    double l1_norm() const;
    double max_abs() const;
    double min_value() const;
    bool all_finite() const;
    // rho(x_i) = sum_j f(x_i, v_j) dv.
    std::vector<double> density() const;

    // Throws PreconditionFailed if non-finite, or if declared_mass is given
    // and the grid mass differs from it by more than 1e-6.
    void validate_density(double declared_mass) const;

    GridFunction& operator+=(const GridFunction& o);
    GridFunction& operator-=(const GridFunction& o);
    GridFunction& operator*=(double s);
    // this += s * o
    void axpy(double s, const GridFunction& o);

private:
    GridSpec spec_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

// Cubic Lagrange interpolation of a grid function at an off-grid point,
// periodic in both axes.
double interpolate_bicubic(const GridFunction& f, double x, double v);

}  // namespace mfsc
