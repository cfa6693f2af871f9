#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mfsc/potential.hpp"

namespace mfsc {

// z = (x, v) with x, v in R^d; coordinates are stored as z[0..2d).
struct PhasePoint {
    int d = 1;
    std::array<double, 6> z{};

    PhasePoint() = default;
    explicit PhasePoint(int dim) : d(dim) {}
    PhasePoint(double x, double v) : d(1) {
        z[0] = x;
        z[1] = v;
    }
    double x(int a) const { return z[a]; }
    double v(int a) const { return z[d + a]; }
    int phase_dim() const { return 2 * d; }
    std::span<const double> coords() const { return {z.data(), static_cast<std::size_t>(2 * d)}; }
    std::span<double> coords() { return {z.data(), static_cast<std::size_t>(2 * d)}; }
};

// N phase points stored contiguously as particle-major [x(d), v(d)] blocks.
class Configuration {
public:
    Configuration() = default;
    Configuration(int dim, std::size_t n);
    Configuration(int dim, std::vector<double> data);

    int dim() const { return d_; }
    int phase_dim() const { return 2 * d_; }
    std::size_t size() const { return n_; }

    double& z(std::size_t i, int alpha) { return data_[i * 2 * d_ + alpha]; }
    double z(std::size_t i, int alpha) const { return data_[i * 2 * d_ + alpha]; }
    double& x(std::size_t i, int a) { return z(i, a); }
    double x(std::size_t i, int a) const { return z(i, a); }
    double& v(std::size_t i, int a) { return z(i, d_ + a); }
    double v(std::size_t i, int a) const { return z(i, d_ + a); }

    std::span<const double> point(std::size_t i) const {
        return {data_.data() + i * 2 * d_, static_cast<std::size_t>(2 * d_)};
    }
    PhasePoint phase_point(std::size_t i) const;
    void set_point(std::size_t i, const PhasePoint& p);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;
    // Throws PreconditionFailed unless N >= 1 and every coordinate is finite.
    void validate() const;

private:
    int d_ = 1;
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// -(1/N) sum_{j != i} grad phi(x_i - x_j).
std::array<double, 3> mean_field_force(const Configuration& z, const PairPotential& phi, std::size_t i);

}  // namespace mfsc
