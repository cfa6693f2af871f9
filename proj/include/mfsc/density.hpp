#pragma once

#include <span>
#include <vector>

#include "mfsc/grid.hpp"

namespace mfsc {

// Smooth probability density on R^{2d} with partial derivatives addressed
// by per-axis counts.
class SmoothDensity {
public:
    explicit SmoothDensity(int phase_dim) : phase_dim_(phase_dim) {}
    virtual ~SmoothDensity() = default;
    int phase_dim() const { return phase_dim_; }
    virtual int max_order() const = 0;
    virtual double partial(std::span<const double> z, std::span<const int> counts) const = 0;
    double value(std::span<const double> z) const;

    // Samples the density (d=1) at the grid nodes.
    GridFunction sample(const GridSpec& spec) const;

private:
    int phase_dim_;
};

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> mean;    // length 2d
    std::vector<double> stddev;  // length 2d, diagonal covariance
};

class GaussianMixture final : public SmoothDensity {
public:
    explicit GaussianMixture(std::vector<MixtureComponent> components);
    // Isotropic Gaussian with the given per-axis variance, centred at 0.
    static GaussianMixture standard(int d, double variance = 1.0);

    int max_order() const override { return 64; }
    double partial(std::span<const double> z, std::span<const int> counts) const override;

    const std::vector<MixtureComponent>& components() const { return components_; }
    int dim() const { return phase_dim() / 2; }
    std::vector<double> mean() const;
    // Convolution with an isotropic centred Gaussian of the given per-axis variance.
    GaussianMixture smoothed(double added_variance) const;
    // Smallest per-axis standard deviation over all components.
    double min_stddev() const;

private:
    std::vector<MixtureComponent> components_;
};

}  // namespace mfsc
