#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfsc/configuration.hpp"
#include "mfsc/grid.hpp"
#include "mfsc/test_functions.hpp"

namespace mfsc {

// Weighted points in R^D, coordinates point-major.
struct PointCloud {
    int dim = 2;
    std::vector<double> coords;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    const double* point(std::size_t i) const { return coords.data() + i * dim; }
    // Positive weights summing to 1 within 1e-12, else PreconditionFailed.
    void validate() const;
    bool uniform() const;

    static PointCloud from_configuration(const Configuration& z);
};

// min(|a - b|, clamp).
double clamped_distance(const double* a, const double* b, int dim, double clamp = 1.0);

// Exact min-cost transportation between supplies and demands (both summing
// to the same total) by the primal network simplex on the bipartite graph,
// with an artificial root, block-search pricing and the strongly feasible
// leaving-arc rule. cost is row-major supplies x demands. Returns the
// optimal total cost.
double transport_cost(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost);

struct WassersteinOptions {
    std::size_t exact_cap = 1024;
    double clamp = 1.0;
};

// W1 for the ground cost min(|z - z'|, clamp). Throws CapacityExceeded above the cap.
double wasserstein_bounded(const PointCloud& p, const PointCloud& q, const WassersteinOptions& options = {});

// Average over random unit directions of the sorted-quantile 1-D coupling
// cost with the same clamped metric; deterministic in the seed.
double sliced_wasserstein(const PointCloud& p, const PointCloud& q, int n_directions, std::uint64_t seed,
                          double clamp = 1.0);

// Deterministic quantization of a (d=1) grid density: cells are aggregated
// in square blocks until at most cap blocks remain; each nonzero block
// becomes a point at its centre carrying its mass (negative undershoot
// clamped to zero), renormalized to 1.
PointCloud quantize(const GridFunction& f, std::size_t cap = 1024);

enum class GridDistanceMode { TestBank, Quantized };

// TestBank: max over the bank of |<u, P> - int u f|.
// Quantized: W1 between quantize(f) and P (sliced with 64 directions when
// either side exceeds the exact cap).
double grid_vs_cloud_distance(const GridFunction& f, const PointCloud& p, GridDistanceMode mode,
                              const TestBank* bank = nullptr, const WassersteinOptions& options = {});

struct DobrushinFit {
    double C = 0.0;
    std::size_t pairs_used = 0;
    std::vector<std::string> warnings;
    std::vector<std::string> violations;
};

// distances[p][k] = W(nu^1_t, nu^2_t) at times[k] (times[0] = 0) for pair p.
// C is the largest (log W(t) - log W(0)) / t; pairs with W(0) <= degenerate_tol
// are excluded with a warning and flagged if they separate later.
DobrushinFit dobrushin_fit(const std::vector<std::vector<double>>& distances, std::span<const double> times,
                           double degenerate_tol = 1e-12);

}  // namespace mfsc
