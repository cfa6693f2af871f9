#include "mfsc/corrections.hpp"
#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

std::vector<GridFunction> coherent_initial_stack(const SmoothDensity& g, int K, const GridSpec& spec,
                                                 InitialPolicy policy, double epsilon) {
    if (g.phase_dim() != 2) throw PreconditionFailed("grid stacks need a d=1 density");
    if (K < 0) throw PreconditionFailed("negative order");
    spec.validate();
    std::vector<GridFunction> out;
    if (policy == InitialPolicy::SmoothedLeading) {
        const auto* mix = dynamic_cast<const GaussianMixture*>(&g);
        if (!mix) throw PreconditionFailed("smoothed initial data need a Gaussian mixture");
        if (epsilon <= 0.0) throw PreconditionFailed("smoothed initial data need epsilon > 0");
        out.push_back(mix->smoothed(0.5 * epsilon).sample(spec));
        for (int k = 1; k <= K; ++k) out.emplace_back(spec);
        return out;
    }
    if (2 * K > g.max_order())
        throw UnsupportedOrder("initial stack of order " + std::to_string(K) + " needs density derivatives of order " +
                               std::to_string(2 * K));
    out.push_back(g.sample(spec));
    for (int k = 1; k <= K; ++k) {
        const auto dg = gaussian_coefficients(2 * k, 1);
        GridFunction f(spec);
        for (int i = 0; i < spec.nx; ++i)
            for (int j = 0; j < spec.nv; ++j) {
                const double z[2] = {spec.x(i), spec.v(j)};
                double s = 0.0;
                for (const auto& t : dg.terms) s += t.weight * g.partial(z, std::span<const int>(t.counts.data(), 2));
                f(i, j) = s;
            }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace mfsc
