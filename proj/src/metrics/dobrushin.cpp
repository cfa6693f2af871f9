#include <cmath>
#include <limits>

#include "mfsc/errors.hpp"
#include "mfsc/metrics.hpp"

namespace mfsc {

DobrushinFit dobrushin_fit(const std::vector<std::vector<double>>& distances, std::span<const double> times,
                           double degenerate_tol) {
    if (times.size() < 2 || times[0] != 0.0) throw PreconditionFailed("times must start at 0 and contain t > 0");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw PreconditionFailed("times must be increasing");
    DobrushinFit fit;
    fit.C = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < distances.size(); ++p) {
        const auto& w = distances[p];
        if (w.size() != times.size()) throw PreconditionFailed("distance row does not match the time grid");
        if (!(w[0] > degenerate_tol)) {
            fit.warnings.push_back("pair " + std::to_string(p) + ": W(0) = " + std::to_string(w[0]) +
                                   " is degenerate, excluded");
            for (std::size_t k = 1; k < w.size(); ++k)
                if (w[k] > degenerate_tol) {
                    fit.violations.push_back("pair " + std::to_string(p) + ": W(0) = 0 but W(" +
                                             std::to_string(times[k]) + ") = " + std::to_string(w[k]));
                    break;
                }
            continue;
        }
        ++fit.pairs_used;
        const double l0 = std::log(w[0]);
        for (std::size_t k = 1; k < w.size(); ++k) {
            const double lw = w[k] > 0.0 ? std::log(w[k]) : -std::numeric_limits<double>::infinity();
            fit.C = std::max(fit.C, (lw - l0) / times[k]);
        }
    }
    if (fit.pairs_used == 0) throw PreconditionFailed("no pair with W(0) > 0");
    return fit;
}

}  // namespace mfsc
