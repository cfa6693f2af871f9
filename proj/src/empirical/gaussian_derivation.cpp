#include <cmath>
#include <functional>

#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

double test_empirical(const TestFunction& u, const Configuration& z) {
    if (u.phase_dim() != z.phase_dim()) throw PreconditionFailed("test function / configuration dimension mismatch");
    double s = 0.0;
    for (std::size_t l = 0; l < z.size(); ++l) s += u.value(z.point(l));
    return s / static_cast<double>(z.size());
}

double normalized_gaussian_moment(int n) {
    if (n < 0) throw PreconditionFailed("negative moment order");
    if (n % 2) return 0.0;
    double m = 1.0;
    for (int k = n - 1; k > 0; k -= 2) m *= k;
    return m / std::pow(2.0, n / 2);
}

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

std::vector<int> GaussianDerivation::Term::alphas() const {
    std::vector<int> out;
    for (int a = 0; a < 6; ++a)
        for (int c = 0; c < counts[a]; ++c) out.push_back(a);
    return out;
}

double GaussianDerivation::coefficient(std::span<const int> sequence) const {
    if (static_cast<int>(sequence.size()) != order) throw PreconditionFailed("sequence length differs from order");
    int counts[6] = {0, 0, 0, 0, 0, 0};
    for (int a : sequence) {
        if (a < 0 || a >= phase_dim) throw OutOfRange("derivation index out of range");
        ++counts[a];
    }
    double c = 1.0 / factorial(order);
    for (int a = 0; a < phase_dim; ++a) {
        if (counts[a] % 2) return 0.0;
        c *= normalized_gaussian_moment(counts[a]);
    }
    return c;
}

GaussianDerivation gaussian_coefficients(int order, int d) {
    if (order < 0) throw PreconditionFailed("negative derivation order");
    if (d < 1 || d > 3) throw ConfigError("dimension must be 1, 2 or 3");
    GaussianDerivation g;
    g.order = order;
    g.phase_dim = 2 * d;
    const int n = 2 * d;
    std::array<int, 6> counts{};
    // Enumerate even multiplicity patterns summing to order.
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == n - 1) {
            if (left % 2) return;
            counts[axis] = left;
            double w = 1.0;  // orderings * C_G = prod m(n_a)/n_a!
            for (int a = 0; a < n; ++a) w *= normalized_gaussian_moment(counts[a]) / factorial(counts[a]);
            g.terms.push_back({counts, w});
            counts[axis] = 0;
            return;
        }
        for (int c = 0; c <= left; c += 2) {
            counts[axis] = c;
            rec(axis + 1, left - c);
        }
        counts[axis] = 0;
    };
    rec(0, order);
    return g;
}

TestFunctionPtr apply_DG_to_test(const TestFunctionPtr& u, int k) {
    if (k < 0) throw PreconditionFailed("negative derivation order");
    if (k == 0) return u;
    if (2 * k > u->max_order())
        throw UnsupportedOrder("D_G^" + std::to_string(2 * k) + " needs derivatives of order " +
                               std::to_string(2 * k) + " from " + u->name());
    const auto g = gaussian_coefficients(2 * k, u->phase_dim() / 2);
    std::vector<DerivedTestFunction::Term> terms;
    for (const auto& t : g.terms) terms.push_back({t.alphas(), t.weight});
    return std::make_shared<DerivedTestFunction>(u, std::move(terms), 2 * k,
                                                 "DG" + std::to_string(2 * k) + "[" + u->name() + "]");
}

}  // namespace mfsc
