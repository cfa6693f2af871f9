#include "mfsc/potential.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "mfsc/detail/hermite.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

PairPotential::PairPotential(int dim, int max_order) : dim_(dim), max_order_(max_order) {
    if (dim < 1 || dim > 3) throw ConfigError("potential dimension must be 1, 2 or 3");
    if (max_order < 3) throw ConfigError("potential max order must be at least 3");
}

double PairPotential::derivative(std::span<const int> multi_index, std::span<const double> x) const {
    if (static_cast<int>(multi_index.size()) != dim_ || static_cast<int>(x.size()) != dim_)
        throw PreconditionFailed("multi-index / point dimension mismatch");
    int order = 0;
    for (int m : multi_index) {
        if (m < 0) throw PreconditionFailed("negative derivative count");
        order += m;
    }
    if (order > max_order_)
        throw UnsupportedOrder("potential derivative of order " + std::to_string(order) + " exceeds max order " +
                               std::to_string(max_order_));
    return eval(multi_index, x);
}

double PairPotential::derivative_1d(int m, double x) const {
    if (dim_ != 1) throw PreconditionFailed("derivative_1d requires a d=1 potential");
    const int mi[1] = {m};
    const double xs[1] = {x};
    return derivative(mi, xs);
}

double PairPotential::bound(int order) const {
    if (order < 0 || order > max_order_) throw UnsupportedOrder("no bound for order " + std::to_string(order));
    return eval_bound(order);
}

void PairPotential::pair_terms(const double* r, double* grad, double* hess, double* third) const {
    const int d = dim_;
    std::span<const double> x(r, d);
    std::array<int, 3> mi{};
    if (grad) {
        for (int a = 0; a < d; ++a) {
            mi.fill(0);
            mi[a] = 1;
            grad[a] = eval(std::span<const int>(mi.data(), d), x);
        }
    }
    if (hess) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                mi.fill(0);
                ++mi[a];
                ++mi[b];
                hess[a * d + b] = eval(std::span<const int>(mi.data(), d), x);
            }
    }
    if (third) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c) {
                    mi.fill(0);
                    ++mi[a];
                    ++mi[b];
                    ++mi[c];
                    third[(a * d + b) * d + c] = eval(std::span<const int>(mi.data(), d), x);
                }
    }
}

GaussianPotential::GaussianPotential(int dim, double amplitude, double sigma, int max_order)
    : PairPotential(dim, max_order), amplitude_(amplitude), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(amplitude)) throw ConfigError("gaussian potential needs sigma > 0");
}

double GaussianPotential::eval(std::span<const int> multi_index, std::span<const double> x) const {
    double v = amplitude_;
    for (std::size_t a = 0; a < x.size(); ++a)
        v *= detail::gaussian_factor_derivative(multi_index[a], x[a], 0.0, sigma_);
    return v;
}

double GaussianPotential::eval_bound(int order) const {
    return std::abs(amplitude_) * std::pow(sigma_, -order) * std::pow(detail::kCramer, dim()) *
           detail::sqrt_factorial(order);
}

void GaussianPotential::pair_terms(const double* r, double* grad, double* hess, double* third) const {
    const int d = dim();
    // f[a][m]: m-th derivative of the axis-a factor.
    double f[3][4];
    for (int a = 0; a < d; ++a) {
        const double y = r[a] / sigma_;
        const double e = std::exp(-0.5 * y * y);
        const double is = 1.0 / sigma_;
        f[a][0] = e;
        f[a][1] = -is * y * e;
        f[a][2] = is * is * (y * y - 1.0) * e;
        f[a][3] = -is * is * is * (y * y * y - 3.0 * y) * e;
    }
    auto prod = [&](int ma, int mb, int mc) {
        const int m[3] = {ma, mb, mc};
        double p = amplitude_;
        for (int a = 0; a < d; ++a) p *= f[a][m[a]];
        return p;
    };
    int cnt[3];
    if (grad) {
        for (int a = 0; a < d; ++a) {
            cnt[0] = cnt[1] = cnt[2] = 0;
            ++cnt[a];
            grad[a] = prod(cnt[0], cnt[1], cnt[2]);
        }
    }
    if (hess) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                cnt[0] = cnt[1] = cnt[2] = 0;
                ++cnt[a];
                ++cnt[b];
                hess[a * d + b] = prod(cnt[0], cnt[1], cnt[2]);
            }
    }
    if (third) {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c) {
                    cnt[0] = cnt[1] = cnt[2] = 0;
                    ++cnt[a];
                    ++cnt[b];
                    ++cnt[c];
                    third[(a * d + b) * d + c] = prod(cnt[0], cnt[1], cnt[2]);
                }
    }
}

void ZeroPotential::pair_terms(const double*, double* grad, double* hess, double* third) const {
    const int d = dim();
    if (grad) std::fill(grad, grad + d, 0.0);
    if (hess) std::fill(hess, hess + d * d, 0.0);
    if (third) std::fill(third, third + d * d * d, 0.0);
}

}  // namespace mfsc
