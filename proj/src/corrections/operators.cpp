#include <cmath>

#include "mfsc/corrections.hpp"
#include "mfsc/errors.hpp"

namespace mfsc {

double tn_coefficient(int n) {
    if (n < 0) throw PreconditionFailed("negative operator order");
    double c = 1.0;
    for (int k = 2; k <= n + 1; ++k) c *= k;
    return 1.0 / (std::ldexp(1.0, n) * c);
}

CorrectionOperators::CorrectionOperators(const PairPotential& phi, const GridSpec& spec, VelocityDerivative method)
    : phi_(phi), spec_(spec), method_(method) {
    spec.validate();
    for (int n = 0; n + 1 <= phi.max_order(); ++n) kernels_.emplace_back(phi, spec, n + 1);
}

std::vector<double> CorrectionOperators::field(int n, std::span<const double> rho) const {
    if (n < 0 || n >= static_cast<int>(kernels_.size()))
        throw UnsupportedOrder("T^(" + std::to_string(n) + ") needs potential derivatives of order " +
                               std::to_string(n + 1) + " from " + phi_.name());
    return kernels_[n].apply(rho);
}

void CorrectionOperators::add_field_times_derivative(std::span<const double> fld, const GridFunction& gamma, int n,
                                                     double scale, GridFunction& out) const {
    const auto d = v_derivative(gamma, n + 1, method_);
    for (int i = 0; i < spec_.nx; ++i) {
        const double a = scale * fld[i];
        if (a == 0.0) continue;
        for (int j = 0; j < spec_.nv; ++j) out(i, j) += a * d(i, j);
    }
}

GridFunction CorrectionOperators::apply_Tn(int n, const GridFunction& h, const GridFunction& gamma) const {
    if (!(h.spec() == spec_) || !(gamma.spec() == spec_)) throw PreconditionFailed("grid mismatch");
    GridFunction out(spec_);
    if (n % 2) return out;
    const double sign = (n / 2) % 2 ? -1.0 : 1.0;
    add_field_times_derivative(field(n, h.density()), gamma, n, sign * tn_coefficient(n), out);
    return out;
}

std::vector<CorrectionOperators::SourceTerm> CorrectionOperators::source_terms(int k) {
    std::vector<SourceTerm> terms;
    for (int s = 0; s <= k; s += 2)
        for (int r = 0; r < k && r <= k - s; ++r) {
            const int l = k - s - r;
            if (l < k) terms.push_back({s, r, l});
        }
    return terms;
}

GridFunction CorrectionOperators::assemble_source(int k, std::span<const GridFunction> stack) const {
    if (k < 0) throw PreconditionFailed("negative correction order");
    if (static_cast<int>(stack.size()) < k) throw PreconditionFailed("source needs all lower orders");
    GridFunction out(spec_);
    for (const auto& t : source_terms(k)) {
        const double sign = (t.s / 2) % 2 ? -1.0 : 1.0;
        add_field_times_derivative(field(t.s, stack[t.r].density()), stack[t.l], t.s,
                                   sign * tn_coefficient(t.s), out);
    }
    return out;
}

GridFunction apply_Tn(int n, const GridFunction& h, const GridFunction& gamma, const PairPotential& phi,
                      VelocityDerivative method) {
    if (n % 2) return GridFunction(gamma.spec());
    return CorrectionOperators(phi, gamma.spec(), method).apply_Tn(n, h, gamma);
}

GridFunction assemble_source(int k, std::span<const GridFunction> stack, const PairPotential& phi,
                             VelocityDerivative method) {
    if (stack.empty()) throw PreconditionFailed("source needs all lower orders");
    return CorrectionOperators(phi, stack.front().spec(), method).assemble_source(k, stack);
}

}  // namespace mfsc
