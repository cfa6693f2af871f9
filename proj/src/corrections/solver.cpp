#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mfsc/corrections.hpp"
#include "mfsc/errors.hpp"
#include "mfsc/nbody.hpp"

namespace mfsc {

GridFunction CorrectionStack::truncated_sum(double epsilon, int K, std::size_t slice) const {
    if (K > k_max) throw PreconditionFailed("stack holds fewer orders than requested");
    GridFunction out = at(0, slice);
    double p = 1.0;
    for (int k = 1; k <= K; ++k) {
        p *= epsilon;
        out.axpy(p, at(k, slice));
    }
    return out;
}

namespace {

// S^(k) = -(F[gamma_k]) d_v f0 + Theta^(k), with F[gamma] = -(phi' * rho_gamma).
GridFunction source(const CorrectionOperators& ops, int k, std::span<const GridFunction> stack,
                    const CorrectionOptions& opt) {
    GridFunction s = ops.assemble_source(k, stack.first(k));
    ops.add_field_times_derivative(ops.field(0, stack[k].density()), stack[0], 0, 1.0, s);
    if (opt.extra_source && opt.extra_source_order == k) s += *opt.extra_source;
    return s;
}

}  // namespace

CorrectionStack solve_stack(const std::vector<GridFunction>& initial, const PairPotential& phi, double t_final,
                            double dt, const CorrectionOptions& options) {
    if (initial.empty()) throw PreconditionFailed("empty initial stack");
    const GridSpec spec = initial.front().spec();
    for (const auto& f : initial) {
        if (!(f.spec() == spec)) throw PreconditionFailed("initial stack grids differ");
        if (!f.all_finite()) throw PreconditionFailed("non-finite initial data");
    }
    if (options.extra_source && !(options.extra_source->spec() == spec))
        throw PreconditionFailed("extra source grid differs");
    const int K = static_cast<int>(initial.size()) - 1;
    const auto plan = plan_steps(t_final, dt);
    VlasovStepper stepper(phi, spec, options.advection, options.tail_tolerance);
    CorrectionOperators ops(phi, spec, options.derivative);

    CorrectionStack out;
    out.spec = spec;
    out.k_max = K;
    out.dt = plan.dt;
    out.orders.assign(K + 1, {});
    auto record = [&](const std::vector<GridFunction>& st, double t) {
        out.times.push_back(t);
        for (int k = 0; k <= K; ++k) out.orders[k].push_back(st[k]);
    };

    std::vector<GridFunction> st = initial;
    record(st, 0.0);
    std::vector<GridFunction> src(K + 1);
    for (int k = 1; k <= K; ++k) src[k] = source(ops, k, st, options);

    const double h = 0.5 * plan.dt;
    for (long n = 1; n <= plan.steps; ++n) {
        const auto F = stepper.step(st[0], plan.dt);
        if (!st[0].all_finite()) throw Divergence("non-finite f^(0)", n);
        for (int k = 1; k <= K; ++k) {
            st[k].axpy(h, src[k]);
            stepper.transport(st[k], F, plan.dt);
        }
        for (int k = 1; k <= K; ++k) {
            src[k] = source(ops, k, st, options);
            st[k].axpy(h, src[k]);
            if (!st[k].all_finite()) throw Divergence("non-finite f^(" + std::to_string(k) + ")", n);
        }
        const double t = n == plan.steps ? t_final : n * plan.dt;
        if (n == plan.steps || (options.record_stride > 0 && n % options.record_stride == 0)) record(st, t);
    }
    return out;
}

CorrectionTrajectory solve_correction(int k, const CorrectionStack& lower, const GridFunction& f0k,
                                      const PairPotential& phi, double t_final, double dt,
                                      const CorrectionOptions& options) {
    if (k < 1) throw PreconditionFailed("corrections start at order 1");
    if (lower.k_max < k - 1 || lower.times.empty()) throw PreconditionFailed("lower-order data missing");
    std::vector<GridFunction> initial;
    for (int l = 0; l < k; ++l) initial.push_back(lower.at(l, 0));
    initial.push_back(f0k);
    auto stack = solve_stack(initial, phi, t_final, dt, options);
    return {std::move(stack.times), std::move(stack.orders[k])};
}

void write_stack(const std::string& dir, const CorrectionStack& stack) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["k_max"] = stack.k_max;
    manifest["dt"] = stack.dt;
    manifest["times"] = stack.times;
    manifest["grid"] = {{"x_min", stack.spec.x_min}, {"x_max", stack.spec.x_max}, {"v_min", stack.spec.v_min},
                        {"v_max", stack.spec.v_max}, {"nx", stack.spec.nx},       {"nv", stack.spec.nv}};
    auto& orders = manifest["orders"];
    for (int k = 0; k <= stack.k_max; ++k) {
        nlohmann::json files = nlohmann::json::array();
        for (std::size_t s = 0; s < stack.times.size(); ++s) {
            const std::string name = "order" + std::to_string(k) + "_slice" + std::to_string(s) + ".bin";
            write_snapshot((fs::path(dir) / name).string(), stack.at(k, s), stack.times[s]);
            files.push_back(name);
        }
        orders.push_back({{"order", k}, {"files", files}});
    }
    std::ofstream os(fs::path(dir) / "manifest.json");
    os << manifest.dump(2) << '\n';
    if (!os) throw Error("cannot write stack manifest in " + dir);
}

}  // namespace mfsc
