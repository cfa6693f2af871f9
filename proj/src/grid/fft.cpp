#include <fftw3.h>

#include <mutex>

#include "mfsc/errors.hpp"
#include "mfsc/grid_ops.hpp"

namespace mfsc {

namespace {

// The FFTW planner is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
    if (n < 2) throw PreconditionFailed("FFT length must be at least 2");
    std::lock_guard lock(planner_mutex());
    real_ = fftw_alloc_real(n);
    auto* spec = fftw_alloc_complex(n / 2 + 1);
    spec_ = spec;
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw Error("FFTW plan creation failed");
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(real_);
    fftw_free(spec_);
}

void RealFft::forward(const double* in, std::size_t stride, cplx* out) {
    for (int k = 0; k < n_; ++k) real_[k] = in[k * stride];
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const auto* s = static_cast<const fftw_complex*>(spec_);
    for (int m = 0; m <= n_ / 2; ++m) out[m] = {s[m][0], s[m][1]};
}

void RealFft::inverse(const cplx* in, double* out, std::size_t stride) {
    auto* s = static_cast<fftw_complex*>(spec_);
    for (int m = 0; m <= n_ / 2; ++m) {
        s[m][0] = in[m].real();
        s[m][1] = in[m].imag();
    }
    fftw_execute(static_cast<fftw_plan>(bwd_));
    const double inv = 1.0 / n_;
    for (int k = 0; k < n_; ++k) out[k * stride] = real_[k] * inv;
}

}  // namespace mfsc
