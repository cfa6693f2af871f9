#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mfsc/grid.hpp"

namespace mfsc {

using cplx = std::complex<double>;

// 1-D real FFT of fixed length over strided lines. Each instance owns its
// plans and work buffers; use one instance per thread.
class RealFft {
public:
    explicit RealFft(int n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    int size() const { return n_; }
    int spectrum_size() const { return n_ / 2 + 1; }

    // out[m] = sum_k in[k*stride] exp(-2 pi i m k / n), m = 0..n/2.
    void forward(const double* in, std::size_t stride, cplx* out);
    // Inverse including the 1/n factor.
    void inverse(const cplx* in, double* out, std::size_t stride);

private:
    int n_;
    double* real_;
    void* spec_;
    void* fwd_;
    void* bwd_;
};

// Angular wavenumber of mode m on a periodic axis of length L.
inline double wavenumber(int m, double length) { return 2.0 * 3.14159265358979323846 * m / length; }

// Constant shift of a periodic line: out(i) = in(i - shift) for a shift in
// cells. Cubic Lagrange weights sum to one, so the line sum is preserved.
void shift_line_cubic(double* data, int n, std::size_t stride, double shift, std::vector<double>& work);

// shift_line_cubic applied to every column of a row-major rows x cols block,
// column j shifted by shifts[j] cells along the row index.
void shift_columns_cubic(double* data, int rows, int cols, std::span<const double> shifts, std::vector<double>& work);

// Same shift applied exactly to the trigonometric interpolant.
void shift_line_spectral(RealFft& fft, double* data, std::size_t stride, double shift, std::vector<cplx>& work);

// Finite-difference weights for the m-th derivative at offset 0 from the
// given stencil offsets (in units of h), by Fornberg's recursion.
std::vector<double> fd_weights(int m, const std::vector<double>& offsets);

// m-th derivative of a periodic line by fourth-order centered differences.
void fd_derivative_line(const double* in, int n, std::size_t stride, int m, double h, double* out,
                        std::size_t out_stride);

// m-th derivative of a periodic line by spectral differentiation (Nyquist
// mode dropped for odd m).
void spectral_derivative_line(RealFft& fft, const double* in, std::size_t stride, int m, double length, double* out,
                              std::size_t out_stride, std::vector<cplx>& work);

enum class VelocityDerivative { FiniteDifference, Spectral };

// d^m f / dv^m over the whole grid.
GridFunction v_derivative(const GridFunction& f, int m, VelocityDerivative method);

// Binary snapshot: magic "MFSCGRID", u32 version, u32 nx, u32 nv, then
// x_min, x_max, v_min, v_max, t as doubles and nx*nv row-major doubles.
struct Snapshot {
    GridFunction f;
    double t = 0.0;
};

void write_snapshot(const std::string& path, const GridFunction& f, double t);
Snapshot read_snapshot(const std::string& path);

}  // namespace mfsc
