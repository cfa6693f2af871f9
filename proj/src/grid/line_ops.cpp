#include <cmath>
#include <memory>

#include "mfsc/errors.hpp"
#include "mfsc/grid_ops.hpp"

namespace mfsc {

void shift_line_cubic(double* data, int n, std::size_t stride, double shift, std::vector<double>& work) {
    const double fl = std::floor(-shift);
    const double th = -shift - fl;
    const long base = static_cast<long>(fl);
    const double w0 = -th * (th - 1.0) * (th - 2.0) / 6.0;
    const double w1 = (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0;
    const double w2 = -(th + 1.0) * th * (th - 2.0) / 2.0;
    const double w3 = (th + 1.0) * th * (th - 1.0) / 6.0;
    // ext[m] = data[(m + base - 1) mod n], so out(i) reads ext[i..i+3].
    work.resize(n + 3);
    long k = ((base - 1) % n + n) % n;
    for (int m = 0; m < n + 3; ++m) {
        work[m] = data[k * stride];
        if (++k == n) k = 0;
    }
    for (int i = 0; i < n; ++i)
        data[i * stride] = w0 * work[i] + w1 * work[i + 1] + w2 * work[i + 2] + w3 * work[i + 3];
}

void shift_columns_cubic(double* data, int rows, int cols, std::span<const double> shifts, std::vector<double>& work) {
    // Row-sweep form of shift_line_cubic over every column of a row-major block.
    work.assign(data, data + static_cast<std::size_t>(rows) * cols);
    std::vector<long> base(cols);
    std::vector<double> w(4 * static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
        const double fl = std::floor(-shifts[j]);
        const double th = -shifts[j] - fl;
        base[j] = static_cast<long>(fl);
        w[4 * j + 0] = -th * (th - 1.0) * (th - 2.0) / 6.0;
        w[4 * j + 1] = (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0;
        w[4 * j + 2] = -(th + 1.0) * th * (th - 2.0) / 2.0;
        w[4 * j + 3] = (th + 1.0) * th * (th - 1.0) / 6.0;
    }
    for (int i = 0; i < rows; ++i) {
        double* out = data + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) {
            long r = i + base[j] - 1;
            r = ((r % rows) + rows) % rows;
            double s = 0.0;
            for (int m = 0; m < 4; ++m) {
                s += w[4 * j + m] * work[static_cast<std::size_t>(r) * cols + j];
                if (++r == rows) r = 0;
            }
            out[j] = s;
        }
    }
}

void shift_line_spectral(RealFft& fft, double* data, std::size_t stride, double shift, std::vector<cplx>& work) {
    const int n = fft.size();
    work.resize(fft.spectrum_size());
    fft.forward(data, stride, work.data());
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int m = 1; m < fft.spectrum_size(); ++m) {
        const double a = -two_pi * m * shift / n;
        if (2 * m == n)
            work[m] *= std::cos(a);  // keep the Nyquist mode real
        else
            work[m] *= cplx(std::cos(a), std::sin(a));
    }
    fft.inverse(work.data(), data, stride);
}

std::vector<double> fd_weights(int m, const std::vector<double>& offsets) {
    const int n = static_cast<int>(offsets.size());
    if (m < 0 || m >= n) throw PreconditionFailed("stencil too small for derivative order");
    // c[j][k]: weight of node j for derivative k.
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = offsets[0];
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = c[j][m];
    return w;
}

namespace {

// Centered stencil giving fourth-order accuracy for the m-th derivative.
const std::vector<double>& centered_weights(int m) {
    static const auto table = [] {
        std::vector<std::vector<double>> t(7);
        for (int order = 1; order <= 6; ++order) {
            const int half = (order + 1) / 2 + 1;
            std::vector<double> off;
            for (int k = -half; k <= half; ++k) off.push_back(k);
            t[order] = fd_weights(order, off);
        }
        return t;
    }();
    if (m < 1 || m > 6) throw UnsupportedOrder("finite-difference derivative order " + std::to_string(m));
    return table[m];
}

}  // namespace

void fd_derivative_line(const double* in, int n, std::size_t stride, int m, double h, double* out,
                        std::size_t out_stride) {
    const auto& w = centered_weights(m);
    const int half = static_cast<int>(w.size()) / 2;
    const double scale = 1.0 / std::pow(h, m);
    // Periodically padded copy: ext[i + half] = in[i].
    thread_local std::vector<double> ext;
    ext.resize(n + 2 * half);
    for (int i = -half; i < n + half; ++i) ext[i + half] = in[(((i % n) + n) % n) * stride];
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k <= 2 * half; ++k) s += w[k] * ext[i + k];
        out[i * out_stride] = s * scale;
    }
}

void spectral_derivative_line(RealFft& fft, const double* in, std::size_t stride, int m, double length, double* out,
                              std::size_t out_stride, std::vector<cplx>& work) {
    const int n = fft.size();
    work.resize(fft.spectrum_size());
    fft.forward(in, stride, work.data());
    for (int k = 0; k < fft.spectrum_size(); ++k) {
        if (2 * k == n && m % 2) {
            work[k] = 0.0;
            continue;
        }
        const cplx ik(0.0, wavenumber(k, length));
        work[k] *= std::pow(ik, m);
    }
    fft.inverse(work.data(), out, out_stride);
}

GridFunction v_derivative(const GridFunction& f, int m, VelocityDerivative method) {
    const auto& s = f.spec();
    GridFunction out(s);
    if (m == 0) return f;
    if (method == VelocityDerivative::FiniteDifference) {
        for (int i = 0; i < s.nx; ++i)
            fd_derivative_line(f.values().data() + static_cast<std::size_t>(i) * s.nv, s.nv, 1, m, s.dv(), &out(i, 0), 1);
    } else {
        RealFft fft(s.nv);
        std::vector<cplx> work;
        for (int i = 0; i < s.nx; ++i)
            spectral_derivative_line(fft, f.values().data() + static_cast<std::size_t>(i) * s.nv, 1, m, s.v_max - s.v_min, &out(i, 0), 1, work);
    }
    return out;
}

}  // namespace mfsc
