#pragma once
#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace nlfkpp {

// Top hat kernel: indicator of [-1/2, 1/2]. The half width is a fixed model
// constant; all thresholds downstream assume unit kernel width.
struct TopHatKernel {
    static constexpr double half_width = 0.5;
};

namespace detail {

// Cumulative trapezium integral evaluated at an off-grid point p, assuming
// linear variation of u between nodes. C holds node cumulative sums.
inline double cumtrapz_at(const std::vector<double>& u, const std::vector<double>& C, double x0,
                          double h, double p) {
    double t = (p - x0) / h;
    int nmax = static_cast<int>(u.size()) - 1;
    if (t <= 0.0) return 0.0;
    if (t >= nmax) return C[static_cast<size_t>(nmax)];
    int j = static_cast<int>(std::floor(t));
    double d = (t - j) * h;
    double uj = u[static_cast<size_t>(j)];
    double ujp = u[static_cast<size_t>(j) + 1];
    double up = uj + (d / h) * (ujp - uj);
    return C[static_cast<size_t>(j)] + 0.5 * d * (uj + up);
}

inline std::vector<double> cumtrapz(const std::vector<double>& u, double h) {
    std::vector<double> C(u.size(), 0.0);
    for (size_t j = 1; j < u.size(); ++j) C[j] = C[j - 1] + 0.5 * h * (u[j - 1] + u[j]);
    return C;
}

// Thread-local FFTW r2c/c2r plans keyed by transform size. FFTW plan
// creation is not thread safe, so it is serialized; execution is per-thread.
struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    int n = 0;

    ~FftPlans() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real) fftw_free(real);
        if (cplx) fftw_free(cplx);
    }
};

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

inline FftPlans& fft_plans(int n) {
    thread_local std::map<int, FftPlans> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    FftPlans& p = cache[n];
    p.n = n;
    p.real = fftw_alloc_real(static_cast<size_t>(n));
    p.cplx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        p.fwd = fftw_plan_dft_r2c_1d(n, p.real, p.cplx, FFTW_ESTIMATE);
        p.bwd = fftw_plan_c2r_1d(n, p.cplx, p.real, FFTW_ESTIMATE);
    }
    if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
    return p;
}

}  // namespace detail

// (phi*u)(x_i) = int_{x_i-1/2}^{x_i+1/2} u dy on a non-periodic grid, with
// u taken as 0 outside the grid. Trapezium rule on interior nodes plus a
// linear-interpolation correction for the two fractional end cells.
inline std::vector<double> convolve_trapezium_values(const Grid1D& g, const std::vector<double>& u) {
    if (g.periodic) throw std::invalid_argument("convolve_trapezium: grid must be non-periodic");
    if (g.length() < 2.0 * TopHatKernel::half_width) throw std::invalid_argument("grid too small");
    const double h = g.dx;
    const std::vector<double> C = detail::cumtrapz(u, h);
    std::vector<double> out(u.size());
    for (int i = 0; i < g.n; ++i) {
        double xi = g.x(i);
        double right = detail::cumtrapz_at(u, C, g.x_left, h, xi + TopHatKernel::half_width);
        double left = detail::cumtrapz_at(u, C, g.x_left, h, xi - TopHatKernel::half_width);
        out[static_cast<size_t>(i)] = right - left;
    }
    return out;
}

inline Field convolve_trapezium(const Field& f, const TopHatKernel& = TopHatKernel{}) {
    if (f.representation != Representation::U)
        throw std::invalid_argument("convolve_trapezium: field must be in u representation");
    return Field(f.grid, convolve_trapezium_values(f.grid, f.values));
}

// Circular convolution with the top hat via FFT. The kernel symbol is the
// exact Fourier coefficient sin(pi m / L) * L / (pi m), with value 1 at m=0.
inline std::vector<double> convolve_periodic_values(const Grid1D& g, const std::vector<double>& u) {
    if (!g.periodic) throw std::invalid_argument("convolve_periodic: grid must be periodic");
    const double L = g.length();
    if (L < 2.0 * TopHatKernel::half_width) throw std::invalid_argument("period shorter than kernel support");
    const int n = g.n;
    detail::FftPlans& p = detail::fft_plans(n);
    for (int i = 0; i < n; ++i) p.real[i] = u[static_cast<size_t>(i)];
    fftw_execute(p.fwd);
    const double pi = M_PI;
    for (int m = 0; m <= n / 2; ++m) {
        double sym = (m == 0) ? 1.0 : std::sin(pi * m / L) * L / (pi * m);
        sym /= n;  // FFTW backward transform is unnormalized
        p.cplx[m][0] *= sym;
        p.cplx[m][1] *= sym;
    }
    fftw_execute(p.bwd);
    std::vector<double> out(u.size());
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = p.real[i];
    return out;
}

inline Field convolve_periodic(const Field& f, const TopHatKernel& = TopHatKernel{}) {
    if (f.representation == Representation::U)
        return Field(f.grid, convolve_periodic_values(f.grid, f.values));
    std::vector<double> expw(f.values.size());
    for (size_t i = 0; i < expw.size(); ++i) expw[i] = std::exp(f.values[i]);
    return Field(f.grid, convolve_periodic_values(f.grid, expw));
}

}  // namespace nlfkpp
