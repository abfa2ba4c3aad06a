#pragma once
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>

namespace nlfkpp {

// Bracketed scalar root: bisection refined by Newton, residual tolerance.
// The Newton step is taken only while it stays inside the current bracket;
// otherwise the step falls back to bisection, so convergence is guaranteed.
template <class F, class DF>
double bisect_newton(F f, DF df, double a, double b, double tol = 1e-12, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("bisect_newton: endpoints do not bracket a root");
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x);
        if (std::abs(fx) < tol) return x;
        if (fa * fx < 0.0) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : a - 1.0;
        if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
        x = xn;
        if (b - a < 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b)))
            return 0.5 * (a + b);
    }
    return x;
}

// Same interface when only f is available: secant-flavoured bisection.
template <class F>
double bisect(F f, double a, double b, double tol = 1e-14, int max_iter = 400) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::invalid_argument("bisect: endpoints do not bracket a root");
    for (int it = 0; it < max_iter; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (std::abs(fm) < tol || 0.5 * (b - a) < std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b)))
            return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

// Newton iteration in the complex plane.
template <class F, class DF>
std::complex<double> complex_newton(F f, DF df, std::complex<double> z0, double tol = 1e-12,
                                    int max_iter = 200) {
    std::complex<double> z = z0;
    for (int it = 0; it < max_iter; ++it) {
        std::complex<double> fz = f(z);
        if (std::abs(fz) < tol) return z;
        std::complex<double> d = df(z);
        if (std::abs(d) == 0.0) break;
        z -= fz / d;
    }
    if (std::abs(f(z)) < tol) return z;
    throw std::runtime_error("complex_newton: no convergence");
}

namespace detail {
template <class F>
double simpson_rec(F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature.
template <class F>
double adaptive_simpson(F f, double a, double b, double tol = 1e-12, int max_depth = 40) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Least-squares slope/intercept of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::runtime_error("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    return out;
}

}  // namespace nlfkpp
