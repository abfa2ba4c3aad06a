#pragma once
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "roots.hpp"

namespace nlfkpp {

// Delta(X) = -(2/X^3) sin(X/2). Its largest maximum Delta_1 is the critical
// diffusivity below which u = 1 is temporally unstable.
inline double delta_of(double X) {
    if (!(X > 0.0)) throw std::domain_error("delta_of: X must be > 0");
    return -2.0 / (X * X * X) * std::sin(0.5 * X);
}

inline double delta_deriv(double X) {
    // d/dX [-2 sin(X/2) X^-3] = -X^-4 (X cos(X/2) - 6 sin(X/2))
    return -(X * std::cos(0.5 * X) - 6.0 * std::sin(0.5 * X)) / (X * X * X * X);
}

// Turning points delta_n of Delta lie in (2 n pi, 2 (n+1) pi); they solve
// X cos(X/2) = 6 sin(X/2). Odd n give maxima, even n minima.
inline double delta_turning_point(int n) {
    if (n < 1) throw std::invalid_argument("delta_turning_point: n >= 1");
    const double pi = M_PI;
    auto f = [](double X) { return X * std::cos(0.5 * X) - 6.0 * std::sin(0.5 * X); };
    auto df = [](double X) {
        return std::cos(0.5 * X) - 0.5 * X * std::sin(0.5 * X) - 3.0 * std::cos(0.5 * X);
    };
    return bisect_newton(f, df, 2.0 * n * pi + 1e-9, 2.0 * (n + 1) * pi - 1e-9, 1e-13);
}

struct DeltaExtremum {
    int n = 0;         // turning point index
    double delta_n = 0.0;
    double value = 0.0;  // Delta(delta_n)
};

inline std::vector<DeltaExtremum> delta_extrema(int r_max) {
    if (r_max < 1) throw std::invalid_argument("delta_extrema: r_max >= 1");
    std::vector<DeltaExtremum> out;
    out.reserve(static_cast<size_t>(r_max));
    for (int n = 1; n <= r_max; ++n) {
        DeltaExtremum e;
        e.n = n;
        e.delta_n = delta_turning_point(n);
        e.value = delta_of(e.delta_n);
        out.push_back(e);
    }
    return out;
}

// Delta_r = Delta(delta_{2r-1}), the r-th local maximum.
inline double delta_max(int r) {
    if (r < 1) throw std::invalid_argument("delta_max: r >= 1");
    return delta_of(delta_turning_point(2 * r - 1));
}

inline double delta1() {
    static const double v = delta_max(1);
    return v;
}

// Growth relation about u = 0 for perturbations e^{ikx - wt}: negative w
// means temporal growth.
inline double w0(double k, double D) {
    if (!(D > 0.0)) throw std::domain_error("w0: D must be > 0");
    return D * k * k - 1.0;
}

// Growth relation about u = 1: w1 = D k^2 + (2/k) sin(k/2), with the k -> 0
// limit taken by series to avoid cancellation.
inline double w1(double k, double D) {
    if (!(D > 0.0)) throw std::domain_error("w1: D must be > 0");
    double a = std::abs(k);
    double sinc;  // (2/k) sin(k/2)
    if (a < 1e-4) {
        double k2 = k * k;
        sinc = 1.0 - k2 / 24.0 + k2 * k2 / 1920.0 - k2 * k2 * k2 / 322560.0;
    } else {
        sinc = 2.0 / k * std::sin(0.5 * k);
    }
    return D * k * k + sinc;
}

// Smallest positive root of tan(k/2) = k/2 in (2 pi, 3 pi): the D -> 0 limit
// of the most unstable wavenumber.
inline double k0_root() {
    auto f = [](double k) { return 2.0 * std::sin(0.5 * k) - k * std::cos(0.5 * k); };
    auto df = [](double k) { return 0.5 * k * std::sin(0.5 * k); };
    static const double v = bisect_newton(f, df, 2.0 * M_PI + 1e-9, 3.0 * M_PI - 1e-9, 1e-13);
    return v;
}

struct MostUnstable {
    double k_m = 0.0;
    double w1_at_km = 0.0;
};

// k_m = smallest positive root of 2 D k^3 - 2 sin(k/2) + k cos(k/2) = 0,
// which lies in (2 pi, 3 pi) for all 0 < D < Delta_1.
inline MostUnstable most_unstable_k(double D) {
    if (!(D > 0.0)) throw std::domain_error("most_unstable_k: D must be > 0");
    if (D >= delta1()) throw std::domain_error("state u=1 stable");
    auto f = [D](double k) { return 2.0 * D * k * k * k - 2.0 * std::sin(0.5 * k) + k * std::cos(0.5 * k); };
    auto df = [D](double k) { return 6.0 * D * k * k - 0.5 * k * std::sin(0.5 * k); };
    MostUnstable out;
    out.k_m = bisect_newton(f, df, 2.0 * M_PI + 1e-9, 3.0 * M_PI - 1e-9, 1e-13);
    out.w1_at_km = w1(out.k_m, D);
    return out;
}

struct TongueBoundaries {
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
};

// The two roots of Delta(2 pi / lambda) = D bracketing 2 pi / delta_{2i-1};
// at D = 0 they reduce to the tongue base points 1/(2i) and 1/(2i-1).
inline TongueBoundaries tongue_boundaries(int i, double D) {
    if (i < 1) throw std::invalid_argument("tongue_boundaries: i >= 1");
    if (D < 0.0) throw std::domain_error("tongue_boundaries: D >= 0");
    const double Di = delta_max(i);
    if (D >= Di) throw std::domain_error("tongue closed at this D");
    const double lo = 1.0 / (2.0 * i);
    const double hi = 1.0 / (2.0 * i - 1.0);
    if (D == 0.0) return {lo, hi};
    const double peak = 2.0 * M_PI / delta_turning_point(2 * i - 1);
    auto f = [D](double lam) { return delta_of(2.0 * M_PI / lam) - D; };
    auto df = [](double lam) {
        double X = 2.0 * M_PI / lam;
        return delta_deriv(X) * (-2.0 * M_PI / (lam * lam));
    };
    TongueBoundaries tb;
    tb.lambda_minus = bisect_newton(f, df, lo + 1e-14, peak, 1e-14);
    tb.lambda_plus = bisect_newton(f, df, peak, hi - 1e-15, 1e-14);
    return tb;
}

struct OmegaPoint {
    double lambda = 0.0;
    double D = 0.0;
    std::optional<int> tongue_index;
};

// Membership test for the union of tongues: lambda must fall in a base
// interval (1/(2i), 1/(2i-1)) and strictly between the boundary curves.
inline OmegaPoint omega_membership(double lambda, double D) {
    if (!(lambda > 0.0) || !(D > 0.0)) throw std::domain_error("omega_membership: lambda, D > 0");
    OmegaPoint p;
    p.lambda = lambda;
    p.D = D;
    double inv = 1.0 / lambda;
    int m = static_cast<int>(std::floor(inv));
    if (m >= 1 && m % 2 == 1 && inv != static_cast<double>(m)) {
        int i = (m + 1) / 2;  // 1/lambda in (2i-1, 2i)
        if (D < delta_max(i)) {
            TongueBoundaries tb = tongue_boundaries(i, D);
            if (lambda > tb.lambda_minus && lambda < tb.lambda_plus) p.tongue_index = i;
        }
    }
    return p;
}

// Sampled bifurcation boundaries for tongues 1..i_max on a geometric D grid
// (dense near D = 0). Exact queries should re-solve via tongue_boundaries.
struct TongueAtlas {
    struct Row {
        int i = 0;
        double D = 0.0;
        double lambda_minus = 0.0;
        double lambda_plus = 0.0;
    };
    std::vector<double> Delta_i;        // thresholds, index 0 -> tongue 1
    std::vector<double> delta_2i_minus_1;
    std::vector<Row> rows;

    static TongueAtlas build(int i_max, int points_per_tongue = 60, double d_min = 1e-9) {
        if (i_max < 1) throw std::invalid_argument("TongueAtlas: i_max >= 1");
        TongueAtlas atlas;
        for (int i = 1; i <= i_max; ++i) {
            double dpk = delta_turning_point(2 * i - 1);
            double Di = delta_of(dpk);
            atlas.Delta_i.push_back(Di);
            atlas.delta_2i_minus_1.push_back(dpk);
            double hiD = Di * (1.0 - 1e-6);
            double ratio = std::pow(hiD / d_min, 1.0 / (points_per_tongue - 1));
            Row r0{i, 0.0, 1.0 / (2.0 * i), 1.0 / (2.0 * i - 1.0)};
            atlas.rows.push_back(r0);
            for (int j = 0; j < points_per_tongue; ++j) {
                double D = d_min * std::pow(ratio, j);
                TongueBoundaries tb = tongue_boundaries(i, D);
                atlas.rows.push_back(Row{i, D, tb.lambda_minus, tb.lambda_plus});
            }
        }
        return atlas;
    }
};

// Residual of the periodic-travelling-wave bifurcation condition. Its
// imaginary part is -2 pi v_b lambda_b, so zeros require v_b = 0: scanning
// any grid with v_b != 0 returns the empty set.
inline std::complex<double> periodic_tw_residual(double D, double lambda_b, double v_b) {
    const double pi = M_PI;
    std::complex<double> r(4.0 * pi * pi * D + lambda_b * lambda_b * lambda_b / pi * std::sin(pi / lambda_b),
                           -2.0 * pi * v_b * lambda_b);
    return r;
}

struct PeriodicTwZero {
    double lambda_b = 0.0;
    double v_b = 0.0;
};

inline std::vector<PeriodicTwZero> periodic_tw_bifurcation_check(double D,
                                                                 const std::vector<double>& lambda_grid,
                                                                 const std::vector<double>& v_grid,
                                                                 double tol = 1e-12) {
    if (!(D > 0.0)) throw std::domain_error("periodic_tw_bifurcation_check: D > 0");
    std::vector<PeriodicTwZero> zeros;
    for (double lb : lambda_grid) {
        if (!(lb > 0.0)) throw std::invalid_argument("periodic_tw_bifurcation_check: lambda_b > 0");
        for (double vb : v_grid) {
            if (vb == 0.0) throw std::invalid_argument("periodic_tw_bifurcation_check: v_b != 0");
            if (std::abs(periodic_tw_residual(D, lb, vb)) < tol) zeros.push_back({lb, vb});
        }
    }
    return zeros;
}

}  // namespace nlfkpp
