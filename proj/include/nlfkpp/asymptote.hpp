#pragma once
#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "roots.hpp"

namespace nlfkpp {

// Leading-order support-region profile of the periodic steady state in
// tongue i as D -> 0. alpha1 multiplies D in the unit-window integral
// 1 + alpha1 D + o(D). Documented expansion exponents: the transition layer
// enters at O(D^{1/4}) (gamma), the region-I correction at O(D^{1/4}) (m)
// with F1 = 0 forced, and the mass remainder at O(D^{5/4}) (r).
struct RegionIProfile {
    int i = 1;
    double lambda = 0.0;
    double S_bar = 0.0;      // support half-width (i/2)(lambda - 1/(2i))
    double amplitude = 0.0;  // F0(0) = pi / ((2i-1)(2 i lambda - 1))
    double alpha1 = 0.0;     // -pi^2 / (i^2 (lambda - 1/(2i))^2)

    static constexpr double gamma_exponent = 0.25;
    static constexpr double m_exponent = 0.25;
    static constexpr double r_exponent = 1.25;
    static constexpr double beta1 = 0.0;

    double F0(double x) const {
        if (x < 0.0 || x > S_bar) return 0.0;
        return amplitude * std::cos(M_PI * x / (i * (lambda - 1.0 / (2.0 * i))));
    }
};

inline RegionIProfile region1_profile(int i, double lambda) {
    if (i < 1) throw std::invalid_argument("region1_profile: i >= 1");
    const double lo = 1.0 / (2.0 * i), hi = 1.0 / (2.0 * i - 1.0);
    if (!(lambda > lo && lambda < hi))
        throw std::domain_error("region1_profile: lambda outside tongue base interval");
    RegionIProfile p;
    p.i = i;
    p.lambda = lambda;
    p.S_bar = 0.5 * i * (lambda - lo);
    p.amplitude = M_PI / ((2.0 * i - 1.0) * (2.0 * i * lambda - 1.0));
    double d = i * (lambda - lo);
    p.alpha1 = -M_PI * M_PI / (d * d);
    return p;
}

// Transition-layer eigenvalue problem: Psi'' = Psi * int_{-X}^{inf} Psi with
// Psi(X_R) = 0 and Psi'(-X_L) = -2 pi^2; the eigenvalue l is recovered from
// the left-end value via Psi(-X_L) = -2 pi^2 (-X_L + l).
struct TransitionLayer {
    double X_left = 0.0;  // domain is [-X_left, X_right]
    double X_right = 0.0;
    std::vector<double> X;
    std::vector<double> psi;
    double l = 0.0;
    double residual = 0.0;
    int newton_iterations = 0;
};

namespace asym_detail {

// Weight matrix of I_i = int_{-X_i}^{X_R} psi dw on a uniform grid
// (trapezium, linear interpolation at the fractional lower end). Rows with
// -X_i beyond X_R stay zero; the Gaussian tail past X_R is below 1e-12 for
// X_R >= 6 and is dropped.
inline Eigen::MatrixXd layer_window(const std::vector<double>& X) {
    const int N = static_cast<int>(X.size());
    const double h = X[1] - X[0];
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
    const double XR = X[static_cast<size_t>(N) - 1];
    for (int i = 0; i < N; ++i) {
        double a = -X[static_cast<size_t>(i)];
        if (a >= XR) continue;
        double t = (a - X[0]) / h;
        int j0 = std::min(std::max(static_cast<int>(std::floor(t)), 0), N - 2);
        double frac = std::max(t - j0, 0.0);
        for (int q = j0 + 1; q <= N - 1; ++q) B(i, q) += h;
        B(i, j0 + 1) -= 0.5 * h;
        B(i, N - 1) -= 0.5 * h;
        double d = X[static_cast<size_t>(j0) + 1] - a;
        B(i, j0) += 0.5 * d * (1.0 - frac);
        B(i, j0 + 1) += 0.5 * d * frac + 0.5 * d;
    }
    return B;
}

struct LayerSystem {
    Eigen::MatrixXd B;
    double h = 0.0;
    int N = 0;

    void residual(const Eigen::VectorXd& psi, Eigen::VectorXd& r, Eigen::VectorXd& I) const {
        const double twopi2 = 2.0 * M_PI * M_PI;
        I = B * psi;
        r.resize(N);
        r(0) = (-3.0 * psi(0) + 4.0 * psi(1) - psi(2)) / (2.0 * h) + twopi2;
        for (int i = 1; i < N - 1; ++i)
            r(i) = (psi(i - 1) - 2.0 * psi(i) + psi(i + 1)) / (h * h) - psi(i) * I(i);
        r(N - 1) = psi(N - 1);
    }
};

inline Eigen::VectorXd layer_newton(const LayerSystem& sys, Eigen::VectorXd psi, double tol,
                                    int max_iter, double& rn_out, int& iters_out) {
    const int N = sys.N;
    const double ih2 = 1.0 / (sys.h * sys.h);
    Eigen::VectorXd r, I, r2, I2;
    sys.residual(psi, r, I);
    double rn = r.lpNorm<Eigen::Infinity>();
    iters_out = 0;
    for (int it = 0; it < max_iter; ++it) {
        double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       psi.lpNorm<Eigen::Infinity>() * ih2;
        if (rn < std::max(tol, floor)) break;
        Eigen::MatrixXd J = -psi.asDiagonal() * sys.B;
        for (int i = 1; i < N - 1; ++i) {
            J(i, i - 1) += ih2;
            J(i, i) += -2.0 * ih2 - I(i);
            J(i, i + 1) += ih2;
        }
        J.row(0).setZero();
        J(0, 0) = -3.0 / (2.0 * sys.h);
        J(0, 1) = 4.0 / (2.0 * sys.h);
        J(0, 2) = -1.0 / (2.0 * sys.h);
        J.row(N - 1).setZero();
        J(N - 1, N - 1) = 1.0;
        Eigen::VectorXd d = J.partialPivLu().solve(-r);
        double lam = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 10; ++ls) {
            Eigen::VectorXd p2 = psi + lam * d;
            sys.residual(p2, r2, I2);
            if (r2.lpNorm<Eigen::Infinity>() < rn) {
                psi = p2;
                r = r2;
                I = I2;
                rn = r2.lpNorm<Eigen::Infinity>();
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        iters_out = it + 1;
        if (!ok) break;
    }
    rn_out = rn;
    return psi;
}

}  // namespace asym_detail

inline TransitionLayer solve_transition_layer(double X_left = 8.0, double X_right = 6.0,
                                              int n = 4000, double l_guess = -0.177) {
    if (X_left < 6.0 || X_right < 6.0)
        throw std::invalid_argument("solve_transition_layer: X_left, X_right >= 6");
    if (n < 400) throw std::invalid_argument("solve_transition_layer: n too small");

    const double twopi2 = 2.0 * M_PI * M_PI;
    auto make_grid = [&](int nn) {
        std::vector<double> X(static_cast<size_t>(nn) + 1);
        double h = (X_left + X_right) / nn;
        for (int i = 0; i <= nn; ++i) X[static_cast<size_t>(i)] = -X_left + i * h;
        return X;
    };
    auto initial = [&](const std::vector<double>& X) {
        // smooth positive ramp matching the left asymptote
        Eigen::VectorXd psi(X.size());
        for (size_t i = 0; i < X.size(); ++i) {
            double s = X[i] + l_guess;
            psi(static_cast<Eigen::Index>(i)) = twopi2 * 0.5 * (std::sqrt(s * s + 0.8) - s);
        }
        psi(static_cast<Eigen::Index>(X.size()) - 1) = 0.0;
        return psi;
    };

    // coarse solve, then a short Newton polish on the requested grid
    const int n_coarse = std::min(n, 700);
    std::vector<double> Xc = make_grid(n_coarse);
    asym_detail::LayerSystem sc;
    sc.B = asym_detail::layer_window(Xc);
    sc.h = Xc[1] - Xc[0];
    sc.N = static_cast<int>(Xc.size());
    double rn_c = 0.0;
    int it_c = 0;
    Eigen::VectorXd psi_c = asym_detail::layer_newton(sc, initial(Xc), 1e-11, 60, rn_c, it_c);

    std::vector<double> X = make_grid(n);
    Eigen::VectorXd psi0(X.size());
    for (size_t i = 0; i < X.size(); ++i) {
        double t = (X[i] - Xc[0]) / sc.h;
        int j = std::min(static_cast<int>(std::floor(t)), sc.N - 2);
        double fr = t - j;
        psi0(static_cast<Eigen::Index>(i)) = psi_c(j) * (1.0 - fr) + psi_c(j + 1) * fr;
    }
    asym_detail::LayerSystem sys;
    sys.B = asym_detail::layer_window(X);
    sys.h = X[1] - X[0];
    sys.N = static_cast<int>(X.size());
    double rn = 0.0;
    int iters = 0;
    Eigen::VectorXd psi = asym_detail::layer_newton(sys, psi0, 1e-11, 30, rn, iters);

    double floor = 1e3 * std::numeric_limits<double>::epsilon() * psi.lpNorm<Eigen::Infinity>() /
                   (sys.h * sys.h);
    if (rn > std::max(1e-8, floor))
        throw std::runtime_error("solve_transition_layer: Newton failed, residual " +
                                 std::to_string(rn));

    TransitionLayer out;
    out.X_left = X_left;
    out.X_right = X_right;
    out.X = X;
    out.psi.assign(psi.data(), psi.data() + psi.size());
    out.l = X_left - psi(0) / twopi2;
    out.residual = rn;
    out.newton_iterations = it_c + iters;
    return out;
}

// Support half-width including the transition-layer shift:
// S = (lambda - 1/2)/2 - (3.493 / (sqrt 2 pi^2)) (lambda - 1/2)^{1/2} D^{1/4},
// i.e. S = S_bar + D^{1/4} S1 with S1 = (2 lambda - 1)^{1/2} l*.
inline double support_halfwidth_S(double lambda, double D) {
    const double lstar = -3.493 / (2.0 * M_PI * M_PI);
    double S1 = std::sqrt(2.0 * lambda - 1.0) * lstar;
    return 0.5 * (lambda - 0.5) + std::pow(D, 0.25) * S1;
}

// WKB exponent of the inter-hump region:
// Phi(x) = (1/sqrt 2) int_x^{lambda/2} (1 - sin(pi w/(lambda - 1/2)))^{1/2} dw.
inline double wkb_exponent(double lambda, double x) {
    const double lo = 0.5 * (lambda - 0.5), hi = 0.5 * lambda;
    if (x < lo - 1e-12 || x > hi + 1e-12)
        throw std::domain_error("wkb_exponent: x outside [S_bar, lambda/2]");
    x = std::min(std::max(x, lo), hi);
    auto f = [lambda](double w) {
        double s = 1.0 - std::sin(M_PI * w / (lambda - 0.5));
        return std::sqrt(std::max(s, 0.0));
    };
    return adaptive_simpson(f, x, hi, 1e-13) / std::sqrt(2.0);
}

inline double wkb_phi0(double lambda) { return wkb_exponent(lambda, 0.5 * (lambda - 0.5)); }

// Spike problem on the half line:
// v'' + v (1 - 2 int_R v + int_{X-lb}^{X+lb} v) = 0, v'(0) = 0, v(X_R) = 0,
// with even extension inside the window integral. The tail decays at rate
// sqrt(sigma_inf) where sigma_inf = 4 int_0^inf v - 1 = 2 I_tot - 1.
struct SpikeSolution {
    double lambda_bar = 0.0;
    std::vector<double> X;
    std::vector<double> v;
    double v0 = 0.0;
    double I_tot = 0.0;      // 2 int_0^inf v
    double sigma_inf = 0.0;  // 4 int_0^inf v - 1
    double residual = 0.0;
    std::optional<double> v_inf;  // fitted tail prefactor, low confidence
};

namespace asym_detail {

// Window weights for int_{X_i - lb}^{X_i + lb} v(|s|) ds with v even about 0
// and zero beyond X_R.
inline Eigen::MatrixXd spike_window(const std::vector<double>& X, double lb) {
    const int N = static_cast<int>(X.size());
    const double h = X[1] - X[0];
    const double XR = X[static_cast<size_t>(N) - 1];
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        auto add_interval = [&](double lo, double hi) {
            lo = std::max(lo, 0.0);
            hi = std::min(hi, XR);
            if (hi <= lo) return;
            double tlo = lo / h, thi = hi / h;
            int jlo = std::min(static_cast<int>(std::floor(tlo + 1e-13)), N - 2);
            int jhi = std::min(static_cast<int>(std::floor(thi - 1e-13)), N - 2);
            if (jhi < jlo) jhi = jlo;
            if (jlo == jhi) {
                double flo = tlo - jlo, fhi = thi - jhi, d = hi - lo;
                B(i, jlo) += 0.5 * d * ((1.0 - flo) + (1.0 - fhi));
                B(i, jlo + 1) += 0.5 * d * (flo + fhi);
            } else {
                double flo = tlo - jlo, d = X[static_cast<size_t>(jlo) + 1] - lo;
                B(i, jlo) += 0.5 * d * (1.0 - flo);
                B(i, jlo + 1) += 0.5 * d * flo + 0.5 * d;
                for (int j = jlo + 1; j < jhi; ++j) {
                    B(i, j) += 0.5 * h;
                    B(i, j + 1) += 0.5 * h;
                }
                double fhi = thi - jhi, d2 = hi - X[static_cast<size_t>(jhi)];
                B(i, jhi) += 0.5 * d2 + 0.5 * d2 * (1.0 - fhi);
                B(i, jhi + 1) += 0.5 * d2 * fhi;
            }
        };
        double a = X[static_cast<size_t>(i)] - lb, b = X[static_cast<size_t>(i)] + lb;
        if (a < 0.0) {
            add_interval(0.0, -a);  // reflected part
            add_interval(0.0, b);
        } else {
            add_interval(a, b);
        }
    }
    return B;
}

}  // namespace asym_detail

inline SpikeSolution solve_spike(double lambda_bar, double X_R = 0.0, int n = 0) {
    if (!(lambda_bar > 0.0)) throw std::domain_error("solve_spike: lambda_bar > 0");
    double kappa = std::min(0.9, lambda_bar / 6.0);  // tail-rate estimate
    if (X_R <= 0.0) X_R = 0.5 * lambda_bar + 26.0 / kappa;
    if (n <= 0) {
        double h_target = std::min(0.25, std::max(0.08, 0.8 * lambda_bar));
        n = std::max(900, std::min(4200, static_cast<int>(X_R / h_target)));
    }
    const int N = n + 1;
    std::vector<double> X(static_cast<size_t>(N));
    const double h = X_R / n;
    for (int i = 0; i < N; ++i) X[static_cast<size_t>(i)] = i * h;

    Eigen::MatrixXd B = asym_detail::spike_window(X, lambda_bar);
    Eigen::VectorXd wt = Eigen::VectorXd::Constant(N, 2.0 * h);
    wt(0) = h;
    wt(N - 1) = h;

    Eigen::VectorXd v(N);
    if (lambda_bar <= 3.0) {
        for (int i = 0; i < N; ++i) {
            double c = std::cosh(lambda_bar * X[static_cast<size_t>(i)] / 12.0);
            v(i) = lambda_bar / 48.0 / (c * c);
        }
    } else {
        double S = 0.5 * lambda_bar;
        for (int i = 0; i < N; ++i) {
            double x = X[static_cast<size_t>(i)];
            v(i) = (x < S ? 0.5 * M_PI / lambda_bar * std::cos(0.5 * M_PI * x / S) : 0.0) + 1e-4;
        }
    }

    auto residual = [&](const Eigen::VectorXd& f, Eigen::VectorXd& r, Eigen::VectorXd& Iw,
                        double& Itot) {
        Itot = wt.dot(f);
        Iw = B * f;
        r.resize(N);
        r(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
        for (int i = 1; i < N - 1; ++i)
            r(i) = (f(i - 1) - 2.0 * f(i) + f(i + 1)) / (h * h) +
                   f(i) * (1.0 - 2.0 * Itot + Iw(i));
        r(N - 1) = f(N - 1);
    };

    Eigen::VectorXd r, Iw, r2, Iw2;
    double Itot = 0.0, Itot2 = 0.0;
    residual(v, r, Iw, Itot);
    double rn = r.lpNorm<Eigen::Infinity>();
    const double ih2 = 1.0 / (h * h);
    for (int it = 0; it < 60; ++it) {
        double floor = 64.0 * std::numeric_limits<double>::epsilon() * v.lpNorm<Eigen::Infinity>() * ih2;
        if (rn < std::max(1e-11, floor)) break;
        Eigen::MatrixXd J = B;
        J.rowwise() -= 2.0 * wt.transpose();
        J = v.asDiagonal() * J;
        for (int i = 1; i < N - 1; ++i) {
            J(i, i - 1) += ih2;
            J(i, i) += -2.0 * ih2 + (1.0 - 2.0 * Itot + Iw(i));
            J(i, i + 1) += ih2;
        }
        J.row(0).setZero();
        J(0, 0) = -3.0 / (2.0 * h);
        J(0, 1) = 2.0 / h;
        J(0, 2) = -1.0 / (2.0 * h);
        J.row(N - 1).setZero();
        J(N - 1, N - 1) = 1.0;
        Eigen::VectorXd d = J.partialPivLu().solve(-r);
        double lam = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 12; ++ls) {
            Eigen::VectorXd v2 = v + lam * d;
            residual(v2, r2, Iw2, Itot2);
            if (r2.lpNorm<Eigen::Infinity>() < rn) {
                v = v2;
                r = r2;
                Iw = Iw2;
                Itot = Itot2;
                rn = r2.lpNorm<Eigen::Infinity>();
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        if (!ok) break;
    }
    double floor = 1e3 * std::numeric_limits<double>::epsilon() * v.lpNorm<Eigen::Infinity>() * ih2;
    if (rn > std::max(1e-9, floor))
        throw std::runtime_error("solve_spike: Newton failed, residual " + std::to_string(rn));
    if (v(N - 2) > 1e-10 && v(N - 2) > 1e-9 * v.maxCoeff())
        throw std::runtime_error("increase X_R: spike tail not resolved");

    SpikeSolution out;
    out.lambda_bar = lambda_bar;
    out.X = X;
    out.v.assign(v.data(), v.data() + v.size());
    out.v0 = v(0);
    out.I_tot = wt.dot(v);
    out.sigma_inf = 2.0 * out.I_tot - 1.0;
    out.residual = rn;
    return out;
}

// Small-lambda_bar closed form: v_tilde(X) = (1/48) sech^2(X/12), eigenvalue
// I_tilde = 1/72.
inline double sech2_limit(double X_tilde) {
    double c = std::cosh(X_tilde / 12.0);
    return 1.0 / (48.0 * c * c);
}

inline double sech2_eigenvalue() { return 1.0 / 72.0; }

}  // namespace nlfkpp
