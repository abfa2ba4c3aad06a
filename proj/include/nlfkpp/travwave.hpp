#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "roots.hpp"

namespace nlfkpp {

enum class TailClass { OSCILLATORY, MONOTONE };

struct FrontDecayRates {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    bool double_root = false;  // v = 2 sqrt(D): decay is z e^{-z/sqrt(D)}
};

// Roots of D lambda^2 + v lambda + 1 = 0: the admissible front decays.
inline FrontDecayRates front_decay_rates(double v, double D) {
    if (!(D > 0.0)) throw std::domain_error("front_decay_rates: D > 0");
    double disc = v * v - 4.0 * D;
    if (disc < -1e-14 * v * v) throw std::domain_error("no positive front solution");
    FrontDecayRates out;
    if (disc <= 0.0) {
        out.lambda_plus = out.lambda_minus = -1.0 / std::sqrt(D);
        out.double_root = true;
        return out;
    }
    double s = std::sqrt(disc);
    out.lambda_plus = -(v + s) / (2.0 * D);
    out.lambda_minus = -(v - s) / (2.0 * D);
    return out;
}

struct TailFit {
    TailClass tail_class = TailClass::MONOTONE;
    double a = 0.0;  // rear decay rate
    double b = 0.0;  // rear frequency (0 for monotone)
    double residual_exp = 0.0;
    double residual_cos = 0.0;
    bool ambiguous = false;  // fit residuals comparable
};

struct TWProfile {
    double D = 0.0;
    double v = 0.0;  // solved propagation speed (near 2 sqrt(D) by default)
    std::vector<double> z;
    std::vector<double> u;
    TailFit tail;
    double residual = 0.0;
    int newton_iters = 0;
    std::optional<double> A_inf;    // fitted rear amplitude
    std::optional<double> phi_inf;  // fitted rear phase
};

namespace tw_detail {

struct WindowOp {
    Eigen::SparseMatrix<double, Eigen::RowMajor> W;
    Eigen::VectorXd constant;  // contribution of the u = 1 extension left of the domain
};

// Window weights for int_{z_i-1/2}^{z_i+1/2} u with u extended by 1 on the
// left of the domain and by 0 on the right.
inline WindowOp build_window(const std::vector<double>& z) {
    const int N = static_cast<int>(z.size());
    const double h = z[1] - z[0];
    const double zl = z[0], zr = z[static_cast<size_t>(N) - 1];
    WindowOp op;
    op.constant = Eigen::VectorXd::Zero(N);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N) * (static_cast<size_t>(1.0 / h) + 4));
    for (int i = 0; i < N; ++i) {
        double a = z[static_cast<size_t>(i)] - 0.5, b = z[static_cast<size_t>(i)] + 0.5;
        if (a < zl) op.constant(i) += std::min(b, zl) - a;
        double lo = std::max(a, zl), hi = std::min(b, zr);
        if (hi <= lo) continue;
        double tlo = (lo - zl) / h, thi = (hi - zl) / h;
        int jlo = std::min(std::max(static_cast<int>(std::floor(tlo + 1e-13)), 0), N - 2);
        int jhi = std::min(std::max(static_cast<int>(std::floor(thi - 1e-13)), jlo), N - 2);
        if (jlo == jhi) {
            double flo = tlo - jlo, fhi = thi - jhi, d = hi - lo;
            trip.emplace_back(i, jlo, 0.5 * d * ((1.0 - flo) + (1.0 - fhi)));
            trip.emplace_back(i, jlo + 1, 0.5 * d * (flo + fhi));
        } else {
            double flo = tlo - jlo, d = z[static_cast<size_t>(jlo) + 1] - lo;
            trip.emplace_back(i, jlo, 0.5 * d * (1.0 - flo));
            trip.emplace_back(i, jlo + 1, 0.5 * d * flo + 0.5 * d);
            for (int j = jlo + 1; j < jhi; ++j) {
                trip.emplace_back(i, j, 0.5 * h);
                trip.emplace_back(i, j + 1, 0.5 * h);
            }
            double fhi = thi - jhi, d2 = hi - z[static_cast<size_t>(jhi)];
            trip.emplace_back(i, jhi, 0.5 * d2 + 0.5 * d2 * (1.0 - fhi));
            trip.emplace_back(i, jhi + 1, 0.5 * d2 * fhi);
        }
    }
    op.W.resize(N, N);
    op.W.setFromTriplets(trip.begin(), trip.end());
    return op;
}

// Damped-cosine and pure-exponential least-squares fits of the rear tail
// f = u - 1, envelope-whitened so both models see comparable residuals.
inline TailFit fit_tail(const std::vector<double>& z, const std::vector<double>& f) {
    TailFit out;
    const size_t m = z.size();
    if (m < 24) throw std::runtime_error("fit_tail: too few rear-tail points");

    std::vector<double> la(m);
    for (size_t j = 0; j < m; ++j) la[j] = std::log(std::abs(f[j]) + 1e-300);
    double a0 = fit_line(z, la).slope;
    if (!(a0 > 0.0)) a0 = 1.0;

    std::vector<double> wgt(m);
    for (size_t j = 0; j < m; ++j) wgt[j] = std::exp(-a0 * (z[j] - z[m - 1]));

    auto ss_exp = [&](double a) {
        double num = 0.0, den = 0.0;
        for (size_t j = 0; j < m; ++j) {
            double e = std::exp(a * (z[j] - z[m - 1])) * wgt[j];
            num += e * (f[j] * wgt[j]);
            den += e * e;
        }
        double c = den > 0.0 ? num / den : 0.0;
        double ss = 0.0;
        for (size_t j = 0; j < m; ++j) {
            double r = (f[j] - c * std::exp(a * (z[j] - z[m - 1]))) * wgt[j];
            ss += r * r;
        }
        return ss;
    };
    auto ss_cos = [&](double a, double b, double* c1o = nullptr, double* c2o = nullptr) {
        double m11 = 0, m12 = 0, m22 = 0, r1 = 0, r2 = 0;
        for (size_t j = 0; j < m; ++j) {
            double e = std::exp(a * (z[j] - z[m - 1])) * wgt[j];
            double cb = e * std::cos(b * z[j]), sb = e * std::sin(b * z[j]);
            m11 += cb * cb;
            m12 += cb * sb;
            m22 += sb * sb;
            r1 += cb * (f[j] * wgt[j]);
            r2 += sb * (f[j] * wgt[j]);
        }
        double det = m11 * m22 - m12 * m12;
        double c1 = 0, c2 = 0;
        if (std::abs(det) > 1e-300) {
            c1 = (m22 * r1 - m12 * r2) / det;
            c2 = (m11 * r2 - m12 * r1) / det;
        }
        if (c1o) *c1o = c1;
        if (c2o) *c2o = c2;
        double ss = 0.0;
        for (size_t j = 0; j < m; ++j) {
            double e = std::exp(a * (z[j] - z[m - 1]));
            double r = (f[j] - e * (c1 * std::cos(b * z[j]) + c2 * std::sin(b * z[j]))) * wgt[j];
            ss += r * r;
        }
        return ss;
    };

    // coarse grids, then local refinement
    double best_ea = a0, best_ess = 1e300;
    for (int q = 0; q < 90; ++q) {
        double a = a0 * (0.3 + 2.7 * q / 89.0);
        double ss = ss_exp(a);
        if (ss < best_ess) {
            best_ess = ss;
            best_ea = a;
        }
    }
    for (int ref = 0; ref < 3; ++ref) {
        double da = best_ea * 0.05 / std::pow(4.0, ref);
        for (int q = -4; q <= 4; ++q) {
            double a = best_ea + q * da;
            if (a <= 0) continue;
            double ss = ss_exp(a);
            if (ss < best_ess) {
                best_ess = ss;
                best_ea = a;
            }
        }
    }

    double best_ca = a0, best_cb = 0.0, best_css = 1e300;
    for (int qa = 0; qa < 30; ++qa) {
        double a = a0 * (0.4 + 2.2 * qa / 29.0);
        for (int qb = 0; qb <= 80; ++qb) {
            double b = 8.0 * qb / 80.0;
            double ss = ss_cos(a, b);
            if (ss < best_css) {
                best_css = ss;
                best_ca = a;
                best_cb = b;
            }
        }
    }
    for (int ref = 0; ref < 4; ++ref) {
        double da = best_ca * 0.04 / std::pow(3.0, ref);
        double db = 0.08 / std::pow(3.0, ref);
        for (int qa = -3; qa <= 3; ++qa)
            for (int qb = -3; qb <= 3; ++qb) {
                double a = best_ca + qa * da, b = best_cb + qb * db;
                if (a <= 0 || b < 0) continue;
                double ss = ss_cos(a, b);
                if (ss < best_css) {
                    best_css = ss;
                    best_ca = a;
                    best_cb = b;
                }
            }
    }

    out.residual_exp = best_ess;
    out.residual_cos = best_css;
    bool oscillatory = best_css <= 0.1 * best_ess;
    out.ambiguous = !oscillatory && best_css <= 0.5 * best_ess;
    if (oscillatory) {
        out.tail_class = TailClass::OSCILLATORY;
        out.a = best_ca;
        out.b = best_cb;
    } else {
        out.tail_class = TailClass::MONOTONE;
        out.a = best_ea;
        out.b = 0.0;
    }
    return out;
}

}  // namespace tw_detail

// Minimum-speed transitional travelling wave on [-L_m, L_p]: Dirichlet ends
// u(-L_m) = 1, u(L_p) = 0, nonlocal window extended by 1/0 outside, and the
// phase fixed by u(0) = 1/2. The speed is solved together with the profile
// (the translation mode makes fixed-speed Newton nearly singular); the
// converged v sits within O((sqrt(D)/L_p)^2) of 2 sqrt(D).
inline TWProfile solve_tptw(double D, double v_request = 0.0, double L_m = 0.0, double L_p = 0.0,
                            int n = 0) {
    if (!(D > 0.0)) throw std::domain_error("solve_tptw: D > 0");
    const double vmin = 2.0 * std::sqrt(D);
    if (v_request > 0.0 && v_request < vmin * (1.0 - 1e-12))
        throw std::domain_error("no positive front solution");
    const bool free_speed = v_request <= 0.0 || std::abs(v_request - vmin) < 1e-12 * vmin;

    if (L_p <= 0.0) L_p = std::max(2.0, 60.0 * std::sqrt(D)) + 1.0;
    if (L_m <= 0.0) {
        double a_est = std::min(8.0 * M_PI * M_PI * std::sqrt(D), 4.437);
        L_m = std::min(34.0, std::max(10.0, 2.0 + 23.0 / a_est));
    }
    double h_target = std::min(0.01, std::sqrt(D) / 5.0);
    if (n <= 0) n = static_cast<int>(std::ceil((L_m + L_p) / h_target));
    const int N = n + 1;
    const double h = (L_m + L_p) / n;
    std::vector<double> z(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) z[static_cast<size_t>(i)] = -L_m + i * h;
    const int i0 = static_cast<int>(std::lround(L_m / h));

    tw_detail::WindowOp op = tw_detail::build_window(z);
    double v = free_speed ? vmin : v_request;

    Eigen::VectorXd u(N);
    for (int i = 0; i < N; ++i)
        u(i) = 0.5 * (1.0 - std::tanh(z[static_cast<size_t>(i)] / (4.0 * std::sqrt(D))));
    u(0) = 1.0;
    u(N - 1) = 0.0;

    const double ih2 = 1.0 / (h * h);
    const double ih = 1.0 / (2.0 * h);
    auto residual = [&](const Eigen::VectorXd& f, double vv, Eigen::VectorXd& r, Eigen::VectorXd& I) {
        I = op.constant + op.W * f;
        r.resize(N + 1);
        r(0) = f(0) - 1.0;
        for (int i = 1; i < N - 1; ++i)
            r(i) = D * (f(i - 1) - 2.0 * f(i) + f(i + 1)) * ih2 + vv * (f(i + 1) - f(i - 1)) * ih +
                   f(i) * (1.0 - I(i));
        r(N - 1) = f(N - 1);
        r(N) = free_speed ? f(i0) - 0.5 : 0.0;
    };

    Eigen::VectorXd r, I, r2, I2;
    residual(u, v, r, I);
    double rn = r.lpNorm<Eigen::Infinity>();
    int iters = 0;
    using SpMat = Eigen::SparseMatrix<double>;
    for (int it = 0; it < 60; ++it) {
        double floor = 128.0 * std::numeric_limits<double>::epsilon() * (D * ih2 + 1.0);
        if (rn < std::max(1e-11, floor)) break;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(op.W.nonZeros() + 4 * static_cast<size_t>(N));
        for (int i = 1; i < N - 1; ++i) {
            trip.emplace_back(i, i - 1, D * ih2 - v * ih);
            trip.emplace_back(i, i, -2.0 * D * ih2 + (1.0 - I(i)));
            trip.emplace_back(i, i + 1, D * ih2 + v * ih);
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator wit(op.W, i); wit; ++wit)
                trip.emplace_back(i, static_cast<int>(wit.col()), -u(i) * wit.value());
            if (free_speed) trip.emplace_back(i, N, (u(i + 1) - u(i - 1)) * ih);
        }
        trip.emplace_back(0, 0, 1.0);
        trip.emplace_back(N - 1, N - 1, 1.0);
        if (free_speed)
            trip.emplace_back(N, i0, 1.0);
        else
            trip.emplace_back(N, N, 1.0);
        SpMat J(N + 1, N + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<SpMat> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw std::runtime_error("solve_tptw: singular Jacobian");
        Eigen::VectorXd d = lu.solve(-r);
        double lam = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 14; ++ls) {
            Eigen::VectorXd u2 = u + lam * d.head(N);
            double v2 = v + (free_speed ? lam * d(N) : 0.0);
            residual(u2, v2, r2, I2);
            if (r2.lpNorm<Eigen::Infinity>() < rn) {
                u = u2;
                v = v2;
                r = r2;
                I = I2;
                rn = r2.lpNorm<Eigen::Infinity>();
                ok = true;
                break;
            }
            lam *= 0.5;
        }
        iters = it + 1;
        if (!ok) break;
    }
    double floor = 512.0 * std::numeric_limits<double>::epsilon() * (D * ih2 + 1.0);
    if (rn > std::max(1e-9, floor))
        throw std::runtime_error("solve_tptw: Newton failed, residual " + std::to_string(rn));

    TWProfile out;
    out.D = D;
    out.v = v;
    out.z = z;
    out.u.assign(u.data(), u.data() + u.size());
    out.residual = rn;
    out.newton_iters = iters;

    // rear-tail fit on an amplitude-selected window (|u-1| between 1e-9 and
    // 5e-3, z <= -1); the amplitude band suppresses subdominant modes
    std::vector<double> zf, ff;
    for (int i = 0; i < N; ++i) {
        double zz = z[static_cast<size_t>(i)];
        double dev = out.u[static_cast<size_t>(i)] - 1.0;
        if (zz > -1.0) break;
        if (std::abs(dev) >= 1e-9 && std::abs(dev) <= 5e-3) {
            zf.push_back(zz);
            ff.push_back(dev);
        }
    }
    out.tail = tw_detail::fit_tail(zf, ff);
    return out;
}

// Rear-tail exponents: roots of D s^2 + 2 sqrt(D) s - (2/s) sinh(s/2) = 0.
inline std::complex<double> sigma_residual(std::complex<double> s, double D) {
    std::complex<double> sinc;  // (2/s) sinh(s/2)
    if (std::abs(s) < 1e-3) {
        std::complex<double> s2 = s * s;
        sinc = 1.0 + s2 / 24.0 + s2 * s2 / 1920.0;
    } else {
        sinc = 2.0 / s * std::sinh(0.5 * s);
    }
    return D * s * s + 2.0 * std::sqrt(D) * s - sinc;
}

inline std::complex<double> sigma_residual_deriv(std::complex<double> s, double D) {
    std::complex<double> d;
    if (std::abs(s) < 1e-3) {
        d = s / 12.0 + s * s * s / 480.0;
    } else {
        d = -2.0 / (s * s) * std::sinh(0.5 * s) + (1.0 / s) * std::cosh(0.5 * s);
    }
    return 2.0 * D * s + 2.0 * std::sqrt(D) - d;
}

struct ComplexRootPath {
    int n = 0;
    std::vector<double> D;
    std::vector<std::complex<double>> sigma;
};

// Follows sigma_n(D) from its D -> 0 limit 2 n pi i through the complex
// plane. Branches n = +-1, +-2 collide on the real axis; past the collision
// the two real roots are separated by a directional bias in the seed
// (n = 1, 2 toward zero, n = -1, -2 away from it).
inline ComplexRootPath sigma_path(int n, const std::vector<double>& D_grid) {
    if (n == 0) throw std::invalid_argument("sigma_path: n != 0");
    ComplexRootPath path;
    path.n = n;
    std::complex<double> prev, prev2;
    bool have_prev = false, have_prev2 = false;
    bool real_branch = false;
    for (size_t k = 0; k < D_grid.size(); ++k) {
        double D = D_grid[k];
        if (!(D > 0.0)) throw std::invalid_argument("sigma_path: D > 0");
        std::complex<double> seed;
        double step_scale = 0.0;
        if (!have_prev) {
            double sgn = (n % 2 == 0) ? 1.0 : -1.0;  // -(-1)^n
            seed = std::complex<double>(-sgn * 8.0 * n * n * M_PI * M_PI * std::sqrt(D),
                                        2.0 * n * M_PI);
        } else if (have_prev2) {
            seed = prev + (prev - prev2);
            step_scale = std::abs(prev - prev2);
        } else {
            seed = prev;
        }
        if (real_branch) {
            double bias = (n == 1 || n == 2) ? 0.97 : 1.03;
            seed = std::complex<double>(seed.real() * bias, 0.0);
        }
        std::complex<double> s;
        try {
            s = complex_newton([D](std::complex<double> x) { return sigma_residual(x, D); },
                               [D](std::complex<double> x) { return sigma_residual_deriv(x, D); },
                               seed, 1e-11, 120);
        } catch (const std::exception&) {
            throw std::runtime_error("refine D grid: sigma path lost at D=" + std::to_string(D));
        }
        if (have_prev2 && step_scale > 0.0 && std::abs(s - seed) > 10.0 * std::max(step_scale, 1e-12))
            throw std::runtime_error("refine D grid: branch jump detected at D=" + std::to_string(D));
        if (!real_branch && std::abs(s.imag()) < 1e-8 && (std::abs(n) == 1 || std::abs(n) == 2)) {
            real_branch = true;
            s = std::complex<double>(s.real(), 0.0);
        }
        path.D.push_back(D);
        path.sigma.push_back(s);
        prev2 = prev;
        have_prev2 = have_prev;
        prev = s;
        have_prev = true;
    }
    return path;
}

struct OscillationThreshold {
    double sigma_plus = 0.0;
    double D_plus = 0.0;
    double residual1 = 0.0;
    double residual2 = 0.0;
};

// Collision point of sigma_{+-1}: simultaneous root and tangency of the rear
// relation, solved by a 2x2 real Newton seeded from (4.4, 0.028).
inline OscillationThreshold find_oscillation_threshold() {
    double s = 4.4, D = 0.028;
    for (int it = 0; it < 100; ++it) {
        double sq = std::sqrt(D);
        double F1 = D * s * s * s + 2.0 * sq * s * s - 2.0 * std::sinh(0.5 * s);
        double F2 = 3.0 * D * s * s + 4.0 * sq * s - std::cosh(0.5 * s);
        if (std::abs(F1) < 1e-13 && std::abs(F2) < 1e-13) break;
        double a11 = 3.0 * D * s * s + 4.0 * sq * s - std::cosh(0.5 * s);
        double a12 = s * s * s + s * s / sq;
        double a21 = 6.0 * D * s + 4.0 * sq - 0.5 * std::sinh(0.5 * s);
        double a22 = 3.0 * s * s + 2.0 * s / sq;
        double det = a11 * a22 - a12 * a21;
        if (det == 0.0) throw std::runtime_error("find_oscillation_threshold: singular Jacobian");
        double ds = (-F1 * a22 + F2 * a12) / det;
        double dD = (-F2 * a11 + F1 * a21) / det;
        s += ds;
        D += dD;
        if (!(D > 0.0) || !std::isfinite(s) || !std::isfinite(D))
            throw std::runtime_error("find_oscillation_threshold: divergence");
    }
    OscillationThreshold out;
    out.sigma_plus = s;
    out.D_plus = D;
    double sq = std::sqrt(D);
    out.residual1 = D * s * s * s + 2.0 * sq * s * s - 2.0 * std::sinh(0.5 * s);
    out.residual2 = 3.0 * D * s * s + 4.0 * sq * s - std::cosh(0.5 * s);
    if (std::abs(out.residual1) > 1e-12 || std::abs(out.residual2) > 1e-12)
        throw std::runtime_error("find_oscillation_threshold: divergence");
    return out;
}

}  // namespace nlfkpp
