#pragma once
#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispersion.hpp"
#include "grid.hpp"

namespace nlfkpp {

// Even periodic steady state F_p on the half period [0, lambda/2]; the even
// extension carries F to the full line. alpha is peak-to-trough.
struct PeriodicState {
    double lambda = 0.0;
    double D = 0.0;
    std::vector<double> half_profile;  // n+1 nodes on [0, lambda/2]
    double alpha = 0.0;
    double u_max = 0.0;
    double mass = 0.0;  // integral over one period

    double dx() const { return 0.5 * lambda / (static_cast<double>(half_profile.size()) - 1.0); }
};

struct BranchPoint {
    double lambda = 0.0;
    double D = 0.0;
    double alpha = 0.0;
    double u_max = 0.0;
    bool converged = false;
    int newton_iters = 0;
};

namespace steady_detail {

// Linear operator taking half-profile nodal values to the window integrals
// int_{x_i - 1/2}^{x_i + 1/2} F(y) dy of the even lambda-periodic extension.
// Trapezium weights with linear interpolation in the fractional end cells,
// so a constant field integrates exactly.
struct WindowOperator {
    Eigen::MatrixXd W;          // (n+1) x (n+1)
    Eigen::VectorXd mass_w;     // weights of the period mass 2 * int_0^{lambda/2}
    double h = 0.0;

    static WindowOperator build(double lambda, int n) {
        WindowOperator op;
        const int N = n + 1;
        op.h = 0.5 * lambda / n;
        const double h = op.h;
        op.mass_w = Eigen::VectorXd::Constant(N, 2.0 * h);
        op.mass_w(0) = h;
        op.mass_w(N - 1) = h;

        auto s_weights = [&](double p) {
            // weights of int_0^p over the half profile, p in [0, lambda/2]
            Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
            double t = p / h;
            int j = std::min(static_cast<int>(std::floor(t)), n - 1);
            if (j < 0) j = 0;
            double d = p - j * h;
            if (j > 0) {
                w(0) = 0.5 * h;
                w(j) = 0.5 * h;
                for (int q = 1; q < j; ++q) w(q) = h;
            }
            // partial cell: d/2 * (F_j + F(p)), F(p) linear between nodes
            w(j) += 0.5 * d * (1.0 + (1.0 - d / h));
            if (j + 1 < N) w(j + 1) += 0.5 * d * (d / h);
            return w;
        };
        auto c_weights = [&](double y) {
            // weights of int_0^y of the even periodic extension
            double k = std::floor(y / lambda);
            double yp = y - k * lambda;
            Eigen::VectorXd w = k * op.mass_w;
            if (yp <= 0.5 * lambda)
                w += s_weights(yp);
            else
                w += op.mass_w - s_weights(lambda - yp);
            return w;
        };
        op.W.resize(N, N);
        for (int i = 0; i < N; ++i) {
            double xi = i * h;
            op.W.row(i) = (c_weights(xi + 0.5) - c_weights(xi - 0.5)).transpose();
        }
        return op;
    }
};

struct NewtonResult {
    Eigen::VectorXd F;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Damped Newton on D F'' + F (1 - W F) = 0 with even (Neumann) reflection at
// both ends of the half period. The Jacobian is assembled analytically: the
// nonlocal term contributes diag(1 - W F) - diag(F) W.
inline NewtonResult newton_steady(double lambda, double D, const WindowOperator& op,
                                  Eigen::VectorXd F, double tol = 1e-10, int max_iter = 60) {
    const int N = static_cast<int>(F.size());
    const double h = op.h;
    const double ih2 = 1.0 / (h * h);

    auto residual = [&](const Eigen::VectorXd& f, Eigen::VectorXd& r, Eigen::VectorXd& Wf) {
        Wf = op.W * f;
        r.resize(N);
        r(0) = D * 2.0 * (f(1) - f(0)) * ih2 + f(0) * (1.0 - Wf(0));
        for (int i = 1; i < N - 1; ++i)
            r(i) = D * (f(i - 1) - 2.0 * f(i) + f(i + 1)) * ih2 + f(i) * (1.0 - Wf(i));
        r(N - 1) = D * 2.0 * (f(N - 2) - f(N - 1)) * ih2 + f(N - 1) * (1.0 - Wf(N - 1));
    };

    NewtonResult out;
    Eigen::VectorXd r, Wf, r2, Wf2;
    residual(F, r, Wf);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < max_iter; ++it) {
        double scale = F.lpNorm<Eigen::Infinity>();
        double floor = 64.0 * std::numeric_limits<double>::epsilon() * (scale * D * ih2 + scale);
        if (rn < std::max(tol, floor)) {
            out.converged = true;
            break;
        }
        Eigen::MatrixXd J = -F.asDiagonal() * op.W;
        for (int i = 0; i < N; ++i) J(i, i) += 1.0 - Wf(i);
        J(0, 0) += -2.0 * D * ih2;
        J(0, 1) += 2.0 * D * ih2;
        for (int i = 1; i < N - 1; ++i) {
            J(i, i - 1) += D * ih2;
            J(i, i) += -2.0 * D * ih2;
            J(i, i + 1) += D * ih2;
        }
        J(N - 1, N - 1) += -2.0 * D * ih2;
        J(N - 1, N - 2) += 2.0 * D * ih2;

        Eigen::VectorXd d = J.partialPivLu().solve(-r);
        double lam = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 8; ++ls) {
            Eigen::VectorXd F2 = F + lam * d;
            residual(F2, r2, Wf2);
            double rn2 = r2.lpNorm<Eigen::Infinity>();
            if (rn2 < rn) {
                F = F2;
                r = r2;
                Wf = Wf2;
                rn = rn2;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        out.iterations = it + 1;
        if (!accepted) break;  // stagnation; caller inspects residual
    }
    out.F = F;
    out.residual = rn;
    if (!out.converged) {
        double scale = F.lpNorm<Eigen::Infinity>();
        double floor = 64.0 * std::numeric_limits<double>::epsilon() * (scale * D * ih2 + scale);
        out.converged = rn < std::max(tol, floor);
    }
    return out;
}

inline Eigen::VectorXd weakly_nonlinear_seed(double lambda, int n, double alpha0) {
    Eigen::VectorXd F(n + 1);
    const double h = 0.5 * lambda / n;
    for (int i = 0; i <= n; ++i) F(i) = 1.0 + alpha0 * std::cos(2.0 * M_PI * (i * h) / lambda);
    return F;
}

// Leading-order hump profile used to seed deep-in-tongue solves: the region-I
// cosine on its support, lifted slightly to stay positive.
inline Eigen::VectorXd hump_seed(int tongue, double lambda, int n) {
    const int i = tongue;
    Eigen::VectorXd F(n + 1);
    const double h = 0.5 * lambda / n;
    const double S = 0.5 * i * (lambda - 1.0 / (2.0 * i));
    const double B = M_PI / ((2.0 * i - 1.0) * (2.0 * i * lambda - 1.0));
    for (int q = 0; q <= n; ++q) {
        double x = q * h;
        F(q) = (x < S ? B * std::cos(M_PI * x / (i * (lambda - 1.0 / (2.0 * i)))) : 0.0) + 1e-3;
    }
    return F;
}

inline int default_nodes(double lambda, double D) {
    double n = (0.5 * lambda) * 8.0 / std::sqrt(D);
    return std::max(256, std::min(3072, static_cast<int>(n)));
}

}  // namespace steady_detail

struct SteadySeed {
    enum class Kind { WEAKLY_NONLINEAR, STATE } kind = Kind::WEAKLY_NONLINEAR;
    std::optional<PeriodicState> state;

    static SteadySeed weakly_nonlinear() { return SteadySeed{}; }
    static SteadySeed from(const PeriodicState& s) {
        SteadySeed out;
        out.kind = Kind::STATE;
        out.state = s;
        return out;
    }
};

namespace steady_detail {

inline PeriodicState pack_state(double lambda, double D, const Eigen::VectorXd& F,
                                const WindowOperator& op) {
    PeriodicState s;
    s.lambda = lambda;
    s.D = D;
    s.half_profile.assign(F.data(), F.data() + F.size());
    s.u_max = F.maxCoeff();
    s.alpha = F.maxCoeff() - F.minCoeff();
    s.mass = op.mass_w.dot(F);
    return s;
}

inline Eigen::VectorXd regrid(const std::vector<double>& vals, double old_half, double new_half, int n) {
    const int m = static_cast<int>(vals.size()) - 1;
    const double ho = old_half / m;
    Eigen::VectorXd out(n + 1);
    for (int i = 0; i <= n; ++i) {
        double x = std::min(new_half * i / n, old_half);
        double t = x / ho;
        int j = std::min(static_cast<int>(std::floor(t)), m - 1);
        double fr = t - j;
        out(i) = vals[static_cast<size_t>(j)] * (1.0 - fr) + vals[static_cast<size_t>(j) + 1] * fr;
    }
    return out;
}

}  // namespace steady_detail

// Discrete residual of the steady equation for an externally supplied state
// (second-order central differences, even reflection, trapezium window).
inline std::vector<double> steady_residual(const PeriodicState& s) {
    const int n = static_cast<int>(s.half_profile.size()) - 1;
    auto op = steady_detail::WindowOperator::build(s.lambda, n);
    Eigen::Map<const Eigen::VectorXd> F(s.half_profile.data(), s.half_profile.size());
    Eigen::VectorXd r, Wf;
    const double ih2 = 1.0 / (op.h * op.h);
    Wf = op.W * F;
    r.resize(n + 1);
    r(0) = s.D * 2.0 * (F(1) - F(0)) * ih2 + F(0) * (1.0 - Wf(0));
    for (int i = 1; i < n; ++i)
        r(i) = s.D * (F(i - 1) - 2.0 * F(i) + F(i + 1)) * ih2 + F(i) * (1.0 - Wf(i));
    r(n) = s.D * 2.0 * (F(n - 1) - F(n)) * ih2 + F(n) * (1.0 - Wf(n));
    return std::vector<double>(r.data(), r.data() + r.size());
}

// Newton solve for the nontrivial even periodic steady state at (lambda, D).
// The weakly nonlinear seed is 1 + alpha0 cos(2 pi x / lambda) with alpha0
// from the square-root law distance to the nearest tongue boundary; deep in
// the tongue the leading-order hump profile is tried as well. States that
// collapse to F = 1 (alpha < 10 dx^2) are rejected.
inline PeriodicState solve_at(double lambda, double D, const SteadySeed& seed = SteadySeed::weakly_nonlinear(),
                              int n_override = 0) {
    OmegaPoint om = omega_membership(lambda, D);
    if (!om.tongue_index) throw std::invalid_argument("solve_at: (lambda, D) outside all tongues");
    const int tongue = *om.tongue_index;
    const int n = n_override > 0 ? n_override : steady_detail::default_nodes(lambda, D);
    auto op = steady_detail::WindowOperator::build(lambda, n);
    const double dx = op.h;

    std::vector<Eigen::VectorXd> candidates;
    if (seed.kind == SteadySeed::Kind::STATE) {
        const PeriodicState& st = *seed.state;
        candidates.push_back(steady_detail::regrid(st.half_profile, 0.5 * st.lambda, 0.5 * lambda, n));
    } else {
        TongueBoundaries tb = tongue_boundaries(tongue, D);
        double width = tb.lambda_plus - tb.lambda_minus;
        double dist = std::min(lambda - tb.lambda_minus, tb.lambda_plus - lambda);
        double aref = M_PI / ((2.0 * tongue - 1.0) * (2.0 * tongue * lambda - 1.0));
        double a0 = 1.3 * aref * std::sqrt(std::max(dist, 0.0) / width);
        if (dist / width < 0.2) {
            candidates.push_back(steady_detail::weakly_nonlinear_seed(lambda, n, a0));
            candidates.push_back(steady_detail::hump_seed(tongue, lambda, n));
            candidates.push_back(steady_detail::weakly_nonlinear_seed(lambda, n, 2.0 * a0));
        } else {
            candidates.push_back(steady_detail::hump_seed(tongue, lambda, n));
            candidates.push_back(steady_detail::weakly_nonlinear_seed(lambda, n, a0));
            candidates.push_back(steady_detail::weakly_nonlinear_seed(lambda, n, 0.5 * aref));
        }
    }

    std::string last_err = "Newton stagnation";
    for (const Eigen::VectorXd& F0 : candidates) {
        steady_detail::NewtonResult nr = steady_detail::newton_steady(lambda, D, op, F0);
        if (!nr.converged) {
            last_err = "Newton stagnation; final residual " + std::to_string(nr.residual);
            continue;
        }
        double alpha = nr.F.maxCoeff() - nr.F.minCoeff();
        if (alpha < 10.0 * dx * dx) {
            last_err = "trivial attractor; refine seed";
            continue;
        }
        if (nr.F.minCoeff() < -1e-3 * nr.F.maxCoeff()) {
            last_err = "converged to a sign-changing artifact; refine seed";
            continue;
        }
        return steady_detail::pack_state(lambda, D, nr.F, op);
    }
    throw std::runtime_error("solve_at: " + last_err);
}

// Natural-parameter continuation across tongue i at fixed D, sweeping lambda
// between the two boundaries with the previous solution as seed. Failed
// points are recorded and the sweep continues.
inline std::vector<BranchPoint> continue_branch(int i, double D, int lambda_steps = 200) {
    if (D >= delta_max(i)) throw std::domain_error("tongue closed at this D");
    TongueBoundaries tb = tongue_boundaries(i, D);
    const double width = tb.lambda_plus - tb.lambda_minus;
    const double margin = 0.004 * width;
    const double lam0 = tb.lambda_minus + margin;
    const double lam1 = tb.lambda_plus - margin;
    const double step = (lam1 - lam0) / lambda_steps;

    std::vector<BranchPoint> branch;
    std::optional<PeriodicState> prev;
    double lam = lam0;
    while (lam <= lam1 + 0.5 * step) {
        BranchPoint bp;
        bp.lambda = lam;
        bp.D = D;
        try {
            PeriodicState s = prev ? solve_at(lam, D, SteadySeed::from(*prev))
                                   : solve_at(lam, D);
            bp.alpha = s.alpha;
            bp.u_max = s.u_max;
            bp.converged = true;
            prev = s;
        } catch (const std::exception&) {
            bp.converged = false;  // recorded, continuation proceeds
        }
        branch.push_back(bp);
        lam += step;
    }
    return branch;
}

struct SpikeScaleRow {
    double D = 0.0;
    double lambda = 0.0;
    double u_max = 0.0;
    double u_max_sqrtD = 0.0;
};

// Spike-height scaling along lambda = 1/2 + lambda_bar sqrt(D): u_max sqrt(D)
// approaches the inner-problem amplitude v(0, lambda_bar) as D -> 0.
inline std::vector<SpikeScaleRow> spike_scaling(const std::vector<double>& D_list,
                                                double lambda_bar = 10.0) {
    std::vector<SpikeScaleRow> rows;
    for (double D : D_list) {
        SpikeScaleRow r;
        r.D = D;
        r.lambda = 0.5 + lambda_bar * std::sqrt(D);
        PeriodicState s = solve_at(r.lambda, D);
        r.u_max = s.u_max;
        r.u_max_sqrtD = s.u_max * std::sqrt(D);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace nlfkpp
