#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "convolve.hpp"
#include "grid.hpp"
#include "roots.hpp"

namespace nlfkpp {

enum class InitialKind { COMPACT_BUMP, GAUSSIAN };

// u0 = A g(x); the compact bump is g = (1-2x)^2 (1+2x)^2 on |x| <= 1/2.
struct InitialData {
    InitialKind kind = InitialKind::COMPACT_BUMP;
    double A = 0.01;
    double w = 0.1;  // gaussian width

    double g(double x) const {
        if (kind == InitialKind::COMPACT_BUMP) {
            if (std::abs(x) > 0.5) return 0.0;
            double a = 1.0 - 2.0 * x, b = 1.0 + 2.0 * x;
            return a * a * b * b;
        }
        return std::exp(-x * x / (w * w));
    }
    double u0(double x) const { return A * g(x); }
};

enum class Scheme { U_FORM, W_FORM };

struct EvolveConfig {
    double D = 1e-3;
    double L = 10.0;   // u-form: half-domain [0, L]; w-form: period
    int n = 1000;      // u-form: cells on [0, L]; w-form: periodic nodes
    double t_end = 0.0;
    double dt_max = 0.05;
    double max_change = 1e-2;
    Scheme scheme = Scheme::U_FORM;
    double out_every = 0.0;  // 0 -> t_end / 200

    Grid1D make_grid() const {
        if (scheme == Scheme::U_FORM) return Grid1D(0.0, L / n, n + 1, false);
        return Grid1D::periodic_span(-0.5 * L, L, n);
    }
    // Explicit diffusive stability cap. The w-form five-point stencil has a
    // slightly larger symbol, hence the smaller constant.
    double dt_stability() const {
        double h = (scheme == Scheme::U_FORM) ? L / n : L / n;
        double c = (scheme == Scheme::U_FORM) ? 0.4 : 0.35;
        return c * h * h / D;
    }
};

struct EvolveDiagnostics {
    std::vector<double> times;
    std::vector<double> front_position;
    std::vector<double> wavelength;  // NaN where fewer than 4 trailing maxima
    std::vector<double> u_max;
    std::vector<double> mass;
};

// Rightmost downward crossing of u = 1/2, linearly interpolated.
inline double front_position(const Grid1D& g, const std::vector<double>& u) {
    for (int i = g.n - 2; i >= 0; --i) {
        size_t j = static_cast<size_t>(i);
        if (u[j] >= 0.5 && u[j + 1] < 0.5)
            return g.x(i) + (0.5 - u[j]) / (u[j + 1] - u[j]) * g.dx;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Mean spacing of local maxima with u > 1/2 in the window [2, front-2];
// absent (NaN) with fewer than 4 maxima. The window excludes the front
// boundary layer and the initial-data region.
inline double trailing_wavelength(const Grid1D& g, const std::vector<double>& u, double front) {
    if (!std::isfinite(front)) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> maxima;
    for (int i = 1; i + 1 < g.n; ++i) {
        double x = g.x(i);
        if (x < 2.0 || x > front - 2.0) continue;
        size_t j = static_cast<size_t>(i);
        if (u[j] > 0.5 && u[j] >= u[j - 1] && u[j] > u[j + 1]) maxima.push_back(x);
    }
    if (maxima.size() < 4) return std::numeric_limits<double>::quiet_NaN();
    return (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
}

namespace detail {

// RHS of u_t = D u_xx + u (1 - phi*u) on the symmetric half-domain [0, L]:
// even ghost at x = 0, u = 0 beyond x = L. The convolution sees the mirrored
// field so the window can reach across the symmetry axis.
struct UFormWorkspace {
    std::vector<double> mirror, cum;
};

inline void rhs_u_symmetric(const Grid1D& g, const std::vector<double>& u, double D,
                            std::vector<double>& out, UFormWorkspace& ws) {
    const int n = g.n;  // nodes on [0, L]
    const double h = g.dx;
    const int m = 2 * n - 1;  // mirrored nodes on [-L, L]
    ws.mirror.resize(static_cast<size_t>(m));
    for (int i = 0; i < n - 1; ++i) ws.mirror[static_cast<size_t>(i)] = u[static_cast<size_t>(n - 1 - i)];
    for (int i = 0; i < n; ++i) ws.mirror[static_cast<size_t>(n - 1 + i)] = u[static_cast<size_t>(i)];
    ws.cum.resize(static_cast<size_t>(m));
    ws.cum[0] = 0.0;
    for (int j = 1; j < m; ++j)
        ws.cum[static_cast<size_t>(j)] =
            ws.cum[static_cast<size_t>(j) - 1] + 0.5 * h * (ws.mirror[static_cast<size_t>(j) - 1] + ws.mirror[static_cast<size_t>(j)]);
    const double x0 = -g.x(n - 1);
    out.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double xi = g.x(i);
        double I = cumtrapz_at(ws.mirror, ws.cum, x0, h, xi + 0.5) -
                   cumtrapz_at(ws.mirror, ws.cum, x0, h, xi - 0.5);
        double lap;
        if (i == 0)
            lap = 2.0 * (u[1] - u[0]) / (h * h);
        else if (i == n - 1)
            lap = (u[static_cast<size_t>(n) - 2] - 2.0 * u[static_cast<size_t>(n) - 1]) / (h * h);
        else
            lap = (u[static_cast<size_t>(i) - 1] - 2.0 * u[static_cast<size_t>(i)] + u[static_cast<size_t>(i) + 1]) / (h * h);
        out[static_cast<size_t>(i)] = D * lap + u[static_cast<size_t>(i)] * (1.0 - I);
    }
}

inline void rhs_u_periodic(const Grid1D& g, const std::vector<double>& u, double D,
                           std::vector<double>& out) {
    const int n = g.n;
    const double h = g.dx;
    std::vector<double> I = convolve_periodic_values(g, u);
    out.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        int im = (i + n - 1) % n, ip = (i + 1) % n;
        double lap = (u[static_cast<size_t>(im)] - 2.0 * u[static_cast<size_t>(i)] + u[static_cast<size_t>(ip)]) / (h * h);
        out[static_cast<size_t>(i)] = D * lap + u[static_cast<size_t>(i)] * (1.0 - I[static_cast<size_t>(i)]);
    }
}

// RHS of W_t = D W_xx + D (W_x)^2 + 1 - phi*e^W on a periodic grid with
// fourth-order five-point stencils.
inline void rhs_w_periodic(const Grid1D& g, const std::vector<double>& W, double D,
                           std::vector<double>& out, std::vector<double>& expw) {
    const int n = g.n;
    const double h = g.dx;
    expw.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) expw[static_cast<size_t>(i)] = std::exp(W[static_cast<size_t>(i)]);
    std::vector<double> I = convolve_periodic_values(g, expw);
    out.resize(static_cast<size_t>(n));
    const double c2 = 1.0 / (12.0 * h * h);
    const double c1 = 1.0 / (12.0 * h);
    for (int i = 0; i < n; ++i) {
        int im2 = (i + n - 2) % n, im1 = (i + n - 1) % n, ip1 = (i + 1) % n, ip2 = (i + 2) % n;
        double wm2 = W[static_cast<size_t>(im2)], wm1 = W[static_cast<size_t>(im1)];
        double wc = W[static_cast<size_t>(i)], wp1 = W[static_cast<size_t>(ip1)], wp2 = W[static_cast<size_t>(ip2)];
        double wxx = (-wm2 + 16.0 * wm1 - 30.0 * wc + 16.0 * wp1 - wp2) * c2;
        double wx = (wm2 - 8.0 * wm1 + 8.0 * wp1 - wp2) * c1;
        out[static_cast<size_t>(i)] = D * wxx + D * wx * wx + 1.0 - I[static_cast<size_t>(i)];
    }
}

inline void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::runtime_error("blow-up detected");
}

}  // namespace detail

// One explicit midpoint step of the u-form scheme; negative values clipped
// to zero afterwards (round-off can produce -1e-18, the model needs u >= 0).
inline Field step_u(const Field& state, const EvolveConfig& cfg, double dt) {
    if (state.representation != Representation::U)
        throw std::invalid_argument("step_u: field must be in u representation");
    const Grid1D& g = state.grid;
    std::vector<double> k1, k2, um(state.values.size());
    detail::UFormWorkspace ws;
    auto rhs = [&](const std::vector<double>& u, std::vector<double>& out) {
        if (g.periodic)
            detail::rhs_u_periodic(g, u, cfg.D, out);
        else
            detail::rhs_u_symmetric(g, u, cfg.D, out, ws);
    };
    rhs(state.values, k1);
    for (size_t i = 0; i < um.size(); ++i) um[i] = state.values[i] + 0.5 * dt * k1[i];
    rhs(um, k2);
    Field out(g);
    for (size_t i = 0; i < um.size(); ++i) out.values[i] = std::max(state.values[i] + dt * k2[i], 0.0);
    detail::check_finite(out.values);
    return out;
}

// One explicit midpoint step of the W = log u scheme on a periodic grid.
inline Field step_w(const Field& state, const EvolveConfig& cfg, double dt) {
    if (state.representation != Representation::LOG_U)
        throw std::invalid_argument("step_w: field must be in log-u representation");
    if (!state.grid.periodic) throw std::invalid_argument("step_w: grid must be periodic");
    const Grid1D& g = state.grid;
    std::vector<double> k1, k2, wm(state.values.size()), expw;
    detail::rhs_w_periodic(g, state.values, cfg.D, k1, expw);
    for (size_t i = 0; i < wm.size(); ++i) wm[i] = state.values[i] + 0.5 * dt * k1[i];
    detail::rhs_w_periodic(g, wm, cfg.D, k2, expw);
    Field out(g, Representation::LOG_U);
    for (size_t i = 0; i < wm.size(); ++i) out.values[i] = state.values[i] + dt * k2[i];
    detail::check_finite(out.values);
    return out;
}

struct EvolveResult {
    EvolveDiagnostics diagnostics;
    Field final_field;  // representation matches the scheme
    std::vector<std::pair<double, Field>> snapshots;
};

// Integrate the Cauchy problem with adaptive time step: a step whose largest
// nodal change exceeds max_change is rejected and retried at half dt; the
// step grows 25% when the change stays under 0.4 max_change.
inline EvolveResult run(const InitialData& init, const EvolveConfig& cfg,
                        const std::vector<double>& snapshot_times = {}) {
    if (!(cfg.D > 0.0)) throw std::invalid_argument("run: D must be > 0");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("run: t_end must be > 0");
    if (cfg.scheme == Scheme::W_FORM && init.kind == InitialKind::COMPACT_BUMP)
        throw std::invalid_argument("run: w-form needs strictly positive initial data (gaussian)");

    Grid1D g = cfg.make_grid();
    const bool wform = cfg.scheme == Scheme::W_FORM;
    std::vector<double> state(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        double u0 = init.u0(g.x(i));
        state[static_cast<size_t>(i)] = wform ? std::log(init.A) - g.x(i) * g.x(i) / (init.w * init.w) : u0;
    }

    const double dt_cap = std::min(cfg.dt_max, cfg.dt_stability());
    double dt = std::min(dt_cap, 1e-3);
    double t = 0.0;
    double out_every = cfg.out_every > 0.0 ? cfg.out_every : cfg.t_end / 200.0;
    double next_out = 0.0;

    EvolveResult res;
    res.snapshots.reserve(snapshot_times.size());
    size_t next_snap = 0;
    std::vector<double> snaps = snapshot_times;
    std::sort(snaps.begin(), snaps.end());

    std::vector<double> k1, k2, mid(state.size()), expw, unew(state.size()), uvals;
    detail::UFormWorkspace ws;
    auto rhs = [&](const std::vector<double>& s, std::vector<double>& out) {
        if (wform)
            detail::rhs_w_periodic(g, s, cfg.D, out, expw);
        else
            detail::rhs_u_symmetric(g, s, cfg.D, out, ws);
    };

    auto record = [&](double tnow) {
        const std::vector<double>* u = &state;
        if (wform) {
            uvals.resize(state.size());
            for (size_t i = 0; i < state.size(); ++i) uvals[i] = std::exp(state[i]);
            u = &uvals;
        }
        double fp = front_position(g, *u);
        res.diagnostics.times.push_back(tnow);
        res.diagnostics.front_position.push_back(fp);
        res.diagnostics.wavelength.push_back(trailing_wavelength(g, *u, fp));
        res.diagnostics.u_max.push_back(*std::max_element(u->begin(), u->end()));
        double m = 0.0;
        for (int i = 0; i + 1 < g.n; ++i)
            m += 0.5 * g.dx * ((*u)[static_cast<size_t>(i)] + (*u)[static_cast<size_t>(i) + 1]);
        if (wform) m += 0.5 * g.dx * ((*u)[static_cast<size_t>(g.n) - 1] + (*u)[0]);
        else m *= 2.0;  // symmetric half-domain
        res.diagnostics.mass.push_back(m);
    };
    record(0.0);
    next_out = out_every;

    while (t < cfg.t_end) {
        dt = std::min(dt, cfg.t_end - t);
        rhs(state, k1);
        for (size_t i = 0; i < state.size(); ++i) mid[i] = state[i] + 0.5 * dt * k1[i];
        rhs(mid, k2);
        double mx = 0.0;
        for (size_t i = 0; i < state.size(); ++i) mx = std::max(mx, std::abs(dt * k2[i]));
        if (mx > cfg.max_change && dt > 1e-9 * dt_cap) {
            dt *= 0.5;
            continue;
        }
        for (size_t i = 0; i < state.size(); ++i) {
            double v = state[i] + dt * k2[i];
            state[i] = (wform || v > 0.0) ? v : 0.0;
        }
        detail::check_finite(state);
        t += dt;
        if (mx < 0.4 * cfg.max_change) dt = std::min(dt * 1.25, dt_cap);

        while (next_snap < snaps.size() && t >= snaps[next_snap]) {
            res.snapshots.emplace_back(t, Field(g, state, wform ? Representation::LOG_U : Representation::U));
            ++next_snap;
        }
        if (t >= next_out || t >= cfg.t_end) {
            record(t);
            next_out += out_every;
        }
    }
    res.final_field = Field(g, state, wform ? Representation::LOG_U : Representation::U);
    return res;
}

// Hump-formation front predictor x_f(t): the point where the logarithm of
// the far-field solution vanishes.
inline double front_predictor_xf(double t, double A, double w, double D) {
    double s = w * w + 4.0 * D * t;
    double inner = t + std::log(A * w) - 0.5 * std::log(s);
    if (inner < 0.0) throw std::domain_error("predictor undefined at this t");
    return std::sqrt(s) * std::sqrt(inner);
}

enum class Equilibrium { U0, U1 };

// Evolves u_e + eps cos(kx) on a periodic domain and fits the log of the
// Fourier-k amplitude against t while the amplitude stays below 1e-3.
// Returns the fitted rate, positive meaning growth (rate = -w(k)).
inline double measure_growth_rate(double k, double D, Equilibrium about) {
    if (!(k > 0.0) || !(D > 0.0)) throw std::domain_error("measure_growth_rate: k, D > 0");
    const double eps = 1e-6;
    const double lam = 2.0 * M_PI / k;
    int m = std::max(1, static_cast<int>(std::ceil(1.5 / lam)));
    const double L = m * lam;
    int n = static_cast<int>(std::ceil(L / std::min(lam / 128.0, 0.01)));
    n += n % 2;
    Grid1D g = Grid1D::periodic_span(0.0, L, n);

    std::vector<double> u(static_cast<size_t>(n));
    const double base = (about == Equilibrium::U1) ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i) {
        double c = std::cos(k * g.x(i));
        // about u = 0 the perturbation is lifted to eps (1 + cos kx) >= 0
        u[static_cast<size_t>(i)] = (about == Equilibrium::U1) ? 1.0 + eps * c : eps * (1.0 + c);
    }

    auto amplitude = [&]() {
        double cre = 0.0, cim = 0.0;
        for (int i = 0; i < n; ++i) {
            double ph = k * g.x(i);
            double dev = u[static_cast<size_t>(i)] - base;
            cre += dev * std::cos(ph);
            cim += dev * std::sin(ph);
        }
        return 2.0 / n * std::hypot(cre, cim);
    };

    const double h = g.dx;
    double dt = std::min(0.4 * h * h / D, 0.02);
    std::vector<double> k1, k2, mid(u.size());
    std::vector<double> ts, las;
    double t = 0.0;
    const double t_max = 8.0, a_hi = 1e-3;
    double a = amplitude();
    if (a >= a_hi) throw std::runtime_error("measure_growth_rate: amplitude outside linear regime");
    ts.push_back(t);
    las.push_back(std::log(a));
    const double sample_every = 0.05;
    double next_sample = sample_every;
    while (t < t_max) {
        detail::rhs_u_periodic(g, u, D, k1);
        for (size_t i = 0; i < u.size(); ++i) mid[i] = u[i] + 0.5 * dt * k1[i];
        detail::rhs_u_periodic(g, mid, D, k2);
        for (size_t i = 0; i < u.size(); ++i) u[i] = std::max(u[i] + dt * k2[i], 0.0);
        t += dt;
        if (t >= next_sample) {
            a = amplitude();
            if (a >= a_hi || a < 1e-14) break;
            ts.push_back(t);
            las.push_back(std::log(a));
            next_sample += sample_every;
        }
    }
    if (ts.size() < 8) throw std::runtime_error("measure_growth_rate: amplitude left linear regime before fit window");
    return fit_line(ts, las).slope;
}

}  // namespace nlfkpp
