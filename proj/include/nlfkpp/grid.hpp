#pragma once
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlfkpp {

// Uniform 1D grid. For periodic grids the nodes cover exactly one period
// with no duplicated endpoint, so the period is n*dx.
struct Grid1D {
    double x_left = 0.0;
    double dx = 0.0;
    int n = 0;
    bool periodic = false;

    Grid1D() = default;
    Grid1D(double x_left_, double dx_, int n_, bool periodic_ = false)
        : x_left(x_left_), dx(dx_), n(n_), periodic(periodic_) {
        if (!(dx > 0.0)) throw std::invalid_argument("Grid1D: dx must be > 0");
        if (n < 3) throw std::invalid_argument("Grid1D: n must be >= 3");
    }

    double x(int i) const { return x_left + i * dx; }
    // Extent covered by nodes: one full period when periodic, else node span.
    double length() const { return periodic ? n * dx : (n - 1) * dx; }

    static Grid1D span(double a, double b, int nodes) {
        if (nodes < 3) throw std::invalid_argument("Grid1D: n must be >= 3");
        return Grid1D(a, (b - a) / (nodes - 1), nodes, false);
    }
    static Grid1D periodic_span(double a, double period, int nodes) {
        if (nodes < 3) throw std::invalid_argument("Grid1D: n must be >= 3");
        return Grid1D(a, period / nodes, nodes, true);
    }
};

enum class Representation { U, LOG_U };

// Nodal values of u (or W = log u) on a grid.
struct Field {
    Grid1D grid;
    std::vector<double> values;
    Representation representation = Representation::U;

    Field() = default;
    Field(const Grid1D& g, Representation rep = Representation::U)
        : grid(g), values(static_cast<size_t>(g.n), 0.0), representation(rep) {}
    Field(const Grid1D& g, std::vector<double> v, Representation rep = Representation::U)
        : grid(g), values(std::move(v)), representation(rep) {
        if (static_cast<int>(values.size()) != g.n)
            throw std::invalid_argument("Field: value count does not match grid");
    }

    template <class Fn>
    static Field from_fn(const Grid1D& g, Fn f, Representation rep = Representation::U) {
        Field out(g, rep);
        for (int i = 0; i < g.n; ++i) out.values[static_cast<size_t>(i)] = f(g.x(i));
        return out;
    }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace nlfkpp
