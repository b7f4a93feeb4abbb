#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "frontlab/errors.hpp"

namespace frontlab {

/// Uniform 1-D grid with n nodes x_i = x_left + i*dx.
struct Grid1D {
    double x_left = 0.0;
    double dx = 0.0;
    int n = 0;

    Grid1D() = default;
    Grid1D(double xl, double step, int nodes) : x_left(xl), dx(step), n(nodes) {
        if (!(dx > 0.0)) throw std::invalid_argument("Grid1D: dx must be > 0");
        if (n < 3) throw std::invalid_argument("Grid1D: need at least 3 nodes");
    }

    /// Grid covering [lo, hi] with spacing dx (hi is rounded onto the lattice).
    static Grid1D over(double lo, double hi, double step) {
        const int nodes = static_cast<int>(std::llround((hi - lo) / step)) + 1;
        return Grid1D(lo, step, nodes);
    }

    double x(int i) const { return x_left + i * dx; }
    double x_right() const { return x(n - 1); }
    double length() const { return (n - 1) * dx; }

    /// Index of the node nearest to xq.
    int nearest(double xq) const {
        int i = static_cast<int>(std::llround((xq - x_left) / dx));
        return std::clamp(i, 0, n - 1);
    }

    bool operator==(const Grid1D&) const = default;
};

/// (u, u_t) sample pair on a grid with its time stamp and the far-field
/// targets the solution is pinched to (1 on the left, 0 on the right).
struct WaveState {
    Grid1D grid;
    std::vector<double> u;
    std::vector<double> ut;
    double t = 0.0;
    double far_left = 1.0;
    double far_right = 0.0;

    WaveState() = default;
    WaveState(Grid1D g, double time = 0.0)
        : grid(g), u(static_cast<std::size_t>(g.n), 0.0),
          ut(static_cast<std::size_t>(g.n), 0.0), t(time) {}

    bool finite() const {
        auto ok = [](const std::vector<double>& a) {
            for (double v : a)
                if (!std::isfinite(v)) return false;
            return true;
        };
        return ok(u) && ok(ut);
    }
};

/// Uniformly local norm pair over sliding unit windows.
struct UlNorm {
    double l2ul = 0.0;
    double h1ul = 0.0;
    double window = 1.0;
};

/// Plain trapezoid quadrature of samples f on the grid.
inline double trapezoid(const Grid1D& g, std::span<const double> f) {
    double s = 0.5 * (f[0] + f[static_cast<std::size_t>(g.n - 1)]);
    for (int i = 1; i < g.n - 1; ++i) s += f[static_cast<std::size_t>(i)];
    return s * g.dx;
}

/// Second-order first derivative: centered in the interior, one-sided
/// three-point stencils at the two ends.
inline std::vector<double> derivative(const Grid1D& g, std::span<const double> f) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> d(n);
    const double inv2dx = 1.0 / (2.0 * g.dx);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2dx;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2dx;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2dx;
    return d;
}

namespace detail {

// Max over all window placements of the trapezoid integral of f^2,
// sliding one grid cell at a time. Prefix sums keep it O(n).
inline double max_window_integral_sq(const Grid1D& g, std::span<const double> f,
                                     int wcells, int i_lo, int i_hi) {
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> pre(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + f[i] * f[i];
    double best = 0.0;
    for (int i = i_lo; i + wcells <= i_hi; ++i) {
        const double sum = pre[static_cast<std::size_t>(i + wcells + 1)] -
                           pre[static_cast<std::size_t>(i)] -
                           0.5 * (f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)] +
                                  f[static_cast<std::size_t>(i + wcells)] *
                                      f[static_cast<std::size_t>(i + wcells)]);
        best = std::max(best, sum * g.dx);
    }
    return best;
}

} // namespace detail

/// Discrete uniformly local L^2 norm: max over window-aligned intervals
/// [xi, xi+window] of the trapezoid L^2 norm, window sliding by one cell.
inline double ul_l2(const Grid1D& g, std::span<const double> f, double window = 1.0) {
    if (window < g.dx) throw std::invalid_argument("ul_l2: window smaller than dx");
    if (window > g.length() + 1e-12) throw std::invalid_argument("ul_l2: window exceeds domain");
    const int wcells = static_cast<int>(std::llround(window / g.dx));
    return std::sqrt(detail::max_window_integral_sq(g, f, wcells, 0, g.n - 1));
}

/// Discrete H^1_ul norm, sqrt(|f|_{L2ul}^2 + |f'|_{L2ul}^2).
inline double ul_h1(const Grid1D& g, std::span<const double> f, double window = 1.0) {
    const double a = ul_l2(g, f, window);
    const std::vector<double> fp = derivative(g, f);
    const double b = ul_l2(g, fp, window);
    return std::sqrt(a * a + b * b);
}

inline UlNorm ul_norms(const Grid1D& g, std::span<const double> f, double window = 1.0) {
    UlNorm out;
    out.window = window;
    out.l2ul = ul_l2(g, f, window);
    out.h1ul = ul_h1(g, f, window);
    return out;
}

/// Squared energy-space norm of a state: |u|_{H1ul}^2 + |u_t|_{L2ul}^2.
inline double xnorm2(const WaveState& s, double window = 1.0) {
    const double a = ul_h1(s.grid, s.u, window);
    const double b = ul_l2(s.grid, s.ut, window);
    return a * a + b * b;
}

/// Finite-domain surrogate for the boundary-pinching defects. right:
/// worst unit window within `margin` of the right edge of
/// u^2 + u_x^2 + u_t^2; left: same with (u-1)^2 near the left edge.
inline std::pair<double, double> pinching_defect(const WaveState& s, double margin) {
    const Grid1D& g = s.grid;
    if (!(2.0 * margin < g.length()))
        throw std::invalid_argument("pinching_defect: margin must be < half the domain");
    const int wcells = static_cast<int>(std::llround(1.0 / g.dx));
    const int mcells = static_cast<int>(std::llround(margin / g.dx));
    const std::vector<double> ux = derivative(g, s.u);

    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> density(n);

    auto window_max = [&](int i_lo, int i_hi) {
        std::vector<double> pre(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + density[i];
        double best = 0.0;
        for (int i = i_lo; i + wcells <= i_hi; ++i) {
            const double sum = pre[static_cast<std::size_t>(i + wcells + 1)] -
                               pre[static_cast<std::size_t>(i)] -
                               0.5 * (density[static_cast<std::size_t>(i)] +
                                      density[static_cast<std::size_t>(i + wcells)]);
            best = std::max(best, sum * g.dx);
        }
        return best;
    };

    for (std::size_t i = 0; i < n; ++i)
        density[i] = s.u[i] * s.u[i] + ux[i] * ux[i] + s.ut[i] * s.ut[i];
    const double right = window_max(g.n - 1 - mcells, g.n - 1);

    for (std::size_t i = 0; i < n; ++i) {
        const double d = s.u[i] - 1.0;
        density[i] = d * d + ux[i] * ux[i] + s.ut[i] * s.ut[i];
    }
    const double left = window_max(0, mcells);

    return {left, right};
}

/// Trapezoid value of the exponentially weighted integral
/// int e^{c (y - y0)} f(y) dy over the grid. The shifted exponent keeps
/// the weight representable; nodes where f vanishes are exempt from the
/// overflow guard because they contribute exactly zero.
inline double weighted_integral(const Grid1D& g, std::span<const double> f, double c,
                                double anchor) {
    if (c < 0.0) throw std::invalid_argument("weighted_integral: weight exponent must be >= 0");
    double s = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        if (f[k] == 0.0) continue;
        const double e = c * (g.x(i) - anchor);
        if (e > 700.0)
            throw numerical_error("weighted_integral: weight overflows where f != 0");
        const double w = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
        s += w * std::exp(e) * f[k];
    }
    return s * g.dx;
}

/// Linear interpolation of grid samples at xq (clamped at the ends).
inline double sample_at(const Grid1D& g, std::span<const double> f, double xq) {
    const double r = (xq - g.x_left) / g.dx;
    if (r <= 0.0) return f[0];
    if (r >= g.n - 1) return f[static_cast<std::size_t>(g.n - 1)];
    const int i = static_cast<int>(r);
    const double w = r - i;
    return (1.0 - w) * f[static_cast<std::size_t>(i)] + w * f[static_cast<std::size_t>(i + 1)];
}

/// 4-point Lagrange interpolation; used where linear interpolation error
/// would mask the signal (shift fitting on fine error floors).
inline double sample_at_cubic(const Grid1D& g, std::span<const double> f, double xq) {
    const double r = (xq - g.x_left) / g.dx;
    if (r <= 1.0 || r >= g.n - 2) return sample_at(g, f, xq);
    const int i = static_cast<int>(r);
    const double s = r - i;
    const double fm1 = f[static_cast<std::size_t>(i - 1)];
    const double f0 = f[static_cast<std::size_t>(i)];
    const double f1 = f[static_cast<std::size_t>(i + 1)];
    const double f2 = f[static_cast<std::size_t>(i + 2)];
    return fm1 * (-s * (s - 1.0) * (s - 2.0) / 6.0) + f0 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0) +
           f1 * (-(s + 1.0) * s * (s - 2.0) / 2.0) + f2 * ((s + 1.0) * s * (s - 1.0) / 6.0);
}

} // namespace frontlab
