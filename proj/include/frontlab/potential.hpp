#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "frontlab/errors.hpp"

namespace frontlab {

/// Double-well potential with evaluators for V and its first three
/// derivatives. Instances are immutable after construction and cheap to
/// copy; tabulated instances carry caller-supplied derivative closures
/// (no numerical differentiation happens inside, so residual checks
/// against the closures stay meaningful).
struct BistablePotential {
    std::function<double(double)> v;    // V(u)
    std::function<double(double)> vp;   // V'(u)
    std::function<double(double)> vpp;  // V''(u)
    std::function<double(double)> vppp; // V'''(u)
    std::string name;
    double theta = std::numeric_limits<double>::quiet_NaN(); // cubic-family parameter
};

/// Canonical cubic-derivative family: V'(u) = u(u-1)(u-theta),
/// V(u) = u^4/4 - (1+theta)u^3/3 + theta u^2/2, theta in (0, 1/2).
/// Its front has a closed form, which is what makes it the default
/// test potential.
inline BistablePotential make_cubic(double theta) {
    if (!(theta > 0.0 && theta < 0.5))
        throw std::domain_error("make_cubic: theta must lie in (0, 1/2)");
    BistablePotential p;
    p.theta = theta;
    p.name = "cubic(theta=" + std::to_string(theta) + ")";
    p.v = [theta](double u) {
        return u * u * u * u / 4.0 - (1.0 + theta) * u * u * u / 3.0 + theta * u * u / 2.0;
    };
    p.vp = [theta](double u) { return u * (u - 1.0) * (u - theta); };
    p.vpp = [theta](double u) { return 3.0 * u * u - 2.0 * (1.0 + theta) * u + theta; };
    p.vppp = [theta](double u) { return 6.0 * u - 2.0 * (1.0 + theta); };
    return p;
}

/// Construction used for the supersonic counterexample: the potential for
/// which h(x - s t), h(x) = 1/(1+e^x), is an exact travelling solution.
/// Outside the bistable hypotheses whenever gamma = alpha s^2 - 1 > 0
/// (then V''(0) = -(s+gamma) < 0 and u = 0 is an unstable state).
struct SupersonicExample {
    BistablePotential potential;
    double s = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    bool zero_state_stable = true;
};

inline SupersonicExample supersonic_example(double s, double alpha) {
    if (!(s > 0.0)) throw std::domain_error("supersonic_example: s must be > 0");
    if (!(alpha > 0.0)) throw std::domain_error("supersonic_example: alpha must be > 0");
    const double g = alpha * s * s - 1.0;
    // -V'(u) = u(1-u)(s + g(1-2u))  =>  V'(u) = -(s+g)u + (s+3g)u^2 - 2g u^3
    SupersonicExample out;
    out.s = s;
    out.alpha = alpha;
    out.gamma = g;
    out.zero_state_stable = (-(s + g) > 0.0);
    BistablePotential p;
    p.name = "supersonic(s=" + std::to_string(s) + ",alpha=" + std::to_string(alpha) + ")";
    p.v = [s, g](double u) {
        return -(s + g) * u * u / 2.0 + (s + 3.0 * g) * u * u * u / 3.0 - g * u * u * u * u / 2.0;
    };
    p.vp = [s, g](double u) { return u * (-(s + g) + (s + 3.0 * g) * u - 2.0 * g * u * u); };
    p.vpp = [s, g](double u) { return -(s + g) + 2.0 * (s + 3.0 * g) * u - 6.0 * g * u * u; };
    p.vppp = [s, g](double u) { return 2.0 * (s + 3.0 * g) - 12.0 * g * u; };
    out.potential = p;
    return out;
}

struct CriticalPoint {
    double u = 0.0;
    double value = 0.0;
};

/// Outcome of checking a potential against the structural hypotheses.
/// `ok == false` carries the first violated hypothesis instead of
/// throwing, so callers can surface it.
struct PotentialValidation {
    bool ok = false;
    std::string first_violation;
    double a = 0.0;     // coercivity slope, fixed at beta0/4
    double b = 0.0;     // coercivity offset measured on the search interval
    double beta0 = 0.0; // V''(0)
    double beta1 = 0.0; // V''(1)
    double m = 0.0;     // min(beta0, beta1)
    double eps0 = 0.0;  // largest radius with beta0/2 <= V'' <= 2 beta0
    std::vector<CriticalPoint> critical_points;
};

namespace detail {

inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 60) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        }
    }
    return std::max(f(0.5 * (a + b)), std::max(f1, f2));
}

/// Max of f over [lo, hi]: dense scan plus golden refinement in the best cell.
inline double scan_max(const std::function<double(double)>& f, double lo, double hi,
                       int samples = 1024) {
    double best = -std::numeric_limits<double>::infinity();
    int ibest = 0;
    for (int i = 0; i <= samples; ++i) {
        const double u = lo + (hi - lo) * i / samples;
        const double val = f(u);
        if (val > best) { best = val; ibest = i; }
    }
    const double cell = (hi - lo) / samples;
    const double a = std::max(lo, lo + (ibest - 1) * cell);
    const double b = std::min(hi, lo + (ibest + 1) * cell);
    return std::max(best, golden_max(f, a, b));
}

inline double scan_min(const std::function<double(double)>& f, double lo, double hi,
                       int samples = 1024) {
    return -scan_max([&f](double u) { return -f(u); }, lo, hi, samples);
}

} // namespace detail

/// Largest radius eps such that beta0/2 <= V''(u) <= 2 beta0 on [-eps, eps],
/// located by bisection to relative tolerance 1e-10.
inline double epsilon0_radius(const BistablePotential& p) {
    const double beta0 = p.vpp(0.0);
    if (!(beta0 > 0.0)) throw std::domain_error("epsilon0_radius: V''(0) must be > 0");
    auto admissible = [&](double eps) {
        const double lo = detail::scan_min(p.vpp, -eps, eps, 512);
        const double hi = detail::scan_max(p.vpp, -eps, eps, 512);
        return lo >= 0.5 * beta0 && hi <= 2.0 * beta0;
    };
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (admissible(hi) && grow++ < 8) { lo = hi; hi *= 2.0; }
    if (grow >= 8) return hi; // V'' essentially flat out to here
    while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        (admissible(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Checks the bistable hypotheses on the search interval: exact conditions
/// at u = 0 and u = 1, location of all critical points (bisection on sign
/// changes of V'), the sign of their critical values, coercivity witnesses
/// (a, b), and the curvature radius eps0.
inline PotentialValidation validate(const BistablePotential& p, double lo, double hi,
                                    double grid_step) {
    if (!(lo <= -1.0 && hi >= 2.0))
        throw std::invalid_argument("validate: search interval must contain [-1, 2]");
    if (!(grid_step > 0.0)) throw std::invalid_argument("validate: grid_step must be > 0");

    PotentialValidation out;
    auto fail = [&out](const std::string& what) {
        out.ok = false;
        if (out.first_violation.empty()) out.first_violation = what;
    };

    const double tol = 1e-12;
    if (std::abs(p.v(0.0)) > tol) fail("V(0) = 0 violated");
    else if (std::abs(p.vp(0.0)) > tol) fail("V'(0) = 0 violated");
    else if (!(p.vpp(0.0) > 0.0)) fail("V''(0) > 0 violated");
    else if (!(p.v(1.0) < 0.0)) fail("V(1) < 0 violated");
    else if (std::abs(p.vp(1.0)) > tol) fail("V'(1) = 0 violated");
    else if (!(p.vpp(1.0) > 0.0)) fail("V''(1) > 0 violated");

    // Critical points: grid scan for sign changes of V', refined by bisection.
    const int cells = static_cast<int>(std::ceil((hi - lo) / grid_step));
    double prev_u = lo, prev_g = p.vp(lo);
    for (int i = 1; i <= cells; ++i) {
        const double u = std::min(hi, lo + i * grid_step);
        const double g = p.vp(u);
        if (prev_g == 0.0 || prev_g * g < 0.0) {
            double a = prev_u, b = u;
            if (prev_g == 0.0) b = prev_u;
            else
                for (int k = 0; k < 100 && b - a > 1e-14; ++k) {
                    const double m = 0.5 * (a + b);
                    (p.vp(a) * p.vp(m) <= 0.0 ? b : a) = m;
                }
            const double ustar = 0.5 * (a + b);
            bool dup = false;
            for (const auto& cp : out.critical_points)
                if (std::abs(cp.u - ustar) < 1e-8) dup = true;
            if (!dup) out.critical_points.push_back({ustar, p.v(ustar)});
        }
        prev_u = u;
        prev_g = g;
    }
    if (out.first_violation.empty()) {
        for (const auto& cp : out.critical_points) {
            if (cp.value <= 1e-12 && std::abs(cp.u) > 1e-6 && std::abs(cp.u - 1.0) > 1e-6) {
                fail("non-positive critical value away from u=0 and u=1");
                break;
            }
        }
    }

    out.beta0 = p.vpp(0.0);
    out.beta1 = p.vpp(1.0);
    out.m = std::min(out.beta0, out.beta1);

    if (out.first_violation.empty()) {
        // a is fixed at beta0/4; b is the measured max of a u^2 - u V'(u),
        // padded by one part in 1e12 so resampling between scan nodes
        // cannot poke above it.
        out.a = out.beta0 / 4.0;
        const double gmax = detail::scan_max(
            [&](double u) { return out.a * u * u - u * p.vp(u); }, lo, hi, 4096);
        out.b = std::max(0.0, gmax) * (1.0 + 1e-12) + 1e-12;
        if (!(out.b < std::numeric_limits<double>::infinity())) fail("coercivity witness diverged");
        out.eps0 = epsilon0_radius(p);
        if (!(out.eps0 > 0.0)) fail("no positive curvature radius at u=0");
    }

    out.ok = out.first_violation.empty();
    return out;
}

/// Global minimum of the potential, which the hypotheses place at u = 1.
/// A grid search over [lo, hi] cross-checks; finding anything lower means
/// the hypotheses are violated and is reported as an error.
inline double min_v(const BistablePotential& p, double lo = -2.0, double hi = 3.0,
                    double grid_step = 1e-3) {
    const double v1 = p.v(1.0);
    const int samples = static_cast<int>(std::ceil((hi - lo) / grid_step));
    const double found = detail::scan_min(p.v, lo, hi, samples);
    if (found < v1 - 1e-9 * (1.0 + std::abs(v1)))
        throw numerical_error("min_v: grid search found a value below V(1)");
    return v1;
}

} // namespace frontlab
