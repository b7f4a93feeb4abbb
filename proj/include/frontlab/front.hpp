#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"

namespace frontlab {

/// Exponential rate of the front tail at +inf for parabolic speed c and
/// curvature beta0 = V''(0). Also the largest weight exponent for which
/// the front profile stays weight-square-integrable on the right.
inline double tail_decay_rate(double c, double beta0) {
    return 0.5 * (c + std::sqrt(c * c + 4.0 * beta0));
}

/// Monotone heteroclinic profile h with h(-inf) = 1, h(+inf) = 0,
/// normalized so that h(0) = eps0, sampled on a uniform y-grid.
/// When the profile has a closed form (cubic family, supersonic example)
/// the exact evaluators are attached and interpolation is bypassed.
struct FrontProfile {
    std::vector<double> y;
    std::vector<double> h;
    std::vector<double> hp;
    double dy = 0.0;

    double c_star = 0.0;  // parabolic speed
    double s_star = 0.0;  // physical speed at alpha below
    double alpha = 1.0;   // alpha used for s_star
    double epsilon0 = 0.0;
    double decay_right = 0.0; // tail rate at +inf
    double c_h = 0.0;         // weighted-space threshold, equals decay_right
    double theta = std::numeric_limits<double>::quiet_NaN();

    std::function<double(double)> h_exact;  // optional closed forms
    std::function<double(double)> hp_exact;

    bool in_range(double yy) const { return yy >= y.front() && yy <= y.back(); }

    double h_at(double yy) const {
        if (h_exact) return h_exact(yy);
        if (yy < y.front()) return 1.0;
        if (yy > y.back()) return 0.0;
        Grid1D g(y.front(), dy, static_cast<int>(y.size()));
        return sample_at(g, h, yy);
    }

    double hp_at(double yy) const {
        if (hp_exact) return hp_exact(yy);
        if (yy < y.front() || yy > y.back()) return 0.0;
        Grid1D g(y.front(), dy, static_cast<int>(y.size()));
        return sample_at(g, hp, yy);
    }

    double physical_speed(double a) const { return c_star / std::sqrt(1.0 + a * c_star * c_star); }
};

namespace detail {

enum class Shot { TooSmall, TooLarge };

// One RK4 step of the phase-plane system h' = q, q' = V'(h) - c q.
template <class VP>
inline void rk4_step(VP&& vp, double c, double dy, double& h, double& q) {
    auto fq = [&](double hh, double qq) { return vp(hh) - c * qq; };
    const double k1h = q, k1q = fq(h, q);
    const double k2h = q + 0.5 * dy * k1q, k2q = fq(h + 0.5 * dy * k1h, q + 0.5 * dy * k1q);
    const double k3h = q + 0.5 * dy * k2q, k3q = fq(h + 0.5 * dy * k2h, q + 0.5 * dy * k2q);
    const double k4h = q + dy * k3q, k4q = fq(h + dy * k3h, q + dy * k3q);
    h += dy / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
    q += dy / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
}

// Overshoot/undershoot classification of the unstable-manifold trajectory
// launched below the saddle (1,0). Hitting h = -eps0/2 means the friction
// c is too small; any turning point q >= 0 before reaching 0 means c is
// too large.
template <class VP>
inline Shot classify_shot(VP&& vp, double c, double beta1, double eps0, double dy,
                          double y_cap) {
    const double lam = 0.5 * (-c + std::sqrt(c * c + 4.0 * beta1));
    const double delta = 1e-8;
    double h = 1.0 - delta;
    double q = -delta * lam;
    for (double y = 0.0; y < y_cap; y += dy) {
        rk4_step(vp, c, dy, h, q);
        if (h <= -0.5 * eps0) return Shot::TooSmall;
        if (q >= 0.0) return Shot::TooLarge;
    }
    return h < 0.5 * eps0 ? Shot::TooSmall : Shot::TooLarge;
}

} // namespace detail

/// Front BVP solver: bisection on the parabolic speed c of the
/// overshoot/undershoot classifier, then a final integration at the
/// converged speed. The stored grid spans (at least) h in
/// [1e-12, 1 - 1e-12]; both tails are continued with their exponential
/// asymptotes, which is more accurate than integrating into the regime
/// where the shooting trajectory peels off the stable manifold.
inline FrontProfile solve_front(const BistablePotential& p, const PotentialValidation& val,
                                double tol = 1e-10, double alpha = 1.0,
                                double bracket_lo = 0.0, double bracket_hi = -1.0) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_front: tol must be > 0");
    if (!val.ok) throw std::invalid_argument("solve_front: potential failed validation");
    const double eps0 = val.eps0;
    const double beta0 = val.beta0;
    const double beta1 = val.beta1;
    const double dy_int = 1e-3;   // integrator substep
    const double dy_prof = 0.01;  // stored grid spacing
    const double y_cap = 500.0;

    auto solve_with = [&](auto&& vp) -> FrontProfile {
        double c_lo = bracket_lo;
        double c_hi = bracket_hi;
        if (c_hi <= 0.0) {
            const double vpp_max = detail::scan_max(p.vpp, 0.0, 1.0, 256);
            c_hi = 2.0 * std::sqrt(2.0 * std::max(vpp_max, beta0));
        }
        if (detail::classify_shot(vp, c_lo, beta1, eps0, dy_int, y_cap) != detail::Shot::TooSmall)
            throw numerical_error("solve_front: lower bracket does not overshoot");
        int widen = 0;
        while (detail::classify_shot(vp, c_hi, beta1, eps0, dy_int, y_cap) !=
               detail::Shot::TooLarge) {
            c_hi *= 2.0;
            if (++widen > 10) throw numerical_error("solve_front: no undershoot bracket found");
        }
        while (c_hi - c_lo > tol) {
            const double mid = 0.5 * (c_lo + c_hi);
            (detail::classify_shot(vp, mid, beta1, eps0, dy_int, y_cap) == detail::Shot::TooSmall
                 ? c_lo
                 : c_hi) = mid;
        }
        const double c = 0.5 * (c_lo + c_hi);

        // Final integration, recorded every dy_prof.
        const double lam1 = 0.5 * (-c + std::sqrt(c * c + 4.0 * beta1));
        const double delta = 1e-8;
        const double h_switch = 1e-5;
        const int stride = static_cast<int>(std::llround(dy_prof / dy_int));
        std::vector<double> hs{1.0 - delta}, qs{-delta * lam1};
        double h = hs[0], q = qs[0];
        bool reached_tail = false;
        for (int k = 0; k < static_cast<int>(y_cap / dy_prof); ++k) {
            for (int j = 0; j < stride; ++j) detail::rk4_step(vp, c, dy_int, h, q);
            hs.push_back(h);
            qs.push_back(q);
            if (h <= h_switch) { reached_tail = true; break; }
            if (h <= 0.0 || q >= 0.0) break;
        }
        if (!reached_tail)
            throw numerical_error("solve_front: converged trajectory failed to reach the 0 state");

        // Normalization point h(y*) = eps0 inside the integrated segment.
        // The recorded pairs (h, h') admit a cubic Hermite interpolant, so
        // Newton refinement of the crossing is fourth-order accurate; plain
        // linear interpolation would leak an O(dy^2) phase error into the
        // whole profile.
        std::size_t kx = 0;
        while (kx + 1 < hs.size() && hs[kx + 1] > eps0) ++kx;
        double frac = (hs[kx] - eps0) / (hs[kx] - hs[kx + 1]);
        {
            const double h0 = hs[kx], h1 = hs[kx + 1];
            const double m0 = qs[kx] * dy_prof, m1 = qs[kx + 1] * dy_prof;
            for (int it = 0; it < 8; ++it) {
                const double s = frac, s2 = s * s, s3 = s2 * s;
                const double val = (2 * s3 - 3 * s2 + 1) * h0 + (s3 - 2 * s2 + s) * m0 +
                                   (-2 * s3 + 3 * s2) * h1 + (s3 - s2) * m1 - eps0;
                const double der = (6 * s2 - 6 * s) * h0 + (3 * s2 - 4 * s + 1) * m0 +
                                   (-6 * s2 + 6 * s) * h1 + (3 * s2 - 2 * s) * m1;
                if (der == 0.0) break;
                frac -= val / der;
                frac = std::min(1.0, std::max(0.0, frac));
            }
        }
        const double y_star = (static_cast<double>(kx) + frac) * dy_prof;

        // Tail continuation rates: exact eigen-rate on the left, measured
        // local slope on the right (C^1 match at the junction).
        const double rate_r = -qs.back() / hs.back();
        const int k_left = static_cast<int>(
            std::ceil(std::log(1e-12 / delta) / lam1 / dy_prof)); // negative
        int k_right_extra = 0;
        {
            const double y_end = static_cast<double>(hs.size() - 1) * dy_prof - y_star;
            double hh = hs.back();
            while (hh > 1e-12 ||
                   std::exp(c * (y_end + k_right_extra * dy_prof)) * rate_r * hh > 1e-9) {
                ++k_right_extra;
                hh = hs.back() * std::exp(-rate_r * k_right_extra * dy_prof);
                if (k_right_extra > 40000) break;
            }
        }

        FrontProfile fp;
        fp.dy = dy_prof;
        fp.c_star = c;
        fp.alpha = alpha;
        fp.s_star = c / std::sqrt(1.0 + alpha * c * c);
        fp.epsilon0 = eps0;
        fp.decay_right = tail_decay_rate(c, beta0);
        fp.c_h = fp.decay_right;
        fp.theta = p.theta;
        const int n_total = -k_left + static_cast<int>(hs.size()) + k_right_extra;
        fp.y.reserve(static_cast<std::size_t>(n_total));
        fp.h.reserve(static_cast<std::size_t>(n_total));
        fp.hp.reserve(static_cast<std::size_t>(n_total));
        for (int k = k_left; k < 0; ++k) {
            const double d = delta * std::exp(lam1 * k * dy_prof);
            fp.y.push_back(k * dy_prof - y_star);
            fp.h.push_back(1.0 - d);
            fp.hp.push_back(-lam1 * d);
        }
        for (std::size_t k = 0; k < hs.size(); ++k) {
            fp.y.push_back(static_cast<double>(k) * dy_prof - y_star);
            fp.h.push_back(hs[k]);
            fp.hp.push_back(qs[k]);
        }
        const double y_end = static_cast<double>(hs.size() - 1) * dy_prof - y_star;
        for (int k = 1; k <= k_right_extra; ++k) {
            const double hh = hs.back() * std::exp(-rate_r * k * dy_prof);
            fp.y.push_back(y_end + k * dy_prof);
            fp.h.push_back(hh);
            fp.hp.push_back(-rate_r * hh);
        }
        for (std::size_t k = 1; k + 1 < fp.h.size(); ++k)
            if (!(fp.hp[k] < 0.0))
                throw numerical_error("solve_front: profile is not strictly decreasing");
        return fp;
    };

    if (std::isfinite(p.theta)) {
        const double th = p.theta;
        return solve_with([th](double u) { return u * (u - 1.0) * (u - th); });
    }
    return solve_with([&p](double u) { return p.vp(u); });
}

/// Closed-form front of the cubic family: h(y) = 1/(1 + e^{(y - ys)/sqrt2})
/// with c* = (1 - 2 theta)/sqrt2, shifted so h(0) = eps0. Independent
/// oracle for solve_front.
inline FrontProfile analytic_cubic_front(double theta, double dy = 0.01, double alpha = 1.0) {
    if (!(theta > 0.0 && theta < 0.5))
        throw std::domain_error("analytic_cubic_front: theta must lie in (0, 1/2)");
    const BistablePotential p = make_cubic(theta);
    const double eps0 = epsilon0_radius(p);
    const double rt2 = std::sqrt(2.0);
    const double c = (1.0 - 2.0 * theta) / rt2;
    const double y_shift = -rt2 * std::log((1.0 - eps0) / eps0);

    auto hf = [y_shift, rt2](double y) { return 1.0 / (1.0 + std::exp((y - y_shift) / rt2)); };
    auto hpf = [hf, rt2](double y) {
        const double h = hf(y);
        return -h * (1.0 - h) / rt2;
    };

    FrontProfile fp;
    fp.dy = dy;
    fp.c_star = c;
    fp.alpha = alpha;
    fp.s_star = c / std::sqrt(1.0 + alpha * c * c);
    fp.epsilon0 = eps0;
    fp.decay_right = tail_decay_rate(c, theta); // equals 1/sqrt2 for the whole family
    fp.c_h = fp.decay_right;
    fp.theta = theta;
    fp.h_exact = hf;
    fp.hp_exact = hpf;

    // Span: 1 - h down to 1e-12 on the left; on the right both h <= 1e-12
    // and e^{c y} |h'| <= 1e-9 (the latter is what the spectral projection
    // weights need).
    const double y_lo = y_shift - std::log(1e12) * rt2;
    double y_hi = y_shift + std::log(1e12) * rt2;
    while (std::exp(c * y_hi) * std::abs(hpf(y_hi)) > 1e-9) y_hi += 1.0;
    const int k_lo = static_cast<int>(std::floor(y_lo / dy));
    const int k_hi = static_cast<int>(std::ceil(y_hi / dy));
    fp.y.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        const double yy = k * dy;
        fp.y.push_back(yy);
        fp.h.push_back(hf(yy));
        fp.hp.push_back(hpf(yy));
    }
    return fp;
}

/// A member of the travelling-front family as a grid state:
/// u(x) = h(sqrt(1+alpha c*^2) x - c* t - x0), u_t = -c* h'(same).
struct FrontState {
    WaveState state;
    std::size_t clamped = 0; // nodes that fell outside the sampled profile
};

inline FrontState hyperbolic_front_state(const FrontProfile& fp, double alpha, double x0,
                                         double t, const Grid1D& g) {
    if (!(alpha > 0.0)) throw std::domain_error("hyperbolic_front_state: alpha must be > 0");
    const double stretch = std::sqrt(1.0 + alpha * fp.c_star * fp.c_star);
    FrontState out;
    out.state = WaveState(g, t);
    out.state.far_left = 1.0;
    out.state.far_right = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double arg = stretch * g.x(i) - fp.c_star * t - x0;
        if (!fp.h_exact && !fp.in_range(arg)) ++out.clamped;
        out.state.u[static_cast<std::size_t>(i)] = fp.h_at(arg);
        out.state.ut[static_cast<std::size_t>(i)] = -fp.c_star * fp.hp_at(arg);
    }
    return out;
}

/// Decay data of the solved profile: the closed-form tail rate at +inf
/// (equal to the weighted-space threshold c_h) plus a regression on
/// log h over the tail as a consistency check.
struct DecayData {
    double decay_right = 0.0;
    double c_h = 0.0;
    double fitted_rate = 0.0;
    double rel_agreement = 0.0; // |fitted - decay_right| / decay_right
};

inline DecayData decay_data(const FrontProfile& fp, const BistablePotential& p) {
    DecayData out;
    out.decay_right = tail_decay_rate(fp.c_star, p.vpp(0.0));
    out.c_h = out.decay_right;

    double sy = 0, sl = 0, syy = 0, syl = 0;
    int count = 0;
    double hmax = 0, hmin = 1;
    for (std::size_t k = 0; k < fp.y.size(); ++k) {
        if (fp.h[k] < 1e-6 || fp.h[k] > 1e-2) continue;
        const double yy = fp.y[k], ll = std::log(fp.h[k]);
        sy += yy; sl += ll; syy += yy * yy; syl += yy * ll;
        hmax = std::max(hmax, fp.h[k]);
        hmin = std::min(hmin, fp.h[k]);
        ++count;
    }
    if (count < 10 || hmax / hmin < 100.0)
        throw numerical_error("decay_data: profile tail too short for a 2-decade fit");
    const double slope = (count * syl - sy * sl) / (count * syy - sy * sy);
    out.fitted_rate = -slope;
    out.rel_agreement = std::abs(out.fitted_rate - out.decay_right) / out.decay_right;
    return out;
}

} // namespace frontlab
