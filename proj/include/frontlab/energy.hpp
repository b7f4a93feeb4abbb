#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/evolve.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"

namespace frontlab {

/// Galilean frame with parabolic speed c, physical speed s = c/stretch,
/// stretch = sqrt(1 + alpha c^2). The frame coordinate is
/// y = stretch * x - c t.
struct FrameSpec {
    double c = 0.0;
    double s = 0.0;
    double stretch = 1.0;
    double alpha = 1.0;
};

inline FrameSpec frame(double c, double alpha) {
    if (!(c >= 0.0)) throw std::domain_error("frame: c must be >= 0");
    if (!(alpha > 0.0)) throw std::domain_error("frame: alpha must be > 0");
    FrameSpec f;
    f.c = c;
    f.alpha = alpha;
    f.stretch = std::sqrt(1.0 + alpha * c * c);
    f.s = c / f.stretch;
    return f;
}

/// Inverse speed map. Physical speeds at or above the characteristic
/// speed 1/sqrt(alpha) have no parabolic counterpart.
inline FrameSpec frame_from_physical(double s, double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("frame_from_physical: alpha must be > 0");
    if (!(s >= 0.0 && s * s * alpha < 1.0))
        throw std::domain_error("frame_from_physical: need 0 <= s < 1/sqrt(alpha)");
    return frame(s / std::sqrt(1.0 - alpha * s * s), alpha);
}

namespace detail {

// Shared integrand pass. All weighted frame quantities are evaluated in
// laboratory coordinates: with y = stretch*x - c t the frame derivative
// is  v_dot_c = u_t + s u_x,  the frame space derivative is u_x/stretch,
// and dy = stretch dx. The exponent is assembled per node so anchored
// weights never overflow silently (nodes with zero integrand are exempt).
template <class F>
inline double weighted_lab_integral(const WaveState& w, const FrameSpec& fr,
                                    double exponent_at_x0, double x0, F&& integrand) {
    const Grid1D& g = w.grid;
    const std::vector<double> ux = derivative(g, w.u);
    double sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double val = integrand(w.u[k], ux[k], w.ut[k]);
        if (val == 0.0) continue;
        const double e = fr.c * fr.stretch * (g.x(i) - x0) + exponent_at_x0;
        if (e > 700.0) throw numerical_error("frame energy: weight overflow over nonzero integrand");
        const double trap = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
        sum += trap * std::exp(e) * val;
    }
    return sum * g.dx * fr.stretch;
}

} // namespace detail

/// Weighted frame energy anchored at the frame image of anchor_x:
///   E = stretch * int e^{c stretch (x - anchor_x)}
///         ( alpha/2 (u_t + s u_x)^2 + u_x^2 / (2 stretch^2) + V(u) ) dx.
inline double frame_energy(const WaveState& w, const BistablePotential& p, const FrameSpec& fr,
                           double anchor_x) {
    const double a2 = 0.5 * fr.alpha;
    const double inv2s2 = 0.5 / (fr.stretch * fr.stretch);
    return detail::weighted_lab_integral(w, fr, 0.0, anchor_x,
                                         [&](double u, double ux, double ut) {
                                             const double vdot = ut + fr.s * ux;
                                             return a2 * vdot * vdot + inv2s2 * ux * ux + p.v(u);
                                         });
}

/// Instantaneous dissipation rate (1 + alpha c^2) int e^{c(y-y0)} v_dot_c^2 dy
/// in the same anchoring convention.
inline double dissipation_rate(const WaveState& w, const FrameSpec& fr, double anchor_x) {
    const double pref = fr.stretch * fr.stretch;
    return pref * detail::weighted_lab_integral(w, fr, 0.0, anchor_x,
                                                [&](double, double ux, double ut) {
                                                    const double vdot = ut + fr.s * ux;
                                                    return vdot * vdot;
                                                });
}

/// Time-integrated dissipation between two consecutive snapshots
/// (trapezoid in time).
inline double dissipation(const WaveState& now, const WaveState& prev, const FrameSpec& fr,
                          double anchor_x) {
    const double d1 = dissipation_rate(now, fr, anchor_x);
    const double d0 = dissipation_rate(prev, fr, anchor_x);
    return 0.5 * (d0 + d1) * (now.t - prev.t);
}

/// Remainder term int e^{c(y-y0)} f(v_c, r_c) v_dot_c dy in lab form.
inline double remainder_term(const WaveState& v, const WaveState& r, const BistablePotential& p,
                             const FrameSpec& fr, double anchor_x) {
    const Grid1D& g = v.grid;
    const std::vector<double> vx = derivative(g, v.u);
    double sum = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double f = coupling_f(p, v.u[k], r.u[k]);
        if (f == 0.0) continue;
        const double e = fr.c * fr.stretch * (g.x(i) - anchor_x);
        if (e > 700.0) throw numerical_error("remainder_term: weight overflow");
        const double trap = (i == 0 || i == g.n - 1) ? 0.5 : 1.0;
        sum += trap * std::exp(e) * f * (v.ut[k] + fr.s * vx[k]);
    }
    return sum * g.dx * fr.stretch;
}

/// Envelope for the remainder term along a trajectory anchored at the
/// invasion point: |R(t)| <= K3 e^{-mu t} (E(t) + K3/c), with K3 the
/// smallest constant that works at every recorded sample (max over the
/// per-sample positive roots of the quadratic) and mu half the decay
/// rate of the squared remainder norm.
struct RemainderEnvelope {
    double K3 = 0.0;
    double mu = 0.0;

    double bound(double t, double E, double c) const {
        return K3 * std::exp(-mu * t) * (std::max(E, 0.0) + K3 / c);
    }
};

inline RemainderEnvelope fit_remainder_envelope(const std::vector<double>& times,
                                                const std::vector<double>& R_values,
                                                const std::vector<double>& E_values, double c,
                                                double mu) {
    if (times.size() != R_values.size() || times.size() != E_values.size())
        throw std::invalid_argument("fit_remainder_envelope: mismatched series");
    RemainderEnvelope env;
    env.mu = mu;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double E = std::max(E_values[i], 0.0);
        const double rhs = std::abs(R_values[i]) * std::exp(mu * times[i]);
        // K^2/c + K E - rhs = 0, positive root
        const double K = 0.5 * c * (-E + std::sqrt(E * E + 4.0 * rhs / c));
        env.K3 = std::max(env.K3, K);
    }
    return env;
}

/// E_c(y0, t) at a fixed anchor y0 in the moving frame; equals
/// e^{-c(y0 + c t)} times the energy anchored at lab x = 0. This is the
/// Lyapunov quantity: non-increasing in t whenever the remainder is zero.
inline double lyapunov_energy(const WaveState& w, const BistablePotential& p, const FrameSpec& fr,
                              double y0_frame) {
    const double a2 = 0.5 * fr.alpha;
    const double inv2s2 = 0.5 / (fr.stretch * fr.stretch);
    const double shift = -fr.c * (y0_frame + fr.c * w.t);
    return detail::weighted_lab_integral(w, fr, shift, 0.0,
                                         [&](double u, double ux, double ut) {
                                             const double vdot = ut + fr.s * ux;
                                             return a2 * vdot * vdot + inv2s2 * ux * ux + p.v(u);
                                         });
}

inline double lyapunov_dissipation_rate(const WaveState& w, const FrameSpec& fr, double y0_frame) {
    const double pref = fr.stretch * fr.stretch;
    const double shift = -fr.c * (y0_frame + fr.c * w.t);
    return pref * detail::weighted_lab_integral(w, fr, shift, 0.0,
                                                [&](double, double ux, double ut) {
                                                    const double vdot = ut + fr.s * ux;
                                                    return vdot * vdot;
                                                });
}

/// Lower bound e^{c(ybar - y0)} (min V / c + c eps0^2 / 2); at the
/// invasion-point anchor the exponential factor is 1.
inline double energy_lower_bound(double min_v_value, double c, double eps0) {
    return min_v_value / c + 0.5 * c * eps0 * eps0;
}

/// Both sides of the weighted Poincare inequalities on [y1, inf):
///   (c^2/4) int e^{cy} v^2  <=  int e^{cy} v'^2        (lhs, rhs)
///   c e^{c y1} v(y1)^2      <=  int e^{cy} v'^2        (lhs2, rhs2)
/// anchored at y1 to keep the weights representable.
struct PoincareCheck {
    double lhs = 0.0, rhs = 0.0, lhs2 = 0.0, rhs2 = 0.0;
};

inline PoincareCheck poincare_check(const Grid1D& g, std::span<const double> v, double c,
                                    double y1, std::span<const double> v_prime = {}) {
    if (!(c > 0.0)) throw std::domain_error("poincare_check: c must be > 0");
    std::vector<double> vp_storage;
    if (v_prime.empty()) vp_storage = derivative(g, v);
    const std::span<const double> vp = v_prime.empty() ? std::span<const double>(vp_storage)
                                                       : v_prime;
    const int i1 = g.nearest(y1);
    const double y1n = g.x(i1);
    double s_v2 = 0.0, s_vp2 = 0.0;
    // e^{cy} f^2 is assembled through its log when the bare weight would
    // overflow; only a genuinely divergent product raises an error.
    auto weighted_sq = [](double e, double f) {
        if (f == 0.0) return 0.0;
        if (e <= 600.0) return std::exp(e) * f * f;
        const double t = e + 2.0 * std::log(std::abs(f));
        if (t > 700.0) throw numerical_error("poincare_check: weighted tail diverges");
        return std::exp(t);
    };
    for (int i = i1; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double e = c * (g.x(i) - y1n);
        const double w = (i == i1 || i == g.n - 1) ? 0.5 : 1.0;
        s_v2 += w * weighted_sq(e, v[k]);
        s_vp2 += w * weighted_sq(e, vp[k]);
    }
    PoincareCheck out;
    out.rhs = s_vp2 * g.dx;
    out.rhs2 = out.rhs;
    out.lhs = 0.25 * c * c * s_v2 * g.dx;
    out.lhs2 = c * v[static_cast<std::size_t>(i1)] * v[static_cast<std::size_t>(i1)];
    return out;
}

/// Least-squares slope of the invasion trace on its tail half plus the
/// subsonic verdict.
struct InvasionSpeed {
    double s_inf = 0.0;
    bool subsonic = false;
};

inline InvasionSpeed invasion_speed(const InvasionTrace& trace, double alpha,
                                    double jump_tolerance = 1.0) {
    const std::size_t n = trace.times.size();
    if (n < 10) throw std::invalid_argument("invasion_speed: need at least 10 samples");
    const std::size_t lo = n / 2;
    for (std::size_t i = lo + 1; i < n; ++i)
        if (trace.xbar[i] < trace.xbar[i - 1] - jump_tolerance)
            throw numerical_error("invasion_speed: non-monotone tail beyond jump tolerance");
    double st = 0, sx = 0, stt = 0, stx = 0;
    const double cnt = static_cast<double>(n - lo);
    for (std::size_t i = lo; i < n; ++i) {
        st += trace.times[i];
        sx += trace.xbar[i];
        stt += trace.times[i] * trace.times[i];
        stx += trace.times[i] * trace.xbar[i];
    }
    InvasionSpeed out;
    out.s_inf = (cnt * stx - st * sx) / (cnt * stt - st * st);
    out.subsonic = out.s_inf > 0.0 && out.s_inf * out.s_inf * alpha < 1.0;
    return out;
}

/// sup_{|tau| <= T} |xbar(t+tau) - xbar(t) - s* tau| over the last window
/// of the trace centered at t_end - T.
inline double increment_defect(const InvasionTrace& trace, double s_star, double T) {
    const std::size_t n = trace.times.size();
    if (n < 3) throw std::invalid_argument("increment_defect: trace too short");
    const double t_c = trace.times.back() - T;
    std::size_t ic = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(trace.times[i] - t_c) < std::abs(trace.times[ic] - t_c)) ic = i;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tau = trace.times[i] - trace.times[ic];
        if (std::abs(tau) > T) continue;
        worst = std::max(worst, std::abs(trace.xbar[i] - trace.xbar[ic] - s_star * tau));
    }
    return worst;
}

/// One row of the invasion-anchored energy table.
struct InvasionEnergySample {
    double t = 0.0;
    double E = 0.0;
    double D = 0.0; // dissipation integrated since the previous sample
    double R = 0.0; // remainder term at this sample
    double lower_bound = 0.0;
};

/// E_c(ybar_c(t), t) tables for a stored trajectory, one series per
/// weight exponent. Snapshots whose invasion point is undefined (the
/// -inf sentinel) are skipped. r_states may be empty (then R = 0).
struct InvasionEnergyTable {
    std::vector<double> c_list;
    std::vector<std::vector<InvasionEnergySample>> series; // [c index][time]
};

inline InvasionEnergyTable invasion_energy_series(const std::vector<WaveState>& v_states,
                                                  const std::vector<WaveState>& r_states,
                                                  const BistablePotential& p, double alpha,
                                                  double eps0,
                                                  const std::vector<double>& c_list) {
    if (!r_states.empty() && r_states.size() != v_states.size())
        throw std::invalid_argument("invasion_energy_series: mismatched split snapshots");
    InvasionEnergyTable table;
    table.c_list = c_list;
    table.series.resize(c_list.size());
    const double minV = p.v(1.0);
    std::vector<double> prev_rate(c_list.size(), 0.0);
    bool have_prev = false;
    double prev_t = 0.0;
    for (std::size_t si = 0; si < v_states.size(); ++si) {
        const WaveState& v = v_states[si];
        const double xbar = invasion_point(v, eps0);
        if (std::isinf(xbar)) continue;
        for (std::size_t ci = 0; ci < c_list.size(); ++ci) {
            const FrameSpec fr = frame(c_list[ci], alpha);
            InvasionEnergySample row;
            row.t = v.t;
            row.E = frame_energy(v, p, fr, xbar);
            const double rate = dissipation_rate(v, fr, xbar);
            row.D = have_prev ? 0.5 * (rate + prev_rate[ci]) * (v.t - prev_t) : 0.0;
            row.R = r_states.empty() ? 0.0 : remainder_term(v, r_states[si], p, fr, xbar);
            row.lower_bound = energy_lower_bound(minV, c_list[ci], eps0);
            table.series[ci].push_back(row);
            prev_rate[ci] = rate;
        }
        prev_t = v.t;
        have_prev = true;
    }
    return table;
}

/// Boundedness verdict for an invasion-anchored energy series: the tail
/// half must show no sustained monotone growth and stay within a factor
/// 10 of its median magnitude.
inline bool energy_series_bounded(const std::vector<double>& series) {
    if (series.size() < 8) throw std::invalid_argument("energy_series_bounded: series too short");
    const std::size_t lo = series.size() / 2;
    std::vector<double> tail(series.begin() + static_cast<std::ptrdiff_t>(lo), series.end());

    double scale = 0.0;
    for (double v : tail) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-12);

    std::size_t nondecreasing = 0;
    for (std::size_t i = 1; i < tail.size(); ++i)
        if (tail[i] >= tail[i - 1] - 1e-9 * scale) ++nondecreasing;
    const double rise = tail.back() - tail.front();
    const bool monotone_growth =
        nondecreasing >= (tail.size() - 1) * 9 / 10 && rise > 0.05 * scale;

    std::vector<double> mags(tail.size());
    for (std::size_t i = 0; i < tail.size(); ++i) mags[i] = std::abs(tail[i]);
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2),
                     mags.end());
    const double median = std::max(mags[mags.size() / 2], 1e-12);
    const double mx = *std::max_element(mags.begin(), mags.end());

    return !monotone_growth && mx <= 10.0 * median;
}

/// Energy of the split initial data at frame anchor 0 for each weight
/// exponent; diverges to -inf as c -> 0 exactly for front-like data.
inline std::vector<double> basin_divergence(const WaveState& v0, const BistablePotential& p,
                                            double alpha, const std::vector<double>& c_list) {
    std::vector<double> out;
    out.reserve(c_list.size());
    for (double c : c_list) out.push_back(frame_energy(v0, p, frame(c, alpha), 0.0));
    return out;
}

/// Uniformly local distance of a snapshot to the travelling-wave shape
/// anchored at the invasion point:
///   |u(xbar+.) - v*|_{H1ul} + |u_t(xbar+.) + s* v*'|_{L2ul},
/// with v*(x) = h(stretch x). Boundary-adjacent windows are excluded.
inline double repair_error(const WaveState& w, const FrontProfile& fp, double alpha, double xbar,
                           double boundary_margin = 5.0) {
    const Grid1D& g = w.grid;
    const double stretch = std::sqrt(1.0 + alpha * fp.c_star * fp.c_star);
    const double s_star = fp.c_star / stretch;
    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> d0(n), d1(n), dt(n);
    const std::vector<double> ux = derivative(g, w.u);
    for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double arg = stretch * (g.x(i) - xbar);
        const double hstar = fp.h_at(arg);
        const double hpstar = stretch * fp.hp_at(arg);
        d0[k] = w.u[k] - hstar;
        d1[k] = ux[k] - hpstar;
        dt[k] = w.ut[k] + s_star * hpstar;
    }
    const int skip = static_cast<int>(std::llround(boundary_margin / g.dx));
    Grid1D inner(g.x(skip), g.dx, g.n - 2 * skip);
    auto sub = [&](const std::vector<double>& a) {
        return std::span<const double>(a.data() + skip, static_cast<std::size_t>(inner.n));
    };
    const double e0 = ul_l2(inner, sub(d0));
    const double e1 = ul_l2(inner, sub(d1));
    const double et = ul_l2(inner, sub(dt));
    return std::sqrt(e0 * e0 + e1 * e1) + et;
}

} // namespace frontlab
