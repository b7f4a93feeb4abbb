#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"

namespace frontlab {

/// Time-integration parameters. The CFL bound dt <= 0.9 sqrt(alpha) dx
/// keeps the scheme inside the characteristic cone of the damped wave
/// operator (characteristic speed 1/sqrt(alpha)).
struct EvolveParams {
    double alpha = 1.0;
    double dt = 0.0;
    double dx = 0.0;
    double T = 0.0;

    static double auto_dt(double alpha, double dx) { return 0.9 * std::sqrt(alpha) * dx; }

    void check() const {
        if (!(alpha > 0.0)) throw config_error("EvolveParams: alpha must be > 0");
        if (!(dx > 0.0)) throw config_error("EvolveParams: dx must be > 0");
        if (!(dt > 0.0)) throw config_error("EvolveParams: dt must be > 0");
        if (dt > 0.9 * std::sqrt(alpha) * dx * (1.0 + 1e-12))
            throw config_error("EvolveParams: CFL violated, need dt <= 0.9 sqrt(alpha) dx");
    }
};

namespace detail {

// Discrete RHS  u_xx - V'(u) + extra  on interior nodes. The cubic family
// gets an inlined V' because this is the innermost loop of every run.
inline void wave_rhs(const Grid1D& g, const std::vector<double>& u,
                     const BistablePotential& p, const double* extra,
                     std::vector<double>& rhs) {
    const double inv_dx2 = 1.0 / (g.dx * g.dx);
    const std::size_t n = u.size();
    const bool cubic = std::isfinite(p.theta);
    const double th = p.theta;
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_dx2;
        const double vp = cubic ? u[i] * (u[i] - 1.0) * (u[i] - th) : p.vp(u[i]);
        rhs[i] = lap - vp + (extra ? extra[i] : 0.0);
    }
}

// Damping-implicit leapfrog update in increment form,
//   alpha (u+ - 2u + u-)/dt^2 + (u+ - u-)/(2 dt) = rhs,
// solved pointwise. The increment form makes equilibria exact fixed
// points in floating point.
inline void leap_update(const std::vector<double>& u_prev, const std::vector<double>& u_curr,
                        const std::vector<double>& rhs, double alpha, double dt,
                        std::vector<double>& u_next) {
    const double denom = alpha + 0.5 * dt;
    const double dt2 = dt * dt;
    const std::size_t n = u_curr.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
        u_next[i] = u_prev[i] + (dt2 * rhs[i] + 2.0 * alpha * (u_curr[i] - u_prev[i])) / denom;
}

// First step by Taylor expansion, with u_tt taken from the equation.
inline void bootstrap_first(const std::vector<double>& u0, const std::vector<double>& ut0,
                            const std::vector<double>& rhs0, double alpha, double dt,
                            std::vector<double>& u1) {
    const std::size_t n = u0.size();
    const double half_dt2 = 0.5 * dt * dt / alpha;
    for (std::size_t i = 1; i + 1 < n; ++i)
        u1[i] = u0[i] + dt * ut0[i] + half_dt2 * (rhs0[i] - ut0[i]);
}

} // namespace detail

/// Leapfrog integrator for one field with clamped far-field boundaries.
class Leapfrog {
  public:
    Leapfrog(const WaveState& s0, const BistablePotential& p, const EvolveParams& prm)
        : grid_(s0.grid), pot_(p), prm_(prm), far_left_(s0.far_left), far_right_(s0.far_right),
          t_(s0.t), u_prev_(s0.u), u_curr_(s0.u), rhs_(s0.u.size()) {
        prm_.check();
        if (!s0.finite()) throw numerical_error("Leapfrog: non-finite initial data");
        double m = 1.0;
        for (double v : s0.u) m = std::max(m, std::abs(v));
        blowup_limit_ = 10.0 * (1.0 + m);
        detail::wave_rhs(grid_, u_prev_, pot_, nullptr, rhs_);
        detail::bootstrap_first(u_prev_, s0.ut, rhs_, prm_.alpha, prm_.dt, u_curr_);
        clamp(u_curr_);
        t_ += prm_.dt;
        ++steps_;
    }

    void advance() {
        detail::wave_rhs(grid_, u_curr_, pot_, nullptr, rhs_);
        if (scratch_.size() != u_curr_.size()) scratch_.assign(u_curr_.size(), 0.0);
        detail::leap_update(u_prev_, u_curr_, rhs_, prm_.alpha, prm_.dt, scratch_);
        clamp(scratch_);
        u_prev_.swap(u_curr_);  // prev <- old curr
        u_curr_.swap(scratch_); // curr <- next, scratch keeps the retired level
        t_ += prm_.dt;
        if (++steps_ % 64 == 0) check_sane();
    }

    double time() const { return t_; }
    long steps() const { return steps_; }

    /// Snapshot at the current level; u_t is the centered difference,
    /// which needs one uncommitted look-ahead step.
    WaveState state() const {
        detail::wave_rhs(grid_, u_curr_, pot_, nullptr, rhs_);
        std::vector<double> u_next(u_curr_.size());
        detail::leap_update(u_prev_, u_curr_, rhs_, prm_.alpha, prm_.dt, u_next);
        u_next[0] = far_left_;
        u_next[u_next.size() - 1] = far_right_;
        WaveState s(grid_, t_);
        s.far_left = far_left_;
        s.far_right = far_right_;
        s.u = u_curr_;
        const double inv = 1.0 / (2.0 * prm_.dt);
        for (std::size_t i = 0; i < u_next.size(); ++i) s.ut[i] = (u_next[i] - u_prev_[i]) * inv;
        return s;
    }

    void check_sane() const {
        for (double v : u_curr_) {
            if (!std::isfinite(v)) throw numerical_error("Leapfrog: NaN detected");
            if (std::abs(v) > blowup_limit_) throw numerical_error("Leapfrog: blow-up detected");
        }
    }

  private:
    void clamp(std::vector<double>& u) const {
        u[0] = far_left_;
        u[u.size() - 1] = far_right_;
    }

    Grid1D grid_;
    BistablePotential pot_;
    EvolveParams prm_;
    double far_left_, far_right_;
    double t_;
    long steps_ = 0;
    double blowup_limit_ = 0.0;
    std::vector<double> u_prev_, u_curr_;
    mutable std::vector<double> rhs_;
    mutable std::vector<double> scratch_{};
};

/// One stepper step applied to a state (bootstrap from (u, u_t)).
inline WaveState step(const WaveState& s, const BistablePotential& p, const EvolveParams& prm) {
    Leapfrog lf(s, p, prm);
    return lf.state();
}

/// Run to final time T, invoking cb(state) every `every` steps and at the end.
template <class CB>
inline WaveState evolve(const WaveState& s0, const BistablePotential& p,
                        const EvolveParams& prm, int every, CB&& cb) {
    Leapfrog lf(s0, p, prm);
    const long nsteps = static_cast<long>(std::llround(prm.T / prm.dt));
    if (every > 0 && 1 % every == 0) cb(lf.state());
    for (long k = 2; k <= nsteps; ++k) {
        lf.advance();
        if (every > 0 && k % every == 0) cb(lf.state());
    }
    lf.check_sane();
    return lf.state();
}

/// u = v + r with v compactly supported to the right of the cutoff and r
/// carrying the small right tail.
struct SplitState {
    WaveState v;
    WaveState r;
    double xi0 = 0.0;
};

/// The ramp cutoff theta(x) = min(1, (1 + x/4)_+).
inline double ramp_cutoff(double x) { return std::min(1.0, std::max(0.0, 1.0 + x / 4.0)); }

/// Default cutoff location: 5 units right of the last point where the
/// solution magnitude exceeds 2 eps0.
inline double default_cutoff(const WaveState& s, double eps0) {
    for (int i = s.grid.n - 1; i >= 0; --i)
        if (std::abs(s.u[static_cast<std::size_t>(i)]) > 2.0 * eps0) return s.grid.x(i) + 5.0;
    return s.grid.x_left + 5.0;
}

inline SplitState split_initial(const WaveState& u0, double xi0) {
    if (!(xi0 > u0.grid.x_left && xi0 < u0.grid.x_right()))
        throw std::invalid_argument("split_initial: cutoff must lie inside the grid");
    SplitState ss;
    ss.xi0 = xi0;
    ss.r = WaveState(u0.grid, u0.t);
    ss.v = WaveState(u0.grid, u0.t);
    ss.r.far_left = 0.0;
    ss.r.far_right = 0.0;
    ss.v.far_left = u0.far_left;
    ss.v.far_right = 0.0;
    for (int i = 0; i < u0.grid.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double th = ramp_cutoff(u0.grid.x(i) - xi0);
        ss.r.u[k] = th * u0.u[k];
        ss.r.ut[k] = th * u0.ut[k];
        ss.v.u[k] = u0.u[k] - ss.r.u[k];
        ss.v.ut[k] = u0.ut[k] - ss.r.ut[k];
    }
    return ss;
}

/// Coupling term f(v, r) = V'(v) + V'(r) - V'(v+r); vanishes when either
/// argument does.
inline double coupling_f(const BistablePotential& p, double v, double r) {
    return p.vp(v) + p.vp(r) - p.vp(v + r);
}

/// Lockstep leapfrog for the split system: r obeys the full equation,
/// v obeys it with the coupling force, and the two discrete updates sum
/// exactly to the discrete update of u = v + r.
class SplitLeapfrog {
  public:
    SplitLeapfrog(const SplitState& s0, const BistablePotential& p, const EvolveParams& prm)
        : grid_(s0.v.grid), pot_(p), prm_(prm), xi0_(s0.xi0), t_(s0.v.t),
          v_far_left_(s0.v.far_left), v_prev_(s0.v.u), v_curr_(s0.v.u), r_prev_(s0.r.u),
          r_curr_(s0.r.u), rhs_v_(s0.v.u.size()), rhs_r_(s0.v.u.size()) {
        prm_.check();
        rhs_pair(v_prev_, r_prev_);
        detail::bootstrap_first(v_prev_, s0.v.ut, rhs_v_, prm_.alpha, prm_.dt, v_curr_);
        detail::bootstrap_first(r_prev_, s0.r.ut, rhs_r_, prm_.alpha, prm_.dt, r_curr_);
        clamp();
        t_ += prm_.dt;
    }

    void advance() {
        rhs_pair(v_curr_, r_curr_);
        std::vector<double> v_next(v_curr_.size()), r_next(r_curr_.size());
        detail::leap_update(v_prev_, v_curr_, rhs_v_, prm_.alpha, prm_.dt, v_next);
        detail::leap_update(r_prev_, r_curr_, rhs_r_, prm_.alpha, prm_.dt, r_next);
        v_prev_.swap(v_curr_);
        v_curr_.swap(v_next);
        r_prev_.swap(r_curr_);
        r_curr_.swap(r_next);
        clamp();
        t_ += prm_.dt;
    }

    double time() const { return t_; }
    double xi0() const { return xi0_; }

    SplitState state() const {
        rhs_pair(v_curr_, r_curr_);
        std::vector<double> v_next(v_curr_.size()), r_next(r_curr_.size());
        detail::leap_update(v_prev_, v_curr_, rhs_v_, prm_.alpha, prm_.dt, v_next);
        detail::leap_update(r_prev_, r_curr_, rhs_r_, prm_.alpha, prm_.dt, r_next);
        v_next[0] = v_far_left_;
        v_next[v_next.size() - 1] = 0.0;
        r_next[0] = 0.0;
        r_next[r_next.size() - 1] = 0.0;
        SplitState s;
        s.xi0 = xi0_;
        s.v = WaveState(grid_, t_);
        s.r = WaveState(grid_, t_);
        s.v.far_left = v_far_left_;
        s.v.far_right = 0.0;
        s.r.far_left = 0.0;
        s.r.far_right = 0.0;
        s.v.u = v_curr_;
        s.r.u = r_curr_;
        const double inv = 1.0 / (2.0 * prm_.dt);
        for (std::size_t i = 0; i < v_next.size(); ++i) {
            s.v.ut[i] = (v_next[i] - v_prev_[i]) * inv;
            s.r.ut[i] = (r_next[i] - r_prev_[i]) * inv;
        }
        return s;
    }

  private:
    // rhs_r = Lap r - V'(r); rhs_v = Lap v - V'(v+r) + V'(r).
    void rhs_pair(const std::vector<double>& v, const std::vector<double>& r) const {
        const double inv_dx2 = 1.0 / (grid_.dx * grid_.dx);
        const bool cubic = std::isfinite(pot_.theta);
        const double th = pot_.theta;
        const std::size_t n = v.size();
        rhs_v_[0] = rhs_v_[n - 1] = rhs_r_[0] = rhs_r_[n - 1] = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double lap_v = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv_dx2;
            const double lap_r = (r[i + 1] - 2.0 * r[i] + r[i - 1]) * inv_dx2;
            const double w = v[i] + r[i];
            const double vp_r = cubic ? r[i] * (r[i] - 1.0) * (r[i] - th) : pot_.vp(r[i]);
            const double vp_w = cubic ? w * (w - 1.0) * (w - th) : pot_.vp(w);
            rhs_r_[i] = lap_r - vp_r;
            rhs_v_[i] = lap_v - vp_w + vp_r;
        }
    }

    void clamp() {
        v_curr_[0] = v_far_left_;
        v_curr_[v_curr_.size() - 1] = 0.0;
        r_curr_[0] = 0.0;
        r_curr_[r_curr_.size() - 1] = 0.0;
    }

    Grid1D grid_;
    BistablePotential pot_;
    EvolveParams prm_;
    double xi0_;
    double t_;
    double v_far_left_;
    std::vector<double> v_prev_, v_curr_, r_prev_, r_curr_;
    mutable std::vector<double> rhs_v_, rhs_r_;
};

/// Advance a split state by round(T/dt) steps.
inline SplitState evolve_split(const SplitState& s0, const BistablePotential& p,
                               const EvolveParams& prm) {
    SplitLeapfrog lf(s0, p, prm);
    const long nsteps = static_cast<long>(std::llround(prm.T / prm.dt));
    for (long k = 2; k <= nsteps; ++k) lf.advance();
    return lf.state();
}

/// Rightmost point where |v| reaches `level`, located by a right-to-left
/// scan with linear interpolation at the crossing. Returns -inf when the
/// level is never reached. A reading within `right_margin` of the right
/// boundary means the quantity is contaminated by the boundary clamp.
inline double invasion_point(const WaveState& v, double level, double right_margin = 2.0) {
    const Grid1D& g = v.grid;
    const int mcells = static_cast<int>(std::llround(right_margin / g.dx));
    for (int i = g.n - 1; i >= g.n - 1 - mcells && i >= 0; --i)
        if (std::abs(v.u[static_cast<std::size_t>(i)]) >= level)
            throw numerical_error("invasion_point: level reached inside the right boundary margin");
    for (int i = g.n - 2 - mcells; i >= 0; --i) {
        const double a = std::abs(v.u[static_cast<std::size_t>(i)]);
        if (a >= level) {
            const double b = std::abs(v.u[static_cast<std::size_t>(i + 1)]);
            const double frac = (a - level) / std::max(a - b, 1e-300);
            return g.x(i) + g.dx * std::min(1.0, std::max(0.0, frac));
        }
    }
    return -std::numeric_limits<double>::infinity();
}

/// Invasion-point history with its fitted tail slope.
struct InvasionTrace {
    std::vector<double> times;
    std::vector<double> xbar;
    double s_fit = 0.0;
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
};

/// Exponential-decay fit of a squared-norm trace on its tail half.
struct DecayFit {
    double K = 0.0;
    double mu = 0.0;
};

inline DecayFit remainder_decay(const std::vector<double>& times,
                                const std::vector<double>& norms2) {
    if (times.size() != norms2.size() || times.size() < 4)
        throw std::invalid_argument("remainder_decay: need matched series of length >= 4");
    bool all_zero = true;
    for (double v : norms2)
        if (v != 0.0) all_zero = false;
    if (all_zero) return {0.0, std::numeric_limits<double>::infinity()};

    const std::size_t lo = times.size() / 2;
    if (!(norms2.back() < 0.9 * norms2[lo]))
        throw numerical_error("remainder_decay: trace is not eventually decreasing");
    double st = 0, sl = 0, stt = 0, stl = 0;
    int count = 0;
    for (std::size_t i = lo; i < times.size(); ++i) {
        if (norms2[i] <= 0.0) continue;
        const double t = times[i], l = std::log(norms2[i]);
        st += t; sl += l; stt += t * t; stl += t * l;
        ++count;
    }
    if (count < 3) throw numerical_error("remainder_decay: too few positive samples in tail");
    const double slope = (count * stl - st * sl) / (count * stt - st * st);
    const double inter = (sl - slope * st) / count;
    return {std::exp(inter), -slope};
}

} // namespace frontlab
