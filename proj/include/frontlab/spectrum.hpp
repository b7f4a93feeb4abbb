#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "frontlab/errors.hpp"
#include "frontlab/evolve.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"
#include "frontlab/rng.hpp"

namespace frontlab {

/// Essential-spectrum edge of the linearization,
/// mu_alpha = (1/(2 alpha)) (-1 + Re sqrt(1 - 4 alpha m)), m = min(V''(0), V''(1)).
/// For 4 alpha m > 1 the root is imaginary and the edge is -1/(2 alpha).
inline double mu_alpha(double alpha, double m) {
    if (!(alpha > 0.0)) throw std::domain_error("mu_alpha: alpha must be > 0");
    if (!(m > 0.0)) throw std::domain_error("mu_alpha: m must be > 0");
    const double disc = 1.0 - 4.0 * alpha * m;
    const double re_root = disc >= 0.0 ? std::sqrt(disc) : 0.0;
    return (-1.0 + re_root) / (2.0 * alpha);
}

/// Symmetric tridiagonal matrix (diagonal d, off-diagonal e).
struct SymTridiag {
    std::vector<double> d;
    std::vector<double> e;
    std::size_t size() const { return d.size(); }
};

/// Discretization of the self-adjoint reduction  L = d^2/dy^2 - (g(y) + c^2/4),
/// g = V''(h), with Dirichlet truncation at the window ends. The default
/// window is where the translation eigenfunction e^{c y/2} h' is above
/// 1e-12 of its peak, so the truncation error sits below the target
/// eigenvalue accuracy.
struct OperatorL {
    SymTridiag T;
    Grid1D grid;
    double c = 0.0;
};

inline OperatorL build_L(const FrontProfile& fp, const BistablePotential& p, int stride = 1,
                         double y_lo = std::numeric_limits<double>::quiet_NaN(),
                         double y_hi = std::numeric_limits<double>::quiet_NaN()) {
    const double c = fp.c_star;
    if (std::isnan(y_lo) || std::isnan(y_hi)) {
        double peak = 0.0;
        std::vector<double> u0(fp.y.size());
        for (std::size_t k = 0; k < fp.y.size(); ++k) {
            u0[k] = std::exp(0.5 * c * fp.y[k]) * std::abs(fp.hp[k]);
            peak = std::max(peak, u0[k]);
        }
        std::size_t a = 0, b = fp.y.size() - 1;
        while (a + 1 < b && u0[a] < 1e-12 * peak) ++a;
        while (b > a + 1 && u0[b] < 1e-12 * peak) --b;
        y_lo = fp.y[a];
        y_hi = fp.y[b];
    }
    const double dy = fp.dy * stride;
    std::size_t k_lo = 0;
    while (k_lo < fp.y.size() && fp.y[k_lo] < y_lo - 1e-12) ++k_lo;
    const int n = static_cast<int>((fp.y[fp.y.size() - 1] - fp.y[k_lo]) / dy) + 1;
    int count = 0;
    for (int i = 0; i < n; ++i)
        if (fp.y[k_lo] + i * dy <= y_hi + 1e-12) ++count;

    OperatorL L;
    L.c = c;
    L.grid = Grid1D(fp.y[k_lo], dy, count);
    L.T.d.resize(static_cast<std::size_t>(count));
    L.T.e.assign(static_cast<std::size_t>(count - 1), 1.0 / (dy * dy));
    const double inv_dy2 = 1.0 / (dy * dy);
    for (int i = 0; i < count; ++i) {
        const double yy = L.grid.x(i);
        const double h = fp.h_at(yy);
        L.T.d[static_cast<std::size_t>(i)] = -2.0 * inv_dy2 - (p.vpp(h) + 0.25 * c * c);
    }
    return L;
}

namespace detail {

// Sturm count: number of eigenvalues of T strictly below x.
inline int sturm_count(const SymTridiag& T, double x) {
    const double safmin = 1e-300;
    int cnt = 0;
    double q = T.d[0] - x;
    if (q < 0.0) ++cnt;
    for (std::size_t i = 1; i < T.size(); ++i) {
        if (std::abs(q) < safmin) q = q < 0.0 ? -safmin : safmin;
        q = T.d[i] - x - T.e[i - 1] * T.e[i - 1] / q;
        if (q < 0.0) ++cnt;
    }
    return cnt;
}

} // namespace detail

/// k largest eigenvalues of a symmetric tridiagonal matrix, each located
/// by bisection on the Sturm count and refined to 1e-12, returned in
/// descending order. Bisection guarantees the count is right even inside
/// the dense cluster left by Dirichlet truncation of the essential
/// spectrum.
inline std::vector<double> top_eigs(const SymTridiag& T, int k) {
    if (k < 1) throw std::invalid_argument("top_eigs: k must be >= 1");
    const int n = static_cast<int>(T.size());
    if (k > n) throw std::invalid_argument("top_eigs: k exceeds matrix size");
    double lo = T.d[0], hi = T.d[0];
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.e[static_cast<std::size_t>(i - 1)]);
        if (i + 1 < n) r += std::abs(T.e[static_cast<std::size_t>(i)]);
        lo = std::min(lo, T.d[static_cast<std::size_t>(i)] - r);
        hi = std::max(hi, T.d[static_cast<std::size_t>(i)] + r);
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j) {
        const int index = n - j; // ascending index of the j-th largest
        double a = lo, b = hi;
        int iters = 0;
        while (b - a > 1e-12) {
            const double mid = 0.5 * (a + b);
            (detail::sturm_count(T, mid) > index ? b : a) = mid;
            if (++iters > 200) throw numerical_error("top_eigs: bisection failed to converge");
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

/// Temporal eigenvalue from a self-adjoint eigenvalue mu through
/// mu = lambda (1 + alpha lambda)(1 + alpha c^2); the branch with the
/// larger real part is returned. Below the real window the pair is
/// complex with real part exactly -1/(2 alpha).
struct LambdaBranch {
    double lambda = 0.0;
    bool real_branch = true;
};

inline LambdaBranch map_mu_to_lambda(double mu, double alpha, double c) {
    const double disc = 1.0 + 4.0 * alpha * mu / (1.0 + alpha * c * c);
    if (disc < 0.0) return {-0.5 / alpha, false};
    return {(-1.0 + std::sqrt(disc)) / (2.0 * alpha), true};
}

/// Spectral gap nu = min(-lambda_1, -mu_alpha), with the translation
/// eigenvalue lambda_0 = 0 excluded. Only eigenvalues clearly above the
/// truncated essential edge -(m + c^2/4) count as discrete.
struct SpectralGap {
    double nu = 0.0;
    double mu1 = std::numeric_limits<double>::quiet_NaN();
    double lambda1 = std::numeric_limits<double>::quiet_NaN();
    bool has_discrete_mu1 = false;
    double mu_edge_L = 0.0;
};

inline SpectralGap spectral_gap(const std::vector<double>& mus, double alpha, double c,
                                double m) {
    if (mus.empty()) throw std::invalid_argument("spectral_gap: empty spectrum");
    if (!(std::abs(mus[0]) < 1e-3))
        throw numerical_error("spectral_gap: leading eigenvalue is not the translation mode");
    SpectralGap out;
    out.mu_edge_L = -(m + 0.25 * c * c);
    const double margin = 2e-3 * (1.0 + std::abs(out.mu_edge_L));
    const double edge = out.mu_edge_L + margin;
    for (std::size_t i = 1; i < mus.size(); ++i) {
        if (mus[i] >= -1e-6) continue; // numerically degenerate with the translation mode
        if (mus[i] > edge) {
            out.mu1 = mus[i];
            out.has_discrete_mu1 = true;
            break;
        }
        break; // inside the truncation cluster: no separable discrete eigenvalue
    }
    const double nu_ess = -mu_alpha(alpha, m);
    if (out.has_discrete_mu1) {
        const LambdaBranch lb = map_mu_to_lambda(out.mu1, alpha, c);
        out.lambda1 = lb.lambda;
        out.nu = std::min(-lb.lambda, nu_ess);
    } else {
        out.nu = nu_ess;
    }
    return out;
}

/// Spectral projection weights onto the translation mode:
/// psi2 = e^{c y} h', psi1 = psi2/alpha + 2 c psi2'. Because h solves the
/// profile equation, psi2' = e^{c y} V'(h), which avoids differencing.
/// N normalizes so that the projection fixes (h', 0).
struct ProjectionWeights {
    Grid1D grid;
    std::vector<double> psi1;
    std::vector<double> psi2;
    std::vector<double> hp;
    double N = 0.0;

    /// Projection coefficient of a pair (u, v) sampled on the same grid;
    /// the projected pair is coeff * (h', 0).
    double coefficient(std::span<const double> u, std::span<const double> v) const {
        std::vector<double> f(psi1.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = psi1[i] * u[i] + psi2[i] * v[i];
        return N * trapezoid(grid, f);
    }
};

inline ProjectionWeights projection_weights(const FrontProfile& fp, const BistablePotential& p,
                                            double alpha) {
    const double c = fp.c_star;
    ProjectionWeights w;
    w.grid = Grid1D(fp.y.front(), fp.dy, static_cast<int>(fp.y.size()));
    const std::size_t n = fp.y.size();
    w.psi1.resize(n);
    w.psi2.resize(n);
    w.hp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ew = std::exp(c * fp.y[k]);
        w.psi2[k] = ew * fp.hp[k];
        w.psi1[k] = w.psi2[k] / alpha + 2.0 * c * ew * p.vp(fp.h[k]);
        w.hp[k] = fp.hp[k];
    }
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) f[k] = w.psi1[k] * fp.hp[k];
    const double denom = trapezoid(w.grid, f);
    if (std::abs(denom) < 1e-14)
        throw numerical_error("projection_weights: normalization integral vanished");
    w.N = 1.0 / denom;
    return w;
}

/// Smooth compactly supported perturbation in the frame coordinate.
struct FrontPerturbation {
    std::function<double(double)> q;
    std::function<double(double)> qp;
};

/// Seeded sum of three C^2 bumps (1-z^2)^3 on [-1,1]; reproducible across
/// implementations through the documented splitmix64 stream.
inline FrontPerturbation seeded_bump(std::uint64_t seed, double amplitude) {
    SplitMix64 rng(seed);
    std::vector<double> a(3), b(3), wdt(3);
    for (int j = 0; j < 3; ++j) {
        a[j] = rng.uniform(0.5, 1.0) * (rng.next_double() < 0.5 ? -1.0 : 1.0);
        b[j] = rng.uniform(-6.0, 6.0);
        wdt[j] = rng.uniform(1.5, 3.0);
    }
    double peak = 0.0;
    for (double z = -10.0; z <= 10.0; z += 0.01) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double zz = (z - b[j]) / wdt[j];
            if (std::abs(zz) < 1.0) s += a[j] * std::pow(1.0 - zz * zz, 3);
        }
        peak = std::max(peak, std::abs(s));
    }
    const double scale = amplitude / std::max(peak, 1e-12);
    FrontPerturbation out;
    out.q = [a, b, wdt, scale](double y) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double z = (y - b[j]) / wdt[j];
            if (std::abs(z) < 1.0) s += a[j] * std::pow(1.0 - z * z, 3);
        }
        return scale * s;
    };
    out.qp = [a, b, wdt, scale](double y) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double z = (y - b[j]) / wdt[j];
            if (std::abs(z) < 1.0) s += -6.0 * a[j] * z * (1.0 - z * z) * (1.0 - z * z) / wdt[j];
        }
        return scale * s;
    };
    return out;
}

/// Front state plus a frame-coordinate perturbation (q, 0) of the pair
/// (u_c, u_dot_c); optionally with its translation-mode component removed.
inline WaveState perturbed_front_state(const FrontProfile& fp, const BistablePotential& p,
                                       double alpha, const Grid1D& g,
                                       const FrontPerturbation& pert, bool remove_kernel) {
    const double c = fp.c_star;
    const double stretch = std::sqrt(1.0 + alpha * c * c);
    double kappa = 0.0;
    if (remove_kernel) {
        const ProjectionWeights w = projection_weights(fp, p, alpha);
        std::vector<double> qs(fp.y.size()), zeros(fp.y.size(), 0.0);
        for (std::size_t k = 0; k < fp.y.size(); ++k) qs[k] = pert.q(fp.y[k]);
        kappa = w.coefficient(qs, zeros);
    }
    auto qt = [&](double y) { return pert.q(y) - kappa * fp.hp_at(y); };
    auto qtp = [&](double y) {
        const double hpp = p.vp(fp.h_at(y)) - c * fp.hp_at(y); // profile equation
        return pert.qp(y) - kappa * hpp;
    };
    WaveState s(g, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double y = stretch * g.x(i);
        const std::size_t k = static_cast<std::size_t>(i);
        s.u[k] = fp.h_at(y) + qt(y);
        s.ut[k] = -c * (fp.hp_at(y) + qtp(y));
    }
    s.u[0] = 1.0;
    s.u[static_cast<std::size_t>(g.n - 1)] = 0.0;
    return s;
}

/// Best-shift sup distance between two states on the same grid; the
/// reference is sampled with 4-point interpolation so the comparison
/// floor sits well below dx^2.
struct ShiftFit {
    double shift = 0.0;
    double err = 0.0;
};

inline ShiftFit shifted_sup_distance(const WaveState& a, const WaveState& ref,
                                     double bracket = 0.5, double margin = 5.0) {
    const Grid1D& g = a.grid;
    const int skip = static_cast<int>(std::llround(margin / g.dx));
    auto err_at = [&](double sigma) {
        double worst = 0.0;
        for (int i = skip; i < g.n - skip; ++i) {
            const double v = sample_at_cubic(g, ref.u, g.x(i) - sigma);
            worst = std::max(worst, std::abs(a.u[static_cast<std::size_t>(i)] - v));
        }
        return worst;
    };
    double best_s = 0.0, best_e = err_at(0.0);
    for (int j = -5; j <= 5; ++j) {
        const double s = bracket * j / 5.0;
        const double e = err_at(s);
        if (e < best_e) { best_e = e; best_s = s; }
    }
    double lo = best_s - bracket / 5.0, hi = best_s + bracket / 5.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = err_at(x1), f2 = err_at(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 > f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + phi * (hi - lo); f2 = err_at(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - phi * (hi - lo); f1 = err_at(x1);
        }
    }
    ShiftFit out;
    out.shift = 0.5 * (lo + hi);
    out.err = err_at(out.shift);
    return out;
}

/// Measured decay rate of a kernel-free perturbation of the front: the
/// perturbed and unperturbed states are evolved side by side and the
/// best-shift sup error is fitted to an exponential. Using the evolved
/// front as reference cancels the shared discretization error, so the
/// fit window spans well over a decade before flooring.
struct DecayExperiment {
    double nu_hat = 0.0;
    std::vector<double> times;
    std::vector<double> errors;
};

inline DecayExperiment decay_rate_experiment(const FrontProfile& fp, const BistablePotential& p,
                                             double alpha, std::uint64_t seed,
                                             double amplitude = 1e-3, double T = 30.0,
                                             double dx = 0.05) {
    const Grid1D g = Grid1D::over(-60.0, 40.0 + fp.s_star * T + 30.0, dx);
    EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};
    const FrontPerturbation pert = seeded_bump(seed, amplitude);
    const WaveState pert0 = perturbed_front_state(fp, p, alpha, g, pert, true);
    const WaveState ref0 = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g).state;

    Leapfrog lp(pert0, p, prm);
    Leapfrog lr(ref0, p, prm);
    const long nsteps = static_cast<long>(std::llround(T / prm.dt));
    const long every = std::max<long>(1, static_cast<long>(std::llround(0.5 / prm.dt)));
    DecayExperiment out;
    for (long k = 2; k <= nsteps; ++k) {
        lp.advance();
        lr.advance();
        if (k % every == 0) {
            const ShiftFit sf = shifted_sup_distance(lp.state(), lr.state());
            out.times.push_back(lp.time());
            out.errors.push_back(sf.err);
        }
    }
    double emin = std::numeric_limits<double>::infinity();
    for (double e : out.errors) emin = std::min(emin, e);
    double st = 0, sl = 0, stt = 0, stl = 0;
    int count = 0;
    double emax_used = 0.0, emin_used = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.times.size(); ++i) {
        if (out.times[i] < 2.0 || out.errors[i] < 10.0 * emin) continue;
        const double t = out.times[i], l = std::log(out.errors[i]);
        st += t; sl += l; stt += t * t; stl += t * l;
        emax_used = std::max(emax_used, out.errors[i]);
        emin_used = std::min(emin_used, out.errors[i]);
        ++count;
    }
    if (count < 5 || emax_used / emin_used < 10.0)
        throw numerical_error("decay_rate_experiment: error floored before one decade of decay");
    const double slope = (count * stl - st * sl) / (count * stt - st * st);
    out.nu_hat = -slope;
    return out;
}

} // namespace frontlab
