#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "frontlab/config.hpp"
#include "frontlab/csv.hpp"
#include "frontlab/energy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/evolve.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"
#include "frontlab/spectrum.hpp"

namespace frontlab {

/// Best translate of the front family through a state: golden-section
/// minimization of the sup-node error over the shift, bracketed 2 units
/// to each side of the invasion point (coarse scan first, so a locally
/// non-unimodal error surface still returns the best grid point).
struct FitShift {
    double x0 = 0.0;      // family parameter: u ~ h(stretch x - c t - x0)
    double sup_err = 0.0;
};

inline FitShift fit_shift(const WaveState& s, const FrontProfile& fp, double alpha,
                          double center_hint, double boundary_margin = 5.0) {
    const Grid1D& g = s.grid;
    const double stretch = std::sqrt(1.0 + alpha * fp.c_star * fp.c_star);
    const int skip = static_cast<int>(std::llround(boundary_margin / g.dx));
    auto err_at = [&](double zeta) {
        double worst = 0.0;
        for (int i = skip; i < g.n - skip; ++i) {
            const double v = fp.h_at(stretch * g.x(i) - zeta);
            worst = std::max(worst, std::abs(s.u[static_cast<std::size_t>(i)] - v));
        }
        return worst;
    };
    const double z_mid = stretch * center_hint;
    const double half = 2.0 * stretch;
    double best_z = z_mid, best_e = err_at(z_mid);
    for (int j = -10; j <= 10; ++j) {
        const double z = z_mid + half * j / 10.0;
        const double e = err_at(z);
        if (e < best_e) { best_e = e; best_z = z; }
    }
    double lo = best_z - half / 10.0, hi = best_z + half / 10.0;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = err_at(x1), f2 = err_at(x2);
    for (int it = 0; it < 50; ++it) {
        if (f1 > f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + phi * (hi - lo); f2 = err_at(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - phi * (hi - lo); f1 = err_at(x1);
        }
    }
    const double zeta = 0.5 * (lo + hi);
    FitShift out;
    out.sup_err = err_at(zeta);
    out.x0 = zeta - fp.c_star * s.t;
    return out;
}

/// Verdicts of one full experiment against its predicted speed and rate.
struct ConvergenceReport {
    bool in_basin = false;
    double s_measured = std::numeric_limits<double>::quiet_NaN();
    double s_predicted = std::numeric_limits<double>::quiet_NaN();
    bool subsonic = false;
    double x0_shift = std::numeric_limits<double>::quiet_NaN();
    double nu_hat = std::numeric_limits<double>::quiet_NaN();
    double nu_predicted = std::numeric_limits<double>::quiet_NaN();
    double final_sup_err = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> err_times;
    std::vector<double> err_values;
    bool speed_pass = false;
    bool rate_pass = false;
    bool pass = false;
    std::string verdict;
};

struct RunResult {
    ConvergenceReport report;
    InvasionTrace trace;
    double c_star = std::numeric_limits<double>::quiet_NaN();
    double eps0 = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double exp_rate_fit(const std::vector<double>& times, const std::vector<double>& errs) {
    if (times.size() < 8) return std::numeric_limits<double>::quiet_NaN();
    double emax = 0.0, emin = std::numeric_limits<double>::infinity();
    for (double e : errs) {
        emax = std::max(emax, e);
        emin = std::min(emin, e);
    }
    if (!(emin > 0.0) || emax / std::max(emin, 1e-300) < 5.0)
        return std::numeric_limits<double>::quiet_NaN();
    const double hi_cut = 0.5 * emax, lo_cut = 3.0 * emin;
    double st = 0, sl = 0, stt = 0, stl = 0;
    int count = 0;
    bool started = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!started && errs[i] > hi_cut) continue;
        started = true;
        if (errs[i] <= lo_cut) break;
        const double t = times[i], l = std::log(errs[i]);
        st += t; sl += l; stt += t * t; stl += t * l;
        ++count;
    }
    if (count < 6) return std::numeric_limits<double>::quiet_NaN();
    const double slope = (count * stl - st * sl) / (count * stt - st * st);
    return -slope;
}

inline WaveState make_step_state(const Grid1D& g, double x0) {
    WaveState s(g);
    for (int i = 0; i < g.n; ++i)
        s.u[static_cast<std::size_t>(i)] = g.x(i) <= x0 ? 1.0 : 0.0;
    s.u[0] = 1.0;
    s.u[static_cast<std::size_t>(g.n - 1)] = 0.0;
    return s;
}

inline WaveState make_supersonic_state(const Grid1D& g, double s_speed, double x0, double t) {
    WaveState s(g, t);
    for (int i = 0; i < g.n; ++i) {
        const double z = g.x(i) - s_speed * t - x0;
        const double h = 1.0 / (1.0 + std::exp(std::min(z, 700.0)));
        const double hp = -h * (1.0 - h);
        s.u[static_cast<std::size_t>(i)] = h;
        s.ut[static_cast<std::size_t>(i)] = -s_speed * hp;
    }
    return s;
}

} // namespace detail

/// Run one experiment: simulate, record the invasion trace and the
/// invasion-anchored energy ledger for every weight in c_list, fit the
/// shift and the decay rate, and emit trace.csv / energy.csv / periodic
/// state snapshots / report.txt under cfg.out.
inline RunResult run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);
    {
        std::ofstream echo(cfg.out + "/effective.cfg");
        echo << config_to_text(cfg);
    }

    const bool supersonic = cfg.potential_kind == "supersonic";
    BistablePotential pot;
    PotentialValidation val;
    std::optional<FrontProfile> fp;
    double level = 0.5; // tracking level for the interface
    double s_predicted = std::numeric_limits<double>::quiet_NaN();
    if (supersonic) {
        pot = supersonic_example(cfg.super_s, cfg.alpha).potential;
        s_predicted = cfg.super_s;
    } else {
        pot = make_cubic(cfg.theta);
        val = validate(pot, -2.0, 3.0, 1e-3);
        if (!val.ok) throw config_error("potential failed validation: " + val.first_violation);
        fp = solve_front(pot, val, cfg.front_tol, cfg.alpha);
        level = val.eps0;
        s_predicted = fp->s_star;
    }

    const Grid1D g = Grid1D::over(cfg.x_left, cfg.x_right, cfg.dx);
    EvolveParams prm{cfg.alpha, cfg.dt, cfg.dx, cfg.T};

    WaveState u0(g);
    if (supersonic) {
        u0 = detail::make_supersonic_state(g, cfg.super_s, cfg.initial_x0, 0.0);
    } else if (cfg.initial == "step") {
        u0 = detail::make_step_state(g, cfg.initial_x0);
    } else if (cfg.initial == "front") {
        const double stretch = std::sqrt(1.0 + cfg.alpha * fp->c_star * fp->c_star);
        u0 = hyperbolic_front_state(*fp, cfg.alpha, stretch * cfg.initial_x0, 0.0, g).state;
    } else if (cfg.initial == "front_perturbed") {
        u0 = perturbed_front_state(*fp, pot, cfg.alpha, g, seeded_bump(cfg.seed,
                                                                       cfg.perturb_amplitude),
                                   true);
    } else {
        u0 = read_state_csv(cfg.initial_csv);
        if (!(u0.grid == g))
            throw config_error("initial.csv grid does not match the configured grid");
        u0.t = 0.0;
    }

    // The invasion diagnostics presume the data are pinched to 0 at the
    // right boundary; anything else would ride the boundary clamp. The
    // left defect is informative only (data far from 1 on the left simply
    // never enter the basin).
    {
        const auto [left_defect, right_defect] = pinching_defect(u0, 5.0);
        (void)left_defect;
        if (right_defect > 0.05)
            throw numerical_error("initial data fail the right pinching condition: defect " +
                                  fmt17(right_defect));
    }

    // Splitting: only worthwhile when the initial right tail is nonzero.
    const double xi0 = std::isnan(cfg.xi0) ? default_cutoff(u0, supersonic ? 0.25 : val.eps0)
                                           : cfg.xi0;
    SplitState ss = split_initial(u0, std::min(xi0, g.x_right() - 10.0));
    double rmax = 0.0;
    for (double v : ss.r.u) rmax = std::max(rmax, std::abs(v));
    const bool split_mode = !supersonic && rmax > 0.0;

    std::optional<Leapfrog> lf;
    std::optional<SplitLeapfrog> slf;
    if (split_mode) slf.emplace(ss, pot, prm);
    else lf.emplace(u0, pot, prm);

    CsvWriter trace_csv(cfg.out + "/trace.csv");
    trace_csv.header("t,xbar,ul_err,E_cstar");
    CsvWriter energy_csv(cfg.out + "/energy.csv");
    energy_csv.header("t,c,E_at_invasion,D,R,lower_bound");

    std::vector<FrameSpec> frames;
    for (double c : cfg.c_list) frames.push_back(frame(c, cfg.alpha));
    const double minV = supersonic ? 0.0 : pot.v(1.0);

    InvasionTrace trace;
    std::vector<double> fit_times, fit_errs;
    std::optional<WaveState> prev_v;
    std::vector<double> prev_Drate(frames.size(), 0.0);
    double last_fitted_x0 = std::numeric_limits<double>::quiet_NaN();

    const long nsteps = static_cast<long>(std::llround(cfg.T / cfg.dt));
    const long trace_every = std::max<long>(1, static_cast<long>(std::llround(cfg.trace_dt / cfg.dt)));
    // snapshots happen on trace steps, so keep the cadences commensurate
    const long snap_every =
        trace_every * std::max<long>(1, static_cast<long>(std::llround(
                                            cfg.snapshot_dt / (cfg.dt * trace_every))));

    auto process = [&](long k) {
        std::optional<SplitState> cur;
        if (split_mode) cur = slf->state();
        const WaveState v = split_mode ? cur->v : lf->state();
        const std::optional<WaveState> r =
            split_mode ? std::optional<WaveState>(cur->r) : std::nullopt;
        const WaveState whole = [&] {
            if (!split_mode) return v;
            WaveState w = v;
            for (std::size_t i = 0; i < w.u.size(); ++i) {
                w.u[i] += r->u[i];
                w.ut[i] += r->ut[i];
            }
            w.far_left = 1.0;
            w.far_right = 0.0;
            return w;
        }();

        const double xbar = invasion_point(v, level);
        const bool have_front = !std::isinf(xbar);
        double ul_err = std::numeric_limits<double>::quiet_NaN();
        double e_cstar = std::numeric_limits<double>::quiet_NaN();

        if (have_front) {
            trace.times.push_back(v.t);
            trace.xbar.push_back(xbar);
        }
        if (have_front && !supersonic) {
            ul_err = repair_error(whole, *fp, cfg.alpha, xbar);
            const FrameSpec fr_star = frame(fp->c_star, cfg.alpha);
            e_cstar = frame_energy(v, pot, fr_star, xbar);
            const FitShift fsh = fit_shift(whole, *fp, cfg.alpha, xbar);
            fit_times.push_back(v.t);
            fit_errs.push_back(fsh.sup_err);
            last_fitted_x0 = fsh.x0;

            for (std::size_t ci = 0; ci < frames.size(); ++ci) {
                const double E = frame_energy(v, pot, frames[ci], xbar);
                const double Drate = dissipation_rate(v, frames[ci], xbar);
                const double D =
                    prev_v ? 0.5 * (Drate + prev_Drate[ci]) * (v.t - prev_v->t) : 0.0;
                const double R =
                    r ? remainder_term(v, *r, pot, frames[ci], xbar) : 0.0;
                const double lb = energy_lower_bound(minV, frames[ci].c, level);
                energy_csv.row({v.t, frames[ci].c, E, D, R, lb});
                prev_Drate[ci] = Drate;
            }
        } else if (have_front && supersonic) {
            // sup error against the exact travelling solution
            const WaveState exact =
                detail::make_supersonic_state(g, cfg.super_s, cfg.initial_x0, v.t);
            double worst = 0.0;
            const int skip = static_cast<int>(std::llround(5.0 / g.dx));
            for (int i = skip; i < g.n - skip; ++i)
                worst = std::max(worst, std::abs(v.u[static_cast<std::size_t>(i)] -
                                                 exact.u[static_cast<std::size_t>(i)]));
            ul_err = worst;
            fit_times.push_back(v.t);
            fit_errs.push_back(worst);
        }
        trace_csv.row({v.t, have_front ? xbar : std::numeric_limits<double>::quiet_NaN(), ul_err,
                       e_cstar});
        prev_v = v;

        if (k % snap_every == 0 || k == nsteps) {
            char tag[32];
            std::snprintf(tag, sizeof(tag), "%.6g", v.t);
            write_state_csv(cfg.out + "/state_t" + std::string(tag) + ".csv", whole);
            if (split_mode) {
                write_state_csv(cfg.out + "/vstate_t" + std::string(tag) + ".csv", v);
                write_state_csv(cfg.out + "/rstate_t" + std::string(tag) + ".csv", *r);
            }
        }
    };

    for (long k = 2; k <= nsteps; ++k) {
        if (split_mode) slf->advance();
        else lf->advance();
        if (k % trace_every == 0 || k == nsteps) process(k);
    }

    RunResult res;
    res.eps0 = supersonic ? std::numeric_limits<double>::quiet_NaN() : val.eps0;
    if (fp) res.c_star = fp->c_star;
    ConvergenceReport& rep = res.report;
    rep.s_predicted = s_predicted;
    rep.in_basin = trace.times.size() >= 10;

    if (rep.in_basin) {
        const InvasionSpeed inv = invasion_speed(trace, cfg.alpha);
        trace.s_fit = inv.s_inf;
        trace.fit_t_lo = trace.times[trace.times.size() / 2];
        trace.fit_t_hi = trace.times.back();
        rep.s_measured = inv.s_inf;
        rep.subsonic = inv.subsonic;
        rep.speed_pass = std::abs(inv.s_inf - s_predicted) <= 0.01 * std::abs(s_predicted);
        rep.err_times = fit_times;
        rep.err_values = fit_errs;
        if (!fit_errs.empty()) rep.final_sup_err = fit_errs.back();
        rep.x0_shift = last_fitted_x0;
        rep.nu_hat = detail::exp_rate_fit(fit_times, fit_errs);
        if (!supersonic) {
            const OperatorL L = build_L(*fp, pot, 2);
            const std::vector<double> mus = top_eigs(L.T, 6);
            const SpectralGap gap = spectral_gap(mus, cfg.alpha, fp->c_star, val.m);
            rep.nu_predicted = gap.nu;
            if (std::isfinite(rep.nu_hat)) {
                rep.rate_pass = rep.nu_hat >= 0.5 * rep.nu_predicted &&
                                rep.nu_hat <= 2.0 * rep.nu_predicted;
            } else {
                // no decade of decay to fit: accept only if the error sat
                // at the discretization floor the whole time
                double emax = 0.0;
                for (double e : fit_errs) emax = std::max(emax, e);
                rep.rate_pass = emax <= 0.02;
            }
        }
        rep.pass = rep.speed_pass && (supersonic || rep.rate_pass);
        rep.verdict = rep.pass ? "pass" : (rep.speed_pass ? "rate-fail" : "speed-fail");
    } else {
        rep.verdict = "not-in-basin";
        rep.pass = false;
    }
    res.trace = trace;

    {
        std::ofstream report(cfg.out + "/report.txt");
        report << "verdict = " << rep.verdict << "\n";
        report << "in_basin = " << (rep.in_basin ? 1 : 0) << "\n";
        report << "s_measured = " << fmt17(rep.s_measured) << "\n";
        report << "s_predicted = " << fmt17(rep.s_predicted) << "\n";
        report << "subsonic = " << (rep.subsonic ? 1 : 0) << "\n";
        report << "x0_shift = " << fmt17(rep.x0_shift) << "\n";
        report << "nu_hat = " << fmt17(rep.nu_hat) << "\n";
        report << "nu_predicted = " << fmt17(rep.nu_predicted) << "\n";
        report << "final_sup_err = " << fmt17(rep.final_sup_err) << "\n";
    }
    return res;
}

/// One row of the sweep aggregate.
struct SweepRow {
    double alpha = 0.0, theta = 0.0;
    double c_star = std::numeric_limits<double>::quiet_NaN();
    double s_star = std::numeric_limits<double>::quiet_NaN();
    double s_measured = std::numeric_limits<double>::quiet_NaN();
    double nu = std::numeric_limits<double>::quiet_NaN();
    double nu_measured = std::numeric_limits<double>::quiet_NaN();
    double mu_alpha_val = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string error;
};

/// Independent runs over the (alpha, theta) grid, executed by a small
/// worker pool; per-cell failures are recorded and the sweep continues.
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<double>& alphas,
                                   const std::vector<double>& thetas, int jobs) {
    namespace fs = std::filesystem;
    struct Cell {
        double alpha, theta;
        std::string out;
    };
    std::vector<Cell> cells;
    for (double a : alphas)
        for (double th : thetas)
            cells.push_back({a, th,
                             base.out + "/cell_a" + std::to_string(a) + "_t" +
                                 std::to_string(th)});
    std::vector<SweepRow> rows(cells.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            SweepRow& row = rows[i];
            row.alpha = cells[i].alpha;
            row.theta = cells[i].theta;
            try {
                RunConfig cfg = base;
                cfg.alpha = cells[i].alpha;
                cfg.theta = cells[i].theta;
                cfg.out = cells[i].out;
                cfg.x_left = std::numeric_limits<double>::quiet_NaN();
                cfg.x_right = std::numeric_limits<double>::quiet_NaN();
                cfg.dt = std::numeric_limits<double>::quiet_NaN();
                finalize_config(cfg);
                const RunResult res = run(cfg);
                row.c_star = res.c_star;
                row.s_star = res.report.s_predicted;
                row.s_measured = res.report.s_measured;
                row.nu = res.report.nu_predicted;
                row.nu_measured = res.report.nu_hat;
                row.mu_alpha_val = mu_alpha(cells[i].alpha, std::min(cells[i].theta,
                                                                     1.0 - cells[i].theta));
                row.ok = true;
            } catch (const std::exception& ex) {
                row.ok = false;
                row.error = ex.what();
            }
        }
    };
    const int nw = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    fs::create_directories(base.out);
    CsvWriter agg(base.out + "/sweep.csv");
    agg.header("alpha,theta,c_star,s_star,s_measured,nu,nu_measured,mu_alpha");
    for (const SweepRow& r : rows)
        agg.row({r.alpha, r.theta, r.c_star, r.s_star, r.s_measured, r.nu, r.nu_measured,
                 r.mu_alpha_val});
    return rows;
}

} // namespace frontlab
