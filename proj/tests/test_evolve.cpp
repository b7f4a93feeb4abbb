#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "frontlab/evolve.hpp"
#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"

using namespace frontlab;

namespace {

WaveState supersonic_state(const Grid1D& g, double s, double t) {
    WaveState w(g, t);
    for (int i = 0; i < g.n; ++i) {
        const double z = g.x(i) - s * t;
        const double h = 1.0 / (1.0 + std::exp(std::min(z, 700.0)));
        w.u[static_cast<std::size_t>(i)] = h;
        w.ut[static_cast<std::size_t>(i)] = s * h * (1.0 - h);
    }
    return w;
}

} // namespace

TEST_CASE("homogeneous equilibria are exact fixed points") {
    const Grid1D g = Grid1D::over(-10.0, 10.0, 0.05);
    const BistablePotential p = make_cubic(0.25);
    EvolveParams prm{1.0, EvolveParams::auto_dt(1.0, 0.05), 0.05, 5.0};
    for (double eq : {0.0, 1.0}) {
        WaveState s(g);
        for (auto& v : s.u) v = eq;
        s.far_left = eq;
        s.far_right = eq;
        Leapfrog lf(s, p, prm);
        for (int k = 0; k < 200; ++k) lf.advance();
        const WaveState end = lf.state();
        for (std::size_t i = 0; i < end.u.size(); ++i) {
            CHECK(end.u[i] == eq);
            CHECK(end.ut[i] == 0.0);
        }
    }
}

TEST_CASE("single step is a bootstrap plus centered velocity") {
    const Grid1D g = Grid1D::over(-5.0, 5.0, 0.1);
    const BistablePotential p = make_cubic(0.25);
    EvolveParams prm{1.0, 0.05, 0.1, 0.05};
    WaveState s(g);
    for (auto& v : s.u) v = 1.0;
    s.far_left = 1.0;
    s.far_right = 1.0;
    const WaveState after = step(s, p, prm);
    CHECK(after.t == Catch::Approx(0.05));
    for (double v : after.u) CHECK(v == 1.0);
}

TEST_CASE("CFL validation") {
    EvolveParams bad{1.0, 1.0, 0.05, 1.0};
    CHECK_THROWS_AS(bad.check(), config_error);
    EvolveParams good{1.0, 0.9 * 0.05, 0.05, 1.0};
    CHECK_NOTHROW(good.check());
}

TEST_CASE("second order on the exact supersonic solution") {
    const double s = 2.0, alpha = 1.0, T = 5.0;
    const SupersonicExample ex = supersonic_example(s, alpha);
    auto sup_err = [&](double dx) {
        const Grid1D g = Grid1D::over(-25.0, 35.0, dx);
        EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};
        WaveState s0 = supersonic_state(g, s, 0.0);
        s0.far_left = 1.0;
        s0.far_right = 0.0;
        Leapfrog lf(s0, ex.potential, prm);
        const long n = std::llround(T / prm.dt);
        for (long k = 2; k <= n; ++k) lf.advance();
        const WaveState end = lf.state();
        const WaveState exact = supersonic_state(g, s, end.t);
        double err = 0.0;
        const int skip = static_cast<int>(std::llround(3.0 / dx));
        for (int i = skip; i < g.n - skip; ++i)
            err = std::max(err, std::abs(end.u[static_cast<std::size_t>(i)] -
                                         exact.u[static_cast<std::size_t>(i)]));
        return err;
    };
    const double e1 = sup_err(0.1), e2 = sup_err(0.05), e3 = sup_err(0.025);
    CHECK(std::log2(e1 / e2) >= 1.8);
    CHECK(std::log2(e2 / e3) >= 1.8);
}

TEST_CASE("second order on the travelling front") {
    const double alpha = 1.0, T = 10.0;
    const BistablePotential p = make_cubic(0.25);
    const FrontProfile fp = analytic_cubic_front(0.25, 0.01, alpha);
    auto sup_err = [&](double dx) {
        const Grid1D g = Grid1D::over(-30.0, 30.0, dx);
        EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};
        const WaveState s0 = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g).state;
        Leapfrog lf(s0, p, prm);
        const long n = std::llround(T / prm.dt);
        for (long k = 2; k <= n; ++k) lf.advance();
        const WaveState end = lf.state();
        const WaveState exact = hyperbolic_front_state(fp, alpha, 0.0, end.t, g).state;
        double err = 0.0;
        const int skip = static_cast<int>(std::llround(3.0 / dx));
        for (int i = skip; i < g.n - skip; ++i)
            err = std::max(err, std::abs(end.u[static_cast<std::size_t>(i)] -
                                         exact.u[static_cast<std::size_t>(i)]));
        return err;
    };
    const double e1 = sup_err(0.1), e2 = sup_err(0.05), e3 = sup_err(0.025);
    const double order = 0.5 * std::log2(e1 / e3);
    CHECK(order >= 1.8);
    CHECK(order <= 2.3);
}

TEST_CASE("finite speed of propagation, discrete form") {
    // Two solutions differing only on [-2, 2]. They agree exactly outside
    // the stencil cone (one cell per step) and to 1e-13 outside the
    // characteristic cone plus one unit of margin.
    const double alpha = 1.0, dx = 0.05;
    const BistablePotential p = make_cubic(0.25);
    const Grid1D g = Grid1D::over(-40.0, 40.0, dx);
    EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, 10.0};
    WaveState a(g), b(g);
    a.far_left = a.far_right = b.far_left = b.far_right = 0.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        if (std::abs(x) < 2.0) {
            const double e = 1.0 - (x / 2.0) * (x / 2.0);
            b.u[static_cast<std::size_t>(i)] = 0.05 * e * e;
        }
    }
    Leapfrog la(a, p, prm), lb(b, p, prm);
    const long n = std::llround(10.0 / prm.dt);
    while (la.steps() < n) {
        la.advance();
        lb.advance();
    }
    const WaveState sa = la.state(), sb = lb.state();
    const double t = sa.t;
    const double stencil_edge = 2.0 + (static_cast<double>(la.steps()) + 1.0) * dx;
    const double char_edge = 2.0 + t / std::sqrt(alpha) + 1.0;
    for (int i = 0; i < g.n; ++i) {
        const double x = std::abs(g.x(i));
        const double d = std::abs(sa.u[static_cast<std::size_t>(i)] -
                                  sb.u[static_cast<std::size_t>(i)]);
        if (x > stencil_edge) CHECK(d == 0.0);
        if (x > char_edge) CHECK(d <= 1e-13);
    }
}

TEST_CASE("blow-up and bad data are detected") {
    const Grid1D g = Grid1D::over(-10.0, 10.0, 0.1);
    BistablePotential unstable;
    unstable.name = "inverted";
    unstable.v = [](double u) { return -5.0 * u * u; };
    unstable.vp = [](double u) { return -10.0 * u; };
    unstable.vpp = [](double) { return -10.0; };
    unstable.vppp = [](double) { return 0.0; };
    EvolveParams prm{1.0, 0.05, 0.1, 50.0};
    WaveState s(g);
    s.far_left = s.far_right = 0.0;
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.x(i)) < 3.0) s.u[static_cast<std::size_t>(i)] = 0.5;
    Leapfrog lf(s, unstable, prm);
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 4000; ++k) lf.advance();
        }(),
        numerical_error);

    WaveState nan_state(g);
    nan_state.u[5] = std::numeric_limits<double>::quiet_NaN();
    const BistablePotential p = make_cubic(0.25);
    CHECK_THROWS_AS(Leapfrog(nan_state, p, prm), numerical_error);
}

TEST_CASE("ramp cutoff and split initial data") {
    CHECK(ramp_cutoff(0.0) == 1.0);
    CHECK(ramp_cutoff(3.0) == 1.0);
    CHECK(ramp_cutoff(-4.0) == 0.0);
    CHECK(ramp_cutoff(-6.0) == 0.0);
    CHECK(ramp_cutoff(-2.0) == Catch::Approx(0.5));

    const Grid1D g = Grid1D::over(-20.0, 20.0, 0.05);
    WaveState u0(g);
    const double cval = 0.7;
    for (auto& v : u0.u) v = cval;
    const double xi0 = 3.0;
    const SplitState ss = split_initial(u0, xi0);
    for (int i = 0; i < g.n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        CHECK(ss.v.u[k] + ss.r.u[k] == Catch::Approx(cval).margin(1e-15));
        if (g.x(i) >= xi0) {
            CHECK(ss.r.u[k] == cval);
            CHECK(ss.v.u[k] == 0.0);
        }
        if (g.x(i) <= xi0 - 4.0) {
            CHECK(ss.r.u[k] == 0.0);
            CHECK(ss.v.u[k] == cval);
        }
    }
    const int mid = g.nearest(xi0 - 2.0);
    CHECK(ss.r.u[static_cast<std::size_t>(mid)] == Catch::Approx(0.5 * cval));

    CHECK_THROWS_AS(split_initial(u0, 100.0), std::invalid_argument);
}

TEST_CASE("split evolution degenerates correctly") {
    const double alpha = 1.0, dx = 0.05, T = 5.0;
    const BistablePotential p = make_cubic(0.25);
    const Grid1D g = Grid1D::over(-30.0, 30.0, dx);
    EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};

    // r = 0: v obeys the full equation bitwise
    WaveState u0(g);
    for (int i = 0; i < g.n; ++i)
        u0.u[static_cast<std::size_t>(i)] = g.x(i) <= 0.0 ? 1.0 : 0.0;
    u0.u[static_cast<std::size_t>(g.n - 1)] = 0.0;
    SplitState s0 = split_initial(u0, 5.0);
    double rmax = 0.0;
    for (double v : s0.r.u) rmax = std::max(rmax, std::abs(v));
    REQUIRE(rmax == 0.0);
    const SplitState send = evolve_split(s0, p, prm);
    Leapfrog plain(u0, p, prm);
    const long n = std::llround(T / prm.dt);
    for (long k = 2; k <= n; ++k) plain.advance();
    const WaveState uend = plain.state();
    for (std::size_t i = 0; i < uend.u.size(); ++i) {
        CHECK(send.v.u[i] == uend.u[i]);
        CHECK(send.r.u[i] == 0.0);
    }

    // v = 0: r obeys the full equation, v stays 0
    WaveState tail(g);
    tail.far_left = 0.0;
    for (int i = 0; i < g.n; ++i)
        if (g.x(i) > 5.0) tail.u[static_cast<std::size_t>(i)] = 0.02 * std::exp(-(g.x(i) - 5.0));
    tail.u[static_cast<std::size_t>(g.n - 1)] = 0.0;
    SplitState t0 = split_initial(tail, -25.0 + 4.0 + g.dx); // cutoff ramp fully left: v = 0
    double vmax = 0.0;
    for (double v : t0.v.u) vmax = std::max(vmax, std::abs(v));
    REQUIRE(vmax <= 1e-17);
    const SplitState tend = evolve_split(t0, p, prm);
    for (double v : tend.v.u) CHECK(v == 0.0);
}

TEST_CASE("splitting fidelity and the coupling bound") {
    const double alpha = 1.0, dx = 0.05, T = 10.0;
    const BistablePotential p = make_cubic(0.25);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile fp = solve_front(p, val, 1e-10, alpha);
    const Grid1D g = Grid1D::over(-50.0, 50.0, dx);
    const WaveState u0 = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g).state;
    EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};
    const double xi0 = default_cutoff(u0, val.eps0);

    SplitLeapfrog slf(split_initial(u0, xi0), p, prm);
    Leapfrog lf(u0, p, prm);
    const long n = std::llround(T / prm.dt);
    const long every = std::llround(1.0 / prm.dt);
    double worst_sum = 0.0, worst_excess = 0.0;
    for (long k = 2; k <= n; ++k) {
        slf.advance();
        lf.advance();
        if (k % every == 0 || k == n) {
            const SplitState ss = slf.state();
            const WaveState u = lf.state();
            // the invasion point trails the cutoff light cone
            CHECK(invasion_point(ss.v, val.eps0) < xi0 + ss.v.t / std::sqrt(alpha));
            double lo = 0.0, hi = 1.0;
            for (std::size_t i = 0; i < u.u.size(); ++i) {
                lo = std::min({lo, ss.v.u[i], ss.r.u[i], u.u[i]});
                hi = std::max({hi, ss.v.u[i], ss.r.u[i], u.u[i]});
            }
            double K2 = 0.0;
            for (double w = lo; w <= hi; w += 1e-3) K2 = std::max(K2, std::abs(p.vppp(w)));
            for (std::size_t i = 0; i < u.u.size(); ++i) {
                worst_sum = std::max(worst_sum, std::abs(ss.v.u[i] + ss.r.u[i] - u.u[i]));
                const double f = coupling_f(p, ss.v.u[i], ss.r.u[i]);
                worst_excess = std::max(worst_excess, std::abs(f) - K2 * std::abs(ss.v.u[i]) *
                                                                          std::abs(ss.r.u[i]));
            }
        }
    }
    CHECK(worst_sum <= 1e-8);
    CHECK(worst_excess <= 1e-14);

    // the compact part never leaks past the cutoff light cone
    const SplitState end = slf.state();
    const double cone = xi0 + end.v.t / std::sqrt(alpha);
    for (int i = 0; i < g.n; ++i)
        if (g.x(i) >= cone + 1.0)
            CHECK(std::abs(end.v.u[static_cast<std::size_t>(i)]) <=
                  2.0 * val.eps0 * std::exp(-end.v.t / (2.0 * alpha)) + 1e-12);
}

TEST_CASE("invasion point") {
    const BistablePotential p = make_cubic(0.25);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const double eps0 = val.eps0;

    // normalized front: crossing at the normalization point
    const FrontProfile fp = analytic_cubic_front(0.25);
    const Grid1D g = Grid1D::over(-30.0, 30.0, 0.05);
    const double xc = 4.0;
    const double stretch = std::sqrt(1.0 + fp.c_star * fp.c_star);
    const WaveState f = hyperbolic_front_state(fp, 1.0, stretch * xc, 0.0, g).state;
    CHECK(std::abs(invasion_point(f, eps0) - xc) <= g.dx);

    // never reaching the level gives the -inf sentinel
    WaveState zero(g);
    zero.far_left = 0.0;
    CHECK(std::isinf(invasion_point(zero, eps0)));

    // Gaussian peak exactly at a node: rightmost crossing at the peak
    for (double dx : {0.1, 0.05, 0.025}) {
        const Grid1D gg = Grid1D::over(0.0, 20.0, dx);
        WaveState gauss(gg);
        gauss.far_left = 0.0;
        for (int i = 0; i < gg.n; ++i) {
            const double x = gg.x(i);
            gauss.u[static_cast<std::size_t>(i)] = eps0 * std::exp(-(x - 5.0) * (x - 5.0));
        }
        gauss.u[0] = 0.0;
        gauss.u[static_cast<std::size_t>(gg.n - 1)] = 0.0;
        CHECK(std::abs(invasion_point(gauss, eps0) - 5.0) <= 1e-9);
    }

    // level reached inside the right margin: boundary contamination
    WaveState bad(g);
    bad.far_left = 0.0;
    for (int i = 0; i < g.n; ++i) bad.u[static_cast<std::size_t>(i)] = 0.5;
    CHECK_THROWS_AS(invasion_point(bad, eps0), numerical_error);
}

TEST_CASE("linearized remainder decay rates") {
    const BistablePotential p = make_cubic(0.25);
    auto run_rate = [&](double alpha) {
        const double dx = 0.05, T = 60.0;
        const Grid1D g = Grid1D::over(-230.0, 230.0, dx);
        EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, dx), dx, T};
        WaveState r0(g);
        r0.far_left = 0.0;
        const double w = 15.0;
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            if (std::abs(x) < w) {
                const double e = 1.0 - (x / w) * (x / w);
                r0.u[static_cast<std::size_t>(i)] = 1e-3 * e * e * e;
            }
        }
        Leapfrog lf(r0, p, prm);
        std::vector<double> ts, n2;
        const long n = std::llround(T / prm.dt);
        const long every = std::llround(0.5 / prm.dt);
        for (long k = 2; k <= n; ++k) {
            lf.advance();
            if (k % every == 0 && lf.time() >= 10.0) {
                const WaveState s = lf.state();
                ts.push_back(s.t);
                n2.push_back(xnorm2(s));
            }
        }
        return remainder_decay(ts, n2).mu;
    };

    // critically damped at alpha = 1 (beta0 = 1/4): squared-norm rate 1,
    // up to the polynomial factor the fit tolerates
    CHECK(run_rate(1.0) == Catch::Approx(1.0).epsilon(0.15));
    // alpha = 0.1: rate (1 - sqrt(1 - 4 alpha beta0)) / alpha
    const double pred = (1.0 - std::sqrt(0.9)) / 0.1;
    CHECK(run_rate(0.1) == Catch::Approx(pred).epsilon(0.10));

    // identically zero trace reports the +inf sentinel
    const std::vector<double> ts{0, 1, 2, 3, 4};
    const std::vector<double> zero(5, 0.0);
    CHECK(std::isinf(remainder_decay(ts, zero).mu));

    // a non-decaying trace is a fit failure
    const std::vector<double> rising{1.0, 1.1, 1.2, 1.3, 1.4};
    CHECK_THROWS_AS(remainder_decay(ts, rising), numerical_error);
}
