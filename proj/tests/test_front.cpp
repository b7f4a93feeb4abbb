#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>

#include "frontlab/front.hpp"
#include "frontlab/grid.hpp"
#include "frontlab/potential.hpp"

using namespace frontlab;

namespace {

double oracle_speed(double theta) { return (1.0 - 2.0 * theta) / std::sqrt(2.0); }

} // namespace

TEST_CASE("analytic cubic front satisfies the profile equation") {
    const double theta = 0.25;
    const BistablePotential p = make_cubic(theta);
    const FrontProfile fp = analytic_cubic_front(theta);

    // closed-form residual h'' + c h' - V'(h)
    double worst = 0.0;
    for (double y = -30.0; y <= 30.0; y += 0.13) {
        const double h = fp.h_exact(y);
        const double hp = fp.hp_exact(y);
        const double hpp = h * (1.0 - h) * (1.0 - 2.0 * h) / 2.0;
        worst = std::max(worst, std::abs(hpp + fp.c_star * hp - p.vp(h)));
    }
    CHECK(worst < 1e-10);

    // finite-difference residual on the sampled arrays
    const Grid1D g(fp.y.front(), fp.dy, static_cast<int>(fp.y.size()));
    const std::vector<double> d1 = derivative(g, fp.h);
    const std::vector<double> d2 = derivative(g, d1);
    double fd_worst = 0.0;
    for (int i = 4; i < g.n - 4; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        fd_worst = std::max(fd_worst,
                            std::abs(d2[k] + fp.c_star * d1[k] - p.vp(fp.h[k])));
    }
    CHECK(fd_worst < 1e-5);

    CHECK(fp.c_star == Catch::Approx(oracle_speed(theta)).epsilon(1e-14));
    CHECK(fp.h_exact(0.0) == Catch::Approx(fp.epsilon0).epsilon(1e-12));

    // logistic tails reach their limits within the sampled span
    CHECK(fp.h.front() >= 1.0 - 2e-12);
    CHECK(fp.h.back() <= 1e-12);
}

TEST_CASE("shooting matches the logistic oracle") {
    const double theta = 0.25;
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    REQUIRE(val.ok);

    const auto t0 = std::chrono::steady_clock::now();
    const FrontProfile fp = solve_front(p, val, 1e-10, 1.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 1.0);

    CHECK(std::abs(fp.c_star - oracle_speed(theta)) <= 1e-8 * oracle_speed(theta));

    const FrontProfile an = analytic_cubic_front(theta);
    double sup = 0.0;
    for (std::size_t k = 0; k < fp.y.size(); ++k)
        sup = std::max(sup, std::abs(fp.h[k] - an.h_exact(fp.y[k])));
    CHECK(sup <= 1e-6);

    CHECK(std::abs(fp.h_at(0.0) - val.eps0) < 1e-6); // normalization h(0) = eps0
    for (std::size_t k = 1; k + 1 < fp.hp.size(); ++k) CHECK(fp.hp[k] < 0.0);
}

TEST_CASE("bisection is insensitive to the starting bracket") {
    const BistablePotential p = make_cubic(0.25);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const double tol = 1e-10;
    const FrontProfile a = solve_front(p, val, tol, 1.0);
    const FrontProfile b = solve_front(p, val, tol, 1.0, 0.1, 1.2);
    CHECK(std::abs(a.c_star - b.c_star) <= 10.0 * tol);

    // an upper bracket below c* is widened geometrically until it works
    const FrontProfile w = solve_front(p, val, tol, 1.0, 0.0, 0.05);
    CHECK(std::abs(a.c_star - w.c_star) <= 10.0 * tol);
}

TEST_CASE("speed map stays subsonic for every alpha") {
    const FrontProfile fp = analytic_cubic_front(0.25);
    for (double alpha : {0.01, 0.1, 0.5, 1.0, 4.0, 25.0, 400.0}) {
        const double s = fp.physical_speed(alpha);
        CHECK(s > 0.0);
        CHECK(s * s * alpha < 1.0);
    }
}

TEST_CASE("hyperbolic front state") {
    const double theta = 0.25, alpha = 1.0;
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, alpha);
    CHECK(fp.s_star == Catch::Approx(1.0 / 3.0).epsilon(1e-14)); // s* = 1/3 exactly at alpha = 1

    const Grid1D g = Grid1D::over(-30.0, 30.0, 0.05);
    const FrontState fs = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g);
    CHECK(fs.state.u[static_cast<std::size_t>(g.nearest(0.0))] ==
          Catch::Approx(fp.epsilon0).epsilon(1e-10));
    CHECK(fs.state.far_left == 1.0);
    CHECK(fs.state.far_right == 0.0);
    CHECK(fs.clamped == 0); // closed-form profile never clamps

    // sampled (non-exact) profile reports out-of-range requests
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile sh = solve_front(p, val, 1e-10, alpha);
    const Grid1D wide = Grid1D::over(-200.0, 200.0, 0.5);
    const FrontState clamped = hyperbolic_front_state(sh, alpha, 0.0, 0.0, wide);
    CHECK(clamped.clamped > 0);
    CHECK(clamped.state.u.front() == 1.0);
    CHECK(clamped.state.u.back() == 0.0);
}

TEST_CASE("front state solves the discrete equation at second order") {
    const double theta = 0.25, alpha = 1.0;
    const BistablePotential p = make_cubic(theta);
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, alpha);

    auto residual = [&](double dx) {
        const double dt = 0.9 * dx;
        const Grid1D g = Grid1D::over(-25.0, 25.0, dx);
        const WaveState um = hyperbolic_front_state(fp, alpha, 0.0, -dt, g).state;
        const WaveState u0 = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g).state;
        const WaveState up = hyperbolic_front_state(fp, alpha, 0.0, dt, g).state;
        double worst = 0.0;
        for (int i = 1; i + 1 < g.n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double utt = (up.u[k] - 2.0 * u0.u[k] + um.u[k]) / (dt * dt);
            const double ut = (up.u[k] - um.u[k]) / (2.0 * dt);
            const double uxx = (u0.u[k + 1] - 2.0 * u0.u[k] + u0.u[k - 1]) / (dx * dx);
            worst = std::max(worst, std::abs(alpha * utt + ut - uxx + p.vp(u0.u[k])));
        }
        return worst;
    };
    const double r1 = residual(0.08), r2 = residual(0.04), r3 = residual(0.02);
    CHECK(std::log2(r1 / r2) >= 1.9);
    CHECK(std::log2(r2 / r3) >= 1.9);
}

TEST_CASE("decay data") {
    const double theta = 0.25;
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile fp = solve_front(p, val, 1e-10, 1.0);

    const DecayData dd = decay_data(fp, p);
    // c_h = (c* + sqrt(c*^2 + 4 V''(0)))/2 = 1/sqrt2 for the cubic family
    CHECK(dd.c_h == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(dd.decay_right == dd.c_h);
    CHECK(dd.rel_agreement < 1e-3); // fitted tail slope agrees with the closed form
    CHECK(tail_decay_rate(0.0, 0.25) == Catch::Approx(0.5).epsilon(1e-14)); // c = 0 limit

    // a profile with no resolved tail cannot support the 2-decade fit
    FrontProfile stub = analytic_cubic_front(theta);
    std::size_t keep = 0;
    while (keep < stub.y.size() && stub.h[keep] > 1e-3) ++keep;
    stub.y.resize(keep);
    stub.h.resize(keep);
    stub.hp.resize(keep);
    CHECK_THROWS_AS(decay_data(stub, p), numerical_error);
}

TEST_CASE("degenerate family limit") {
    // c* -> 0+ as theta -> 1/2-
    const BistablePotential p = make_cubic(0.49);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile fp = solve_front(p, val, 1e-10, 1.0);
    CHECK(fp.c_star == Catch::Approx(oracle_speed(0.49)).margin(1e-8));
    CHECK(fp.c_star > 0.0);
    CHECK(fp.c_star < 0.02);
}
