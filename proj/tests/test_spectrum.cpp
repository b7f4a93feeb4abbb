#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "frontlab/evolve.hpp"
#include "frontlab/front.hpp"
#include "frontlab/potential.hpp"
#include "frontlab/rng.hpp"
#include "frontlab/spectrum.hpp"

using namespace frontlab;

TEST_CASE("essential-spectrum edge") {
    CHECK(mu_alpha(1.0, 0.25) == -0.5);                       // 1 - 4 alpha m = 0
    CHECK(mu_alpha(0.1, 0.25) ==
          Catch::Approx((-1.0 + std::sqrt(0.9)) / 0.2).epsilon(1e-14)); // about -0.256583
    CHECK(mu_alpha(2.0, 0.25) == Catch::Approx(-0.25).epsilon(1e-14)); // imaginary root branch

    // parabolic limit mu_alpha -> -m + O(alpha)
    const double m = 0.25, a = 1e-6;
    CHECK(std::abs(mu_alpha(a, m) + m) <= 2.0 * a * m * m + 1e-12);

    CHECK_THROWS_AS(mu_alpha(-1.0, 0.25), std::domain_error);
    CHECK_THROWS_AS(mu_alpha(1.0, 0.0), std::domain_error);
}

TEST_CASE("sturm bisection against the discrete Laplacian") {
    // -u'' on (0,1) with Dirichlet ends: eigenvalues of the tridiagonal
    // discretization are -(4/h^2) sin^2(k pi h / 2)
    const int n = 199;
    const double h = 1.0 / (n + 1);
    SymTridiag T;
    T.d.assign(n, -2.0 / (h * h));
    T.e.assign(n - 1, 1.0 / (h * h));
    const std::vector<double> mus = top_eigs(T, 4);
    for (int k = 1; k <= 4; ++k) {
        const double exact = -4.0 / (h * h) * std::pow(std::sin(0.5 * k * M_PI * h), 2);
        CHECK(mus[static_cast<std::size_t>(k - 1)] == Catch::Approx(exact).margin(1e-9));
    }
    CHECK_THROWS_AS(top_eigs(T, 0), std::invalid_argument);
}

TEST_CASE("operator far-field entries and kernel residual") {
    const double theta = 0.25, alpha = 1.0;
    const BistablePotential p = make_cubic(theta);
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, alpha);
    const OperatorL L = build_L(fp, p);
    const double c = fp.c_star;
    const double dy = L.grid.dx;

    // constant-coefficient limits of the diagonal at both ends
    CHECK(L.T.d.back() + 2.0 / (dy * dy) ==
          Catch::Approx(-(0.25 + 0.25 * c * c)).margin(1e-6));
    CHECK(L.T.d.front() + 2.0 / (dy * dy) ==
          Catch::Approx(-(0.75 + 0.25 * c * c)).margin(1e-6));

    // L applied to the exact kernel element e^{c y/2} h'
    auto kernel_residual = [&](const OperatorL& Lq) {
        const Grid1D& g = Lq.grid;
        double resid = 0.0;
        std::vector<double> u0(static_cast<std::size_t>(g.n));
        for (int i = 0; i < g.n; ++i)
            u0[static_cast<std::size_t>(i)] =
                std::exp(0.5 * c * g.x(i)) * fp.hp_exact(g.x(i));
        for (int i = 1; i + 1 < g.n; ++i) {
            const std::size_t k = static_cast<std::size_t>(i);
            const double r = (u0[k + 1] + u0[k - 1]) / (g.dx * g.dx) + Lq.T.d[k] * u0[k];
            resid = std::max(resid, std::abs(r));
        }
        return resid;
    };
    const double r2 = kernel_residual(build_L(analytic_cubic_front(theta, 0.02, alpha), p));
    const double r1 = kernel_residual(L);
    CHECK(r1 < 1e-6);
    CHECK(r2 / r1 >= 3.5); // O(dy^2)
}

TEST_CASE("translation eigenvalue converges at second order") {
    const double theta = 0.25, alpha = 1.0;
    const BistablePotential p = make_cubic(theta);
    double prev = 0.0;
    for (double dy : {0.04, 0.02, 0.01}) {
        const FrontProfile fp = analytic_cubic_front(theta, dy, alpha);
        const OperatorL L = build_L(fp, p);
        const std::vector<double> mus = top_eigs(L.T, 2);
        const double err = std::abs(mus[0]);
        if (dy == 0.02) CHECK(err <= 1e-4);
        if (prev > 0.0) CHECK(prev / err >= 3.5);
        prev = err;

        // exactly one eigenvalue in the translation window, none above
        const int total = static_cast<int>(L.T.size());
        const int above = total - frontlab::detail::sturm_count(L.T, 1e-3);
        const int in_window = total - frontlab::detail::sturm_count(L.T, -1e-3) - above;
        CHECK(above == 0);
        CHECK(in_window == 1);
    }
}

TEST_CASE("temporal eigenvalue map") {
    CHECK(map_mu_to_lambda(0.0, 1.0, 0.5).lambda == 0.0);

    // round trip lambda(1 + alpha lambda)(1 + alpha c^2) = mu
    SplitMix64 rng(31);
    for (int k = 0; k < 200; ++k) {
        const double alpha = rng.uniform(0.05, 8.0);
        const double c = rng.uniform(0.0, 1.5);
        const double mu_lo = -0.99 * (1.0 + alpha * c * c) / (4.0 * alpha);
        const double mu = rng.uniform(mu_lo, 0.0);
        const LambdaBranch lb = map_mu_to_lambda(mu, alpha, c);
        REQUIRE(lb.real_branch);
        const double back = lb.lambda * (1.0 + alpha * lb.lambda) * (1.0 + alpha * c * c);
        CHECK(std::abs(back - mu) <= 1e-12 * (1.0 + std::abs(mu)));
    }

    // monotone increasing in mu on the real branch
    const double c = 0.35355339059327373;
    double prev = map_mu_to_lambda(-0.28, 1.0, c).lambda;
    for (double mu = -0.26; mu <= 0.0; mu += 0.02) {
        const double cur = map_mu_to_lambda(mu, 1.0, c).lambda;
        CHECK(cur > prev);
        prev = cur;
    }

    // worked value: alpha = 1, c = 1/(2 sqrt2), mu = -0.2
    const double lam = map_mu_to_lambda(-0.2, 1.0, c).lambda;
    CHECK(lam == Catch::Approx((-1.0 + std::sqrt(1.0 - 0.8 / 1.125)) / 2.0).epsilon(1e-14));
    CHECK(std::abs(lam + 0.23126) < 5e-5);

    // parabolic limit: lambda -> mu
    const double lam_small = map_mu_to_lambda(-0.2, 1e-6, 0.3).lambda;
    CHECK(std::abs(lam_small + 0.2) <= 1e-6);

    // below the real window: complex pair with real part -1/(2 alpha)
    const LambdaBranch deep = map_mu_to_lambda(-5.0, 1.0, c);
    CHECK_FALSE(deep.real_branch);
    CHECK(deep.lambda == Catch::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("spectral gap for the reference potential") {
    const double theta = 0.25;
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);

    // regression baseline at alpha = 1: the well under g + c^2/4 carries
    // only the translation bound state, so the gap is set by the
    // essential edge: nu = -mu_alpha = 1/2.
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, 1.0);
    const OperatorL L = build_L(fp, p);
    const std::vector<double> mus = top_eigs(L.T, 6);
    const SpectralGap gap = spectral_gap(mus, 1.0, fp.c_star, val.m);
    CHECK_FALSE(gap.has_discrete_mu1);
    CHECK(gap.nu == Catch::Approx(0.5).margin(1e-9));
    CHECK(mus[1] < gap.mu_edge_L); // the rest is the truncation cluster
    CHECK(mus[1] == Catch::Approx(-0.2822).margin(5e-4)); // regression value

    // nu = O(1/alpha) for large alpha, monotone in alpha
    double prev_nu = 1e9;
    for (double a : {4.0, 8.0, 16.0}) {
        const FrontProfile fa = analytic_cubic_front(theta, 0.01, a);
        const SpectralGap ga = spectral_gap(top_eigs(build_L(fa, p).T, 4), a, fa.c_star, val.m);
        CHECK(ga.nu == Catch::Approx(0.5 / a).margin(1e-9));
        CHECK(ga.nu < prev_nu);
        prev_nu = ga.nu;
    }

    // parabolic limit: nu stays O(1)
    const SpectralGap g0 =
        spectral_gap(top_eigs(build_L(analytic_cubic_front(theta, 0.01, 0.01), p).T, 4), 0.01,
                     fp.c_star, val.m);
    CHECK(g0.nu > 0.2);
    CHECK(g0.nu < 0.3);
}

TEST_CASE("Dirichlet truncation is monitored by domain doubling") {
    const double theta = 0.25;
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, 1.0);

    const std::vector<double> small = top_eigs(build_L(fp, p, 1, -25.0, 35.0).T, 2);
    const std::vector<double> large = top_eigs(build_L(fp, p, 1, -50.0, 70.0).T, 2);
    // the translation eigenvalue is insensitive to the window
    CHECK(std::abs(small[0] - large[0]) <= 1e-8);
    // the cluster under the essential edge compresses toward it as the
    // window grows, while staying below it
    const double edge = -(val.m + 0.25 * fp.c_star * fp.c_star);
    CHECK(small[1] < edge);
    CHECK(large[1] < edge);
    CHECK(large[1] > small[1]);
    // the gap verdict does not depend on the window
    const SpectralGap gs = spectral_gap(small, 1.0, fp.c_star, val.m);
    const SpectralGap gl = spectral_gap(large, 1.0, fp.c_star, val.m);
    CHECK(gs.nu == gl.nu);
}

TEST_CASE("spectral projection") {
    const double theta = 0.25, alpha = 1.0;
    const BistablePotential p = make_cubic(theta);
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, alpha);
    const ProjectionWeights w = projection_weights(fp, p, alpha);

    // fixes the translation mode
    std::vector<double> zeros(fp.y.size(), 0.0);
    CHECK(w.coefficient(fp.hp, zeros) == Catch::Approx(1.0).margin(1e-8));

    // weights decay at the grid ends
    CHECK(std::abs(w.psi2.front()) < 1e-8);
    CHECK(std::abs(w.psi2.back()) < 1e-8);

    // idempotence on random compactly supported pairs
    SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(fp.y.size(), 0.0), v(fp.y.size(), 0.0);
        for (std::size_t i = 0; i < fp.y.size(); ++i) {
            if (std::abs(fp.y[i]) < 10.0) {
                const double e = 1.0 - (fp.y[i] / 10.0) * (fp.y[i] / 10.0);
                u[i] = e * e * std::sin(rng.uniform(0.5, 2.0) * fp.y[i]);
                v[i] = e * e * std::cos(rng.uniform(0.5, 2.0) * fp.y[i]);
            }
        }
        const double k1 = w.coefficient(u, v);
        std::vector<double> pu(fp.y.size());
        for (std::size_t i = 0; i < fp.y.size(); ++i) pu[i] = k1 * fp.hp[i];
        const double k2 = w.coefficient(pu, zeros);
        CHECK(std::abs(k2 - k1) <= 1e-8 * (1.0 + std::abs(k1)));
    }

    // projection coefficient is stable under grid refinement
    const FrontProfile coarse = analytic_cubic_front(theta, 0.02, alpha);
    const ProjectionWeights wc = projection_weights(coarse, p, alpha);
    auto bump_coeff = [&](const FrontProfile& prof, const ProjectionWeights& ww) {
        std::vector<double> u(prof.y.size(), 0.0), v(prof.y.size(), 0.0);
        for (std::size_t i = 0; i < prof.y.size(); ++i) {
            const double z = prof.y[i] / 6.0;
            if (std::abs(z) < 1.0) {
                u[i] = std::pow(1.0 - z * z, 3);
                v[i] = 0.5 * std::pow(1.0 - z * z, 2);
            }
        }
        return ww.coefficient(u, v);
    };
    CHECK(bump_coeff(coarse, wc) == Catch::Approx(bump_coeff(fp, w)).margin(1e-6));
}

TEST_CASE("measured decay rate matches the spectral gap") {
    const double theta = 0.25, alpha = 1.0;
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    const FrontProfile fp = solve_front(p, val, 1e-10, alpha);
    const SpectralGap gap =
        spectral_gap(top_eigs(build_L(fp, p, 2).T, 4), alpha, fp.c_star, val.m);

    const DecayExperiment ex = decay_rate_experiment(fp, p, alpha, 42, 1e-3, 30.0, 0.05);
    CHECK(ex.nu_hat >= 0.8 * gap.nu);
    CHECK(ex.nu_hat <= 1.25 * gap.nu);

    // halving the amplitude leaves the fitted rate in place (linear regime)
    const DecayExperiment half = decay_rate_experiment(fp, p, alpha, 42, 5e-4, 30.0, 0.05);
    CHECK(std::abs(half.nu_hat - ex.nu_hat) <= 0.1 * ex.nu_hat);
}

TEST_CASE("pure translation-mode perturbation does not decay") {
    const double theta = 0.25, alpha = 1.0, delta = 5e-3;
    const BistablePotential p = make_cubic(theta);
    const FrontProfile fp = analytic_cubic_front(theta, 0.01, alpha);
    const double stretch = std::sqrt(1.0 + alpha * fp.c_star * fp.c_star);

    FrontPerturbation kern;
    kern.q = [&fp, delta](double y) { return delta * fp.hp_exact(y); };
    kern.qp = [&fp, &p, delta](double y) {
        return delta * (p.vp(fp.h_exact(y)) - fp.c_star * fp.hp_exact(y));
    };
    const Grid1D g = Grid1D::over(-40.0, 60.0, 0.05);
    const WaveState pert0 = perturbed_front_state(fp, p, alpha, g, kern, false);
    const WaveState ref0 = hyperbolic_front_state(fp, alpha, 0.0, 0.0, g).state;

    // initially a pure translate: shift about -delta/stretch, tiny residual
    const ShiftFit sf0 = shifted_sup_distance(pert0, ref0);
    CHECK(sf0.shift == Catch::Approx(-delta / stretch).epsilon(0.2));
    CHECK(sf0.err < 0.2 * delta);

    // after evolving, the offset persists instead of decaying
    EvolveParams prm{alpha, EvolveParams::auto_dt(alpha, 0.05), 0.05, 10.0};
    Leapfrog lp(pert0, p, prm), lr(ref0, p, prm);
    const long n = std::llround(10.0 / prm.dt);
    for (long k = 2; k <= n; ++k) {
        lp.advance();
        lr.advance();
    }
    double unshifted = 0.0;
    const WaveState sp = lp.state(), sr = lr.state();
    for (std::size_t i = 0; i < sp.u.size(); ++i)
        unshifted = std::max(unshifted, std::abs(sp.u[i] - sr.u[i]));
    double initial_unshifted = 0.0;
    for (std::size_t i = 0; i < pert0.u.size(); ++i)
        initial_unshifted = std::max(initial_unshifted, std::abs(pert0.u[i] - ref0.u[i]));
    CHECK(unshifted >= 0.5 * initial_unshifted);
    const ShiftFit sfT = shifted_sup_distance(sp, sr);
    CHECK(sfT.shift == Catch::Approx(-delta / stretch).epsilon(0.3));
}
