// frontlab: bistable damped-wave front laboratory.
//
// Subcommands: validate-potential, front, simulate, energy, spectrum,
// run, sweep. Exit codes: 0 success, 2 configuration error, 3 numerical
// failure, 4 verdict failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "frontlab/config.hpp"
#include "frontlab/csv.hpp"
#include "frontlab/energy.hpp"
#include "frontlab/errors.hpp"
#include "frontlab/front.hpp"
#include "frontlab/potential.hpp"
#include "frontlab/runner.hpp"
#include "frontlab/spectrum.hpp"

namespace fs = std::filesystem;
using namespace frontlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerdict = 4;

int jobs_from(int cli_jobs) {
    if (cli_jobs > 0) return cli_jobs;
    if (const char* env = std::getenv("FRONTLAB_JOBS")) {
        const int j = std::atoi(env);
        if (j > 0) return j;
    }
    return 1;
}

std::vector<double> parse_list(const std::string& text) {
    return frontlab::detail::parse_double_list(text, 0);
}

int cmd_validate_potential(double theta) {
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    std::cout << "ok = " << (val.ok ? 1 : 0) << "\n";
    if (!val.ok) std::cout << "violation = " << val.first_violation << "\n";
    std::cout << "beta0 = " << fmt17(val.beta0) << "\nbeta1 = " << fmt17(val.beta1)
              << "\nm = " << fmt17(val.m) << "\neps0 = " << fmt17(val.eps0)
              << "\na = " << fmt17(val.a) << "\nb = " << fmt17(val.b) << "\n";
    for (const auto& cp : val.critical_points)
        std::cout << "critical u = " << fmt17(cp.u) << "  V = " << fmt17(cp.value) << "\n";
    return val.ok ? kExitOk : kExitVerdict;
}

int cmd_front(double theta, double tol, double alpha, const std::string& out) {
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    if (!val.ok) throw config_error("potential failed validation: " + val.first_violation);
    const FrontProfile fp = solve_front(p, val, tol, alpha);
    CsvWriter w(out);
    w.comment("c_star=" + fmt17(fp.c_star) + " s_star=" + fmt17(fp.s_star) +
              " c_h=" + fmt17(fp.c_h) + " eps0=" + fmt17(fp.epsilon0));
    w.header("y,h,hprime");
    for (std::size_t k = 0; k < fp.y.size(); ++k) w.row({fp.y[k], fp.h[k], fp.hp[k]});
    std::cout << "c_star = " << fmt17(fp.c_star) << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& config, const std::string& out) {
    RunConfig cfg = load_config(config);
    if (!out.empty()) cfg.out = out;
    const RunResult res = run(cfg);
    std::cout << "verdict = " << res.report.verdict << "\n";
    return kExitOk; // simulate reports, run judges
}

int cmd_energy(const std::string& traj, const std::string& c_list_text, const std::string& out,
               double alpha, double theta) {
    const std::vector<double> c_list = parse_list(c_list_text);
    if (c_list.empty()) throw config_error("energy: empty c-list");
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    if (!val.ok) throw config_error("potential failed validation: " + val.first_violation);

    // collect v-part snapshots (fall back to whole states when no split
    // files are present), sorted by time
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(traj)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("vstate_t", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    }
    const bool have_split = !files.empty();
    if (!have_split)
        for (const auto& entry : fs::directory_iterator(traj)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("state_t", 0) == 0 && entry.path().extension() == ".csv")
                files.push_back(entry.path());
        }
    if (files.empty()) throw config_error("energy: no state snapshots under " + traj);

    std::vector<WaveState> vs;
    std::vector<WaveState> rs;
    for (const auto& f : files) {
        vs.push_back(read_state_csv(f.string()));
        if (have_split) {
            fs::path rp = f.parent_path() / ("rstate_t" + f.filename().string().substr(8));
            rs.push_back(read_state_csv(rp.string()));
        }
    }
    std::vector<std::size_t> order(vs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vs[a].t < vs[b].t; });
    std::vector<WaveState> vs_sorted, rs_sorted;
    for (std::size_t oi : order) {
        vs_sorted.push_back(vs[oi]);
        if (have_split) rs_sorted.push_back(rs[oi]);
    }

    const InvasionEnergyTable table =
        invasion_energy_series(vs_sorted, rs_sorted, p, alpha, val.eps0, c_list);
    CsvWriter w(out);
    w.header("t,c,E_at_invasion,D,R,lower_bound");
    if (!table.series.empty()) {
        for (std::size_t ti = 0; ti < table.series[0].size(); ++ti)
            for (std::size_t ci = 0; ci < c_list.size(); ++ci) {
                const InvasionEnergySample& row = table.series[ci][ti];
                w.row({row.t, c_list[ci], row.E, row.D, row.R, row.lower_bound});
            }
    }
    return kExitOk;
}

int cmd_spectrum(double theta, double alpha, int k, const std::string& out) {
    const BistablePotential p = make_cubic(theta);
    const PotentialValidation val = validate(p, -2.0, 3.0, 1e-3);
    if (!val.ok) throw config_error("potential failed validation: " + val.first_violation);
    const FrontProfile fp = solve_front(p, val, 1e-10, alpha);
    const OperatorL L = build_L(fp, p, 2);
    const std::vector<double> mus = top_eigs(L.T, k);
    const SpectralGap gap = spectral_gap(mus, alpha, fp.c_star, val.m);
    const double edge = mu_alpha(alpha, val.m);

    CsvWriter w(out);
    w.comment("mu_alpha=" + fmt17(edge) + " nu=" + fmt17(gap.nu) +
              " c_star=" + fmt17(fp.c_star));
    w.header("index,mu,lambda");
    for (int i = 0; i < k; ++i) {
        const LambdaBranch lb = map_mu_to_lambda(mus[static_cast<std::size_t>(i)], alpha,
                                                 fp.c_star);
        w.row({static_cast<double>(i), mus[static_cast<std::size_t>(i)], lb.lambda});
    }
    std::cout << "nu = " << fmt17(gap.nu) << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config, const std::string& out, std::uint64_t seed,
            bool seed_given) {
    RunConfig cfg = load_config(config);
    if (!out.empty()) cfg.out = out;
    if (seed_given) cfg.seed = seed;
    const RunResult res = run(cfg);
    std::cout << "verdict = " << res.report.verdict << "\n"
              << "s_measured = " << fmt17(res.report.s_measured) << "\n"
              << "s_predicted = " << fmt17(res.report.s_predicted) << "\n"
              << "nu_hat = " << fmt17(res.report.nu_hat) << "\n"
              << "nu_predicted = " << fmt17(res.report.nu_predicted) << "\n";
    return res.report.pass ? kExitOk : kExitVerdict;
}

int cmd_sweep(const std::string& config, const std::string& out, const std::string& alphas_text,
              const std::string& thetas_text, int jobs) {
    RunConfig base = load_config(config);
    if (!out.empty()) base.out = out;
    const std::vector<double> alphas =
        alphas_text.empty() ? std::vector<double>{base.alpha} : parse_list(alphas_text);
    const std::vector<double> thetas =
        thetas_text.empty() ? std::vector<double>{base.theta} : parse_list(thetas_text);
    const std::vector<SweepRow> rows = sweep(base, alphas, thetas, jobs);
    int failures = 0;
    for (const SweepRow& r : rows) {
        if (!r.ok) {
            ++failures;
            std::cerr << "cell alpha=" << r.alpha << " theta=" << r.theta
                      << " failed: " << r.error << "\n";
        }
    }
    std::cout << "cells = " << rows.size() << ", failed = " << failures << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: travelling fronts of the damped bistable wave equation"};
    app.require_subcommand(1);

    double theta = 0.25, alpha = 1.0, tol = 1e-10;
    int k = 5, jobs = 0;
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string config, out, traj, c_list_text, alphas_text, thetas_text;

    auto* vp = app.add_subcommand("validate-potential", "check the bistable hypotheses");
    vp->add_option("--theta", theta);

    auto* fr = app.add_subcommand("front", "solve the front boundary-value problem");
    fr->add_option("--theta", theta);
    fr->add_option("--tol", tol);
    fr->add_option("--alpha", alpha);
    fr->add_option("--out", out)->required();

    auto* sim = app.add_subcommand("simulate", "time-integrate a configured experiment");
    sim->add_option("--config", config)->required();
    sim->add_option("--out", out);

    auto* en = app.add_subcommand("energy", "frame-energy ledger from stored snapshots");
    en->add_option("--traj", traj)->required();
    en->add_option("--c-list", c_list_text)->required();
    en->add_option("--out", out)->required();
    en->add_option("--alpha", alpha);
    en->add_option("--theta", theta);

    auto* sp = app.add_subcommand("spectrum", "linearization spectrum and gap");
    sp->add_option("--theta", theta);
    sp->add_option("--alpha", alpha);
    sp->add_option("--k", k);
    sp->add_option("--out", out)->required();

    auto* rn = app.add_subcommand("run", "full experiment with verdicts");
    rn->add_option("--config", config)->required();
    rn->add_option("--out", out);
    rn->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });

    auto* sw = app.add_subcommand("sweep", "grid of runs over alpha and theta");
    sw->add_option("--config", config)->required();
    sw->add_option("--out", out);
    sw->add_option("--alphas", alphas_text);
    sw->add_option("--thetas", thetas_text);
    sw->add_option("--jobs", jobs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (vp->parsed()) return cmd_validate_potential(theta);
        if (fr->parsed()) return cmd_front(theta, tol, alpha, out);
        if (sim->parsed()) return cmd_simulate(config, out);
        if (en->parsed()) return cmd_energy(traj, c_list_text, out, alpha, theta);
        if (sp->parsed()) return cmd_spectrum(theta, alpha, k, out);
        if (rn->parsed()) return cmd_run(config, out, seed, seed_given);
        if (sw->parsed()) return cmd_sweep(config, out, alphas_text, thetas_text,
                                           jobs_from(jobs));
    } catch (const config_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const numerical_error& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
