// Command-line front end: simulate, equilibrium, stability, appendix-b,
// wave-check.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lpvm/lpvm.hpp"

namespace {

lpvm::RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return lpvm::parse_config(ss.str());
}

void print_row(const char* name, double v) { std::printf("%s,%.17g\n", name, v); }

int appendix_b(double alpha, double beta, double t, double v0, int steps) {
    const lpvm::PhiParams prm{alpha, beta};
    std::printf("quantity,value\n");
    print_row("T1", lpvm::compute_T1(prm));
    print_row("tangency_time", lpvm::tangency_time(prm));
    if (t < 0.0) return 0;
    const lpvm::FixedPoints fp = lpvm::fixed_points(t, prm);
    print_row("t", t);
    std::printf("classification,%s\n", lpvm::to_string(fp.kind));
    print_row("v_low", fp.v_low);
    print_row("v_high", fp.v_high);
    print_row("min_gap", fp.min_gap);
    const lpvm::IterationOutcome it = lpvm::iterate_v(v0, t, prm, steps);
    std::printf("verdict,%s\n", lpvm::to_string(it.verdict));
    print_row("limit", it.limit);
    std::printf("steps,%zu\n", it.sequence.size() - 1);
    return 0;
}

int wave_check(int nx, int nt) {
    const double L = 2.0 * std::numbers::pi;
    const lpvm::PhaseGrid grid(L, nx, 8.0, 9);
    const double dt = 1.0 / nt;
    std::vector<double> s(nx), zero(nx, 0.0), msin(nx);
    for (int j = 0; j < nx; ++j) {
        s[j] = std::sin(grid.x(j));
        msin[j] = -s[j];
    }
    std::printf("case,quantity,max_error\n");

    // free wave: A = sin x cos t
    const lpvm::SpaceTimeArray none(nt + 1, nx);
    const auto free = lpvm::duhamel_history(s, zero, none, grid, dt);
    double eA = 0, eAd = 0, eAx = 0, eAxx = 0;
    for (int m = 0; m <= nt; ++m) {
        const double t = m * dt;
        for (int j = 0; j < nx; ++j) {
            const double x = grid.x(j);
            eA = std::max(eA, std::abs(free.A(m, j) - std::sin(x) * std::cos(t)));
            eAd = std::max(eAd, std::abs(free.Adot(m, j) + std::sin(x) * std::sin(t)));
            eAx = std::max(eAx, std::abs(free.dxA(m, j) - std::cos(x) * std::cos(t)));
            eAxx = std::max(eAxx, std::abs(free.dxxA(m, j) + std::sin(x) * std::cos(t)));
        }
    }
    std::printf("free,A,%.6e\nfree,Adot,%.6e\nfree,dxA,%.6e\nfree,dxxA,%.6e\n", eA, eAd, eAx, eAxx);

    // forced: A = sin x e^{-t}, source 2 sin x e^{-t}
    lpvm::SpaceTimeArray S(nt + 1, nx);
    for (int m = 0; m <= nt; ++m)
        for (int j = 0; j < nx; ++j) S(m, j) = 2.0 * s[j] * std::exp(-m * dt);
    const auto forced = lpvm::duhamel_history(s, msin, S, grid, dt);
    double fA = 0, fAd = 0, lA = 0, cross = 0;
    const bool cfl = dt <= grid.dx();
    lpvm::SpaceTimeArray leap;
    if (cfl) leap = lpvm::leapfrog_wave_oracle(s, msin, S, grid, dt);
    for (int m = 0; m <= nt; ++m) {
        const double e = std::exp(-m * dt);
        for (int j = 0; j < nx; ++j) {
            fA = std::max(fA, std::abs(forced.A(m, j) - s[j] * e));
            fAd = std::max(fAd, std::abs(forced.Adot(m, j) + s[j] * e));
            if (cfl) {
                lA = std::max(lA, std::abs(leap(m, j) - s[j] * e));
                cross = std::max(cross, std::abs(leap(m, j) - forced.A(m, j)));
            }
        }
    }
    std::printf("forced,A,%.6e\nforced,Adot,%.6e\n", fA, fAd);
    if (cfl) std::printf("leapfrog,A,%.6e\nduhamel_vs_leapfrog,A,%.6e\n", lA, cross);
    else std::printf("leapfrog,skipped (dt > dx),nan\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laser-plasma Vlasov-Maxwell fixed-point solver"};
    app.require_subcommand(1);

    std::string config, out;
    auto* sim = app.add_subcommand("simulate", "run the solver from a configuration file");
    sim->add_option("--config", config, "configuration file")->required();
    sim->add_option("--out", out, "output directory (overrides output_dir)");

    auto* eqc = app.add_subcommand("equilibrium", "construct the steady state for a configuration");
    eqc->add_option("--config", config)->required();
    eqc->add_option("--out", out);

    double eps = 0.01;
    int mode = 1;
    std::string kind = "density_mod";
    auto* stab = app.add_subcommand("stability", "evolve a perturbed equilibrium");
    stab->add_option("--config", config)->required();
    stab->add_option("--eps", eps)->required();
    stab->add_option("--mode", mode)->required();
    stab->add_option("--kind", kind)->check(CLI::IsMember({"density_mod", "odd_p"}));
    stab->add_option("--out", out);

    double alpha = 1.0, beta = 1.0, t = -1.0, v0 = 0.0;
    int steps = 60;
    auto* ab = app.add_subcommand("appendix-b", "critical time and fixed points of the majorant recurrence");
    ab->add_option("--alpha", alpha)->required();
    ab->add_option("--beta", beta)->required();
    ab->add_option("--t", t);
    ab->add_option("--v0", v0);
    ab->add_option("--steps", steps);

    int nx = 64, nt = 64;
    auto* wc = app.add_subcommand("wave-check", "d'Alembert/Duhamel cross-checks");
    wc->add_option("--nx", nx)->required();
    wc->add_option("--nt", nt)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim || *eqc || *stab) {
            const lpvm::RunConfig cfg = load_config(config);
            const std::string dir = out.empty() ? cfg.output_dir : out;
            if (*sim) return lpvm::run_simulation(cfg, dir);
            if (*eqc) return lpvm::run_equilibrium(cfg, dir);
            return lpvm::run_stability(cfg, eps, mode,
                                       kind == "odd_p" ? lpvm::PerturbKind::odd_p
                                                       : lpvm::PerturbKind::density_mod,
                                       dir);
        }
        if (*ab) return appendix_b(alpha, beta, t, v0, steps);
        return wave_check(nx, nt);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
