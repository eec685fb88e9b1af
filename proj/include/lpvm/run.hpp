#pragma once

// Run orchestration and the on-disk output formats.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/config.hpp"
#include "lpvm/diagnostics.hpp"
#include "lpvm/equilibria.hpp"
#include "lpvm/fixed_point.hpp"
#include "lpvm/initial.hpp"

namespace lpvm {

inline SolveConfig solve_config(const RunConfig& c) {
    SolveConfig s;
    s.window.model = c.model;
    s.window.nt = c.nt_per_window;
    s.window.dt = c.dt();
    s.window.tol_fp = c.tol_fp;
    s.window.max_iters = c.max_iters;
    s.t_total = c.t_end;
    return s;
}

/// One diagnostics row per distinct time slice of a chained solution.
inline std::vector<DiagnosticsRow> diagnostic_rows(const SolveResult& res,
                                                   std::span<const double> n_ext, Model model,
                                                   const EntropyGenerator& gen,
                                                   const Reference* ref = nullptr,
                                                   std::string* stopped = nullptr) {
    std::vector<DiagnosticsRow> rows;
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
        const WindowSolution& win = res.windows[w];
        if (!win.trace.converged) continue;
        const FieldHistory& h = win.fields;
        const auto cont = continuity_residual(win.n, win.j, h.dt, h.grid);
        for (int s = (w == 0 ? 0 : 1); s < h.slices(); ++s) {
            const SliceState st{res.window_start[w] + s * h.dt, win.dist[s], h.E[s], h.A[s],
                                h.Adot[s], h.dxA[s], h.dxxA[s]};
            DiagnosticsRow r;
            try {
                r = evaluate_row(st, n_ext, model, gen, ref);
            } catch (const std::invalid_argument& e) {
                if (stopped) *stopped = "diagnostics stop at t=" + format_double(st.t) + ": " + e.what();
                return rows;
            }
            r.continuity_residual = cont[s];
            rows.push_back(r);
        }
    }
    return rows;
}

inline std::string csv_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  const std::vector<DiagnosticsRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,mass,WT,WL_form1,WL_form2,W_total,S_sigma,KT_sigma,relative_entropy,"
           "gauss_residual,continuity_residual,sup_dxxA,l1_dist,l2_dist,h1_phi_dist\n";
    for (const auto& r : rows) {
        out << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.WT)
            << ',' << format_double(r.WL_form1) << ',' << format_double(r.WL_form2) << ','
            << format_double(r.W_total) << ',' << format_double(r.S_sigma) << ','
            << format_double(r.KT_sigma) << ',' << csv_field(r.relative_entropy) << ','
            << format_double(r.gauss_residual) << ',' << format_double(r.continuity_residual)
            << ',' << format_double(r.sup_dxxA) << ',' << csv_field(r.l1_dist) << ','
            << csv_field(r.l2_dist) << ',' << csv_field(r.h1_phi_dist) << '\n';
    }
}

inline void write_trace_csv(const std::filesystem::path& path, const SolveResult& res) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "window,k,dE,dA,dxA_delta,dF,sup_dxxA,sup_dxF\n";
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
        const auto& recs = res.windows[w].trace.records;
        for (std::size_t k = 0; k < recs.size(); ++k) {
            const auto& r = recs[k];
            out << w << ',' << k << ',' << format_double(r.dE) << ',' << format_double(r.dA)
                << ',' << format_double(r.dxA_delta) << ',' << format_double(r.dF) << ','
                << format_double(r.sup_dxxA) << ',' << format_double(r.sup_dxF) << '\n';
        }
    }
}

/// Raw little-endian float64, x outermost then p.
inline void write_snapshot(const std::filesystem::path& path, const DistSlice& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (double v : f.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
}

inline DistSlice read_snapshot(const std::filesystem::path& path, const PhaseGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<double> v(grid.size());
    for (double& x : v) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8))
            throw std::runtime_error("snapshot too short: " + path.string());
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t(bytes[b]) << (8 * b);
        std::memcpy(&x, &bits, sizeof x);
    }
    return DistSlice(grid, std::move(v));
}

inline std::string snapshot_name(long index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "f_t%06ld.bin", index);
    return buf;
}

struct ManifestEntry {
    std::string key, value;
};

/// Writes snapshots, both CSV files and manifest.txt for a solution.
inline void write_run(const std::filesystem::path& dir, const RunConfig& cfg,
                      const SolveResult& res, const std::vector<DiagnosticsRow>& rows,
                      const std::vector<ManifestEntry>& extra = {}) {
    std::filesystem::create_directories(dir);
    write_diagnostics_csv(dir / "diagnostics.csv", rows);
    write_trace_csv(dir / "iteration_trace.csv", res);

    std::string times, files, sentinel;
    long global = 0;
    double max_escape = 0.0;
    bool support_flag = false;
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
        const WindowSolution& win = res.windows[w];
        max_escape = std::max(max_escape, win.escaped_fraction);
        support_flag = support_flag || win.support_flag;
        if (win.sentinel_first_warning >= 0)
            sentinel += (sentinel.empty() ? "" : " ") + std::to_string(w) + ":" +
                        std::to_string(win.sentinel_first_warning);
        if (!win.trace.converged) continue;
        for (int s = (w == 0 ? 0 : 1); s < win.fields.slices(); ++s) {
            const long idx = global + s;
            if (idx % cfg.snapshot_stride != 0) continue;
            const std::string name = snapshot_name(idx);
            write_snapshot(dir / name, win.dist[s]);
            times += (times.empty() ? "" : " ") + format_double(res.window_start[w] + s * win.fields.dt);
            files += (files.empty() ? "" : " ") + name;
        }
        global += win.fields.nt;
    }

    std::ofstream m(dir / "manifest.txt", std::ios::binary);
    if (!m) throw std::runtime_error("cannot write manifest in " + dir.string());
    m << "status = " << (res.completed ? "completed" : "partial") << '\n';
    if (!res.completed) m << "failure = " << res.failure << '\n';
    m << "config_hash = " << config_hash(cfg) << '\n'
      << "model = " << to_string(cfg.model) << '\n'
      << "nx = " << cfg.nx << '\n'
      << "np = " << cfg.np << '\n'
      << "L = " << format_double(cfg.L) << '\n'
      << "p_max = " << format_double(cfg.p_max) << '\n'
      << "dt = " << format_double(cfg.dt()) << '\n'
      << "snapshot_layout = float64 little-endian, x outer, p inner\n"
      << "slice_times = " << times << '\n'
      << "snapshots = " << files << '\n'
      << "windows = " << res.windows.size() << '\n'
      << "support_flag = " << (support_flag ? 1 : 0) << '\n'
      << "max_escaped_fraction = " << format_double(max_escape) << '\n'
      << "sentinel_warnings = " << sentinel << '\n';
    // t_start:nt:iterations:first sentinel iteration (-1 = none)
    std::string abandoned;
    for (const AbandonedAttempt& a : res.abandoned)
        abandoned += (abandoned.empty() ? "" : " ") + format_double(a.t_start) + ":" +
                     std::to_string(a.nt) + ":" + std::to_string(a.trace.iterations_used) + ":" +
                     std::to_string(a.sentinel_first_warning);
    m << "abandoned_attempts = " << abandoned << '\n';
    for (const auto& e : extra) m << e.key << " = " << e.value << '\n';
}

/// `simulate`: exit status 0, or 2 when a window failed to converge.
inline int run_simulation(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.f0.name == "equilibrium")
        throw std::invalid_argument("simulate: f0 = equilibrium needs the stability command");
    const PhaseGrid grid = cfg.grid();
    const InitialData init = builtin_f0(cfg.f0, grid);
    const auto n_ext = builtin_n_ext(cfg.n_ext, grid);
    const auto A0 = wave_profile(cfg.A0, grid);
    const auto Adot0 = wave_profile(cfg.Adot0, grid);
    const SolveResult res = solve(init.f0, A0, Adot0, n_ext, solve_config(cfg));
    std::string stopped;
    const auto rows = diagnostic_rows(res, n_ext, cfg.model, make_generator(cfg.sigma), nullptr,
                                      &stopped);
    write_run(out_dir, cfg, res, rows,
              {{"diagnostics_note", stopped},
               {"majorant_g0", format_double(init.g.at_zero())},
               {"majorant_M0", format_double(init.M0)},
               {"majorant_M1", format_double(init.M1)},
               {"majorant_M2", format_double(init.M2)}});
    return res.completed ? 0 : 2;
}

inline Equilibrium equilibrium_from_config(const RunConfig& cfg) {
    const PhaseGrid grid = cfg.grid();
    const auto n_ext = builtin_n_ext(cfg.n_ext, grid);
    const double M = periodic_integral(n_ext, grid.dx());
    const auto gen = make_generator(cfg.sigma);
    if (cfg.n_ext.name == "uniform") return homogeneous_equilibrium(M, grid, gen, cfg.model);
    return solve_equilibrium(M, n_ext, grid, gen, cfg.model);
}

/// `equilibrium`: writes the steady state and its residuals.
inline int run_equilibrium(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const Equilibrium eq = equilibrium_from_config(cfg);
    const PhaseGrid& g = eq.f_inf.grid();
    std::filesystem::create_directories(out_dir);
    write_snapshot(out_dir / "f_eq.bin", eq.f_inf);
    const auto n = density(eq.f_inf);
    {
        std::ofstream out(out_dir / "potential.csv", std::ios::binary);
        out << "x,Phi,n,n_ext\n";
        for (int j = 0; j < g.nx(); ++j)
            out << format_double(g.x(j)) << ',' << format_double(eq.Phi_inf[j]) << ','
                << format_double(n[j]) << ',' << format_double(eq.n_ext[j]) << '\n';
    }
    const auto gen = make_generator(cfg.sigma);
    std::ofstream m(out_dir / "manifest.txt", std::ios::binary);
    m << "config_hash = " << config_hash(cfg) << '\n'
      << "model = " << to_string(cfg.model) << '\n'
      << "nx = " << cfg.nx << '\n'
      << "np = " << cfg.np << '\n'
      << "L = " << format_double(cfg.L) << '\n'
      << "p_max = " << format_double(cfg.p_max) << '\n'
      << "sigma = " << cfg.sigma << '\n'
      << "alpha = " << format_double(eq.alpha) << '\n'
      << "mass = " << format_double(mass(eq.f_inf)) << '\n'
      << "target_mass = " << format_double(eq.mass) << '\n'
      << "sweeps = " << eq.sweeps << '\n'
      << "poisson_residual = " << format_double(poisson_residual(eq)) << '\n'
      << "stationarity_residual = " << format_double(stationarity_residual(eq)) << '\n'
      << "free_energy = " << format_double(free_energy(eq.f_inf, eq.n_ext, eq.model, gen)) << '\n';
    return 0;
}

/// `stability`: evolves a perturbed equilibrium with the reference columns on.
inline int run_stability(const RunConfig& cfg, double eps, int mode, PerturbKind kind,
                         const std::filesystem::path& out_dir) {
    const Equilibrium eq = equilibrium_from_config(cfg);
    const PhaseGrid& grid = eq.f_inf.grid();
    const auto gen = make_generator(cfg.sigma);
    const auto A0 = wave_profile(cfg.A0, grid);
    const auto Adot0 = wave_profile(cfg.Adot0, grid);
    const StabilityRun run =
        stability_experiment(eq, eps, mode, kind, solve_config(cfg), gen, A0, Adot0);
    const Reference ref{&eq.f_inf, eq.Phi_inf};
    std::string stopped;
    const auto rows = diagnostic_rows(run.solution, eq.n_ext, cfg.model, gen, &ref, &stopped);
    write_run(out_dir, cfg, run.solution, rows,
              {{"diagnostics_note", stopped},
               {"equilibrium_alpha", format_double(eq.alpha)},
               {"perturbation", std::string(kind == PerturbKind::odd_p ? "odd_p" : "density_mod") +
                                    " eps=" + format_double(eps) + " mode=" + std::to_string(mode)}});
    std::ofstream out(out_dir / "stability.csv", std::ios::binary);
    out << "t,sigma_plus_WT,l1_dist,l2_dist,h1_phi_dist\n";
    for (const auto& p : run.series)
        out << format_double(p.t) << ',' << format_double(p.sigma_plus_WT) << ','
            << format_double(p.l1) << ',' << format_double(p.l2) << ',' << format_double(p.h1)
            << '\n';
    return run.solution.completed ? 0 : 2;
}

}  // namespace lpvm
