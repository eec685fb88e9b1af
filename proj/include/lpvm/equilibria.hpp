#pragma once

// Periodic steady states f = gamma(kappa(p) - Phi(x) - alpha) of prescribed
// mass, their neutral perturbations and relaxation experiments around them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/diagnostics.hpp"
#include "lpvm/entropy.hpp"
#include "lpvm/fields.hpp"
#include "lpvm/fixed_point.hpp"
#include "lpvm/numerics.hpp"
#include "lpvm/phase_space.hpp"

namespace lpvm {

struct Equilibrium {
    DistSlice f_inf;
    std::vector<double> Phi_inf;
    double alpha = 0.0;
    double mass = 0.0;
    std::vector<double> n_ext;
    Model model = Model::NR;
    int sweeps = 0;
    std::vector<double> sweep_residuals;  ///< sup |Phi_{k+1} - Phi_k| per sweep
};

namespace detail {

inline DistSlice gibbs_slice(const PhaseGrid& g, std::span<const double> Phi, double alpha,
                             const EntropyGenerator& gen, Model model) {
    std::vector<double> v(g.size());
    std::vector<double> k(g.np());
    for (int i = 0; i < g.np(); ++i) k[i] = kappa(g.p(i), model);
    for (int j = 0; j < g.nx(); ++j)
        for (int i = 0; i < g.np(); ++i)
            v[std::size_t(j) * g.np() + i] = gen.gamma(k[i] - Phi[j] - alpha);
    return DistSlice(g, std::move(v));
}

inline double gibbs_mass(const PhaseGrid& g, std::span<const double> Phi, double alpha,
                         const EntropyGenerator& gen, Model model) {
    return mass(gibbs_slice(g, Phi, alpha, gen, model));
}

/// alpha with gibbs_mass = M by bisection on the increasing mass map.
inline double solve_alpha(const PhaseGrid& g, std::span<const double> Phi, double M,
                          const EntropyGenerator& gen, Model model, double guess = 0.0) {
    if (!(M > 0.0)) throw std::invalid_argument("equilibrium: mass must be positive");
    auto m = [&](double a) { return gibbs_mass(g, Phi, a, gen, model); };
    double lo = guess, hi = guess, step = 1.0;
    int guard = 0;
    while (m(hi) < M) {
        hi += step;
        step *= 2.0;
        if (++guard > 60) throw std::runtime_error("equilibrium: mass unreachable on this grid");
    }
    step = 1.0;
    while (m(lo) > M) {
        lo -= step;
        step *= 2.0;
        if (++guard > 120) throw std::runtime_error("equilibrium: mass unreachable on this grid");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi || hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) break;
        (m(mid) < M ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline void check_support(const DistSlice& f, const EntropyGenerator& gen) {
    if (std::isfinite(gen.support_end) && f.boundary_max() > 0.0)
        throw std::runtime_error(
            "equilibrium: mass unreachable, support of gamma exceeds the momentum grid");
}

}  // namespace detail

/// Phi = 0 and L int gamma(kappa - alpha) dp = M.
inline Equilibrium homogeneous_equilibrium(double M, const PhaseGrid& grid,
                                           const EntropyGenerator& gen, Model model) {
    const std::vector<double> zero(grid.nx(), 0.0);
    const double alpha = detail::solve_alpha(grid, zero, M, gen, model);
    DistSlice f = detail::gibbs_slice(grid, zero, alpha, gen, model);
    detail::check_support(f, gen);
    return Equilibrium{std::move(f), zero, alpha, M,
                       std::vector<double>(grid.nx(), M / grid.L()), model, 0, {}};
}

struct EquilibriumOptions {
    double omega = 0.5;       ///< initial damping
    double tol = 1e-10;       ///< on sup |Phi_{k+1} - Phi_k|
    int max_sweeps = 1000;
    double min_omega = 1.0 / 1024;
};

/// Damped Picard iteration on Phi, alpha re-solved for mass M each sweep.
inline Equilibrium solve_equilibrium(double M, std::span<const double> n_ext,
                                     const PhaseGrid& grid, const EntropyGenerator& gen,
                                     Model model, const EquilibriumOptions& opt = {}) {
    if (static_cast<int>(n_ext.size()) != grid.nx())
        throw std::invalid_argument("solve_equilibrium: n_ext size mismatch");
    for (double v : n_ext)
        if (!(v > 0.0)) throw std::invalid_argument("solve_equilibrium: n_ext must be positive");
    const double ext_mass = periodic_integral(n_ext, grid.dx());
    if (std::abs(ext_mass - M) > 1e-8 * M)
        throw std::invalid_argument("solve_equilibrium: int n_ext must equal M");

    std::vector<double> Phi(grid.nx(), 0.0);
    double alpha = detail::solve_alpha(grid, Phi, M, gen, model);
    double omega = opt.omega;
    std::vector<double> history;
    for (int k = 0; k < opt.max_sweeps; ++k) {
        const DistSlice f = detail::gibbs_slice(grid, Phi, alpha, gen, model);
        const Potential target = solve_potential(density(f), n_ext, grid);
        std::vector<double> next(Phi.size());
        for (std::size_t j = 0; j < Phi.size(); ++j)
            next[j] = (1.0 - omega) * Phi[j] + omega * target.Phi[j];
        const double r = max_abs_diff(next, Phi);
        if (!history.empty() && r > history.back()) omega = std::max(0.5 * omega, opt.min_omega);
        history.push_back(r);
        Phi = std::move(next);
        alpha = detail::solve_alpha(grid, Phi, M, gen, model, alpha);
        if (r <= opt.tol) {
            DistSlice f_inf = detail::gibbs_slice(grid, Phi, alpha, gen, model);
            detail::check_support(f_inf, gen);
            return Equilibrium{std::move(f_inf), std::move(Phi), alpha, M,
                               std::vector<double>(n_ext.begin(), n_ext.end()), model, k + 1,
                               std::move(history)};
        }
    }
    std::string msg = "solve_equilibrium: no convergence after " +
                      std::to_string(opt.max_sweeps) + " sweeps; last residuals:";
    for (std::size_t i = history.size() >= 5 ? history.size() - 5 : 0; i < history.size(); ++i)
        msg += " " + std::to_string(history[i]);
    throw std::runtime_error(msg);
}

/// max |-D_x^2 Phi - (n_ext - n[f_inf])|, spectral D_x.
inline double poisson_residual(const Equilibrium& eq) {
    const PhaseGrid& g = eq.f_inf.grid();
    const auto d2 = spectral_second_derivative(eq.Phi_inf, g.L());
    const auto n = density(eq.f_inf);
    double m = 0.0;
    for (int j = 0; j < g.nx(); ++j) m = std::max(m, std::abs(-d2[j] - (eq.n_ext[j] - n[j])));
    return m;
}

/// max |vhat D_x f + (D_x Phi) D_p f| with 4th-order differences; all x,
/// momentum nodes at least two away from the cut-off.
inline double stationarity_residual(const Equilibrium& eq) {
    const PhaseGrid& g = eq.f_inf.grid();
    const int nx = g.nx(), np = g.np();
    const double dp = g.dp();
    const auto dPhi = fd4_derivative(eq.Phi_inf, g.dx());
    std::vector<double> row(nx);
    double m = 0.0;
    for (int i = 2; i < np - 2; ++i) {
        for (int j = 0; j < nx; ++j) row[j] = eq.f_inf(j, i);
        const auto dfx = fd4_derivative(row, g.dx());
        const double v = vhat(g.p(i), eq.model);
        for (int j = 0; j < nx; ++j) {
            const double dfp = (eq.f_inf(j, i - 2) - 8.0 * eq.f_inf(j, i - 1) +
                                8.0 * eq.f_inf(j, i + 1) - eq.f_inf(j, i + 2)) /
                               (12.0 * dp);
            m = std::max(m, std::abs(v * dfx[j] + dPhi[j] * dfp));
        }
    }
    return m;
}

enum class PerturbKind { density_mod, odd_p };

/// Neutral perturbation of the equilibrium at spatial mode `mode`.
inline DistSlice perturb(const Equilibrium& eq, double eps, int mode, PerturbKind kind) {
    const PhaseGrid& g = eq.f_inf.grid();
    const double k = 2.0 * std::numbers::pi * mode / g.L();
    std::vector<double> v(eq.f_inf.values().begin(), eq.f_inf.values().end());
    if (eps == 0.0) return eq.f_inf;
    double max_eps = std::numeric_limits<double>::infinity();
    if (kind == PerturbKind::density_mod) {
        for (int j = 0; j < g.nx(); ++j) {
            const double c = std::cos(k * g.x(j));
            if (c != 0.0) max_eps = std::min(max_eps, 1.0 / std::abs(c));
            for (int i = 0; i < g.np(); ++i) v[std::size_t(j) * g.np() + i] *= 1.0 + eps * c;
        }
    } else {
        const double norm = std::sqrt(2.0 * std::exp(1.0));  // max of p e^{-p^2} is 1/sqrt(2e)
        for (int j = 0; j < g.nx(); ++j) {
            const double c = std::cos(k * g.x(j));
            for (int i = 0; i < g.np(); ++i) {
                const double p = g.p(i);
                const double shape = c * p * std::exp(-p * p) * norm;
                if (shape != 0.0)
                    max_eps = std::min(max_eps, eq.f_inf(j, i) / std::abs(shape));
                v[std::size_t(j) * g.np() + i] += eps * shape;
            }
        }
    }
    if (std::abs(eps) > max_eps)
        throw std::invalid_argument("perturb: eps makes f negative; max feasible eps is " +
                                    std::to_string(max_eps));
    for (double& x : v) x = std::max(x, 0.0);  // -0 and roundoff at the limit
    DistSlice f(g, std::move(v));
    if (kind == PerturbKind::density_mod) {
        const double scale = eq.mass / mass(f);
        for (double& x : f.mutable_values()) x *= scale;
    }
    return f;
}

/// KT_sigma at zero wave fields: WL (field form) + S_sigma.
inline double free_energy(const DistSlice& f, std::span<const double> n_ext, Model model,
                          const EntropyGenerator& gen) {
    return longitudinal_energy(f, n_ext, model).form2 + entropy(f, gen);
}

struct StabilityPoint {
    double t = 0.0;
    double sigma_plus_WT = 0.0;
    double l1 = 0.0, l2 = 0.0, h1 = 0.0;
};

struct StabilityRun {
    SolveResult solution;
    std::vector<StabilityPoint> series;
};

/// Evolves the perturbed equilibrium (optionally with a pump wave A0) and
/// records relative entropy + WT and the distances at every slice.
inline StabilityRun stability_experiment(const Equilibrium& eq, double eps, int mode,
                                         PerturbKind kind, const SolveConfig& cfg,
                                         const EntropyGenerator& gen,
                                         std::span<const double> A0 = {},
                                         std::span<const double> Adot0 = {}) {
    const PhaseGrid& g = eq.f_inf.grid();
    const DistSlice f0 = perturb(eq, eps, mode, kind);
    const std::vector<double> zero(g.nx(), 0.0);
    const auto a0 = A0.empty() ? std::span<const double>(zero) : A0;
    const auto ad0 = Adot0.empty() ? std::span<const double>(zero) : Adot0;
    StabilityRun run{solve(f0, a0, ad0, eq.n_ext, cfg), {}};
    for (std::size_t w = 0; w < run.solution.windows.size(); ++w) {
        const WindowSolution& win = run.solution.windows[w];
        for (int s = (w == 0 ? 0 : 1); s < win.fields.slices(); ++s) {
            const DistSlice& f = win.dist[s];
            StabilityPoint pt;
            pt.t = run.solution.window_start[w] + s * win.fields.dt;
            pt.sigma_plus_WT = relative_entropy(f, eq.f_inf, gen) +
                               transversal_energy(f, win.fields.A[s], win.fields.Adot[s],
                                                  win.fields.dxA[s]);
            pt.l1 = lp_distance(f, eq.f_inf, 1);
            pt.l2 = lp_distance(f, eq.f_inf, 2);
            pt.h1 = h1_distance(solve_potential(density(f), eq.n_ext, g, kStateNeutralityTol).Phi,
                                 eq.Phi_inf, g);
            run.series.push_back(pt);
        }
    }
    return run;
}

}  // namespace lpvm
