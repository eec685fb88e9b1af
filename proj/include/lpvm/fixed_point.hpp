#pragma once

// The recurrence operator (transport, Ampere, Duhamel) and the Picard loop
// that converges to its fixed point on a time window, plus window chaining.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/characteristics.hpp"
#include "lpvm/fields.hpp"
#include "lpvm/numerics.hpp"
#include "lpvm/phase_space.hpp"
#include "lpvm/space_time.hpp"

namespace lpvm {

struct IterationRecord {
    double dE = 0.0;         ///< sup |E_{k+1} - E_k|
    double dA = 0.0;         ///< sup |A_{k+1} - A_k|
    double dxA_delta = 0.0;  ///< sup |dxA_{k+1} - dxA_k|
    double dF = 0.0;         ///< sup |F_{k+1} - F_k|
    double sup_dxxA = 0.0;   ///< sup |d2A/dx2| of iterate k+1
    double sup_dxF = 0.0;    ///< sup |dF/dx| of iterate k+1

    /// The telescoping quantity u_k = ||A_{k+1} - A_k|| + ||F_{k+1} - F_k||.
    double u() const { return dA + dF; }
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    int iterations_used = 0;  ///< applications of the recurrence operator

    std::vector<double> u() const {
        std::vector<double> out;
        for (const auto& r : records) out.push_back(r.u());
        return out;
    }
};

struct LStep {
    FieldHistory fields;
    DistHistory dist;
    SpaceTimeArray n, j;
    double escaped_fraction = 0.0;
    bool support_flag = false;
};

/// One application of the recurrence operator:
///   1. F = E + A dxA from the input iterate;
///   2. f at every slice by characteristics, then n and j;
///   3. E' from Ampere started at the Gauss field of f0, A' from Duhamel
///      with source -n A (new density, input A).
inline LStep apply_L(const FieldHistory& fields, const DistSlice& f0,
                     std::span<const double> n_ext, Model model,
                     double support_tolerance = 1e-10, double neutrality_tol = 1e-8) {
    fields.validate();
    if (!(f0.grid() == fields.grid))
        throw std::invalid_argument("apply_L: f0 and fields live on different grids");
    const PhaseGrid& g = fields.grid;
    const ForceSampler F = assemble_force(fields);

    LStep out{FieldHistory::zeros(g, fields.nt, fields.dt), {}, SpaceTimeArray(fields.nt + 1, g.nx()),
              SpaceTimeArray(fields.nt + 1, g.nx()), 0.0, false};
    out.dist.reserve(fields.nt + 1);
    for (int s = 0; s <= fields.nt; ++s) {
        TransportResult tr = transport_f0(f0, F, s, model, support_tolerance);
        out.escaped_fraction = std::max(out.escaped_fraction, tr.escaped_fraction);
        out.support_flag = out.support_flag || tr.support_flag;
        out.n.set_slice(s, density(tr.f));
        out.j.set_slice(s, flux(tr.f, model));
        out.dist.push_back(std::move(tr.f));
    }

    const auto E0 = poisson_E0(out.n[0], n_ext, g, neutrality_tol);
    out.fields.E = ampere_history(E0, out.j, fields.dt);

    SpaceTimeArray S(fields.nt + 1, g.nx());
    for (int s = 0; s <= fields.nt; ++s)
        for (int x = 0; x < g.nx(); ++x) S(s, x) = -out.n(s, x) * fields.A(s, x);
    WaveHistory w = duhamel_history(fields.A[0], fields.Adot[0], S, g, fields.dt);
    out.fields.A = std::move(w.A);
    out.fields.Adot = std::move(w.Adot);
    out.fields.dxA = std::move(w.dxA);
    out.fields.dxxA = std::move(w.dxxA);
    return out;
}

/// The initial iterate: every slice equal to the data at t = 0, with E from
/// the Gauss law of f0.
inline FieldHistory constant_extension(const DistSlice& f0, std::span<const double> A0,
                                       std::span<const double> Adot0,
                                       std::span<const double> n_ext, int nt, double dt,
                                       double neutrality_tol = 1e-8) {
    const PhaseGrid& g = f0.grid();
    const int slices = nt + 1;
    const auto E0 = poisson_E0(density(f0), n_ext, g, neutrality_tol);
    const auto dA0 = fd4_derivative(A0, g.dx());
    const auto ddA0 = fd4_second_derivative(A0, g.dx());
    return FieldHistory{g,
                        nt,
                        dt,
                        SpaceTimeArray::constant_in_time(slices, E0),
                        SpaceTimeArray::constant_in_time(slices, A0),
                        SpaceTimeArray::constant_in_time(slices, Adot0),
                        SpaceTimeArray::constant_in_time(slices, dA0),
                        SpaceTimeArray::constant_in_time(slices, ddA0)};
}

struct SentinelAdvisory {
    bool warn = false;
    std::string reason;
};

/// Warns when sup|d2A/dx2| or sup|dF/dx| rose at every one of the last
/// `span` iterations and grew by more than `factor` overall.
inline SentinelAdvisory blowup_sentinel(const IterationTrace& trace, double factor = 10.0,
                                        int span = 5) {
    SentinelAdvisory adv;
    const auto& r = trace.records;
    if (static_cast<int>(r.size()) < span) return adv;
    auto check = [&](auto member, const char* name) {
        const std::size_t first = r.size() - span;
        for (std::size_t k = first + 1; k < r.size(); ++k)
            if (!(r[k].*member > r[k - 1].*member)) return;
        const double lo = r[first].*member, hi = r.back().*member;
        if (hi > factor * lo) {
            adv.warn = true;
            adv.reason += std::string(adv.reason.empty() ? "" : "; ") + name + " grew from " +
                          std::to_string(lo) + " to " + std::to_string(hi);
        }
    };
    check(&IterationRecord::sup_dxxA, "sup_dxxA");
    check(&IterationRecord::sup_dxF, "sup_dxF");
    return adv;
}

struct WindowConfig {
    Model model = Model::QR;
    int nt = 64;           ///< slices per window (excluding t = 0)
    double dt = 1.0 / 64;  ///< slice spacing
    double tol_fp = 1e-9;
    int max_iters = 50;
    double support_tolerance = 1e-10;
    double sentinel_factor = 10.0;
    double neutrality_tol = 1e-8;  ///< relative net charge accepted in the window's f0
};

struct WindowSolution {
    FieldHistory fields;
    DistHistory dist;
    SpaceTimeArray n, j;
    IterationTrace trace;
    double escaped_fraction = 0.0;
    bool support_flag = false;
    int sentinel_first_warning = -1;  ///< iteration at which blowup_sentinel first fired
};

inline SpaceTimeArray force_samples(const FieldHistory& h) {
    return assemble_force(h).samples();
}

inline IterationRecord compare_iterates(const FieldHistory& prev, const FieldHistory& next) {
    IterationRecord r;
    r.dE = sup_distance(next.E, prev.E);
    r.dA = sup_distance(next.A, prev.A);
    r.dxA_delta = sup_distance(next.dxA, prev.dxA);
    const SpaceTimeArray Fp = force_samples(prev), Fn = force_samples(next);
    r.dF = sup_distance(Fn, Fp);
    r.sup_dxxA = sup_norm(next.dxxA);
    for (int s = 0; s < Fn.slices(); ++s)
        r.sup_dxF = std::max(r.sup_dxF, max_abs(fd4_derivative(Fn[s], next.grid.dx())));
    return r;
}

/// Picard iteration from a given initial iterate until u_k <= tol_fp.
inline WindowSolution iterate_window(FieldHistory iterate, const DistSlice& f0,
                                     std::span<const double> n_ext, const WindowConfig& cfg) {
    WindowSolution sol{iterate, {}, {}, {}, {}};
    for (int k = 0; k < cfg.max_iters; ++k) {
        LStep step = apply_L(iterate, f0, n_ext, cfg.model, cfg.support_tolerance,
                               cfg.neutrality_tol);
        sol.trace.records.push_back(compare_iterates(iterate, step.fields));
        sol.trace.iterations_used = k + 1;
        sol.fields = std::move(step.fields);
        sol.dist = std::move(step.dist);
        sol.n = std::move(step.n);
        sol.j = std::move(step.j);
        sol.escaped_fraction = std::max(sol.escaped_fraction, step.escaped_fraction);
        sol.support_flag = sol.support_flag || step.support_flag;
        if (sol.sentinel_first_warning < 0 && blowup_sentinel(sol.trace, cfg.sentinel_factor).warn)
            sol.sentinel_first_warning = k;
        const double u = sol.trace.records.back().u();
        if (u <= cfg.tol_fp) {
            sol.trace.converged = true;
            break;
        }
        if (!std::isfinite(u)) break;
        iterate = sol.fields;
    }
    return sol;
}

/// Converges the window [0, nt dt] from the constant-in-time extension of
/// the initial data. Returns the trace even when max_iters is exhausted.
inline WindowSolution solve_window(const DistSlice& f0, std::span<const double> A0,
                                   std::span<const double> Adot0,
                                   std::span<const double> n_ext, const WindowConfig& cfg) {
    return iterate_window(
        constant_extension(f0, A0, Adot0, n_ext, cfg.nt, cfg.dt, cfg.neutrality_tol), f0, n_ext,
        cfg);
}

struct SolveConfig {
    WindowConfig window;     ///< nt here is the nominal slices per window
    double t_total = 1.0;
    int max_halvings = 3;
};

/// A window attempt discarded before halving.
struct AbandonedAttempt {
    double t_start = 0.0;
    int nt = 0;
    IterationTrace trace;
    int sentinel_first_warning = -1;
};

struct SolveResult {
    std::vector<WindowSolution> windows;
    std::vector<AbandonedAttempt> abandoned;
    std::vector<double> window_start;
    bool completed = false;
    std::string failure;
};

/// Chains windows over [0, t_total]; each restarts from the last slice of
/// the previous one (f, A, dA/dt carried, E re-solved from Gauss with the
/// carried mass defect removed, up to kStateNeutralityTol). A window
/// that does not converge is retried at half length, at most max_halvings
/// times, after which the run stops with the windows done so far.
inline SolveResult solve(const DistSlice& f0, std::span<const double> A0,
                         std::span<const double> Adot0, std::span<const double> n_ext,
                         const SolveConfig& cfg) {
    const double dt = cfg.window.dt;
    const long total_slices = std::lround(cfg.t_total / dt);
    if (total_slices < 1 || std::abs(total_slices * dt - cfg.t_total) > 1e-9 * cfg.t_total)
        throw std::invalid_argument("solve: t_total must be a whole number of slices");

    SolveResult result;
    DistSlice f = f0;
    std::vector<double> A(A0.begin(), A0.end()), Adot(Adot0.begin(), Adot0.end());
    long done = 0;
    while (done < total_slices) {
        int nt = static_cast<int>(std::min<long>(cfg.window.nt, total_slices - done));
        int halvings = 0;
        for (;;) {
            WindowConfig wc = cfg.window;
            wc.nt = nt;
            if (done > 0) wc.neutrality_tol = std::max(wc.neutrality_tol, kStateNeutralityTol);
            std::optional<WindowSolution> attempt;
            try {
                attempt.emplace(solve_window(f, A, Adot, n_ext, wc));
            } catch (const std::invalid_argument& e) {
                result.failure = "window starting at t=" + std::to_string(done * dt) +
                                 " rejected its initial state: " + e.what();
                return result;
            }
            WindowSolution& w = *attempt;
            if (w.trace.converged) {
                result.window_start.push_back(done * dt);
                f = w.dist.back();
                const auto a = w.fields.A[nt], ad = w.fields.Adot[nt];
                A.assign(a.begin(), a.end());
                Adot.assign(ad.begin(), ad.end());
                done += nt;
                result.windows.push_back(std::move(w));
                break;
            }
            if (halvings >= cfg.max_halvings || nt < 2) {
                result.window_start.push_back(done * dt);
                result.windows.push_back(std::move(w));
                result.failure = "window starting at t=" + std::to_string(done * dt) +
                                 " did not converge after " + std::to_string(halvings) +
                                 " halvings";
                return result;
            }
            result.abandoned.push_back({done * dt, nt, std::move(w.trace), w.sentinel_first_warning});
            nt /= 2;
            ++halvings;
        }
    }
    result.completed = true;
    return result;
}

/// a sum_{i=1}^{k-1} (b t)^i / i! + c (b t)^k / k!
inline double telescope_envelope(double a, double b, double c, double t, int k) {
    if (a < 0 || b < 0 || c < 0 || t < 0 || k < 0)
        throw std::invalid_argument("telescope_envelope: arguments must be nonnegative");
    const double bt = b * t;
    double term = 1.0;  // (bt)^i / i!
    double sum = 0.0;
    for (int i = 1; i < k; ++i) {
        term *= bt / i;
        sum += term;
    }
    const double last = k == 0 ? 1.0 : term * bt / k;
    return a * sum + c * last;
}

/// Smallest b with u_0 (b t)^k / k! >= u_k for every k in [1, k_fit].
inline double fit_telescope_rate(std::span<const double> u, double t, int k_fit) {
    double b = 0.0;
    double log_fact = 0.0;
    for (int k = 1; k <= k_fit && k < static_cast<int>(u.size()); ++k) {
        log_fact += std::log(double(k));
        if (u[k] <= 0.0 || u[0] <= 0.0) continue;
        b = std::max(b, std::exp((std::log(u[k] / u[0]) + log_fact) / k) / t);
    }
    return b;
}

}  // namespace lpvm
