#pragma once

// Conserved functionals, residuals and distances evaluated on stored
// states. All integrals are trapezoid rules (periodic in x) summed in a
// fixed order.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/entropy.hpp"
#include "lpvm/fields.hpp"
#include "lpvm/numerics.hpp"
#include "lpvm/phase_space.hpp"
#include "lpvm/space_time.hpp"
#include "lpvm/spectral.hpp"

namespace lpvm {

struct Potential {
    std::vector<double> Phi;
    bool normalized = true;  ///< false when int Phi n_ext = 0 could not be imposed
};

/// Periodic Phi with -Phi'' = n_ext - n, normalised by int Phi n_ext = 0.
/// A net charge within the tolerance is dropped (mean mode). Falls back to
/// zero-mean Phi (normalized = false) when n_ext integrates to zero.
inline Potential solve_potential(std::span<const double> n, std::span<const double> n_ext,
                                 const PhaseGrid& grid, double neutrality_tol = 1e-8) {
    check_neutrality(n, n_ext, grid.dx(), "solve_potential", neutrality_tol);
    std::vector<double> rhs(n.size());
    for (std::size_t j = 0; j < n.size(); ++j) rhs[j] = n[j] - n_ext[j];
    PeriodicSpectrum spec(grid.nx(), grid.L());
    Potential out{spec.inverse_laplacian(rhs), true};
    const double ext_mass = pairwise_sum(n_ext);
    if (std::abs(ext_mass) <= 1e-300) {
        out.normalized = false;
        return out;
    }
    std::vector<double> prod(n.size());
    for (std::size_t j = 0; j < n.size(); ++j) prod[j] = out.Phi[j] * n_ext[j];
    const double shift = -pairwise_sum(prod) / ext_mass;
    for (double& v : out.Phi) v += shift;
    return out;
}

/// 1/2 int |D_x Phi|^2 with the spectral derivative.
inline double field_energy(std::span<const double> Phi, const PhaseGrid& grid) {
    const auto d = spectral_derivative(Phi, grid.L());
    std::vector<double> sq(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) sq[j] = d[j] * d[j];
    return 0.5 * periodic_integral(sq, grid.dx());
}

/// 1/2 int (n A^2 + dxA^2 + Adot^2) dx.
inline double transversal_energy(const DistSlice& f, std::span<const double> A,
                                 std::span<const double> Adot, std::span<const double> dxA) {
    const auto n = density(f);
    std::vector<double> e(n.size());
    for (std::size_t j = 0; j < n.size(); ++j)
        e[j] = n[j] * A[j] * A[j] + dxA[j] * dxA[j] + Adot[j] * Adot[j];
    return 0.5 * periodic_integral(e, f.grid().dx());
}

/// int int g(x_j, p_i) f dp dx with the phase-space trapezoid rule.
template <class Weight>
double phase_integral(const DistSlice& f, Weight&& w) {
    const PhaseGrid& g = f.grid();
    std::vector<double> cols(g.nx());
    for (int j = 0; j < g.nx(); ++j)
        cols[j] = p_quadrature(g, [&](int i) { return w(j, i) * f(j, i); });
    return periodic_integral(cols, g.dx());
}

inline double kinetic_energy(const DistSlice& f, Model model) {
    std::vector<double> k(f.grid().np());
    for (int i = 0; i < f.grid().np(); ++i) k[i] = kappa(f.grid().p(i), model);
    return phase_integral(f, [&](int, int i) { return k[i]; });
}

struct LongitudinalEnergy {
    double form1 = 0.0;  ///< int int (kappa - Phi/2) f
    double form2 = 0.0;  ///< int int kappa f + 1/2 int |Phi'|^2
    bool normalized = true;
    std::vector<double> Phi;
};

inline LongitudinalEnergy longitudinal_energy(const DistSlice& f, std::span<const double> n_ext,
                                              Model model) {
    const PhaseGrid& g = f.grid();
    const auto n = density(f);
    Potential pot = solve_potential(n, n_ext, g, kStateNeutralityTol);
    const double kin = kinetic_energy(f, model);
    std::vector<double> phin(n.size());
    for (std::size_t j = 0; j < n.size(); ++j) phin[j] = pot.Phi[j] * n[j];
    LongitudinalEnergy out;
    out.form1 = kin - 0.5 * periodic_integral(phin, g.dx());
    out.form2 = kin + field_energy(pot.Phi, g);
    out.normalized = pot.normalized;
    out.Phi = std::move(pot.Phi);
    return out;
}

/// W = WT + WL (field-energy form).
inline double total_energy(const DistSlice& f, std::span<const double> A,
                           std::span<const double> Adot, std::span<const double> dxA,
                           std::span<const double> n_ext, Model model) {
    return transversal_energy(f, A, Adot, dxA) + longitudinal_energy(f, n_ext, model).form2;
}

/// Fully relativistic energy functional of a stored state (no FR dynamics).
inline double fr_energy(const DistSlice& f, std::span<const double> A,
                        std::span<const double> Adot, std::span<const double> dxA,
                        std::span<const double> n_ext) {
    const PhaseGrid& g = f.grid();
    const Potential pot = solve_potential(density(f), n_ext, g, kStateNeutralityTol);
    const double particles = phase_integral(f, [&](int j, int i) {
        const double p = g.p(i);
        return std::sqrt(1.0 + p * p + A[j] * A[j]) - 0.5 * pot.Phi[j];
    });
    std::vector<double> wave(g.nx());
    for (int j = 0; j < g.nx(); ++j) wave[j] = Adot[j] * Adot[j] + dxA[j] * dxA[j];
    return particles + 0.5 * periodic_integral(wave, g.dx());
}

/// S_sigma[f] = int int sigma(f) over the truncated phase box.
inline double entropy(const DistSlice& f, const EntropyGenerator& gen) {
    const PhaseGrid& g = f.grid();
    std::vector<double> cols(g.nx());
    for (int j = 0; j < g.nx(); ++j)
        cols[j] = p_quadrature(g, [&](int i) { return gen.sigma(f(j, i)); });
    return periodic_integral(cols, g.dx());
}

/// Bregman divergence of sigma between f and f_ref plus the field term
/// 1/2 int |D_x Phi[f - f_ref]|^2.
inline double relative_entropy(const DistSlice& f, const DistSlice& f_ref,
                               const EntropyGenerator& gen) {
    if (!(f.grid() == f_ref.grid()))
        throw std::invalid_argument("relative_entropy: grids differ");
    const PhaseGrid& g = f.grid();
    std::vector<double> cols(g.nx());
    for (int j = 0; j < g.nx(); ++j) {
        cols[j] = p_quadrature(g, [&](int i) {
            const double a = f(j, i), b = f_ref(j, i);
            if (b <= 0.0) {
                if (a <= 0.0) return 0.0;
                if (!std::isfinite(gen.dsigma(0.0)))
                    throw std::invalid_argument(
                        "relative_entropy: reference vanishes where f > 0 (sigma' singular)");
                return gen.sigma(a) - gen.sigma(0.0) - gen.dsigma(0.0) * a;
            }
            return gen.sigma(a) - gen.sigma(b) - gen.dsigma(b) * (a - b);
        });
    }
    const double bregman = periodic_integral(cols, g.dx());
    const Potential dphi = solve_potential(density(f), density(f_ref), g, kStateNeutralityTol);
    return bregman + field_energy(dphi.Phi, g);
}

/// Per-slice max_x |dn/dt + D_x j|: centred in time at interior slices,
/// one-sided at the two ends.
inline std::vector<double> continuity_residual(const SpaceTimeArray& n_hist,
                                               const SpaceTimeArray& j_hist, double dt,
                                               const PhaseGrid& grid) {
    const int S = n_hist.slices();
    std::vector<double> out(S, 0.0);
    if (S < 2) return out;
    for (int s = 0; s < S; ++s) {
        const auto dj = fd4_derivative(j_hist[s], grid.dx());
        double m = 0.0;
        for (int x = 0; x < grid.nx(); ++x) {
            double dn;
            if (s == 0) dn = (n_hist(1, x) - n_hist(0, x)) / dt;
            else if (s == S - 1) dn = (n_hist(s, x) - n_hist(s - 1, x)) / dt;
            else dn = (n_hist(s + 1, x) - n_hist(s - 1, x)) / (2.0 * dt);
            m = std::max(m, std::abs(dn + dj[x]));
        }
        out[s] = m;
    }
    return out;
}

/// Largest residual over interior slices (ends excluded).
inline double interior_max(std::span<const double> per_slice) {
    double m = 0.0;
    for (std::size_t s = 1; s + 1 < per_slice.size(); ++s) m = std::max(m, per_slice[s]);
    return m;
}

/// (int int |f - f_ref|^p)^{1/p} for p in {1, 2}.
inline double lp_distance(const DistSlice& f, const DistSlice& f_ref, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("lp_distance: p must be 1 or 2");
    if (!(f.grid() == f_ref.grid())) throw std::invalid_argument("lp_distance: grids differ");
    const PhaseGrid& g = f.grid();
    std::vector<double> cols(g.nx());
    for (int j = 0; j < g.nx(); ++j)
        cols[j] = p_quadrature(g, [&](int i) {
            const double d = std::abs(f(j, i) - f_ref(j, i));
            return p == 1 ? d : d * d;
        });
    const double I = periodic_integral(cols, g.dx());
    return p == 1 ? I : std::sqrt(I);
}

/// H^1 distance: sqrt(||u - v||^2 + ||D_x (u - v)||^2) over one period.
inline double h1_distance(std::span<const double> u, std::span<const double> v,
                          const PhaseGrid& grid) {
    std::vector<double> d(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) d[j] = u[j] - v[j];
    const auto dd = spectral_derivative(d, grid.L());
    std::vector<double> sq(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) sq[j] = d[j] * d[j] + dd[j] * dd[j];
    return std::sqrt(periodic_integral(sq, grid.dx()));
}

struct Reference {
    const DistSlice* f = nullptr;
    std::vector<double> Phi;
};

/// One row of diagnostics.csv; optional fields are empty without a
/// reference equilibrium.
struct DiagnosticsRow {
    double t = 0.0;
    double mass = 0.0;
    double WT = 0.0;
    double WL_form1 = 0.0;
    double WL_form2 = 0.0;
    double W_total = 0.0;
    double S_sigma = 0.0;
    double KT_sigma = 0.0;
    std::optional<double> relative_entropy;
    double gauss_residual = 0.0;
    double continuity_residual = 0.0;
    double sup_dxxA = 0.0;
    std::optional<double> l1_dist, l2_dist, h1_phi_dist;
};

struct SliceState {
    double t;
    const DistSlice& f;
    std::span<const double> E, A, Adot, dxA, dxxA;
};

inline DiagnosticsRow evaluate_row(const SliceState& st, std::span<const double> n_ext,
                                   Model model, const EntropyGenerator& gen,
                                   const Reference* ref = nullptr) {
    const PhaseGrid& g = st.f.grid();
    DiagnosticsRow r;
    r.t = st.t;
    const auto n = density(st.f);
    r.mass = periodic_integral(n, g.dx());
    r.WT = transversal_energy(st.f, st.A, st.Adot, st.dxA);
    const LongitudinalEnergy wl = longitudinal_energy(st.f, n_ext, model);
    r.WL_form1 = wl.form1;
    r.WL_form2 = wl.form2;
    r.W_total = r.WT + r.WL_form2;
    r.S_sigma = entropy(st.f, gen);
    r.KT_sigma = r.WL_form2 + r.S_sigma + r.WT;
    r.gauss_residual = gauss_residual(st.E, n, n_ext, g);
    r.sup_dxxA = max_abs(st.dxxA);
    if (ref && ref->f) {
        r.relative_entropy = relative_entropy(st.f, *ref->f, gen);
        r.l1_dist = lp_distance(st.f, *ref->f, 1);
        r.l2_dist = lp_distance(st.f, *ref->f, 2);
        r.h1_phi_dist = h1_distance(wl.Phi, ref->Phi, g);
    }
    return r;
}

}  // namespace lpvm
