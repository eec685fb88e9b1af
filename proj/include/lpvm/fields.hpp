#pragma once

// Longitudinal field (initial Gauss solve, Ampere update) and the
// transverse potential A from the d'Alembert/Duhamel representation of
// the forced 1D wave equation.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/numerics.hpp"
#include "lpvm/phase_space.hpp"
#include "lpvm/space_time.hpp"
#include "lpvm/spectral.hpp"

namespace lpvm {

/// Throws unless |int_0^L (n_ext - n)| <= tol * max(int n, int n_ext).
inline void check_neutrality(std::span<const double> n, std::span<const double> n_ext, double dx,
                             const char* who, double tol = 1e-8) {
    if (n.size() != n_ext.size())
        throw std::invalid_argument(std::string(who) + ": density arrays differ in size");
    std::vector<double> diff(n.size());
    for (std::size_t j = 0; j < n.size(); ++j) diff[j] = n_ext[j] - n[j];
    const double charge = periodic_integral(diff, dx);
    const double M = std::max(periodic_integral(n, dx), periodic_integral(n_ext, dx));
    if (std::abs(charge) > tol * std::max(M, 1e-300) && std::abs(charge) > 1e-300)
        throw std::invalid_argument(std::string(who) +
                                    ": charge neutrality violated (net charge " +
                                    std::to_string(charge) + ")");
}

/// Relative charge defect accepted for evolved states (transport is not
/// exactly mass conservative).
inline constexpr double kStateNeutralityTol = 1e-3;

/// E0(x) = E0(0) - int_0^x (n0 - n_ext), cumulative trapezoid, with E0(0)
/// fixed by the zero-mean gauge. A net charge within `tol` is removed
/// uniformly so that E0 stays periodic.
inline std::vector<double> poisson_E0(std::span<const double> n0, std::span<const double> n_ext,
                                      const PhaseGrid& grid, double tol = 1e-8) {
    check_neutrality(n0, n_ext, grid.dx(), "poisson_E0", tol);
    const int nx = grid.nx();
    std::vector<double> rho(nx);
    for (int j = 0; j < nx; ++j) rho[j] = n0[j] - n_ext[j];
    const double net = pairwise_sum(rho) / nx;
    for (double& r : rho) r -= net;
    std::vector<double> c(nx, 0.0);
    for (int j = 1; j < nx; ++j) c[j] = c[j - 1] + 0.5 * grid.dx() * (rho[j - 1] + rho[j]);
    const double mean = pairwise_sum(c) / nx;
    std::vector<double> E(nx);
    for (int j = 0; j < nx; ++j) E[j] = mean - c[j];
    return E;
}

/// E[s] = E0 + cumulative trapezoid in time of j.
inline SpaceTimeArray ampere_history(std::span<const double> E0, const SpaceTimeArray& j_hist,
                                     double dt) {
    if (static_cast<int>(E0.size()) != j_hist.nx())
        throw std::invalid_argument("ampere_history: shape mismatch");
    SpaceTimeArray E(j_hist.slices(), j_hist.nx());
    E.set_slice(0, E0);
    for (int s = 1; s < j_hist.slices(); ++s)
        for (int x = 0; x < j_hist.nx(); ++x)
            E(s, x) = E(s - 1, x) + 0.5 * dt * (j_hist(s - 1, x) + j_hist(s, x));
    return E;
}

struct WaveHistory {
    SpaceTimeArray A, Adot, dxA, dxxA;
};

/// Solution of A_tt - A_xx = S with A(0) = A0, A_t(0) = Adot0, and its
/// derivatives, each evaluated from its own Duhamel formula. Point values
/// off the grid use periodic quintic interpolation, inner integrals use
/// per-slice antiderivative tables, the outer time integral is trapezoid.
inline WaveHistory duhamel_history(std::span<const double> A0, std::span<const double> Adot0,
                                   const SpaceTimeArray& S, const PhaseGrid& grid, double dt) {
    const int nx = grid.nx();
    const double h = grid.dx();
    if (static_cast<int>(A0.size()) != nx || static_cast<int>(Adot0.size()) != nx ||
        S.nx() != nx)
        throw std::invalid_argument("duhamel_history: shape mismatch");
    const int slices = S.slices();

    const auto dA0 = fd4_derivative(A0, h);
    const auto ddA0 = fd4_second_derivative(A0, h);
    const auto dV0 = fd4_derivative(Adot0, h);
    const PeriodicAntiderivative V0(Adot0, h);
    std::vector<PeriodicAntiderivative> S_int;
    std::vector<std::vector<double>> dS;
    S_int.reserve(slices);
    dS.reserve(slices);
    for (int s = 0; s < slices; ++s) {
        S_int.emplace_back(S[s], h);
        dS.push_back(fd4_derivative(S[s], h));
    }

    auto at = [h](std::span<const double> v, double x) { return periodic_quintic(v, h, x); };

    WaveHistory w{SpaceTimeArray(slices, nx), SpaceTimeArray(slices, nx),
                  SpaceTimeArray(slices, nx), SpaceTimeArray(slices, nx)};
    for (int m = 0; m < slices; ++m) {
        const double t = m * dt;
        for (int j = 0; j < nx; ++j) {
            const double x = grid.x(j);
            double a = at(A0, x + t) + at(A0, x - t) + V0.integral(x - t, x + t);
            double ad = at(dA0, x + t) - at(dA0, x - t) + at(Adot0, x + t) + at(Adot0, x - t);
            double ax = at(dA0, x + t) + at(dA0, x - t) + at(Adot0, x + t) - at(Adot0, x - t);
            double axx = at(ddA0, x + t) + at(ddA0, x - t) + at(dV0, x + t) - at(dV0, x - t);
            double sa = 0.0, sad = 0.0, sax = 0.0, saxx = 0.0;
            for (int s = 0; m > 0 && s <= m; ++s) {
                const double wgt = (s == 0 || s == m) ? 0.5 * dt : dt;
                const double back = x + (s - m) * dt;   // x + s - t
                const double ahead = x + (m - s) * dt;  // x + t - s
                sa += wgt * S_int[s].integral(back, ahead);
                const double Sb = at(S[s], back), Sa = at(S[s], ahead);
                sad += wgt * (Sb + Sa);
                sax += wgt * (Sa - Sb);
                saxx += wgt * (at(dS[s], ahead) - at(dS[s], back));
            }
            w.A(m, j) = 0.5 * (a + sa);
            w.Adot(m, j) = 0.5 * (ad + sad);
            w.dxA(m, j) = 0.5 * (ax + sax);
            w.dxxA(m, j) = 0.5 * (axx + saxx);
        }
    }
    return w;
}

/// Independent explicit leapfrog solution of A_tt - A_xx = S (second-order
/// central differences), periodic in x.
inline SpaceTimeArray leapfrog_wave_oracle(std::span<const double> A0,
                                           std::span<const double> Adot0,
                                           const SpaceTimeArray& S, const PhaseGrid& grid,
                                           double dt) {
    const int nx = grid.nx();
    const double h = grid.dx();
    if (dt > h) throw std::invalid_argument("leapfrog_wave_oracle: CFL violated (dt > dx)");
    const double c2 = dt * dt / (h * h);
    auto lap = [&](std::span<const double> u, int j) {
        return u[wrap_index(j - 1, nx)] - 2.0 * u[j] + u[wrap_index(j + 1, nx)];
    };
    SpaceTimeArray A(S.slices(), nx);
    A.set_slice(0, A0);
    if (S.slices() == 1) return A;
    for (int j = 0; j < nx; ++j)
        A(1, j) = A0[j] + dt * Adot0[j] + 0.5 * c2 * lap(A0, j) + 0.5 * dt * dt * S(0, j);
    for (int s = 1; s + 1 < S.slices(); ++s)
        for (int j = 0; j < nx; ++j)
            A(s + 1, j) = 2.0 * A(s, j) - A(s - 1, j) + c2 * lap(A[s], j) + dt * dt * S(s, j);
    return A;
}

/// max_j |D_x E - (n_ext - n)| with the spectral derivative.
inline double gauss_residual(std::span<const double> E, std::span<const double> n,
                             std::span<const double> n_ext, const PhaseGrid& grid) {
    const auto dE = spectral_derivative(E, grid.L());
    double m = 0.0;
    for (int j = 0; j < grid.nx(); ++j) m = std::max(m, std::abs(dE[j] - (n_ext[j] - n[j])));
    return m;
}

}  // namespace lpvm
