#pragma once

// Backward characteristics dX/ds = vhat(P), dP/ds = -F(s, X) and the
// semi-Lagrangian characteristic solution f(t, x, p) = f0(X(0), P(0)).

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lpvm/numerics.hpp"
#include "lpvm/phase_space.hpp"
#include "lpvm/space_time.hpp"

namespace lpvm {

/// E, A, dA/dt, dA/dx (and d2A/dx2) on every slice of a time window.
struct FieldHistory {
    PhaseGrid grid;
    int nt = 0;
    double dt = 0.0;
    SpaceTimeArray E, A, Adot, dxA, dxxA;

    static FieldHistory zeros(const PhaseGrid& grid, int nt, double dt) {
        const SpaceTimeArray z(nt + 1, grid.nx());
        return FieldHistory{grid, nt, dt, z, z, z, z, z};
    }

    double t_end() const { return nt * dt; }
    int slices() const { return nt + 1; }

    void validate() const {
        if (nt < 0 || !(dt > 0.0)) throw std::invalid_argument("FieldHistory: bad time window");
        for (const SpaceTimeArray* a : {&E, &A, &Adot, &dxA, &dxxA})
            if (a->slices() != nt + 1 || a->nx() != grid.nx())
                throw std::invalid_argument("FieldHistory: arrays must have shape (nt+1, nx)");
    }
};

/// max over slices of |D_x A - dxA| with the 4th-order periodic derivative.
inline double dxA_consistency(const FieldHistory& h) {
    double m = 0.0;
    for (int s = 0; s <= h.nt; ++s)
        m = std::max(m, max_abs_diff(fd4_derivative(h.A[s], h.grid.dx()), h.dxA[s]));
    return m;
}

/// A force evaluable at half-step times m * dt / 2, the only times an RK4
/// sweep with step dt visits.
template <class F>
concept HalfStepForce = requires(const F& f, int m, double x) {
    { f.at_half_index(m, x) } -> std::convertible_to<double>;
    { f.dt() } -> std::convertible_to<double>;
};

/// Sampled force F = E + A dxA with linear-in-time, periodic-cubic-in-x
/// interpolation.
class ForceSampler {
public:
    ForceSampler(PhaseGrid grid, double dt, SpaceTimeArray samples)
        : grid_(std::move(grid)), dt_(dt), F_(std::move(samples)) {
        if (F_.nx() != grid_.nx() || F_.slices() < 1)
            throw std::invalid_argument("ForceSampler: sample shape mismatch");
        const int nt = F_.slices() - 1;
        mid_ = SpaceTimeArray(std::max(nt, 1), grid_.nx());
        for (int s = 0; s < nt; ++s)
            for (int j = 0; j < grid_.nx(); ++j) mid_(s, j) = 0.5 * (F_(s, j) + F_(s + 1, j));
    }

    const PhaseGrid& grid() const { return grid_; }
    double dt() const { return dt_; }
    int nt() const { return F_.slices() - 1; }
    const SpaceTimeArray& samples() const { return F_; }

    double at_slice(int s, double x) const { return periodic_cubic(F_[s], grid_.dx(), x); }

    double at_half_index(int m, double x) const {
        if (m % 2 == 0) return at_slice(m / 2, x);
        return periodic_cubic(mid_[(m - 1) / 2], grid_.dx(), x);
    }

    double operator()(double t, double x) const {
        const int nt = this->nt();
        if (nt == 0) return at_slice(0, x);
        const double u = std::clamp(t / dt_, 0.0, double(nt));
        const int s = std::min(static_cast<int>(std::floor(u)), nt - 1);
        const double theta = u - s;
        if (theta == 0.0) return at_slice(s, x);
        return (1.0 - theta) * at_slice(s, x) + theta * at_slice(s + 1, x);
    }

private:
    PhaseGrid grid_;
    double dt_;
    SpaceTimeArray F_;
    SpaceTimeArray mid_;
};

/// Pointwise F[s][j] = E[s][j] + A[s][j] * dxA[s][j].
inline ForceSampler assemble_force(const FieldHistory& fields) {
    fields.validate();
    SpaceTimeArray F(fields.nt + 1, fields.grid.nx());
    for (int s = 0; s <= fields.nt; ++s)
        for (int j = 0; j < fields.grid.nx(); ++j)
            F(s, j) = fields.E(s, j) + fields.A(s, j) * fields.dxA(s, j);
    return ForceSampler(fields.grid, fields.dt, std::move(F));
}

/// Adapts a closed-form F(t, x) to the half-step interface.
template <class Fn>
class AnalyticForce {
public:
    AnalyticForce(Fn fn, double dt) : fn_(std::move(fn)), dt_(dt) {}
    double at_half_index(int m, double x) const { return fn_(0.5 * m * dt_, x); }
    double dt() const { return dt_; }
    double operator()(double t, double x) const { return fn_(t, x); }

private:
    Fn fn_;
    double dt_;
};

struct Foot {
    double x;          ///< X(0), not wrapped
    double x_wrapped;  ///< representative in [0, L)
    double p;          ///< P(0)
};

/// Classical RK4 from s = slice * dt back to s = 0, one step per slice.
template <HalfStepForce Force>
Foot trace_back(int slice, double x, double p, const Force& F, Model model, double L) {
    const double h = F.dt();
    double X = x, P = p;
    for (int s = slice; s > 0; --s) {
        const int m = 2 * s;
        const double k1x = vhat(P, model);
        const double k1p = -F.at_half_index(m, X);
        const double k2x = vhat(P - 0.5 * h * k1p, model);
        const double k2p = -F.at_half_index(m - 1, X - 0.5 * h * k1x);
        const double k3x = vhat(P - 0.5 * h * k2p, model);
        const double k3p = -F.at_half_index(m - 1, X - 0.5 * h * k2x);
        const double k4x = vhat(P - h * k3p, model);
        const double k4p = -F.at_half_index(m - 2, X - h * k3x);
        X -= h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        P -= h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    return Foot{X, wrap_position(X, L), P};
}

/// Forward RK4 from s = 0 to s = slice * dt; inverse of trace_back up to
/// truncation error.
template <HalfStepForce Force>
std::pair<double, double> trace_forward(int slice, double x0, double p0, const Force& F,
                                        Model model) {
    const double h = F.dt();
    double X = x0, P = p0;
    for (int s = 0; s < slice; ++s) {
        const int m = 2 * s;
        const double k1x = vhat(P, model);
        const double k1p = -F.at_half_index(m, X);
        const double k2x = vhat(P + 0.5 * h * k1p, model);
        const double k2p = -F.at_half_index(m + 1, X + 0.5 * h * k1x);
        const double k3x = vhat(P + 0.5 * h * k2p, model);
        const double k3p = -F.at_half_index(m + 1, X + 0.5 * h * k2x);
        const double k4x = vhat(P + h * k3p, model);
        const double k4p = -F.at_half_index(m + 2, X + h * k3x);
        X += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        P += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    return {X, P};
}

/// Periodic cubic in x times cubic in p, with f = 0 beyond |p| = p_max.
inline double interpolate_slice(const DistSlice& f, double x, double p) {
    const PhaseGrid& g = f.grid();
    if (p < -g.p_max() || p > g.p_max()) return 0.0;
    const double ux = x / g.dx();
    const double flx = std::floor(ux);
    const auto wx = cubic_weights(ux - flx);
    const long jx = static_cast<long>(flx);
    const double up = (p + g.p_max()) / g.dp();
    const double flp = std::floor(up);
    const auto wp = cubic_weights(up - flp);
    const int ip = static_cast<int>(flp);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        const int j = wrap_index(jx - 1 + a, g.nx());
        double col = 0.0;
        for (int b = 0; b < 4; ++b) {
            const int i = ip - 1 + b;
            if (i < 0 || i >= g.np()) continue;
            col += wp[b] * f(j, i);
        }
        s += wx[a] * col;
    }
    return s;
}

struct TransportResult {
    DistSlice f;
    double escaped_fraction = 0.0;  ///< feet beyond p_max where f0 was still significant
    bool support_flag = false;      ///< escaped_fraction exceeded 1e-6
};

/// f at `slice` as f0 evaluated at the backward characteristic feet.
template <HalfStepForce Force>
TransportResult transport_f0(const DistSlice& f0, const Force& F, int slice, Model model,
                             double support_tolerance = 1e-10) {
    const PhaseGrid& g = f0.grid();
    if (slice == 0) return TransportResult{f0, 0.0, false};
    const double cap = f0.max_value();
    if (cap == 0.0) return TransportResult{f0, 0.0, false};
    std::vector<double> out(g.size());
    long escaped = 0;
    for (int j = 0; j < g.nx(); ++j) {
        const double x = g.x(j);
        for (int i = 0; i < g.np(); ++i) {
            const Foot foot = trace_back(slice, x, g.p(i), F, model, g.L());
            if (std::abs(foot.p) > g.p_max()) {
                const double edge =
                    interpolate_slice(f0, foot.x_wrapped, std::copysign(g.p_max(), foot.p));
                if (edge > support_tolerance) ++escaped;
            }
            const double v = interpolate_slice(f0, foot.x_wrapped, foot.p);
            out[std::size_t(j) * g.np() + i] = std::clamp(v, 0.0, cap);
        }
    }
    const double fraction = double(escaped) / double(g.size());
    return TransportResult{DistSlice(g, std::move(out)), fraction, fraction > 1e-6};
}

struct DivergenceSample {
    double t, x, p;
};

struct DivergenceReport {
    std::vector<double> dx, dp;          ///< |X1(0) - X2(0)|, |P1(0) - P2(0)|
    std::vector<double> bound_x, bound_p;  ///< t * I(t) and I(t), I = int_0^t ||F1 - F2||_s ds
    double max_ratio = 0.0;
};

/// Running-sup of |F1 - F2| sampled on an 8x refined x-grid, then trapezoid
/// in time: an upper estimate of int_0^{slice dt} ||F1 - F2||_s ds.
inline std::vector<double> integrated_force_gap(const ForceSampler& F1, const ForceSampler& F2) {
    const PhaseGrid& g = F1.grid();
    const int nt = F1.nt();
    const int fine = 8 * g.nx();
    std::vector<double> running(nt + 1);
    double sup = 0.0;
    for (int s = 0; s <= nt; ++s) {
        for (int q = 0; q < fine; ++q) {
            const double x = q * g.L() / fine;
            sup = std::max(sup, std::abs(F1.at_slice(s, x) - F2.at_slice(s, x)));
        }
        running[s] = sup;
    }
    std::vector<double> integral(nt + 1, 0.0);
    for (int s = 1; s <= nt; ++s)
        integral[s] = integral[s - 1] + 0.5 * F1.dt() * (running[s - 1] + running[s]);
    return integral;
}

/// Compares feet under two forces against the Lipschitz-type bounds
/// |X1 - X2| <= t I(t) and |P1 - P2| <= I(t). Sample times are rounded to
/// the nearest slice.
inline DivergenceReport divergence_check(const ForceSampler& F1, const ForceSampler& F2,
                                         std::span<const DivergenceSample> samples, Model model) {
    if (!(F1.grid() == F2.grid()) || F1.nt() != F2.nt() || F1.dt() != F2.dt())
        throw std::invalid_argument("divergence_check: samplers must share grid and window");
    const auto gap = integrated_force_gap(F1, F2);
    DivergenceReport r;
    for (const auto& smp : samples) {
        const int slice = std::clamp(static_cast<int>(std::lround(smp.t / F1.dt())), 0, F1.nt());
        const double t = slice * F1.dt();
        const Foot a = trace_back(slice, smp.x, smp.p, F1, model, F1.grid().L());
        const Foot b = trace_back(slice, smp.x, smp.p, F2, model, F1.grid().L());
        r.dx.push_back(std::abs(a.x - b.x));
        r.dp.push_back(std::abs(a.p - b.p));
        r.bound_x.push_back(t * gap[slice]);
        r.bound_p.push_back(gap[slice]);
        auto ratio = [](double d, double b) { return d == 0.0 ? 0.0 : (b > 0.0 ? d / b : INFINITY); };
        r.max_ratio = std::max({r.max_ratio, ratio(r.dx.back(), r.bound_x.back()),
                                ratio(r.dp.back(), r.bound_p.back())});
    }
    return r;
}

}  // namespace lpvm
