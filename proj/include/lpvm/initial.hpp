#pragma once

// Built-in initial distributions, background densities and wave profiles.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpvm/config.hpp"
#include "lpvm/majorant.hpp"
#include "lpvm/phase_space.hpp"

namespace lpvm {

struct InitialData {
    DistSlice f0;
    MajorizingFn g;  ///< f0(x, p) <= g(p)
    double M0 = 0.0, M1 = 0.0, M2 = 0.0;
};

inline double unit_gaussian(double p) { return std::exp(-0.5 * p * p) / std::sqrt(2.0 * std::numbers::pi); }

/// Smooth periodic f0 from one of the built-in families. The momentum
/// profile is the unit Gaussian for both closures.
inline InitialData builtin_f0(const FunctionSpec& spec, const PhaseGrid& grid) {
    validate_f0_spec(spec);
    const double k0 = 2.0 * std::numbers::pi / grid.L();
    const auto& a = spec.args;
    if (spec.name == "equilibrium")
        throw std::invalid_argument("builtin_f0: 'equilibrium' is built by the equilibrium solver");
    if (spec.name == "zero") {
        MajorizingFn g([](double) { return 0.0; });
        return InitialData{DistSlice(grid), g, 0.0, 0.0, 0.0};
    }
    const double nbar = a[0];
    if (!(nbar > 0.0)) throw std::invalid_argument("builtin_f0: nbar must be positive");
    double eps = 0.0, v0 = 0.0;
    int mode = 0;
    if (spec.name == "modulated_maxwellian") {
        eps = a[1];
        mode = static_cast<int>(a[2]);
    } else if (spec.name == "two_stream") {
        v0 = a[1];
        eps = a[2];
        mode = static_cast<int>(a[3]);
        if (v0 < 0.0) throw std::invalid_argument("builtin_f0: two_stream v0 must be >= 0");
    }
    if (std::abs(eps) >= 1.0)
        throw std::invalid_argument("builtin_f0: |eps| >= 1 makes f0 negative");
    const bool streams = spec.name == "two_stream";
    DistSlice f = DistSlice::sample(grid, [&](double x, double p) {
        const double shape = 1.0 + eps * std::cos(k0 * mode * x);
        const double prof = streams ? 0.5 * (unit_gaussian(p - v0) + unit_gaussian(p + v0))
                                    : unit_gaussian(p);
        return nbar * shape * prof;
    });
    const double amp = nbar * (1.0 + std::abs(eps));
    MajorizingFn g = gaussian_majorant(amp);
    if (streams && v0 > 0.0) g = g_plateau(g, v0);
    return InitialData{std::move(f), g, g.moment(0), g.moment(1), g.moment(2)};
}

inline std::vector<double> builtin_n_ext(const FunctionSpec& spec, const PhaseGrid& grid) {
    validate_next_spec(spec);
    std::vector<double> n(grid.nx(), 0.0);
    if (spec.name == "zero") return n;
    const double k0 = 2.0 * std::numbers::pi / grid.L();
    for (int j = 0; j < grid.nx(); ++j) {
        n[j] = spec.args[0];
        if (spec.name == "cosine")
            n[j] *= 1.0 + spec.args[1] * std::cos(k0 * spec.args[2] * grid.x(j));
    }
    return n;
}

/// amp * sin(2 pi mode x / L) or the cosine analogue.
inline std::vector<double> wave_profile(const FunctionSpec& spec, const PhaseGrid& grid) {
    validate_wave_spec(spec);
    std::vector<double> w(grid.nx(), 0.0);
    if (spec.name == "zero") return w;
    const double k = 2.0 * std::numbers::pi * spec.args[1] / grid.L();
    for (int j = 0; j < grid.nx(); ++j)
        w[j] = spec.args[0] * (spec.name == "sin" ? std::sin(k * grid.x(j)) : std::cos(k * grid.x(j)));
    return w;
}

}  // namespace lpvm
