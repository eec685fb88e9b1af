#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace lpvm {

/// Convex Casimir density sigma on [0, inf) with its derivatives and
/// gamma, the generalised inverse of -sigma' (extended by 0).
struct EntropyGenerator {
    std::string name;
    std::function<double(double)> sigma;
    std::function<double(double)> dsigma;
    std::function<double(double)> d2sigma;
    std::function<double(double)> gamma;
    /// gamma vanishes on [support_end, inf); +inf when it never does.
    double support_end = std::numeric_limits<double>::infinity();
};

/// sigma(s) = s ln s - s, gamma(y) = e^{-y}.
inline EntropyGenerator maxwellian_generator() {
    return EntropyGenerator{
        "maxwellian",
        [](double s) { return s > 0.0 ? s * std::log(s) - s : 0.0; },
        [](double s) {
            return s > 0.0 ? std::log(s) : -std::numeric_limits<double>::infinity();
        },
        [](double s) { return 1.0 / s; },
        [](double y) { return std::exp(-y); },
        std::numeric_limits<double>::infinity()};
}

/// sigma(s) = s^q / (q - 1), gamma(y) = ((q - 1) max(-y, 0) / q)^{1/(q-1)}.
inline EntropyGenerator power_generator(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("power_generator: q must be > 1");
    return EntropyGenerator{
        "power:" + std::to_string(q),
        [q](double s) { return std::pow(std::max(s, 0.0), q) / (q - 1.0); },
        [q](double s) { return q * std::pow(std::max(s, 0.0), q - 1.0) / (q - 1.0); },
        [q](double s) { return q * std::pow(s, q - 2.0); },
        [q](double y) { return y >= 0.0 ? 0.0 : std::pow((q - 1.0) * (-y) / q, 1.0 / (q - 1.0)); },
        0.0};
}

}  // namespace lpvm
