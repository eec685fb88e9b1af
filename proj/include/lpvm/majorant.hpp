#pragma once

// Majorizing functions g(p) >= f0(x, p) and the a priori moment bounds
// they imply for characteristic solutions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lpvm/numerics.hpp"

namespace lpvm {

/// Continuous, positive, even g, nonincreasing in |p|.
class MajorizingFn {
public:
    explicit MajorizingFn(std::function<double(double)> g, std::vector<double> kinks = {})
        : g_(std::move(g)), kinks_(std::move(kinks)) {}

    double operator()(double p) const { return g_(std::abs(p)); }
    double at_zero() const { return g_(0.0); }

    /// Abscissae |p| > 0 where g may fail to be smooth.
    const std::vector<double>& kinks() const { return kinks_; }

    /// M_k = integral over R of |p|^k g(p), by composite Simpson on [0, R]
    /// split at the kinks, with R pushed out until the integrand is below
    /// 1e-18 of its scale.
    double moment(int k) const {
        if (k < 0) throw std::invalid_argument("MajorizingFn::moment: k must be >= 0");
        auto integrand = [&](double p) { return std::pow(p, k) * g_(p); };
        double R = 1.0;
        const double scale = std::max(at_zero(), 1e-300);
        while (integrand(R) > 1e-18 * scale || g_(R) > 1e-18 * scale) {
            R *= 2.0;
            if (R > 1e6) throw std::runtime_error("MajorizingFn::moment: moment does not converge");
        }
        std::vector<double> breaks{0.0};
        for (double kink : kinks_)
            if (kink > 0.0 && kink < R) breaks.push_back(kink);
        std::sort(breaks.begin(), breaks.end());
        breaks.push_back(R);
        double total = 0.0;
        const int n = 1 << 14;
        std::vector<double> terms(n + 1);
        for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
            const double a = breaks[b];
            const double h = (breaks[b + 1] - a) / n;
            for (int i = 0; i <= n; ++i) {
                const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                terms[i] = c * integrand(a + i * h);
            }
            total += h / 3.0 * pairwise_sum(terms);
        }
        return 2.0 * total;
    }

private:
    std::function<double(double)> g_;
    std::vector<double> kinks_;
};

inline MajorizingFn gaussian_majorant(double amplitude, double width = 1.0) {
    return MajorizingFn([=](double p) {
        return amplitude * std::exp(-0.5 * p * p / (width * width)) /
               (std::sqrt(2.0 * std::numbers::pi) * width);
    });
}

inline MajorizingFn exponential_majorant(double amplitude, double scale = 1.0) {
    return MajorizingFn([=](double p) { return amplitude * std::exp(-p / scale); });
}

/// g flattened to g(0) on |p| <= r and shifted outward by r beyond; bounds
/// any f0 <= g transported by a force with t * sup|F| <= r.
inline MajorizingFn g_plateau(const MajorizingFn& g, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("g_plateau: shift r must be >= 0");
    std::vector<double> kinks{r};
    for (double k : g.kinks()) kinks.push_back(k + r);
    return MajorizingFn([g, r](double p) { return p <= r ? g.at_zero() : g(p - r); },
                        std::move(kinks));
}

/// Sup-bound on the density: M0 + 2 g(0) t ||F||_t.
inline double density_bound(double M0, double g0, double t, double F_norm) {
    return M0 + 2.0 * g0 * t * F_norm;
}

/// R_k(M0 + Mk, r) = 2 g(0) r^{k+1}/(k+1) + (sum_{i=1..k} C(k,i) r^{k-i}) (M0 + Mk).
inline double moment_bound_Rk(int k, double M0, double Mk, double g0, double r) {
    if (k < 1) throw std::invalid_argument("moment_bound_Rk: k must be >= 1 (use density_bound)");
    double binom = 1.0;  // C(k, 0)
    double sum = 0.0;
    for (int i = 1; i <= k; ++i) {
        binom = binom * (k - i + 1) / i;
        sum += binom * std::pow(r, k - i);
    }
    return 2.0 * g0 / (k + 1) * std::pow(r, k + 1) + sum * (M0 + Mk);
}

}  // namespace lpvm
