#pragma once

// Low-level numerical kernels shared by every module: fixed-order
// summation, periodic cubic interpolation, periodic finite differences
// and cumulative integration tables.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpvm {

/// Pairwise summation in a fixed order. Results depend only on the input
/// values, never on how the caller parallelised the work that produced them.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline int wrap_index(long j, int n) {
    long r = j % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

/// Position reduced to [0, L).
inline double wrap_position(double x, double L) {
    double r = std::fmod(x, L);
    if (r < 0) r += L;
    if (r >= L) r -= L;
    return r;
}

/// Lagrange weights for nodes {-1, 0, 1, 2} at offset theta in [0, 1).
inline std::array<double, 4> cubic_weights(double theta) {
    const double t = theta;
    return {-t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0};
}

/// Cubic Lagrange interpolation of L-periodic nodal data at an arbitrary x.
inline double periodic_cubic(std::span<const double> values, double dx, double x) {
    const int n = static_cast<int>(values.size());
    const double u = x / dx;
    const double fl = std::floor(u);
    const auto w = cubic_weights(u - fl);
    const long j = static_cast<long>(fl);
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += w[k] * values[wrap_index(j - 1 + k, n)];
    return s;
}

/// Quintic Lagrange interpolation (nodes j-2 .. j+3) of periodic data.
inline double periodic_quintic(std::span<const double> values, double dx, double x) {
    const int n = static_cast<int>(values.size());
    const double u = x / dx;
    const double fl = std::floor(u);
    const double t = u - fl;
    const long j = static_cast<long>(fl);
    double s = 0.0;
    for (int a = -2; a <= 3; ++a) {
        double w = 1.0;
        for (int b = -2; b <= 3; ++b)
            if (b != a) w *= (t - b) / double(a - b);
        s += w * values[wrap_index(j + a, n)];
    }
    return s;
}

/// Periodic 4th-order central first derivative.
inline std::vector<double> fd4_derivative(std::span<const double> f, double h) {
    const int n = static_cast<int>(f.size());
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j) {
        d[j] = (f[wrap_index(j - 2, n)] - 8.0 * f[wrap_index(j - 1, n)] +
                8.0 * f[wrap_index(j + 1, n)] - f[wrap_index(j + 2, n)]) /
               (12.0 * h);
    }
    return d;
}

/// Periodic 4th-order central second derivative.
inline std::vector<double> fd4_second_derivative(std::span<const double> f, double h) {
    const int n = static_cast<int>(f.size());
    std::vector<double> d(n);
    for (int j = 0; j < n; ++j) {
        d[j] = (-f[wrap_index(j - 2, n)] + 16.0 * f[wrap_index(j - 1, n)] - 30.0 * f[j] +
                16.0 * f[wrap_index(j + 1, n)] - f[wrap_index(j + 2, n)]) /
               (12.0 * h * h);
    }
    return d;
}

/// Periodic trapezoid integral over one period (equal weights).
inline double periodic_integral(std::span<const double> f, double h) {
    return h * pairwise_sum(f);
}

/// Antiderivative of periodic data split into a periodic part and a linear
/// drift: integral from 0 to y equals table(y) + mean * y, where the table is
/// built from cell integrals of the local cubic interpolant (O(h^4)).
class PeriodicAntiderivative {
public:
    PeriodicAntiderivative() = default;
    PeriodicAntiderivative(std::span<const double> f, double h) : h_(h), table_(f.size()) {
        const int n = static_cast<int>(f.size());
        mean_ = pairwise_sum(f) / n;
        double c = 0.0;
        for (int j = 0; j < n; ++j) {
            table_[j] = c;
            const double fm = f[wrap_index(j - 1, n)] - mean_;
            const double f0 = f[j] - mean_;
            const double f1 = f[wrap_index(j + 1, n)] - mean_;
            const double f2 = f[wrap_index(j + 2, n)] - mean_;
            c += h * (-fm + 13.0 * f0 + 13.0 * f1 - f2) / 24.0;
        }
    }

    /// Integral of f over [a, b] (any real a, b).
    double integral(double a, double b) const {
        return periodic_cubic(table_, h_, b) - periodic_cubic(table_, h_, a) + mean_ * (b - a);
    }

    double mean() const { return mean_; }

private:
    double h_ = 1.0;
    double mean_ = 0.0;
    std::vector<double> table_;
};

}  // namespace lpvm
